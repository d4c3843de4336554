"""SIMO Rayleigh channel with estimation error, noise and selection combining.

Shapes follow a leading batch convention: a single cluster is ``(L, N)``
and a batch of ``B`` clusters is ``(B, L, N)``. Combined quantities drop
the antenna axis.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import SystemConfig
from .kernels import KERNELS


def complex_normal(rng: np.random.Generator, shape, variance: float) -> np.ndarray:
    """CN(0, variance) samples from pairs of independent real normals."""
    shape = tuple(shape) if isinstance(shape, (tuple, list)) else (int(shape),)
    raw = rng.standard_normal(shape + (2,))
    raw *= np.sqrt(variance / 2.0)
    return raw.view(np.complex128)[..., 0]


@dataclass(frozen=True)
class ChannelRealization:
    hhat: np.ndarray
    error: np.ndarray

    @property
    def h(self) -> np.ndarray:
        return self.hhat + self.error


@dataclass(frozen=True)
class CombinedObservation:
    branch: np.ndarray
    y: np.ndarray
    hhat: np.ndarray
    h: np.ndarray | None = None

    @property
    def est_gain(self) -> np.ndarray:
        return np.abs(self.hhat) ** 2

    @property
    def true_gain(self) -> np.ndarray:
        if self.h is None:
            raise ValueError("true channel was not carried through combining")
        return np.abs(self.h) ** 2


def sample_channel(rng: np.random.Generator, cfg: SystemConfig, eps2: float, batch: int | None = None):
    """Draw the estimate first, then the independent error; ``h = hhat + error``."""
    if not 0.0 <= eps2 < 1.0:
        raise ValueError(f"error variance must lie in [0, 1), got {eps2}")
    shape = (cfg.l, cfg.n) if batch is None else (batch, cfg.l, cfg.n)
    hhat = complex_normal(rng, shape, 1.0 - eps2)
    if eps2 > 0.0:
        error = complex_normal(rng, shape, eps2)
    else:
        error = np.zeros(shape, dtype=complex)
    return ChannelRealization(hhat, error)


def propagate(x: np.ndarray, ch: ChannelRealization, rng: np.random.Generator, n0: float) -> np.ndarray:
    """Per-antenna observations ``y_l = h_l * x + n_l``; ``x`` broadcasts over antennas.

    ``n0 = 0`` gives the noiseless output without consuming random draws.
    """
    if n0 < 0:
        raise ValueError(f"noise power must be non-negative, got {n0}")
    x = np.asarray(x)
    faded = ch.h * x[..., None, :]
    if n0 == 0:
        return faded
    return faded + complex_normal(rng, faded.shape, n0)


def select_combine(y_branches: np.ndarray, hhat_branches: np.ndarray, h_branches=None) -> CombinedObservation:
    """Keep, per subcarrier, the branch with the largest estimated gain."""
    single = y_branches.ndim == 2
    if single:
        y_branches = y_branches[None]
        hhat_branches = hhat_branches[None]
        h_branches = None if h_branches is None else h_branches[None]
    branch = KERNELS.select_branch(np.ascontiguousarray(hhat_branches))
    pick = branch[:, None, :]
    y = np.take_along_axis(y_branches, pick, axis=1)[:, 0]
    hhat = np.take_along_axis(hhat_branches, pick, axis=1)[:, 0]
    h = None if h_branches is None else np.take_along_axis(h_branches, pick, axis=1)[:, 0]
    if single:
        return CombinedObservation(branch[0], y[0], hhat[0], None if h is None else h[0])
    return CombinedObservation(branch, y, hhat, h)
