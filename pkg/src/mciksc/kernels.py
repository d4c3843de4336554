"""Per-cluster inner loops: branch selection and the two detectors.

Every kernel exists twice, as a numba ``@njit`` loop and as a vectorised
numpy routine with identical semantics (including tie-breaking). The
active implementation is chosen at import time: numba when it imports and
``MCIKSC_DISABLE_NUMBA`` is unset or ``0``, numpy otherwise. Both sets
stay addressable through :data:`NUMPY_KERNELS` and :func:`numba_kernels`
for testing and benchmarking.

Array conventions (batch of ``B`` clusters, ``L`` branches, ``N``
subcarriers, ``K`` active, ``M`` PSK points, ``C`` codebook entries):

* ``y_branches, hhat_branches``: complex ``(B, L, N)``
* ``y, hhat``: complex ``(B, N)`` after combining
* ``sets``: int ``(C, K)``, zero-based ascending subcarrier indices
* ``points``: complex ``(M,)``, constellation ordered by symbol index
"""

from __future__ import annotations

import logging
import os
from types import SimpleNamespace

import numpy as np

log = logging.getLogger(__name__)

ENV_FLAG = "MCIKSC_DISABLE_NUMBA"


# --------------------------------------------------------------------------
# numpy fallback

def _np_select_branch(hhat_branches):
    gains = hhat_branches.real ** 2 + hhat_branches.imag ** 2
    # argmax returns the first maximum: lowest antenna index wins ties
    return np.argmax(gains, axis=1)


def _np_symbol_table(y, hhat, points):
    diff = y[:, :, None] - hhat[:, :, None] * points[None, None, :]
    metric = diff.real ** 2 + diff.imag ** 2
    best = np.argmin(metric, axis=2)
    best_metric = np.take_along_axis(metric, best[:, :, None], axis=2)[:, :, 0]
    return best, best_metric


def _np_ml_detect(y, hhat, points, sets):
    n = y.shape[1]
    best, best_metric = _np_symbol_table(y, hhat, points)
    idle = y.real ** 2 + y.imag ** 2
    mask = np.zeros((sets.shape[0], n), dtype=bool)
    np.put_along_axis(mask, sets, True, axis=1)
    per_candidate = np.where(mask[None, :, :], best_metric[:, None, :], idle[:, None, :])
    cost = np.zeros(per_candidate.shape[:2])
    # accumulate in ascending subcarrier order to match the compiled kernel
    for a in range(n):
        cost += per_candidate[:, :, a]
    rank = np.argmin(cost, axis=1)
    chosen = sets[rank]
    symbols = np.take_along_axis(best, chosen, axis=1)
    return rank, symbols


def _np_gd_detect(y, hhat, points, k):
    energy = y.real ** 2 + y.imag ** 2
    # stable sort on negated energy keeps the lower index first among equals
    order = np.argsort(-energy, axis=1, kind="stable")
    active = np.sort(order[:, :k], axis=1)
    ya = np.take_along_axis(y, active, axis=1)
    ha = np.take_along_axis(hhat, active, axis=1)
    symbols, _ = _np_symbol_table(ya, ha, points)
    return active, symbols


NUMPY_KERNELS = SimpleNamespace(
    name="numpy",
    select_branch=_np_select_branch,
    ml_detect=_np_ml_detect,
    gd_detect=_np_gd_detect,
)


# --------------------------------------------------------------------------
# numba

_NUMBA_KERNELS = None


def _build_numba_kernels():
    from numba import njit

    logging.getLogger("numba").setLevel(logging.WARNING)

    @njit(cache=True, nogil=True)
    def select_branch(hhat_branches):
        b, nl, n = hhat_branches.shape
        out = np.zeros((b, n), dtype=np.int64)
        for i in range(b):
            for a in range(n):
                h = hhat_branches[i, 0, a]
                best = h.real * h.real + h.imag * h.imag
                arg = 0
                for l in range(1, nl):
                    h = hhat_branches[i, l, a]
                    g = h.real * h.real + h.imag * h.imag
                    if g > best:
                        best = g
                        arg = l
                out[i, a] = arg
        return out

    @njit(inline="always")
    def _nearest(yv, hv, points):
        d = yv - hv * points[0]
        best = d.real * d.real + d.imag * d.imag
        arg = 0
        for s in range(1, points.shape[0]):
            d = yv - hv * points[s]
            v = d.real * d.real + d.imag * d.imag
            if v < best:
                best = v
                arg = s
        return arg, best

    @njit(cache=True, nogil=True)
    def ml_detect(y, hhat, points, sets):
        b, n = y.shape
        c, k = sets.shape
        rank = np.zeros(b, dtype=np.int64)
        symbols = np.zeros((b, k), dtype=np.int64)
        best_sym = np.zeros(n, dtype=np.int64)
        best_metric = np.zeros(n)
        idle = np.zeros(n)
        active = np.zeros(n, dtype=np.bool_)
        for i in range(b):
            for a in range(n):
                s, v = _nearest(y[i, a], hhat[i, a], points)
                best_sym[a] = s
                best_metric[a] = v
                yv = y[i, a]
                idle[a] = yv.real * yv.real + yv.imag * yv.imag
            best_cost = np.inf
            best_rank = 0
            for r in range(c):
                active[:] = False
                for j in range(k):
                    active[sets[r, j]] = True
                cost = 0.0
                for a in range(n):
                    if active[a]:
                        cost += best_metric[a]
                    else:
                        cost += idle[a]
                if cost < best_cost:
                    best_cost = cost
                    best_rank = r
            rank[i] = best_rank
            for j in range(k):
                symbols[i, j] = best_sym[sets[best_rank, j]]
        return rank, symbols

    @njit(cache=True, nogil=True)
    def gd_detect(y, hhat, points, k):
        b, n = y.shape
        active = np.zeros((b, k), dtype=np.int64)
        symbols = np.zeros((b, k), dtype=np.int64)
        energy = np.zeros(n)
        taken = np.zeros(n, dtype=np.bool_)
        for i in range(b):
            for a in range(n):
                yv = y[i, a]
                energy[a] = yv.real * yv.real + yv.imag * yv.imag
            taken[:] = False
            for j in range(k):
                arg = -1
                best = -1.0
                for a in range(n):
                    if not taken[a] and energy[a] > best:
                        best = energy[a]
                        arg = a
                taken[arg] = True
            j = 0
            for a in range(n):
                if taken[a]:
                    active[i, j] = a
                    symbols[i, j], _ = _nearest(y[i, a], hhat[i, a], points)
                    j += 1
        return active, symbols

    return SimpleNamespace(
        name="numba",
        select_branch=select_branch,
        ml_detect=ml_detect,
        gd_detect=gd_detect,
    )


def numba_kernels():
    """Compiled kernels, or ``None`` when numba is unavailable."""
    global _NUMBA_KERNELS
    if _NUMBA_KERNELS is None:
        try:
            _NUMBA_KERNELS = _build_numba_kernels()
        except ImportError:
            log.info("numba not importable; using numpy kernels")
            _NUMBA_KERNELS = False
    return _NUMBA_KERNELS or None


def _choose():
    if os.environ.get(ENV_FLAG, "0").strip().lower() not in ("", "0", "false", "no"):
        return NUMPY_KERNELS
    return numba_kernels() or NUMPY_KERNELS


KERNELS = _choose()
BACKEND = KERNELS.name
