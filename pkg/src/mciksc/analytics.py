"""Closed-form error probabilities for MCIK-OFDM with selection combining.

All products over the antenna index ``l = 1..L`` are evaluated as
exponentiated log-sums so that large diversity orders (``L`` up to a few
hundred) stay finite. The expressions are approximations and are reported
unclamped; at very low SNR some of them exceed one.

SNR arguments named ``gbar`` are the linear average SNR per *active*
subcarrier; ``gamma0`` is the linear per-subcarrier SNR ``Es/N0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq
from scipy.special import gammaln

from .config import SystemConfig, derive, epsilon_for
from .detectors import complexity


def _check(eps2, L):
    if not 0.0 <= eps2 < 1.0:
        raise ValueError(f"error variance must lie in [0, 1), got {eps2}")
    if L < 1:
        raise ValueError(f"need L >= 1, got {L}")


def _log_prod(L: int, x):
    """log of prod_{l=1..L} (l + x), broadcasting over ``x``."""
    x = np.asarray(x, dtype=float)
    return np.log(np.arange(1, L + 1) + x[..., None]).sum(axis=-1)


def _log_fact(L: int) -> float:
    return float(gammaln(L + 1))


def _exp(x: float) -> float:
    """``exp`` that saturates to ``inf`` (huge power-law coefficients at large L)."""
    return math.exp(x) if x < 709.0 else math.inf


def _out(value):
    return float(value) if np.ndim(value) == 0 else value


# ------------------------------------------------------------ averaged probabilities

def avg_sep_psk(gbar, eps2: float, L: int, M: int):
    """Average M-PSK symbol error probability after L-branch selection."""
    _check(eps2, L)
    gbar = np.asarray(gbar, dtype=float)
    if np.any(gbar < 0):
        raise ValueError("SNR must be non-negative")
    rho = math.sin(math.pi / M) ** 2
    xi = 1 if M == 2 else 2
    eff = (1.0 - eps2) * rho * gbar / (1.0 + eps2 * gbar)
    lf = _log_fact(L)
    value = xi / 12.0 * (np.exp(lf - _log_prod(L, eff)) + 3.0 * np.exp(lf - _log_prod(L, 4.0 * eff / 3.0)))
    return _out(value)


def avg_iep_ml(gbar, eps2: float, L: int, N: int, K: int):
    """Average index error probability of the ML detector."""
    _check(eps2, L)
    if not 1 <= K <= N:
        raise ValueError(f"need 1 <= K <= N, got K={K}, N={N}")
    gbar = np.asarray(gbar, dtype=float)
    b1 = (1.0 - eps2) * gbar / (4.0 + 2.0 * gbar * eps2)
    b2 = 2.0 * (1.0 - eps2) * gbar / (6.0 + 3.0 * gbar * eps2)
    lf2 = 2.0 * _log_fact(L)
    value = K * (N - K) / 12.0 * (
        np.exp(lf2 - 2.0 * _log_prod(L, b1)) + 3.0 * np.exp(lf2 - 2.0 * _log_prod(L, b2))
    )
    return _out(value)


def _iep_gd_scalar(gbar: float, eps2: float, L: int, N: int, K: int) -> float:
    lf = _log_fact(L)
    terms = []
    for i in range(1, N - K + 1):
        denom = i + 1 + i * eps2 * gbar
        log_mag = math.log(math.comb(N - K, i)) + lf - math.log(denom) - float(
            _log_prod(L, (1.0 - eps2) * i * gbar / denom)
        )
        terms.append((-1) ** (i + 1) * math.exp(log_mag))
    terms.sort(key=abs, reverse=True)
    return K * math.fsum(terms)


def avg_iep_gd(gbar, eps2: float, L: int, N: int, K: int):
    """Average index error probability of the greedy (energy) detector.

    Exact for ``K = 1``; for larger ``K`` it is a union over the active
    subcarriers and can exceed one at very low SNR. At ``L = 1`` it does
    not depend on ``eps2``.
    """
    _check(eps2, L)
    if not 1 <= K <= N:
        raise ValueError(f"need 1 <= K <= N, got K={K}, N={N}")
    gbar = np.asarray(gbar, dtype=float)
    flat = [_iep_gd_scalar(float(g), eps2, L, N, K) for g in gbar.ravel()]
    return _out(np.array(flat).reshape(gbar.shape))


def compose_ber(iep, sep, cfg: SystemConfig):
    """Bit error rate from index and symbol error probabilities."""
    d = derive(cfg)
    return ((d.index_weight * d.index_bits + d.bits_per_symbol) * np.asarray(iep) / 2.0
            + cfg.k * np.asarray(sep)) / d.total_bits


def _resolve(gamma0, cfg, eps2):
    gamma0 = float(gamma0)
    if eps2 is None:
        eps2 = epsilon_for(cfg.csi, gamma0)
    return cfg.n / cfg.k * gamma0, eps2


def ber_ml(gamma0, cfg: SystemConfig, eps2: float | None = None) -> float:
    """ML bit error rate at linear per-subcarrier SNR ``gamma0``."""
    gbar, eps2 = _resolve(gamma0, cfg, eps2)
    iep = avg_iep_ml(gbar, eps2, cfg.l, cfg.n, cfg.k)
    return float(compose_ber(iep, avg_sep_psk(gbar, eps2, cfg.l, cfg.m), cfg))


def ber_gd(gamma0, cfg: SystemConfig, eps2: float | None = None) -> float:
    """GD bit error rate at linear per-subcarrier SNR ``gamma0``."""
    gbar, eps2 = _resolve(gamma0, cfg, eps2)
    iep = avg_iep_gd(gbar, eps2, cfg.l, cfg.n, cfg.k)
    return float(compose_ber(iep, avg_sep_psk(gbar, eps2, cfg.l, cfg.m), cfg))


def ber(detector: str, gamma0, cfg: SystemConfig, eps2: float | None = None) -> float:
    return {"ML": ber_ml, "GD": ber_gd}[detector.upper()](gamma0, cfg, eps2)


@dataclass(frozen=True)
class TheoryPoint:
    gamma0: float
    gbar: float
    eps2: float
    pm: float
    iep_ml: float
    iep_gd: float
    ber_ml: float
    ber_gd: float


def theory_point(gamma0_db: float, cfg: SystemConfig) -> TheoryPoint:
    gamma0 = 10.0 ** (gamma0_db / 10.0)
    gbar, eps2 = _resolve(gamma0, cfg, None)
    return TheoryPoint(
        gamma0=gamma0,
        gbar=gbar,
        eps2=eps2,
        pm=avg_sep_psk(gbar, eps2, cfg.l, cfg.m),
        iep_ml=avg_iep_ml(gbar, eps2, cfg.l, cfg.n, cfg.k),
        iep_gd=avg_iep_gd(gbar, eps2, cfg.l, cfg.n, cfg.k),
        ber_ml=ber_ml(gamma0, cfg, eps2),
        ber_gd=ber_gd(gamma0, cfg, eps2),
    )


def snr_for_ber(target: float, detector: str, cfg: SystemConfig, lo_db=-30.0, hi_db=120.0) -> float:
    """Per-subcarrier SNR in dB where the theory curve crosses ``target``.

    Returns ``inf`` when the curve never drops to ``target`` (error floor).
    """
    f = lambda x: math.log(ber(detector, 10.0 ** (x / 10.0), cfg)) - math.log(target)
    if f(hi_db) > 0:
        return math.inf
    if f(lo_db) < 0:
        raise ValueError(f"BER already below {target} at {lo_db} dB")
    return brentq(f, lo_db, hi_db, xtol=1e-10)


# ------------------------------------------------------------ MGFs

def mgf_nu_hat(t, eps2: float, L: int):
    """MGF of the selected estimated gain ``max_l |hhat_l|^2``."""
    _check(eps2, L)
    a = 1.0 - eps2
    t = np.asarray(t, dtype=float)
    if np.any(a * t >= 1.0):
        raise ValueError("t outside the convergence region t < 1/(1 - eps2)")
    value = np.exp(_log_fact(L) - np.log(np.arange(1, L + 1) - a * t[..., None]).sum(axis=-1))
    return _out(value)


def mgf_noncentral(t, nu_hat, eps2: float):
    """MGF of ``||hhat| + e|^2`` for a fixed ``|hhat|^2 = nu_hat``, ``e ~ CN(0, eps2)``."""
    t = np.asarray(t, dtype=float)
    d = 1.0 - eps2 * t
    if np.any(d <= 0):
        raise ValueError("eps2 * t must be below 1")
    return _out(np.exp(nu_hat * t / d) / d)


def mgf_nu(t, eps2: float, L: int):
    """MGF of the true gain ``|h|^2`` of the branch chosen by the estimates."""
    _check(eps2, L)
    t = np.asarray(t, dtype=float)
    d = 1.0 - eps2 * t
    if np.any(d <= 0) or np.any(t >= 1.0):
        raise ValueError("t outside the convergence region t < 1")
    shifted = (1.0 - eps2) * t / d
    log_val = _log_fact(L) - np.log(d) - np.log(np.arange(1, L + 1) - shifted[..., None]).sum(axis=-1)
    return _out(np.exp(log_val))


# ------------------------------------------------------------ asymptotics

@dataclass(frozen=True)
class AsymptoteSet:
    """High-SNR constants for one configuration.

    ``diversity_scale``, ``sep_shape`` and the two alternating sums build
    the power-law coefficients (BER ~ coefficient / gamma0**L) under
    perfect and MMSE CSI. ``ml_index_floor`` is the extra floor the ML
    detector suffers under fixed error variance. ``gain_*`` are the ML
    over GD coding-gain ingredients with their large-L approximations
    ``ratio ~ prefactor * base**L``.
    """

    diversity_scale: float
    sep_shape: float
    gd_sum_perfect: float
    gd_sum_mmse: float
    ml_perfect: float
    gd_perfect: float
    ml_mmse: float
    gd_mmse: float
    ml_index_floor: float | None
    ml_floor: float | None
    gd_floor: float | None
    gain_ratio_perfect: float
    gain_ratio_mmse: float
    gain_base_perfect: float
    gain_base_mmse: float
    gain_prefactor_perfect: float
    gain_prefactor_mmse: float
    coding_gain_perfect_db: float
    coding_gain_mmse_db: float


def _alternating(N, K, L, base):
    terms = [(-1) ** (i + 1) * math.comb(N - K, i) * math.exp((L - 1) * math.log(base(i)) - L * math.log(i))
             for i in range(1, N - K + 1)]
    return math.fsum(terms)


def _fixed_floors(cfg: SystemConfig, eps2: float):
    d = derive(cfg)
    L = cfg.l
    r = (1.0 - eps2) / eps2
    ls = np.arange(1, L + 1)
    lp = lambda x: float(np.log1p(x / ls).sum())
    index_floor = d.weighted_index_pairs / (24.0 * d.total_bits) * (
        math.exp(-2.0 * lp(r / 2.0)) + 3.0 * math.exp(-2.0 * lp(2.0 * r / 3.0))
    )
    sep_floor = cfg.k * d.sep_weight / (12.0 * d.total_bits) * (
        math.exp(-lp(r * d.psk_rho)) + 3.0 * math.exp(-lp(4.0 * r * d.psk_rho / 3.0))
    )
    return index_floor, sep_floor


def asymptote_set(cfg: SystemConfig, eps2: float | None = None) -> AsymptoteSet:
    """All high-SNR constants; ``eps2`` (default: the config's fixed value) sets the floors."""
    d = derive(cfg)
    N, K, L = cfg.n, cfg.k, cfg.l
    rho, xi = d.psk_rho, d.sep_weight
    weight = d.index_weight * d.index_bits + d.bits_per_symbol
    log_scale = (L + 1) * math.log(K) + _log_fact(L) - math.log(2 * d.total_bits) - L * math.log(N)
    scale = _exp(log_scale)
    shape = 1.0 + 3.0 ** (L + 1) / 4.0 ** L
    omega = _alternating(N, K, L, lambda i: 1.0 + i)
    psi = _alternating(N, K, L, lambda i: i + 1 + i * N / K)
    sep_coef = xi * shape / (6.0 * rho ** L)
    mmse_factor = (1.0 + N / K) ** L

    if eps2 is None and cfg.csi.kind == "fixed":
        eps2 = cfg.csi.eps2
    if eps2:
        index_floor, sep_floor = _fixed_floors(cfg, eps2)
        floors = (index_floor, index_floor + sep_floor, sep_floor)
    else:
        floors = (None, None, None)

    eta1 = 6.0 * weight * omega * rho ** L / (xi * shape)
    eta2 = 6.0 * psi * weight * rho ** L / (xi * shape * mmse_factor)
    return AsymptoteSet(
        diversity_scale=scale,
        sep_shape=shape,
        gd_sum_perfect=omega,
        gd_sum_mmse=psi,
        ml_perfect=scale * sep_coef,
        gd_perfect=scale * (weight * omega + sep_coef),
        ml_mmse=scale * sep_coef * mmse_factor,
        gd_mmse=scale * (psi * weight + sep_coef * mmse_factor),
        ml_index_floor=floors[0],
        ml_floor=floors[1],
        gd_floor=floors[2],
        gain_ratio_perfect=eta1,
        gain_ratio_mmse=eta2,
        gain_base_perfect=2.0 * rho,
        gain_base_mmse=rho * (1.0 + K / (N + K)),
        gain_prefactor_perfect=3.0 * weight * (N - K) / (xi * shape),
        gain_prefactor_mmse=6.0 * weight * (N - K) / (xi * shape * (2.0 + N / K)),
        coding_gain_perfect_db=10.0 / L * math.log10(1.0 + eta1),
        coding_gain_mmse_db=10.0 / L * math.log10(1.0 + eta2),
    )


@dataclass(frozen=True)
class Asymptote:
    """``kind == "power"``: BER ~ value / gamma0**L; ``kind == "floor"``: BER -> value."""

    kind: str
    value: float
    order: int

    def at(self, gamma0):
        if self.kind == "floor":
            return np.full(np.shape(gamma0), self.value)[()] if np.ndim(gamma0) else self.value
        return self.value / np.asarray(gamma0, dtype=float) ** self.order


def asymptote(detector: str, cfg: SystemConfig) -> Asymptote:
    detector = detector.upper()
    if detector not in ("ML", "GD"):
        raise ValueError(f"unknown detector {detector!r}")
    s = asymptote_set(cfg)
    regime = cfg.csi.kind
    if regime == "fixed" and cfg.csi.eps2 > 0:
        return Asymptote("floor", s.ml_floor if detector == "ML" else s.gd_floor, 0)
    if regime == "mmse":
        return Asymptote("power", s.ml_mmse if detector == "ML" else s.gd_mmse, cfg.l)
    return Asymptote("power", s.ml_perfect if detector == "ML" else s.gd_perfect, cfg.l)


@dataclass(frozen=True)
class CodingGain:
    db: float
    limit_db: float


def coding_gain(regime: str, cfg: SystemConfig) -> CodingGain:
    """SNR advantage of ML over GD at the configured L, and its L -> infinity limit."""
    s = asymptote_set(cfg)
    no_index = cfg.k == cfg.n
    if regime == "perfect":
        limit = 10.0 * math.log10(2.0) if cfg.m == 2 and not no_index else 0.0
        return CodingGain(s.coding_gain_perfect_db, limit)
    if regime == "mmse":
        limit = 10.0 * math.log10(1.0 + cfg.k / (cfg.n + cfg.k)) if cfg.m == 2 and not no_index else 0.0
        return CodingGain(s.coding_gain_mmse_db, limit)
    raise ValueError(f"coding gain is defined for perfect or mmse CSI, not {regime!r}")


@dataclass(frozen=True)
class Recommendation:
    detector: str
    rationale: str
    gain_db: float | None
    gain_limit_db: float | None
    ml_complexity: int
    gd_complexity: int

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def recommend_detector(cfg: SystemConfig) -> Recommendation:
    """Pick ML or GD for the configured CSI regime, PSK order and antenna count."""
    cost = complexity(cfg)
    regime = cfg.csi.kind
    if regime == "fixed" and cfg.csi.eps2 > 0:
        return Recommendation("GD", "fixed-csi: GD reaches a lower error floor at high SNR and costs less",
                              None, None, cost.ml, cost.gd)
    if regime == "mmse":
        gain = coding_gain("mmse", cfg)
        if cfg.m >= 4:
            why = "mmse-csi, M>=4: ML advantage vanishes as L grows"
            return Recommendation("GD", why, gain.db, gain.limit_db, cost.ml, cost.gd)
        why = "mmse-csi, M=2: ML keeps a bounded coding gain"
        return Recommendation("ML", why, gain.db, gain.limit_db, cost.ml, cost.gd)
    gain = coding_gain("perfect", cfg)
    if cfg.m >= 8:
        why = "perfect-csi, M>=8: GD is near-ML and the gap closes quickly with L"
        return Recommendation("GD", why, gain.db, gain.limit_db, cost.ml, cost.gd)
    if cfg.m == 4:
        why = "perfect-csi, M=4: ML better; GD acceptable at large L"
        return Recommendation("ML", why, gain.db, gain.limit_db, cost.ml, cost.gd)
    why = "perfect-csi, M=2: ML keeps about 3 dB over GD at large L"
    return Recommendation("ML", why, gain.db, gain.limit_db, cost.ml, cost.gd)
