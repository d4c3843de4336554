"""System parameters for MCIK-OFDM with selection-combining reception."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

TOTAL_SUBCARRIERS = 128

CSI_KINDS = ("perfect", "fixed", "mmse")


class ConfigError(ValueError):
    """Raised for parameter combinations the system model does not admit."""


@dataclass(frozen=True)
class CsiModel:
    """Channel-estimation quality.

    ``kind`` is one of ``"perfect"``, ``"fixed"`` (SNR-independent error
    variance ``eps2``) or ``"mmse"`` (error variance ``1/(1+gamma0)``).
    """

    kind: str = "perfect"
    eps2: float = 0.0

    def __post_init__(self):
        if self.kind not in CSI_KINDS:
            raise ConfigError(f"unknown CSI model {self.kind!r}")
        if self.kind == "fixed":
            if not 0.0 <= self.eps2 < 1.0:
                raise ConfigError(f"fixed error variance must lie in [0, 1), got {self.eps2}")
        elif self.eps2 != 0.0:
            raise ConfigError(f"eps2 is only meaningful for fixed CSI, got {self.eps2}")

    @classmethod
    def parse(cls, text: str) -> "CsiModel":
        """Parse ``perfect``, ``mmse`` or ``fixed:<v>``."""
        text = text.strip().lower()
        if text in ("perfect", "mmse"):
            return cls(text)
        if text.startswith("fixed:"):
            try:
                value = float(text.split(":", 1)[1])
            except ValueError:
                raise ConfigError(f"bad fixed error variance in {text!r}") from None
            return cls("fixed", value)
        raise ConfigError(f"cannot parse CSI model {text!r}")

    def __str__(self) -> str:
        return f"fixed:{self.eps2:g}" if self.kind == "fixed" else self.kind


PERFECT = CsiModel("perfect")
MMSE = CsiModel("mmse")


@dataclass(frozen=True)
class SystemConfig:
    n: int
    k: int
    m: int
    l: int = 1
    g: int | None = None
    csi: CsiModel = field(default=PERFECT)

    def __post_init__(self):
        for name in ("n", "k", "m", "l"):
            if not isinstance(getattr(self, name), int) or isinstance(getattr(self, name), bool):
                raise ConfigError(f"{name} must be an integer")
        if self.n < 2:
            raise ConfigError(f"need at least 2 subcarriers per cluster, got n={self.n}")
        if not 1 <= self.k <= self.n:
            raise ConfigError(f"need 1 <= k <= n, got k={self.k}, n={self.n}")
        if self.m < 2 or self.m & (self.m - 1):
            raise ConfigError(f"PSK order must be a power of two >= 2, got m={self.m}")
        if self.l < 1:
            raise ConfigError(f"need at least one receive antenna, got l={self.l}")
        if self.g is None:
            object.__setattr__(self, "g", max(1, TOTAL_SUBCARRIERS // self.n))
        elif self.g < 1:
            raise ConfigError(f"need at least one cluster, got g={self.g}")

    @property
    def derived(self) -> "DerivedParams":
        return derive(self)

    def replace(self, **changes) -> "SystemConfig":
        values = {"n": self.n, "k": self.k, "m": self.m, "l": self.l, "g": self.g, "csi": self.csi}
        values.update(changes)
        return SystemConfig(**values)

    def to_dict(self) -> dict:
        return {"n": self.n, "k": self.k, "m": self.m, "l": self.l, "g": self.g, "csi": str(self.csi)}

    def __str__(self) -> str:
        return f"(N,K,M,L)=({self.n},{self.k},{self.m},{self.l}) csi={self.csi}"


@dataclass(frozen=True)
class DerivedParams:
    """Bit budget and the scalar constants shared by the closed forms."""

    index_bits: int
    symbol_bits: int
    total_bits: int
    bits_per_symbol: int
    power_ratio: float
    # sin^2(pi/M)
    psk_rho: float
    # 1 for BPSK, 2 otherwise
    sep_weight: int
    # index-bit weighting: 2 when N == 2, else 1
    index_weight: int
    # active/inactive subcarrier pairs K(N-K)
    index_pairs: int
    weighted_index_pairs: int

    @property
    def codebook_size(self) -> int:
        return 1 << self.index_bits


def derive(cfg: SystemConfig) -> DerivedParams:
    m = cfg.m.bit_length() - 1
    p1 = math.comb(cfg.n, cfg.k).bit_length() - 1
    p2 = cfg.k * m
    eta = 2 if cfg.n == 2 else 1
    pairs = cfg.k * (cfg.n - cfg.k)
    return DerivedParams(
        index_bits=p1,
        symbol_bits=p2,
        total_bits=p1 + p2,
        bits_per_symbol=m,
        power_ratio=cfg.n / cfg.k,
        psk_rho=math.sin(math.pi / cfg.m) ** 2,
        sep_weight=1 if cfg.m == 2 else 2,
        index_weight=eta,
        index_pairs=pairs,
        weighted_index_pairs=pairs * (eta * p1 + m),
    )


def db_to_linear(db):
    return 10.0 ** (db / 10.0)


def snr_to_active(gamma0_db, cfg: SystemConfig):
    """Average SNR per active subcarrier (linear) for a per-subcarrier SNR in dB."""
    return (cfg.n / cfg.k) * db_to_linear(gamma0_db)


def epsilon_for(csi: CsiModel, gamma0):
    """Channel-estimation error variance at linear per-subcarrier SNR ``gamma0``."""
    if csi.kind == "perfect":
        return 0.0
    if csi.kind == "fixed":
        return csi.eps2
    if gamma0 < 0:
        raise ConfigError("SNR must be non-negative")
    return 1.0 / (1.0 + gamma0)


_KEYS = ("n", "k", "m", "l", "g", "csi")


def parse_config(text: str) -> SystemConfig:
    """Build a config from a JSON object or whitespace/comma separated ``key=value`` pairs."""
    text = text.strip()
    if text.startswith("{"):
        raw = json.loads(text)
    else:
        raw = {}
        for token in text.replace(",", " ").split():
            if "=" not in token:
                raise ConfigError(f"expected key=value, got {token!r}")
            key, value = token.split("=", 1)
            raw[key.strip().lower()] = value.strip()
    unknown = set(raw) - set(_KEYS)
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    missing = {"n", "k", "m"} - set(raw)
    if missing:
        raise ConfigError(f"missing config keys: {sorted(missing)}")
    kwargs = {}
    for key in ("n", "k", "m", "l", "g"):
        if key in raw and raw[key] is not None:
            try:
                kwargs[key] = int(raw[key])
            except (TypeError, ValueError):
                raise ConfigError(f"{key} must be an integer, got {raw[key]!r}") from None
    csi = raw.get("csi", "perfect")
    kwargs["csi"] = csi if isinstance(csi, CsiModel) else CsiModel.parse(str(csi))
    return SystemConfig(**kwargs)
