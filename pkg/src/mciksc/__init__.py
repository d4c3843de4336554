"""MCIK-OFDM with selection-combining reception: link simulator and BER closed forms."""

from .config import CsiModel, DerivedParams, SystemConfig, derive, epsilon_for, parse_config, snr_to_active
from .kernels import BACKEND

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "CsiModel",
    "DerivedParams",
    "SystemConfig",
    "derive",
    "epsilon_for",
    "parse_config",
    "snr_to_active",
]
