"""Post-combining ML and greedy (GD) detectors."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .codec import IndexCodebook, active_masks, codebook_for, decode_bits, gray_labels, psk_points
from .config import SystemConfig, derive
from .kernels import KERNELS

DETECTORS = ("ML", "GD")


@dataclass(frozen=True)
class DetectionResult:
    indices: tuple[int, ...]
    symbols: tuple[int, ...]
    detector: str


@dataclass(frozen=True)
class ComplexityCount:
    ml: int
    gd: int


def _as_batch(obs):
    y = np.ascontiguousarray(np.atleast_2d(obs.y))
    hhat = np.ascontiguousarray(np.atleast_2d(obs.hhat))
    return y, hhat


def detect_batch(detector: str, y: np.ndarray, hhat: np.ndarray, cfg: SystemConfig, kernels=KERNELS):
    """Run a detector on ``(B, N)`` combined observations.

    Returns ``(rank, symbols)``: the codebook rank the detected set demaps
    to and the ``(B, K)`` detected constellation indices.
    """
    book = codebook_for(cfg)
    points = psk_points(cfg.m)
    if detector == "ML":
        return kernels.ml_detect(y, hhat, points, book.array)
    if detector == "GD":
        active, symbols = kernels.gd_detect(y, hhat, points, cfg.k)
        return book.mask_to_rank[active_masks(active)], symbols
    raise ValueError(f"unknown detector {detector!r}")


def ml_detect(obs, codebook: IndexCodebook, cfg: SystemConfig) -> DetectionResult:
    """Joint minimum-distance search over every legal index set and symbol tuple."""
    y, hhat = _as_batch(obs)
    rank, symbols = KERNELS.ml_detect(y, hhat, psk_points(cfg.m), codebook.array)
    return DetectionResult(codebook[int(rank[0])], tuple(int(s) for s in symbols[0]), "ML")


def gd_detect(obs, codebook: IndexCodebook, cfg: SystemConfig) -> DetectionResult:
    """K strongest received energies, then per-subcarrier nearest PSK point.

    The detected set need not belong to ``codebook``.
    """
    y, hhat = _as_batch(obs)
    active, symbols = KERNELS.gd_detect(y, hhat, psk_points(cfg.m), cfg.k)
    return DetectionResult(
        tuple(int(a) + 1 for a in active[0]), tuple(int(s) for s in symbols[0]), "GD"
    )


def count_bit_errors(tx_bits, det: DetectionResult, cfg: SystemConfig) -> tuple[int, int]:
    """Hamming distance on the index-bit prefix and on the symbol-bit suffix."""
    tx_bits = np.asarray(tx_bits, dtype=np.uint8)
    d = derive(cfg)
    if len(tx_bits) != d.total_bits:
        raise ValueError(f"expected {d.total_bits} bits, got {len(tx_bits)}")
    diff = decode_bits(det, cfg) != tx_bits
    return int(diff[: d.index_bits].sum()), int(diff[d.index_bits:].sum())


def count_bit_errors_batch(tx_rank, tx_symbols, rank, symbols, m_order: int) -> tuple[int, int]:
    labels = gray_labels(m_order)
    index_errors = np.bitwise_count(tx_rank ^ rank).sum()
    symbol_errors = np.bitwise_count(labels[tx_symbols] ^ labels[symbols]).sum()
    return int(index_errors), int(symbol_errors)


def complexity(cfg: SystemConfig) -> ComplexityCount:
    """Operation counts of the two detectors after combining."""
    c = derive(cfg).codebook_size
    return ComplexityCount(ml=cfg.n + 2 * c * cfg.m ** cfg.k, gd=2 * cfg.n + 2 * cfg.k * cfg.m)
