"""Bit mapping for one MCIK-OFDM cluster.

The first ``index_bits`` of a cluster select a set of active subcarriers
from a lexicographically ordered codebook; the remaining bits, ``m`` at a
time, select Gray-labelled PSK points placed on the active subcarriers in
ascending subcarrier order. All bit vectors are MSB first.

Subcarrier indices are 1-based in the public single-cluster API
(``IndexSymbol.indices``) and 0-based in the batch arrays used by the
simulator.
"""

from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass

import numpy as np

from .config import SystemConfig, derive


@dataclass(frozen=True)
class IndexSymbol:
    indices: tuple[int, ...]
    rank: int


@dataclass(frozen=True)
class IndexCodebook:
    n: int
    k: int
    sets: tuple[tuple[int, ...], ...]

    @property
    def size(self) -> int:
        return len(self.sets)

    @property
    def index_bits(self) -> int:
        return self.size.bit_length() - 1

    @functools.cached_property
    def ranks(self) -> dict:
        return {s: r for r, s in enumerate(self.sets)}

    @functools.cached_property
    def array(self) -> np.ndarray:
        """Zero-based ``(C, K)`` index array."""
        return np.array(self.sets, dtype=np.int64).reshape(self.size, self.k) - 1

    @functools.cached_property
    def mask_to_rank(self) -> np.ndarray:
        """Rank assigned to every K-subset, keyed by its subcarrier bitmask.

        Legal subsets map to their own rank, the rest to the legal subset
        sharing the most subcarriers (lowest rank on ties). Entries for
        masks of other cardinalities are -1.
        """
        table = np.full(1 << self.n, -1, dtype=np.int64)
        legal = [_mask(s) for s in self.sets]
        for subset in itertools.combinations(range(1, self.n + 1), self.k):
            mask = _mask(subset)
            overlaps = [bin(mask & other).count("1") for other in legal]
            table[mask] = int(np.argmax(overlaps))
        return table

    def rank_of(self, indices) -> int:
        return self.ranks[tuple(sorted(indices))]

    def __getitem__(self, rank: int) -> tuple[int, ...]:
        return self.sets[rank]


def _mask(indices) -> int:
    out = 0
    for a in indices:
        out |= 1 << (a - 1)
    return out


@functools.lru_cache(maxsize=None)
def build_codebook(n: int, k: int) -> IndexCodebook:
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")
    size = 1 << (math.comb(n, k).bit_length() - 1)
    subsets = itertools.islice(itertools.combinations(range(1, n + 1), k), size)
    return IndexCodebook(n, k, tuple(subsets))


def codebook_for(cfg: SystemConfig) -> IndexCodebook:
    return build_codebook(cfg.n, cfg.k)


# ---------------------------------------------------------------- PSK

def gray(i):
    return i ^ (i >> 1)


@functools.lru_cache(maxsize=None)
def _gray_tables(m_order: int):
    labels = np.array([gray(i) for i in range(m_order)], dtype=np.int64)
    inverse = np.empty(m_order, dtype=np.int64)
    inverse[labels] = np.arange(m_order)
    return labels, inverse


def gray_labels(m_order: int) -> np.ndarray:
    """Bit label (as an integer) of each constellation point."""
    return _gray_tables(m_order)[0]


def label_to_symbol(m_order: int) -> np.ndarray:
    return _gray_tables(m_order)[1]


@functools.lru_cache(maxsize=None)
def psk_points(m_order: int) -> np.ndarray:
    points = np.exp(2j * np.pi * np.arange(m_order) / m_order)
    # snap the axis points so BPSK/QPSK land exactly on +-1, +-j
    points.real[np.abs(points.real) < 1e-15] = 0.0
    points.imag[np.abs(points.imag) < 1e-15] = 0.0
    points.flags.writeable = False
    return points


def psk_point(sym_index: int, m_order: int) -> complex:
    if not 0 <= sym_index < m_order:
        raise ValueError(f"symbol index {sym_index} outside 0..{m_order - 1}")
    return complex(psk_points(m_order)[sym_index])


# ---------------------------------------------------------------- bits

def bits_to_int(bits) -> int:
    value = 0
    for b in bits:
        value = (value << 1) | int(b)
    return value


def int_to_bits(value: int, width: int) -> np.ndarray:
    return np.array([(value >> (width - 1 - i)) & 1 for i in range(width)], dtype=np.uint8)


def _pack_rows(bits: np.ndarray) -> np.ndarray:
    """MSB-first integer value of each row of a 0/1 matrix."""
    width = bits.shape[-1]
    weights = (1 << np.arange(width - 1, -1, -1)).astype(np.int64)
    return bits.astype(np.int64) @ weights


def _check_length(bits, cfg):
    d = derive(cfg)
    if len(bits) != d.total_bits:
        raise ValueError(f"expected {d.total_bits} bits, got {len(bits)}")
    return d


def encode(bits, cfg: SystemConfig, es: float = 1.0):
    """Map ``p1 + p2`` bits to an index symbol and the cluster's length-N signal."""
    bits = np.asarray(bits, dtype=np.uint8)
    d = _check_length(bits, cfg)
    book = codebook_for(cfg)
    rank = bits_to_int(bits[: d.index_bits])
    indices = book[rank]
    groups = bits[d.index_bits:].reshape(cfg.k, d.bits_per_symbol)
    to_symbol = label_to_symbol(cfg.m)
    x = np.zeros(cfg.n, dtype=complex)
    for alpha, group in zip(indices, groups):
        x[alpha - 1] = np.sqrt(es) * psk_points(cfg.m)[to_symbol[bits_to_int(group)]]
    return IndexSymbol(indices, rank), x


def demap_index_set(indices, codebook: IndexCodebook) -> np.ndarray:
    indices = tuple(sorted(indices))
    if len(indices) != codebook.k or len(set(indices)) != codebook.k:
        raise ValueError(f"expected {codebook.k} distinct indices, got {indices}")
    if not all(1 <= a <= codebook.n for a in indices):
        raise ValueError(f"indices {indices} outside 1..{codebook.n}")
    rank = int(codebook.mask_to_rank[_mask(indices)])
    return int_to_bits(rank, codebook.index_bits)


def decode_bits(det, cfg: SystemConfig) -> np.ndarray:
    """Recover the bit vector from a detected index set and symbol indices.

    ``det`` needs ``indices`` (1-based, any K-subset) and ``symbols``
    (constellation indices ordered by ascending subcarrier).
    """
    d = derive(cfg)
    index_part = demap_index_set(det.indices, codebook_for(cfg))
    labels = gray_labels(cfg.m)
    symbol_part = [int_to_bits(int(labels[s]), d.bits_per_symbol) for s in det.symbols]
    return np.concatenate([index_part, *symbol_part]).astype(np.uint8)


# ---------------------------------------------------------------- batch

def encode_batch(bits: np.ndarray, cfg: SystemConfig, es: float = 1.0):
    """Vectorised :func:`encode` over rows of a ``(B, p)`` bit matrix.

    Returns ``(rank, symbols, x)`` with ``symbols`` as ``(B, K)``
    constellation indices and ``x`` the ``(B, N)`` transmitted signals.
    """
    d = derive(cfg)
    book = codebook_for(cfg)
    b = bits.shape[0]
    if d.index_bits:
        rank = _pack_rows(bits[:, : d.index_bits])
    else:
        rank = np.zeros(b, dtype=np.int64)
    labels = _pack_rows(bits[:, d.index_bits:].reshape(b, cfg.k, d.bits_per_symbol))
    symbols = label_to_symbol(cfg.m)[labels]
    x = np.zeros((b, cfg.n), dtype=complex)
    np.put_along_axis(x, book.array[rank], np.sqrt(es) * psk_points(cfg.m)[symbols], axis=1)
    return rank, symbols, x


def active_masks(active: np.ndarray) -> np.ndarray:
    """Bitmask of each row of zero-based active indices."""
    return np.bitwise_or.reduce(np.left_shift(1, active), axis=1)
