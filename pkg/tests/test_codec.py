import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mciksc.codec import (
    build_codebook,
    decode_bits,
    demap_index_set,
    encode,
    encode_batch,
    gray_labels,
    int_to_bits,
    psk_point,
    psk_points,
)
from mciksc.config import SystemConfig, derive
from mciksc.detectors import DetectionResult


def test_codebook_4_2_lexicographic_prefix():
    book = build_codebook(4, 2)
    assert book.sets == ((1, 2), (1, 3), (1, 4), (2, 3))
    assert book.index_bits == 2


def test_codebook_small_cases():
    assert build_codebook(2, 1).sets == ((1,), (2,))
    assert build_codebook(4, 1).sets == ((1,), (2,), (3,), (4,))


def test_codebook_oracle_against_enumeration():
    for n, k in [(n, k) for n in range(2, 9) for k in range(1, n + 1)]:
        book = build_codebook(n, k)
        everything = sorted(itertools.combinations(range(1, n + 1), k))
        assert book.size == 2 ** int(math.floor(math.log2(len(everything))))
        assert list(book.sets) == everything[: book.size]


def test_psk_points():
    assert psk_point(0, 2) == pytest.approx(1)
    assert psk_point(1, 2) == pytest.approx(-1)
    assert psk_point(1, 4) == pytest.approx(1j)
    for m in (2, 4, 8, 16):
        assert np.allclose(np.abs(psk_points(m)), 1.0)


def test_gray_labels_neighbours_differ_by_one_bit():
    for m in (4, 8, 16):
        labels = gray_labels(m)
        assert sorted(labels) == list(range(m))
        for i in range(m):
            assert bin(int(labels[i]) ^ int(labels[(i + 1) % m])).count("1") == 1


def test_encode_bpsk_example():
    sym, x = encode([0, 0], SystemConfig(2, 1, 2))
    assert sym.indices == (1,)
    assert np.allclose(x, [1, 0])


def test_encode_index_rank_example():
    sym, x = encode([1, 0, 0, 1], SystemConfig(4, 1, 4))
    assert sym.rank == 2
    assert sym.indices == (3,)
    assert np.flatnonzero(x).tolist() == [2]


def test_encode_rejects_wrong_length():
    with pytest.raises(ValueError):
        encode([0, 1, 0], SystemConfig(4, 1, 4))


def test_demap_examples():
    book = build_codebook(4, 2)
    assert demap_index_set({1, 3}, book).tolist() == [0, 1]
    assert demap_index_set({2}, build_codebook(2, 1)).tolist() == [1]


def test_demap_illegal_set_uses_max_overlap_then_lowest_rank():
    # {2,4} shares one subcarrier with {1,2}, {1,4} and {2,3}; the lowest of those ranks is 0
    book = build_codebook(4, 2)
    assert demap_index_set({2, 4}, book).tolist() == [0, 0]
    assert demap_index_set({3, 4}, book).tolist() == [0, 1]


def test_demap_oracle_all_illegal_sets():
    for n, k in [(4, 2), (5, 2), (5, 3), (6, 3), (8, 4)]:
        book = build_codebook(n, k)
        for subset in itertools.combinations(range(1, n + 1), k):
            overlaps = [len(set(subset) & set(s)) for s in book.sets]
            best = max(overlaps)
            expected = overlaps.index(best)
            bits = demap_index_set(subset, book)
            assert int("".join(map(str, bits)) or "0", 2) == expected


def test_demap_rejects_malformed():
    book = build_codebook(4, 2)
    with pytest.raises(ValueError):
        demap_index_set({1}, book)
    with pytest.raises(ValueError):
        demap_index_set({0, 5}, book)


@pytest.mark.parametrize("n,k,m", [(2, 1, 2), (4, 1, 4), (4, 2, 4), (4, 2, 8), (4, 3, 4), (4, 4, 2), (6, 2, 4)])
def test_exhaustive_round_trip(n, k, m):
    cfg = SystemConfig(n, k, m)
    p = derive(cfg).total_bits
    for bits in itertools.product((0, 1), repeat=min(p, 10)):
        bits = np.array(bits + (0,) * (p - len(bits)), dtype=np.uint8)
        sym, x = encode(bits, cfg)
        active = np.flatnonzero(x)
        symbols = [int(np.argmin(np.abs(psk_points(m) - x[a]))) for a in active]
        det = DetectionResult(sym.indices, tuple(symbols), "ML")
        assert np.array_equal(decode_bits(det, cfg), bits)


@settings(max_examples=60, deadline=None)
@given(st.sampled_from([(2, 1, 2), (4, 1, 4), (4, 2, 4), (4, 2, 8), (5, 3, 16), (8, 4, 4)]), st.data())
def test_energy_and_batch_agree(cfg_tuple, data):
    cfg = SystemConfig(*cfg_tuple)
    p = derive(cfg).total_bits
    bits = np.array(data.draw(st.lists(st.integers(0, 1), min_size=p, max_size=p)), dtype=np.uint8)
    es = data.draw(st.floats(0.1, 4.0))
    sym, x = encode(bits, cfg, es)
    assert np.sum(np.abs(x) ** 2) == pytest.approx(cfg.k * es)
    rank, _, xb = encode_batch(bits[None, :], cfg, es)
    assert int(rank[0]) == sym.rank
    assert np.allclose(xb[0], x)


def test_int_to_bits_msb_first():
    assert int_to_bits(6, 4).tolist() == [0, 1, 1, 0]
