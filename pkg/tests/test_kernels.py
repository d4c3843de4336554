import numpy as np
import pytest

from mciksc import kernels
from mciksc.codec import build_codebook, psk_points

numba = pytest.importorskip("numba")


@pytest.fixture(scope="module")
def nb():
    return kernels.numba_kernels()


def _random(rng, b, n, quantize=False):
    y = rng.normal(size=(b, n)) + 1j * rng.normal(size=(b, n))
    h = rng.normal(size=(b, n)) + 1j * rng.normal(size=(b, n))
    if quantize:
        # coarse values force exact ties
        y, h = np.round(y), np.round(h)
    return np.ascontiguousarray(y), np.ascontiguousarray(h)


@pytest.mark.parametrize("quantize", [False, True])
@pytest.mark.parametrize("n,k,m", [(2, 1, 2), (4, 2, 4), (4, 3, 8), (8, 4, 4)])
def test_detector_parity(nb, rng, n, k, m, quantize):
    y, h = _random(rng, 3000, n, quantize)
    points = psk_points(m)
    sets = build_codebook(n, k).array
    for a, b in zip(kernels.NUMPY_KERNELS.ml_detect(y, h, points, sets), nb.ml_detect(y, h, points, sets)):
        assert np.array_equal(a, b)
    for a, b in zip(kernels.NUMPY_KERNELS.gd_detect(y, h, points, k), nb.gd_detect(y, h, points, k)):
        assert np.array_equal(a, b)


@pytest.mark.parametrize("quantize", [False, True])
def test_select_branch_parity(nb, rng, quantize):
    h = rng.normal(size=(2000, 3, 4)) + 1j * rng.normal(size=(2000, 3, 4))
    if quantize:
        h = np.round(h)
    h = np.ascontiguousarray(h)
    assert np.array_equal(kernels.NUMPY_KERNELS.select_branch(h), nb.select_branch(h))


def test_backend_flag(monkeypatch):
    monkeypatch.setenv(kernels.ENV_FLAG, "1")
    assert kernels._choose().name == "numpy"
    monkeypatch.setenv(kernels.ENV_FLAG, "0")
    assert kernels._choose().name == "numba"
