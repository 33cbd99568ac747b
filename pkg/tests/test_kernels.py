"""Backend parity and correctness of the spanning-tree kernels."""

import numpy as np
import pytest

from topomon._kernels import available_backends, backend_name, mst_weights
from helpers import prim_max_weights

BACKENDS = sorted(available_backends().items())
SHAPES = [(1, 1), (1, 5), (5, 1), (2, 2), (3, 4), (7, 3), (20, 30)]


def test_active_backend_is_known():
    assert backend_name() in ("cython", "python")


@pytest.mark.parametrize("name,kernel", BACKENDS)
@pytest.mark.parametrize("shape", SHAPES)
def test_matches_prim_oracle(name, kernel, shape):
    rng = np.random.default_rng(hash(shape) % 2**32)
    for _ in range(20):
        w = rng.random(shape)
        got = kernel(w)
        assert got.shape == (shape[0] + shape[1] - 1,)
        assert np.all(np.diff(got) <= 0)
        np.testing.assert_array_equal(got, prim_max_weights(w))


@pytest.mark.parametrize("shape", SHAPES)
def test_backends_agree_exactly(shape):
    if len(BACKENDS) < 2:
        pytest.skip("compiled backend not built")
    rng = np.random.default_rng(0)
    for _ in range(50):
        w = rng.random(shape)
        results = [kernel(w) for _, kernel in BACKENDS]
        np.testing.assert_array_equal(results[0], results[1])


@pytest.mark.parametrize("name,kernel", BACKENDS)
def test_heavy_ties_still_match_oracle(name, kernel):
    # integer-valued weights force many ties; the multiset must not care
    rng = np.random.default_rng(5)
    for _ in range(30):
        w = rng.integers(0, 3, size=(4, 5)).astype(float)
        np.testing.assert_array_equal(kernel(w), prim_max_weights(w))


@pytest.mark.parametrize("name,kernel", BACKENDS)
def test_power_of_two_scaling_is_exact(name, kernel):
    rng = np.random.default_rng(11)
    w = rng.random((6, 7))
    base = kernel(w)
    for exp in (-3, 1, 4):
        lam = 2.0**exp
        np.testing.assert_array_equal(kernel(lam * w), lam * base)


@pytest.mark.parametrize("name,kernel", BACKENDS)
def test_rejects_empty_side_and_bad_rank(name, kernel):
    with pytest.raises(ValueError):
        kernel(np.empty((0, 3)))
    with pytest.raises(ValueError):
        kernel(np.empty((3, 0)))
    with pytest.raises(ValueError):
        kernel(np.zeros(4))


@pytest.mark.parametrize("name,kernel", BACKENDS)
def test_accepts_readonly_input(name, kernel):
    w = np.random.default_rng(1).random((3, 3))
    w.setflags(write=False)
    out = kernel(w)
    assert out.shape == (5,)


@pytest.mark.parametrize("name,kernel", BACKENDS)
def test_deterministic(name, kernel):
    w = np.random.default_rng(2).random((10, 10))
    np.testing.assert_array_equal(kernel(w), kernel(w))
