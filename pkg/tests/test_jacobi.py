from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import seeds
from georefine.errors import NumericError
from georefine.jacobi import eigh_jacobi, sym_function


def test_diagonal_input_is_returned_sorted():
    w, v = eigh_jacobi(np.diag([3.0, 1.0, 2.0]))
    np.testing.assert_array_equal(w, [1.0, 2.0, 3.0])
    np.testing.assert_allclose(np.abs(v), np.eye(3)[:, [1, 2, 0]])


def test_two_by_two_closed_form():
    w, _ = eigh_jacobi(np.array([[2.0, 1.0], [1.0, 2.0]]))
    np.testing.assert_allclose(w, [1.0, 3.0], atol=1e-15)


@given(seed=seeds, n=st.integers(1, 8))
def test_matches_lapack(seed, n):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(5, n, n))
    a = a + np.swapaxes(a, -1, -2)
    w, v = eigh_jacobi(a)
    np.testing.assert_allclose(w, np.linalg.eigh(a)[0], atol=1e-12 * (1 + np.abs(a).max()))
    np.testing.assert_allclose(v @ np.swapaxes(v, -1, -2), np.broadcast_to(np.eye(n), a.shape), atol=1e-12)
    np.testing.assert_allclose(sym_function(w, v, w), a, atol=1e-12 * (1 + np.abs(a).max()))


def test_batch_shape_preserved(rng):
    a = rng.normal(size=(2, 3, 4, 4))
    a = a + np.swapaxes(a, -1, -2)
    w, v = eigh_jacobi(a)
    assert w.shape == (2, 3, 4) and v.shape == (2, 3, 4, 4)


def test_wide_dynamic_range(rng):
    q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
    a = q @ np.diag([1e-8, 1.0, 1e8]) @ q.T
    w, _ = eigh_jacobi(a)
    # absolute accuracy is relative to the norm, as for any orthogonal method
    # rounding in the construction of a already moves the eigenvalues by ~1e-8
    np.testing.assert_allclose(w, np.linalg.eigh(a)[0], atol=1e-12 * 1e8)


def test_rejects_nonfinite():
    with pytest.raises(NumericError):
        eigh_jacobi(np.array([[1.0, np.nan], [np.nan, 1.0]]))


def test_nonconvergence_reported(rng):
    a = rng.normal(size=(6, 6))
    with pytest.raises(NumericError, match="did not converge"):
        eigh_jacobi(a + a.T, max_sweeps=1)
