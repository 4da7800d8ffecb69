import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from camtrack.errors import NoConvergence, NonFiniteObjective, NonSymmetric, RankDeficient
from camtrack.numerics import lstsq, min_eigvec, minimize, svd3, sym_eig

from conftest import random_rotation


def random_symmetric(rng, n, spectrum=None):
    q, _ = np.linalg.qr(rng.normal(size=(n, n)))
    d = rng.normal(size=n) if spectrum is None else np.asarray(spectrum, dtype=float)
    return q.T @ np.diag(d) @ q, np.sort(d)


# --- sym_eig ---------------------------------------------------------------


def test_sym_eig_diagonal():
    res = sym_eig(np.diag([3.0, 1.0, 2.0]))
    np.testing.assert_array_equal(res.eigenvalues, [1.0, 2.0, 3.0])
    np.testing.assert_allclose(np.abs(res.eigenvectors), np.eye(3)[:, [1, 2, 0]], atol=0)


def test_sym_eig_identity_is_any_basis():
    res = sym_eig(np.eye(4))
    np.testing.assert_array_equal(res.eigenvalues, np.ones(4))
    np.testing.assert_allclose(res.eigenvectors.T @ res.eigenvectors, np.eye(4), atol=1e-12)


def test_sym_eig_recovers_constructed_spectrum(rng):
    D = np.array([4.0, -1.5, 0.25, 9.0, 2.0, -7.0])
    S, expected = random_symmetric(rng, 6, D)
    res = sym_eig(S)
    np.testing.assert_allclose(res.eigenvalues, expected, rtol=1e-12, atol=1e-12)


def test_sym_eig_rejects_nonsymmetric():
    with pytest.raises(NonSymmetric):
        sym_eig(np.array([[1.0, 2.0], [0.0, 1.0]]))


def test_sym_eig_iteration_cap():
    S = np.array([[1.0, 2.0, 0.5], [2.0, -1.0, 0.3], [0.5, 0.3, 4.0]])
    with pytest.raises(NoConvergence):
        sym_eig(S, max_sweeps=1)


def test_sym_eig_randomized_invariants():
    rng = np.random.default_rng(7)
    for _ in range(1000):
        n = int(rng.integers(1, 10))
        A = rng.normal(size=(n, n)) * 10.0 ** rng.uniform(-3, 3)
        S = A + A.T
        res = sym_eig(S)
        lam, V = res.eigenvalues, res.eigenvectors
        scale = np.max(np.abs(lam))
        assert np.all(np.diff(lam) >= 0)
        np.testing.assert_allclose(S @ V, V * lam, atol=1e-9 * scale)
        np.testing.assert_allclose(V.T @ V, np.eye(n), atol=1e-12)
        assert abs(lam.sum() - np.trace(S)) <= 1e-9 * max(np.sum(np.abs(lam)), 1e-300)
        if n <= 4:
            det = np.linalg.det(S)
            assert abs(np.prod(lam) - det) <= 1e-8 * np.prod(np.abs(lam)) + 1e-12 * scale**n


def test_sym_eig_matches_lapack(rng):
    for n in range(2, 10):
        S, _ = random_symmetric(rng, n)
        np.testing.assert_allclose(sym_eig(S).eigenvalues, np.linalg.eigvalsh(S), atol=1e-12)


# --- min_eigvec ------------------------------------------------------------


def test_min_eigvec_sign_convention():
    np.testing.assert_array_equal(min_eigvec(np.diag([5.0, 0.1, 2.0])), [0.0, 1.0, 0.0])
    np.testing.assert_array_equal(min_eigvec(np.diag([5.0, 2.0, 0.1]) * -1.0 + 10.0 * np.eye(3)), [1.0, 0.0, 0.0])


def test_min_eigvec_degenerate_spectrum():
    v = min_eigvec(np.eye(3))
    assert abs(np.linalg.norm(v) - 1.0) < 1e-15
    assert np.linalg.norm(np.eye(3) @ v - v) <= 1e-9


def test_min_eigvec_homography_null_vector(rng):
    from camtrack.calibration import build_L

    H = rng.normal(size=(3, 3))
    H[2] = [1e-4, -2e-4, 1.0]
    planar = rng.uniform(0, 200, size=(10, 2))
    h = np.hstack([planar, np.ones((10, 1))]) @ H.T
    image = h[:, :2] / h[:, 2:]
    L = build_L(image, planar)
    v = min_eigvec(L.T @ L)
    ref = H.ravel() / np.linalg.norm(H)
    ref = ref if ref[np.argmax(np.abs(ref))] > 0 else -ref
    np.testing.assert_allclose(v, ref, atol=1e-9)


# --- svd3 ------------------------------------------------------------------


def test_svd3_identity():
    r = svd3(np.eye(3))
    np.testing.assert_allclose(r.S, [1.0, 1.0, 1.0])
    np.testing.assert_allclose(r.U @ r.V.T, np.eye(3), atol=1e-15)


def test_svd3_diagonal_absolute_values():
    r = svd3(np.diag([2.0, -3.0, 1.0]))
    np.testing.assert_allclose(r.S, [3.0, 2.0, 1.0], rtol=1e-15)
    np.testing.assert_allclose(r.U @ np.diag(r.S) @ r.V.T, np.diag([2.0, -3.0, 1.0]), atol=1e-15)


def test_svd3_rank_deficient():
    M = np.outer([1.0, 2.0, 3.0], [0.5, -1.0, 2.0])
    r = svd3(M)
    np.testing.assert_allclose(r.U @ np.diag(r.S) @ r.V.T, M, atol=1e-13)
    np.testing.assert_allclose(r.U.T @ r.U, np.eye(3), atol=1e-12)
    assert r.S[1] < 1e-7 and r.S[2] < 1e-7


def test_svd3_randomized_invariants():
    rng = np.random.default_rng(11)
    for _ in range(1000):
        M = rng.normal(size=(3, 3)) * 10.0 ** rng.uniform(-3, 3)
        r = svd3(M)
        scale = np.linalg.norm(M)
        np.testing.assert_allclose(r.U @ np.diag(r.S) @ r.V.T, M, atol=1e-12 * scale)
        np.testing.assert_allclose(r.U.T @ r.U, np.eye(3), atol=1e-12)
        np.testing.assert_allclose(r.V.T @ r.V, np.eye(3), atol=1e-12)
        assert np.all(np.diff(r.S) <= 0) and r.S[2] >= 0
        np.testing.assert_allclose(r.S, np.linalg.svd(M, compute_uv=False), atol=1e-12 * scale)


def test_svd3_singular_values_rotation_invariant():
    rng = np.random.default_rng(3)
    for _ in range(200):
        M = rng.normal(size=(3, 3))
        Q1, Q2 = random_rotation(rng), random_rotation(rng)
        np.testing.assert_allclose(svd3(Q1 @ M @ Q2).S, svd3(M).S, atol=1e-10)


# --- lstsq -----------------------------------------------------------------


def test_lstsq_identity():
    np.testing.assert_allclose(lstsq(np.eye(3), [1.0, 2.0, 3.0]), [1.0, 2.0, 3.0])


def test_lstsq_mean_of_observations():
    np.testing.assert_allclose(lstsq([[1.0], [1.0]], [0.0, 2.0]), [1.0])


def test_lstsq_consistent_overdetermined(rng):
    A = rng.normal(size=(6, 5))
    x = rng.normal(size=5)
    np.testing.assert_allclose(lstsq(A, A @ x), x, rtol=1e-12)


def test_lstsq_rank_deficient():
    A = np.array([[1.0, 2.0], [2.0, 4.0], [3.0, 6.0]])
    with pytest.raises(RankDeficient):
        lstsq(A, [1.0, 2.0, 3.0])


def test_lstsq_randomized_matches_pinv():
    rng = np.random.default_rng(5)
    for _ in range(1000):
        A = rng.normal(size=(6, 5))
        b = rng.normal(size=6)
        x = lstsq(A, b)
        np.testing.assert_allclose(x, np.linalg.pinv(A) @ b, atol=1e-9 * max(1.0, np.linalg.norm(x)))
        assert np.linalg.norm(A.T @ (A @ x - b)) <= 1e-9 * np.linalg.norm(A.T @ b)


# --- minimize --------------------------------------------------------------


def test_minimize_quadratic_bowl():
    c = np.array([1.0, 2.0])
    x, f, nit = minimize(lambda x: np.sum((x - c) ** 2), np.zeros(2))
    np.testing.assert_allclose(x, c, atol=1e-6)


def test_minimize_rosenbrock():
    res = minimize(lambda x: (1 - x[0]) ** 2 + 100 * (x[1] - x[0] ** 2) ** 2, [-1.2, 1.0])
    assert res.fun < 1e-6
    np.testing.assert_allclose(res.x, [1.0, 1.0], atol=1e-3)


def test_minimize_constant_returns_start():
    x0 = np.array([0.3, -2.0, 5.0])
    res = minimize(lambda x: 4.0, x0)
    np.testing.assert_array_equal(res.x, x0)
    assert res.fun == 4.0


def test_minimize_nonfinite_objective():
    with pytest.raises(NonFiniteObjective):
        minimize(lambda x: np.nan if x[0] > 0.01 else x[0] ** 2 - x[0], [0.0], step=1.0)


def test_minimize_respects_iteration_cap():
    res = minimize(lambda x: np.sum((x - 3.0) ** 2) + 1.0, np.zeros(8), max_iter=25)
    assert res.nit <= 25


@settings(max_examples=40, deadline=None)
@given(
    center=arrays(np.float64, 3, elements=st.floats(-50, 50)),
    x0=arrays(np.float64, 3, elements=st.floats(-50, 50)),
)
def test_minimize_best_seen_is_monotone(center, x0):
    f = lambda x: float(np.sum(np.abs(x - center) ** 1.5))
    res = minimize(f, x0, max_iter=300)
    assert res.fun <= f(x0)
    assert all(b <= a for a, b in zip(res.history, res.history[1:]))
    assert res.history[-1] == res.fun
