"""Small dense linear-algebra kernels and a derivative-free minimizer.

Everything here works on matrices of at most a few dozen entries, so the
routines favour robustness and transparency over speed: cyclic Jacobi for the
symmetric eigenproblem, a 3x3 SVD assembled from that eigensolver, an
SVD-backed least-squares solve with an explicit rank test, and a Nelder-Mead
simplex search with restarts.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import NoConvergence, NonFiniteObjective, NonSymmetric, RankDeficient

SYMMETRY_TOL = 1e-12
RANK_TOL = 1e-12


@dataclass(frozen=True)
class SymmetricEigenResult:
    """Eigenvalues in ascending order with matching orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


@dataclass(frozen=True)
class Svd3Result:
    """``M = U @ diag(S) @ V.T`` with ``S`` non-negative and descending."""

    U: np.ndarray
    S: np.ndarray
    V: np.ndarray


@dataclass
class MinimizeResult:
    x: np.ndarray
    fun: float
    nit: int
    nfev: int = 0
    history: list[float] = field(default_factory=list)

    def __iter__(self):
        # allows ``x, f, nit = minimize(...)``
        return iter((self.x, self.fun, self.nit))


def _as_matrix(a, name="matrix") -> np.ndarray:
    a = np.array(a, dtype=float)
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise ValueError(f"{name} must be a non-empty 2-D array, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} has non-finite entries")
    return a


def sym_eig(S, max_sweeps: int = 50) -> SymmetricEigenResult:
    """Full eigen-decomposition of a small symmetric matrix by cyclic Jacobi rotations.

    Eigenvalues come back ascending; equal eigenvalues keep the order of the
    diagonal positions they converged on.

    Raises:
        NonSymmetric: if ``S`` departs from symmetry by more than 1e-12 relative.
        NoConvergence: if the off-diagonal mass has not vanished after ``max_sweeps``.
    """
    a = _as_matrix(S, "S")
    n = a.shape[0]
    if a.shape[1] != n:
        raise NonSymmetric(f"S must be square, got shape {a.shape}")
    scale = np.max(np.abs(a))
    if np.max(np.abs(a - a.T)) > SYMMETRY_TOL * max(scale, np.finfo(float).tiny):
        raise NonSymmetric("S is not symmetric within 1e-12 relative")
    a = 0.5 * (a + a.T)
    v = np.eye(n)
    if scale == 0.0 or n == 1:
        return SymmetricEigenResult(np.diag(a).copy(), v)

    eps = np.finfo(float).eps
    for sweep in range(max_sweeps):
        if not np.any(np.triu(a, 1)):
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                # after a few sweeps, drop entries below the diagonal's precision
                g = 100.0 * abs(apq)
                if sweep > 3 and g < eps * abs(a[p, p]) and g < eps * abs(a[q, q]):
                    a[p, q] = a[q, p] = 0.0
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                if abs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = np.copysign(1.0, theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                col_p = a[:, p].copy()
                col_q = a[:, q].copy()
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
                row_p = a[p, :].copy()
                row_q = a[q, :].copy()
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q
                a[p, q] = a[q, p] = 0.0
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    else:
        raise NoConvergence(f"Jacobi eigensolver did not converge in {max_sweeps} sweeps")

    w = np.diag(a).copy()
    order = np.argsort(w, kind="stable")
    return SymmetricEigenResult(w[order], v[:, order])


def min_eigvec(S) -> np.ndarray:
    """Unit eigenvector of the smallest eigenvalue.

    The sign is fixed so that the entry of largest magnitude is positive.
    """
    vec = sym_eig(S).eigenvectors[:, 0].copy()
    vec /= np.linalg.norm(vec)
    if vec[np.argmax(np.abs(vec))] < 0:
        vec = -vec
    return vec


def _unit_orthogonal_to(u: np.ndarray) -> np.ndarray:
    axis = np.zeros(3)
    axis[np.argmin(np.abs(u))] = 1.0
    w = np.cross(u, axis)
    return w / np.linalg.norm(w)


def svd3(M) -> Svd3Result:
    """Singular value decomposition of a 3x3 matrix.

    Built from the eigen-decomposition of ``M.T @ M``. Left singular vectors
    are recovered as ``M v / |M v|`` and then re-orthogonalized, so ``U`` stays
    orthogonal even when singular values are tiny.
    """
    m = _as_matrix(M, "M")
    if m.shape != (3, 3):
        raise ValueError(f"svd3 expects a 3x3 matrix, got {m.shape}")
    eig = sym_eig(m.T @ m)
    v = eig.eigenvectors[:, ::-1].copy()
    mv = m @ v
    s = np.linalg.norm(mv, axis=0)
    order = np.argsort(-s, kind="stable")
    v, mv, s = v[:, order], mv[:, order], s[order]
    tiny = 1e-300 + 1e-15 * s[0]

    u = np.zeros((3, 3))
    if s[0] <= tiny:
        return Svd3Result(np.eye(3), np.zeros(3), v)
    u[:, 0] = mv[:, 0] / s[0]
    u2 = mv[:, 1] - (u[:, 0] @ mv[:, 1]) * u[:, 0]
    n2 = np.linalg.norm(u2)
    if s[1] > tiny and n2 > 0:
        u[:, 1] = u2 / n2
    else:
        u[:, 1] = _unit_orthogonal_to(u[:, 0])
    u[:, 2] = np.cross(u[:, 0], u[:, 1])
    if s[2] > tiny and u[:, 2] @ mv[:, 2] < 0:
        u[:, 2] = -u[:, 2]
    elif s[2] <= tiny and np.linalg.det(v) < 0:
        # free sign: keep det(U) and det(V) aligned for rank-deficient input
        u[:, 2] = -u[:, 2]
    return Svd3Result(u, s, v)


def lstsq(A, b) -> np.ndarray:
    """Least-squares solution of ``A x = b`` through the pseudo-inverse.

    Raises:
        RankDeficient: if the smallest singular value of ``A`` is below
            1e-12 times the largest.
    """
    a = _as_matrix(A, "A")
    b = np.asarray(b, dtype=float).reshape(-1)
    m, n = a.shape
    if b.shape[0] != m:
        raise ValueError(f"b has length {b.shape[0]}, expected {m}")
    if m < n:
        raise RankDeficient(f"underdetermined system: {m} equations, {n} unknowns")
    u, s, vt = np.linalg.svd(a, full_matrices=False)
    if s[-1] < RANK_TOL * s[0] or s[0] == 0.0:
        raise RankDeficient(
            f"coefficient matrix is rank deficient (sigma_min/sigma_max = {s[-1] / max(s[0], 1e-300):.3e})"
        )
    return vt.T @ ((u.T @ b) / s)


def minimize(
    objective: Callable[[np.ndarray], float],
    x0,
    *,
    max_iter: int = 2000,
    rtol: float = 1e-10,
    ftol_abs: float = -np.inf,
    step=None,
    max_restarts: int = 50,
) -> MinimizeResult:
    """Nelder-Mead simplex minimization with restarts.

    Uses the dimension-adaptive reflection/expansion/contraction coefficients
    of Gao and Han. The simplex is considered collapsed when the spread of its
    function values falls below ``rtol`` relative to the best value; the
    search then restarts around the best vertex with a smaller simplex and
    stops once a restart fails to lower the best value by more than ``rtol``
    relative, once the best value reaches ``ftol_abs``, or at ``max_iter``
    total iterations.

    ``step`` sets the initial edge length per coordinate (default: 5% of
    ``|x0|``, 2.5e-4 for zero entries).

    Raises:
        NonFiniteObjective: if the objective is non-finite at any evaluated point.
    """
    x0 = np.asarray(x0, dtype=float).reshape(-1)
    k = x0.size
    nfev = 0

    def f(x):
        nonlocal nfev
        nfev += 1
        val = float(objective(x))
        if not np.isfinite(val):
            raise NonFiniteObjective(f"objective returned {val} at x = {x.tolist()}")
        return val

    if step is None:
        step = np.where(x0 != 0.0, 0.05 * np.abs(x0), 2.5e-4)
    else:
        step = np.broadcast_to(np.asarray(step, dtype=float), (k,)).copy()

    rho = 1.0
    chi = 1.0 + 2.0 / k
    psi = 0.75 - 0.5 / k
    sigma = 1.0 - 1.0 / k

    best_x = x0.copy()
    best_f = f(best_x)
    history = [best_f]
    nit = 0

    for restart in range(max_restarts + 1):
        if best_f <= ftol_abs or nit >= max_iter:
            break
        start_f = best_f
        simplex = np.vstack([best_x] + [best_x + step[i] * np.eye(k)[i] for i in range(k)])
        fs = np.array([best_f] + [f(p) for p in simplex[1:]])

        while nit < max_iter:
            order = np.argsort(fs, kind="stable")
            simplex, fs = simplex[order], fs[order]
            if fs[0] < best_f:
                best_f, best_x = fs[0], simplex[0].copy()
            if fs[-1] - fs[0] <= rtol * abs(fs[0]) or fs[0] <= ftol_abs:
                break
            nit += 1
            centroid = simplex[:-1].mean(axis=0)
            xr = centroid + rho * (centroid - simplex[-1])
            fr = f(xr)
            if fr < fs[0]:
                xe = centroid + chi * (xr - centroid)
                fe = f(xe)
                if fe < fr:
                    simplex[-1], fs[-1] = xe, fe
                else:
                    simplex[-1], fs[-1] = xr, fr
            elif fr < fs[-2]:
                simplex[-1], fs[-1] = xr, fr
            else:
                if fr < fs[-1]:
                    xc = centroid + psi * (xr - centroid)
                    fc = f(xc)
                    accept = fc <= fr
                else:
                    xc = centroid - psi * (centroid - simplex[-1])
                    fc = f(xc)
                    accept = fc < fs[-1]
                if accept:
                    simplex[-1], fs[-1] = xc, fc
                else:
                    simplex[1:] = simplex[0] + sigma * (simplex[1:] - simplex[0])
                    fs[1:] = [f(p) for p in simplex[1:]]
            cur = min(best_f, float(np.min(fs)))
            history.append(cur)
        i = int(np.argmin(fs))
        if fs[i] < best_f:
            best_f, best_x = fs[i], simplex[i].copy()

        if restart > 0 and start_f - best_f <= rtol * abs(start_f):
            break
        # next simplex spans the last one's extent, floored to stay non-degenerate
        extent = np.max(np.abs(simplex - best_x), axis=0)
        step = np.maximum(extent, 1e-3 * step)

    return MinimizeResult(best_x, best_f, nit, nfev, history)
