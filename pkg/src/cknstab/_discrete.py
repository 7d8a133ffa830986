"""Banded finite-difference building blocks shared by the axial solvers.

Everything here works on uniform grids with homogeneous Dirichlet data at
the endpoints, realized by zero extension: the 5-point stencil simply sees
zeros beyond the grid.  Fields that reach the boundary with non-negligible
values violate the discretization contract and are caught upstream.
"""

import numpy as np
from scipy.linalg import solve_banded, solveh_banded
from scipy.sparse import csc_matrix, diags, identity


def neg_d2_matrix(N, h):
    """Sparse symmetric -d^2/ds^2, 4th-order central stencil, zero extension."""
    c = 1.0 / (12.0 * h * h)
    main = np.full(N, 30.0 * c)
    off1 = np.full(N - 1, -16.0 * c)
    off2 = np.full(N - 2, 1.0 * c)
    return diags([off2, off1, main, off1, off2], [-2, -1, 0, 1, 2], format="csc")


def band_from_sparse(A, kl=2, ku=2):
    """LAPACK banded storage (solve_banded layout) of a sparse matrix."""
    A = A.tocoo()
    ab = np.zeros((kl + ku + 1, A.shape[0]))
    np.add.at(ab, (ku + A.row - A.col, A.col), A.data)
    return ab


def solve_pentadiagonal(A, rhs):
    """LU solve of a (possibly unsymmetric-stored) bandwidth-2 sparse matrix."""
    return solve_banded((2, 2), band_from_sparse(A), rhs)


def solve_spd_pentadiagonal(ab_upper, rhs):
    """Cholesky solve; ab_upper are the three upper rows of the LAPACK band."""
    return solveh_banded(ab_upper, rhs)


def upper_band(A):
    return band_from_sparse(A)[:3].copy()


def fold_even(N):
    """Extension matrix from the half grid [0, S] to [-S, S] for even profiles.

    The half grid carries indices 0..m with m = (N-1)//2; index 0 is s = 0.
    """
    mid = (N - 1) // 2
    rows = [mid]
    cols = [0]
    vals = [1.0]
    for j in range(1, mid + 1):
        rows += [mid + j, mid - j]
        cols += [j, j]
        vals += [1.0, 1.0]
    return csc_matrix((vals, (rows, cols)), shape=(N, mid + 1))


def fold_odd(N):
    """Extension matrix for odd profiles; half grid excludes s = 0."""
    mid = (N - 1) // 2
    rows, cols, vals = [], [], []
    for j in range(1, mid + 1):
        rows += [mid + j, mid - j]
        cols += [j - 1, j - 1]
        vals += [1.0, -1.0]
    return csc_matrix((vals, (rows, cols)), shape=(N, mid))


def fold_form(E, A):
    """Restriction E^T A E of a full-grid quadratic form to a parity class."""
    return (E.T @ A @ E).tocsc()


def smallest_singular_estimate(A, iters=6, seed=0):
    """Cheap inverse-iteration bound for the smallest |eigenvalue| of a banded
    symmetric operator; used only as a conditioning guard before solves."""
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(A.shape[0])
    x /= np.linalg.norm(x)
    ab = band_from_sparse(A)
    est = np.inf
    for _ in range(iters):
        y = solve_banded((2, 2), ab, x)
        ny = np.linalg.norm(y)
        if not np.isfinite(ny) or ny == 0.0:
            return 0.0
        est = 1.0 / ny
        x = y / ny
    return est


def newton_ground_state(s, h, lam, p, v_init, tol_factor=1e-13, max_iter=12):
    """Discrete positive ground state of -v'' + lam v = v^{p-1} on the grid.

    Solves on the even half grid (the state is even, and the odd translation
    mode would otherwise make the Jacobian numerically singular).  Returns the
    full-grid profile; the residual of the returned iterate is at roundoff
    level of the stencil, so downstream constructions built from it cancel to
    machine precision instead of to the sampling error of the continuum state.
    """
    N = len(s)
    E = fold_even(N)
    A = fold_form(E, neg_d2_matrix(N, h))
    mid = (N - 1) // 2
    w = np.full(mid + 1, 2.0)
    w[0] = 1.0
    v = np.asarray(v_init, dtype=float)[mid:].copy()
    scale = (30.0 / (12.0 * h * h)) * float(np.max(v))
    for _ in range(max_iter):
        F = np.asarray(A @ v).ravel() + lam * (w * v) - w * np.abs(v) ** (p - 2.0) * v
        if np.max(np.abs(F)) < tol_factor * scale:
            break
        J = A + diags(lam * w - (p - 1.0) * w * np.abs(v) ** (p - 2.0))
        v = v - solve_pentadiagonal(J, F)
    return np.concatenate([v[::-1][:-1], v])
