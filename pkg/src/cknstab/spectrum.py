"""Generalized eigenproblem of the linearized operator, one harmonic sector
at a time:

    -phi'' + (l(l+n-2) + Lambda) phi = gamma V0^{p-2} phi  on [-S, S].

The pencil (A, B) has A symmetric positive definite (pentadiagonal stencil
plus positive mass) and B the diagonal bubble weight, which is strictly
positive but exponentially small in the tails; the smallest eigenvalues are
extracted by shift-invert Lanczos about gamma = 0, which never divides by the
tiny tail weights.  Even and odd axial parities are solved separately and
merged, so the translation mode and the ground state never mix numerically.
"""

from dataclasses import dataclass

import numpy as np
from scipy.sparse import diags, identity
from scipy.sparse.linalg import ArpackNoConvergence, eigsh

from ._discrete import fold_even, fold_odd, fold_form, neg_d2_matrix

__all__ = ["SectorSpectrum", "eigensolve_sector", "gamma3"]

B_FLOOR = 1e-300  # keeps the pencil definite where the weight underflows


@dataclass(frozen=True)
class SectorSpectrum:
    """Eigenvalues (ascending) and B-normalized eigenprofiles of one sector."""

    ell: int
    eigenvalues: np.ndarray
    eigenprofiles: np.ndarray  # shape (k, N)
    residuals: np.ndarray      # relative pencil residual per pair

    def orthogonality_defect(self, cyl):
        """Max off-diagonal of the B-weighted Gram matrix of the profiles."""
        w = cyl.ground_state ** (cyl.params.p - 2.0) * cyl.grid.quad_w
        G = (self.eigenprofiles * w) @ self.eigenprofiles.T
        return float(np.max(np.abs(G - np.eye(len(self.eigenvalues)))))


def _parity_pencil(cyl, ell, parity):
    N, h = cyl.grid.N, cyl.grid.h
    A = neg_d2_matrix(N, h) + (cyl.sphere.eigenvalue(ell) + cyl.params.Lam) * identity(
        N, format="csc"
    )
    weight = np.maximum(cyl.ground_state ** (cyl.params.p - 2.0), B_FLOOR)
    B = diags(weight).tocsc()
    E = fold_even(N) if parity == "even" else fold_odd(N)
    return fold_form(E, A), fold_form(E, B), E


def eigensolve_sector(cyl, ell, k=3):
    """The k smallest eigenvalues of the sector-ell pencil with eigenprofiles.

    Profiles are normalized to int V0^{p-2} phi^2 = 1 and signed so that the
    first nonzero lobe from the left of center is positive.
    """
    if k < 1 or k > 10:
        raise ValueError("eigenvalue count must satisfy 1 <= k <= 10")
    pairs = []
    for parity in ("even", "odd"):
        A, B, E = _parity_pencil(cyl, ell, parity)
        try:
            vals, vecs = eigsh(A, k=k, M=B, sigma=0.0, which="LM")
        except ArpackNoConvergence as exc:
            raise ArithmeticError(
                f"eigensolver failed to converge in sector ell={ell} "
                f"({parity} parity) at (p, n) = ({cyl.params.p}, {cyl.params.n})"
            ) from exc
        for gamma, x in zip(vals, vecs.T):
            pairs.append((float(gamma), np.asarray(E @ x).ravel()))
    pairs.sort(key=lambda t: t[0])
    pairs = pairs[:k]

    weight = cyl.ground_state ** (cyl.params.p - 2.0)
    qw = cyl.grid.quad_w
    mid = (cyl.grid.N - 1) // 2
    profiles, gammas, residuals = [], [], []
    A_full = cyl.sector_ops[ell]
    for gamma, phi in pairs:
        nrm = np.sqrt(float(np.sum(qw * weight * phi * phi)))
        phi = phi / nrm
        lobe = phi[mid:][np.argmax(np.abs(phi[mid:]) > 1e-8 * np.max(np.abs(phi)))]
        if lobe < 0:
            phi = -phi
        r = A_full @ phi - gamma * (weight * phi)
        scale = np.linalg.norm(A_full @ phi) + abs(gamma) * np.linalg.norm(weight * phi)
        residuals.append(float(np.linalg.norm(r) / scale))
        profiles.append(phi)
        gammas.append(gamma)
    return SectorSpectrum(
        ell=ell,
        eigenvalues=np.asarray(gammas),
        eigenprofiles=np.asarray(profiles),
        residuals=np.asarray(residuals),
    )


def gamma3(cyl, margin=1e-6):
    """Smallest eigenvalue strictly above p - 1 across sectors ell <= L."""
    p = cyl.params.p
    best = np.inf
    for ell in range(cyl.L + 1):
        k = 3 if ell == 0 else (2 if ell == 1 else 1)
        spec = eigensolve_sector(cyl, ell, k=k)
        for gamma in spec.eigenvalues:
            if gamma > p - 1.0 + margin:
                best = min(best, float(gamma))
    return best
