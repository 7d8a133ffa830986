"""The cylinder operator, its linearization, and the dual-norm machinery.

The distributional residual of a field v is

    H(v) = v_ss + Delta_theta v - Lambda v + |v|^{p-2} v,

and its dual norm is realized exactly as the Riesz dual of the discrete H^1
inner product: solve (-d^2 - Delta_theta + Lambda) phi = f sector by sector
and return sqrt(<f, phi>).  Because the same banded operators define both the
inner product and the solve, <f, phi> = ||phi||_{H^1}^2 holds at roundoff.
"""

import logging
import math

import numpy as np
from scipy.linalg import solveh_banded

from ._discrete import (
    fold_even,
    fold_odd,
    fold_form,
    neg_d2_matrix,
    smallest_singular_estimate,
    solve_pentadiagonal,
)
from .cylinder import ZonalField, duality_pairing, pointwise_map_with_tail

from scipy.sparse import diags

__all__ = [
    "Residual",
    "apply_H1",
    "linearized_apply",
    "riesz_solve",
    "hminus1_norm",
    "bvp_solve",
    "fit_decay_rate",
]

log = logging.getLogger(__name__)

TAIL_BUDGET = 1e-8  # relative angular energy the nonlinearity may shed


class Residual(ZonalField):
    """Field layout reused for elements of the dual space.

    ``tail_fraction`` records the relative angular energy discarded when the
    nonlinearity was projected back to degrees <= L.
    """

    def __init__(self, cyl, profiles, tail_fraction=0.0):
        super().__init__(cyl, profiles)
        self.tail_fraction = tail_fraction


def apply_H1(v):
    """Residual v_ss + Delta_theta v - Lambda v + |v|^{p-2} v of a field."""
    cyl = v.cyl
    p = cyl.params.p
    out = np.empty_like(v.profiles)
    for l in range(cyl.L + 1):
        out[l] = -(cyl.sector_ops[l] @ v.profiles[l])
    nonlin, tail = pointwise_map_with_tail(v, lambda z: np.abs(z) ** (p - 2.0) * z)
    if tail > TAIL_BUDGET:
        log.warning("nonlinearity shed %.2e of its angular energy (budget %e)", tail, TAIL_BUDGET)
    return Residual(cyl, out + nonlin.profiles, tail_fraction=tail)


def linearized_apply(rho, t=0.0):
    """-rho_ss - Delta_theta rho + Lambda rho - (p-1) V_t^{p-2} rho.

    The potential is radial, so it acts on each harmonic profile directly; no
    angular synthesis is involved and no tail is shed.
    """
    cyl = rho.cyl
    p = cyl.params.p
    weight = (p - 1.0) * cyl.bubble(t) ** (p - 2.0)
    out = np.empty_like(rho.profiles)
    for l in range(cyl.L + 1):
        out[l] = cyl.sector_ops[l] @ rho.profiles[l] - weight * rho.profiles[l]
    return Residual(cyl, out)


def riesz_solve(f):
    """Solve (-d^2 - Delta_theta + Lambda) phi = f sector-wise.

    The sector operators are positive definite with spectrum inside
    [Lambda, 64/(12 h^2) + lam_L + Lambda], so an upper conditioning bound is
    available for free; it is reported if it ever reaches 1e12 (it sits near
    1e5 on default grids).
    """
    cyl = f.cyl
    h = cyl.grid.h
    cond_bound = (
        64.0 / (12.0 * h * h) + cyl.sphere.eigenvalue(cyl.L) + cyl.params.Lam
    ) / cyl.params.Lam
    if cond_bound > 1e12:
        log.warning("sector solve conditioning bound %.2e exceeds 1e12", cond_bound)
    out = np.zeros_like(f.profiles)
    for l in range(cyl.L + 1):
        if np.any(f.profiles[l]):
            out[l] = solveh_banded(cyl._sector_bands[l], f.profiles[l])
    return ZonalField(cyl, out)


def hminus1_norm(f):
    """Dual norm sqrt(<f, riesz_solve(f)>); equals the H^1 norm of the solve."""
    phi = riesz_solve(f)
    return math.sqrt(max(duality_pairing(f, phi), 0.0))


def _parity_of(prof, tol=1e-12):
    flipped = prof[::-1]
    scale = float(np.max(np.abs(prof)))
    if scale == 0.0:
        return "even"
    if float(np.max(np.abs(prof - flipped))) <= tol * scale:
        return "even"
    if float(np.max(np.abs(prof + flipped))) <= tol * scale:
        return "odd"
    return "none"


def bvp_solve(cyl, ell, mass_shift, rhs, singular_tol=1e-8):
    """Decaying solution g of  -g'' + mass_shift g - (p-1) V0^{p-2} g = rhs.

    The potential is built from the discrete ground state.  When the right
    hand side has a definite parity the solve is restricted to that parity
    class, which keeps the operator safely invertible even in the axial
    sector, where the translation mode would otherwise sit near the kernel.
    """
    params = cyl.params
    N, h = cyl.grid.N, cyl.grid.h
    rhs = np.asarray(rhs, dtype=float)
    if rhs.shape != (N,):
        raise ValueError("rhs must be an axial profile on the grid")
    weight = (params.p - 1.0) * cyl.ground_state ** (params.p - 2.0)
    full = neg_d2_matrix(N, h) + diags(mass_shift - weight)

    parity = _parity_of(rhs)
    if parity == "even":
        E = fold_even(N)
    elif parity == "odd":
        E = fold_odd(N)
    else:
        E = None

    if E is not None:
        A = fold_form(E, full)
        b = np.asarray(E.T @ rhs).ravel()
    else:
        A = full.tocsc()
        b = rhs

    smallest = smallest_singular_estimate(A)
    if smallest <= singular_tol:
        raise ArithmeticError(
            f"near-singular axial operator in sector ell={ell} at "
            f"(p, n) = ({params.p}, {params.n}): smallest eigenvalue "
            f"estimate {smallest:.2e}"
        )
    x = solve_pentadiagonal(A, b)
    g = np.asarray(E @ x).ravel() if E is not None else x

    resid = np.asarray(full @ g).ravel() - rhs
    rel = math.sqrt(h * float(resid @ resid)) / max(
        math.sqrt(h * float(rhs @ rhs)), 1e-300
    )
    if rel > 1e-9:
        raise ArithmeticError(
            f"axial solve residual {rel:.2e} exceeds 1e-9 in sector ell={ell}"
        )
    return g


def fit_decay_rate(s, profile, upper=1e-3, lower=1e-8):
    """Least-squares exponential decay rate of |profile| on its right tail.

    Fits log|g| against s over the window where |g| lies between ``upper``
    and ``lower`` times its peak, away from both the core and the truncation
    floor.
    """
    g = np.abs(np.asarray(profile, dtype=float))
    peak = float(np.max(g))
    i0 = int(np.argmax(g))
    mask = np.zeros_like(g, dtype=bool)
    mask[i0:] = (g[i0:] < upper * peak) & (g[i0:] > lower * peak)
    if np.count_nonzero(mask) < 8:
        raise ValueError("tail window too short to fit a decay rate")
    slope = np.polyfit(s[mask], np.log(g[mask]), 1)[0]
    return -float(slope)
