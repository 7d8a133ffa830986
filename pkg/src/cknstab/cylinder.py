"""Axisymmetric fields on the cylinder R x S^{n-1}.

A field f(s, theta) that is symmetric about the last coordinate axis is
stored by its coefficients against L^2-normalized zonal harmonics Y_l of the
polar angle, one axial profile per degree l <= L.  The axial direction is a
uniform grid on [-S, S] with homogeneous Dirichlet truncation; the angular
direction is a Gauss-Jacobi rule in x = theta_n that integrates polynomial
integrands of degree <= 2M-1 exactly.

The H^1 inner product used everywhere is

    <f, g> = sum_l  int  f_l' g_l' + (l(l+n-2) + Lambda) f_l g_l  ds,

realized discretely through the same pentadiagonal operators that the
elliptic solvers use, so that Riesz solves and norms are dual to each other
at roundoff rather than at discretization accuracy.
"""

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.special import roots_jacobi

from . import params as _params
from ._discrete import neg_d2_matrix, newton_ground_state, upper_band
from scipy.sparse import identity

__all__ = [
    "Grid",
    "SphereQuad",
    "Cylinder",
    "ZonalField",
    "sphere_area",
    "sphere_moment",
    "default_grid",
    "h1_inner",
    "h1_norm",
    "lp_norm",
    "pointwise_map",
    "save_field",
    "load_field",
]

DEFAULT_L = 8
DEFAULT_M = 64
DEFAULT_H = 0.05
MIN_POINTS = 4096  # per refinement unit; actual N is the next odd count


def sphere_area(n):
    """Surface measure of the unit sphere S^{n-1}."""
    return 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0)


def sphere_moment(n, k):
    """Integral of theta_n^{2k} over S^{n-1}.

    Equals |S^{n-1}| (2k-1)!! / (n (n+2) ... (n+2k-2)) for k >= 1.
    """
    if n < 2 or k < 0:
        raise ValueError("need n >= 2 and k >= 0")
    val = sphere_area(n)
    for j in range(1, k + 1):
        val *= (2 * j - 1) / (n + 2 * j - 2)
    return val


@dataclass(frozen=True)
class Grid:
    """Uniform axial grid on [-S, S] with an odd number of points."""

    S: float
    N: int

    def __post_init__(self):
        if self.N < 129 or self.N % 2 == 0:
            raise ValueError(f"N must be odd and >= 129, got {self.N}")

    @property
    def h(self):
        return 2.0 * self.S / (self.N - 1)

    @cached_property
    def s(self):
        s = np.linspace(-self.S, self.S, self.N)
        s.flags.writeable = False
        return s

    @cached_property
    def quad_w(self):
        w = np.full(self.N, self.h)
        w[0] *= 0.5
        w[-1] *= 0.5
        w.flags.writeable = False
        return w

    def validate_for(self, params):
        if self.S * params.sqrt_lam < 20.0:
            raise ValueError(
                f"grid half-width {self.S} too small for Lambda={params.Lam}"
            )
        if self.h > DEFAULT_H + 1e-12:
            raise ValueError(f"grid spacing {self.h} exceeds {DEFAULT_H}")


def default_grid(params, refine=1):
    """Default grid for the given parameters.

    Half-width is 30/sqrt(Lambda) or, if larger, the point where the ground
    state has decayed below e^{-21} of its peak (the two differ when p is
    close to 2, where the profile's cosh prefactor delays the decay).
    ``refine=2`` doubles the resolution for convergence studies.
    """
    S = max(
        30.0 / params.sqrt_lam,
        math.acosh(math.exp(10.5 * (params.p - 2.0))) / params.alpha,
    )
    h_target = DEFAULT_H / refine
    N = max(int(math.ceil(2.0 * S / h_target)) + 1, MIN_POINTS * refine + 1)
    if N % 2 == 0:
        N += 1
    return Grid(S=S, N=N)


class SphereQuad:
    """Gauss-Jacobi nodes/weights in x = theta_n plus a zonal-harmonic table.

    Weights are scaled so that constants integrate to |S^{n-1}|; harmonics are
    generated by the Gegenbauer three-term recurrence (Chebyshev for n = 2)
    and normalized against the quadrature itself.
    """

    def __init__(self, n, M=DEFAULT_M, L=DEFAULT_L):
        self.n = int(n)
        self.M = int(M)
        self.L = int(L)
        a = (n - 3) / 2.0
        x, w = roots_jacobi(M, a, a)
        w = w * (sphere_area(n) / w.sum())
        Y = np.empty((L + 1, M))
        Y[0] = 1.0
        if n == 2:
            if L >= 1:
                Y[1] = x
            for l in range(1, L):
                Y[l + 1] = 2.0 * x * Y[l] - Y[l - 1]
        else:
            lam = (n - 2) / 2.0
            if L >= 1:
                Y[1] = 2.0 * lam * x
            for l in range(1, L):
                Y[l + 1] = (2 * (l + lam) * x * Y[l] - (l + 2 * lam - 1) * Y[l - 1]) / (l + 1)
        for l in range(L + 1):
            Y[l] /= math.sqrt(float(np.sum(w * Y[l] ** 2)))
            if Y[l][np.argmax(x)] < 0.0:
                Y[l] = -Y[l]
        self.x = x
        self.w = w
        self.Y = Y
        self.x.flags.writeable = False
        self.w.flags.writeable = False
        self.Y.flags.writeable = False

    def eigenvalue(self, l):
        """Laplace-Beltrami eigenvalue l(l+n-2) of degree-l harmonics."""
        return float(l * (l + self.n - 2))

    def gram_defect(self):
        """Max deviation of the discrete Y_l Y_m Gram matrix from identity."""
        G = (self.Y * self.w) @ self.Y.T
        return float(np.max(np.abs(G - np.eye(self.L + 1))))

    def theta_power_coeffs(self, k):
        """Coefficients of theta_n^k against the normalized Y_l, l <= L."""
        return (self.Y * self.w) @ self.x**k


class Cylinder:
    """Discretization context: parameters, grid, angular rule, and operators."""

    def __init__(self, params, grid=None, L=DEFAULT_L, M=DEFAULT_M, refine=1):
        self.params = params
        self.grid = default_grid(params, refine) if grid is None else grid
        self.grid.validate_for(params)
        self.sphere = SphereQuad(params.n, M=M, L=L)
        self.L = self.sphere.L
        N, h = self.grid.N, self.grid.h
        d2 = neg_d2_matrix(N, h)
        self.sector_ops = [
            (d2 + (self.sphere.eigenvalue(l) + params.Lam) * identity(N, format="csc")).tocsc()
            for l in range(self.L + 1)
        ]
        self._sector_bands = [upper_band(A) for A in self.sector_ops]
        self._neg_d2 = d2

    # -- profile-level helpers -------------------------------------------------

    @cached_property
    def ground_state(self):
        """Discrete ground-state profile (Newton-polished bubble at t = 0)."""
        v0 = _params.bubble_profile(self.params, self.grid.s)
        return newton_ground_state(
            self.grid.s, self.grid.h, self.params.Lam, self.params.p, v0
        )

    def bubble(self, t=0.0):
        return _params.bubble_profile(self.params, self.grid.s, t)

    def bubble_ds(self, t=0.0):
        return _params.bubble_profile_ds(self.params, self.grid.s, t)

    def quad_s(self, profile):
        """Trapezoid integral of an axial profile."""
        return float(np.dot(self.grid.quad_w, profile))

    # -- field constructors ----------------------------------------------------

    def field(self, profiles):
        return ZonalField(self, np.asarray(profiles, dtype=float))

    def zero_field(self):
        return ZonalField(self, np.zeros((self.L + 1, self.grid.N)))

    def from_radial(self, profile):
        """Field f(s, theta) = profile(s), no angular dependence."""
        prof = np.zeros((self.L + 1, self.grid.N))
        prof[0] = math.sqrt(sphere_area(self.params.n)) * np.asarray(profile)
        return ZonalField(self, prof)

    def from_theta_power(self, profile, k):
        """Field profile(s) * theta_n^k, expanded over the zonal basis."""
        coeffs = self.sphere.theta_power_coeffs(k)
        prof = np.outer(coeffs, np.asarray(profile, dtype=float))
        return ZonalField(self, prof)

    def bubble_field(self, t=0.0, discrete=False):
        return self.from_radial(self.ground_state if discrete else self.bubble(t))

    def compatible(self, other):
        return (
            self.params == other.params
            and self.grid == other.grid
            and self.L == other.L
            and self.sphere.M == other.sphere.M
        )


class ZonalField:
    """Axisymmetric function stored as per-degree axial profiles.

    ``profiles[l]`` multiplies the normalized zonal harmonic of degree l; the
    array is frozen after construction, so fields behave as immutable values.
    """

    def __init__(self, cyl, profiles):
        profiles = np.array(profiles, dtype=float, copy=True)
        if profiles.shape != (cyl.L + 1, cyl.grid.N):
            raise ValueError(
                f"profiles shape {profiles.shape} does not match "
                f"(L+1, N) = {(cyl.L + 1, cyl.grid.N)}"
            )
        if not np.all(np.isfinite(profiles)):
            raise ValueError("field profiles must be finite")
        profiles.flags.writeable = False
        self.cyl = cyl
        self.profiles = profiles

    def radial_profile(self):
        """The angular mean profile, i.e. the l = 0 part as a raw function."""
        return self.profiles[0] / math.sqrt(sphere_area(self.cyl.params.n))

    def synthesize(self):
        """Values f(s_i, x_j) on the tensor grid, shape (N, M)."""
        return self.profiles.T @ self.cyl.sphere.Y

    def __add__(self, other):
        _check_same(self, other)
        return ZonalField(self.cyl, self.profiles + other.profiles)

    def __sub__(self, other):
        _check_same(self, other)
        return ZonalField(self.cyl, self.profiles - other.profiles)

    def __mul__(self, c):
        return ZonalField(self.cyl, float(c) * self.profiles)

    __rmul__ = __mul__

    def __neg__(self):
        return ZonalField(self.cyl, -self.profiles)

    def h1_norm(self):
        return h1_norm(self)

    def boundary_ratio(self):
        """max boundary value over max value, per the truncation contract."""
        peak = float(np.max(np.abs(self.profiles)))
        if peak == 0.0:
            return 0.0
        edge = float(np.max(np.abs(self.profiles[:, [0, -1]])))
        return edge / peak


def _check_same(f, g):
    if f.cyl is not g.cyl and not f.cyl.compatible(g.cyl):
        raise ValueError("fields live on different discretizations")


def duality_pairing(f, g):
    """Discrete L^2(cylinder) pairing sum_l h * f_l . g_l (endpoint-decayed)."""
    _check_same(f, g)
    return f.cyl.grid.h * float(np.sum(f.profiles * g.profiles))


def h1_inner(f, g):
    """H^1 inner product; symmetric, realized through the sector operators."""
    _check_same(f, g)
    cyl = f.cyl
    tot = 0.0
    for l in range(cyl.L + 1):
        tot += float(f.profiles[l] @ (cyl.sector_ops[l] @ g.profiles[l]))
    return cyl.grid.h * tot


def h1_norm(f):
    return math.sqrt(max(h1_inner(f, f), 0.0))


def l2_norm_sq(f):
    """Parseval form of the squared L^2 norm, sum_l int f_l^2."""
    return float(np.sum(f.profiles**2 @ f.cyl.grid.quad_w))


def lp_norm(f, q):
    """L^q norm over the cylinder by tensor quadrature of |f|^q."""
    if q < 1:
        raise ValueError(f"exponent must satisfy q >= 1, got {q}")
    vals = np.abs(f.synthesize()) ** q
    inner = vals @ f.cyl.sphere.w
    return float(np.dot(f.cyl.grid.quad_w, inner)) ** (1.0 / q)


def pointwise_map(f, fn):
    """Apply a scalar map pointwise and project back onto degrees l <= L.

    Exact (up to roundoff) whenever fn(f) is band-limited at degree L, e.g.
    for polynomial maps of band-limited fields with L and M large enough.  Use
    :func:`pointwise_map_with_tail` to also get the discarded-tail diagnostic.
    """
    out, _ = pointwise_map_with_tail(f, fn)
    return out


def pointwise_map_with_tail(f, fn):
    cyl = f.cyl
    vals = fn(f.synthesize())
    proj = (vals @ (cyl.sphere.w[:, None] * cyl.sphere.Y.T)).T
    # discarded angular tail, by Bessel against the discrete angular rule
    total = (vals**2) @ cyl.sphere.w @ cyl.grid.quad_w
    kept = float(np.sum(proj**2 @ cyl.grid.quad_w))
    tail = max(total - kept, 0.0) / total if total > 0 else 0.0
    return ZonalField(cyl, proj), tail


# -- flat-file serialization ---------------------------------------------------
#
# Layout (text, one record per line):
#   line 1:  "cknstab-field 1"           format tag and version
#   line 2:  n p L N S                   discretization header
#   next L+1 lines: N comma-separated profile values, degree 0 first.


def save_field(f, path):
    cyl = f.cyl
    with open(path, "w") as fh:
        fh.write("cknstab-field 1\n")
        fh.write(
            f"{cyl.params.n} {float(cyl.params.p)!r} {cyl.L} {cyl.grid.N} "
            f"{float(cyl.grid.S)!r}\n"
        )
        for l in range(cyl.L + 1):
            fh.write(",".join(repr(float(v)) for v in f.profiles[l]) + "\n")


def load_field(path, cyl=None):
    with open(path) as fh:
        tag = fh.readline().split()
        if tag[:1] != ["cknstab-field"]:
            raise ValueError(f"not a field file: {path}")
        n_s, p_s, L_s, N_s, S_s = fh.readline().split()
        n, p, L, N, S = int(n_s), float(p_s), int(L_s), int(N_s), float(S_s)
        if cyl is None:
            cyl = Cylinder(_params.from_pn(p, n), grid=Grid(S=S, N=N), L=L)
        profiles = np.loadtxt(fh, delimiter=",", ndmin=2)
    if profiles.shape != (L + 1, N):
        raise ValueError(f"malformed field file: {path}")
    return ZonalField(cyl, profiles)
