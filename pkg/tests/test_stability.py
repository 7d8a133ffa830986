import math

import numpy as np
import pytest

import cknstab as ck
from cknstab.stability import _ratio_series
from conftest import bubble_mass_exact


# --- manifold fitting -------------------------------------------------------


def test_nearest_bubble_on_manifold(cyl34):
    fit = ck.nearest_bubble(cyl34.bubble_field(1.3))
    assert fit.t_star == pytest.approx(1.3, abs=1e-6)
    assert fit.distance <= 1e-8
    assert fit.stationarity <= 1e-8
    assert fit.is_local_min


def test_nearest_bubble_orthogonal_perturbation(par34, cyl34):
    y = cyl34.from_theta_power(cyl34.bubble() ** (par34.p / 2.0), 1)
    v = cyl34.bubble_field() + 0.01 * y
    fit = ck.nearest_bubble(v)
    assert fit.t_star == pytest.approx(0.0, abs=1e-6)
    assert fit.projY > 0.0


def test_nearest_bubble_amplitude(cyl34):
    fit = ck.nearest_bubble(1.1 * cyl34.bubble_field(), fit_amplitude=True)
    assert fit.amplitude == pytest.approx(1.1, rel=1e-9)
    assert fit.distance <= 1e-8


def test_nearest_bubble_translation_equivariance(par34, cyl34):
    y = cyl34.from_theta_power(cyl34.bubble() ** (par34.p / 2.0), 1)
    v = cyl34.bubble_field() + 0.02 * y
    fit0 = ck.nearest_bubble(v)
    shift = 40  # grid points
    rolled = np.zeros_like(v.profiles)
    rolled[:, shift:] = v.profiles[:, :-shift]
    fit1 = ck.nearest_bubble(cyl34.field(rolled))
    tau = shift * cyl34.grid.h
    assert fit1.t_star - fit0.t_star == pytest.approx(tau, abs=1e-8)


def test_nearest_bubble_norm_guard(cyl34):
    with pytest.raises(ValueError):
        ck.nearest_bubble(0.01 * cyl34.bubble_field())


def test_project_Y_identity(par34, cyl34):
    yprof = np.zeros((cyl34.L + 1, cyl34.grid.N))
    yprof[1] = cyl34.bubble(0.4) ** (par34.p / 2.0)
    y = cyl34.field(yprof)
    coeff, rem = ck.project_Y(y, 0.4)
    assert coeff == pytest.approx(1.0, rel=1e-12)
    assert ck.h1_norm(rem) <= 1e-10 * ck.h1_norm(y)


def test_project_Y_sector_orthogonality(cyl34):
    coeff, rem = ck.project_Y(cyl34.bubble_field(), 0.0)
    assert coeff == 0.0
    assert np.array_equal(rem.profiles, cyl34.bubble_field().profiles)


def test_project_Y_linearity(par34, cyl34):
    yprof = np.zeros((cyl34.L + 1, cyl34.grid.N))
    yprof[1] = cyl34.bubble() ** (par34.p / 2.0)
    v = cyl34.field(yprof) + cyl34.bubble_field()
    coeff, rem = ck.project_Y(v, 0.0)
    assert coeff == pytest.approx(1.0, rel=1e-12)
    assert np.max(np.abs(rem.profiles - cyl34.bubble_field().profiles)) <= 1e-12


# --- the constants ----------------------------------------------------------


def quartic_coeff_oracle(par):
    """F from the Gamma closed forms of the three axial integrals."""
    p, n = par.p, par.n
    Ip = bubble_mass_exact(par, p)
    I2 = bubble_mass_exact(par, 2 * p - 2)
    I3 = bubble_mass_exact(par, 3 * p - 4)
    area = ck.sphere_area(n)
    return (p - 1) * (p - 2) / 4.0 * (
        (p - 1) * (I2 * ck.sphere_moment(n, 1)) ** 2 / (Ip * area)
        - (p - 3) / 3.0 * I3 * ck.sphere_moment(n, 2)
    )


def test_F_vs_gamma_oracle(par34):
    # the computed value uses the discrete ground state, which sits O(h^4)
    # from the sampled profile the closed form integrates
    assert ck.compute_F(par34) == pytest.approx(quartic_coeff_oracle(par34), rel=2e-8)


def test_F_p3_second_term_vanishes():
    par = ck.from_pn(3.0, 3)
    got = ck.compute_F(par)
    p, n = 3.0, 3
    I2 = bubble_mass_exact(par, 2 * p - 2)
    Ip = bubble_mass_exact(par, p)
    expect = (p - 1) * (p - 2) / 4.0 * (p - 1) * (
        I2 * ck.sphere_moment(n, 1)
    ) ** 2 / (Ip * ck.sphere_area(n))
    assert got == pytest.approx(expect, rel=1e-9)


def test_F_grid_stability(par34):
    a = ck.compute_F(ck.Cylinder(par34))
    b = ck.compute_F(ck.Cylinder(par34, refine=2))
    assert abs(a - b) / abs(a) <= 1e-8


def test_E0_matches_analytic_split(par34, cyl34):
    """The mean-mode part of E0 has a closed form; the second-mode part
    reduces to one axial solve.  Rebuild E0 from those two pieces."""
    p, n = par34.p, par34.n
    area = ck.sphere_area(n)
    m2 = ck.sphere_moment(n, 2) - area / n**2
    Ip = bubble_mass_exact(par34, p)
    I2 = bubble_mass_exact(par34, 2 * p - 2)
    I3 = bubble_mass_exact(par34, 3 * p - 4)
    mean_part = -area * (p - 1) * (p - 2) / n * (p / (8.0 * n)) * (I3 - I2**2 / Ip)
    eta1 = ck.bvp_solve(
        cyl34, 2, 2.0 * n + par34.Lam,
        ((p - 1) * (p - 2) / 2.0) * cyl34.ground_state ** (2 * p - 3.0),
    )
    mode2_part = -m2 * (p - 1) * (p - 2) / 2.0 * cyl34.quad_s(
        cyl34.ground_state ** (2 * p - 3.0) * eta1
    )
    assert ck.compute_E0(cyl34) == pytest.approx(mean_part + mode2_part, rel=1e-8)


def test_E_eps_linear_drift(par34, cyl34):
    E0 = ck.compute_E0(cyl34)
    drifts = []
    for eps in (1e-2, 1e-3):
        drifts.append(abs(ck.compute_E0(cyl34, eps) - E0) / eps)
    # O(eps) behaviour: the divided differences agree to first order
    assert drifts[0] == pytest.approx(drifts[1], rel=0.1)
    assert drifts[0] < 100.0 * abs(E0)


def test_E0_eps_guard(cyl34):
    with pytest.raises(ValueError):
        ck.compute_E0(cyl34, eps=0.2)


def test_signs_at_reference_point(par34, cyl34):
    E0 = ck.compute_E0(cyl34)
    F = ck.compute_F(cyl34)
    assert F > 0
    assert E0 + F > 0


# --- R(p, n) two ways -------------------------------------------------------


def test_R_routes_agree(par34, cyl34):
    Rg, terms, tail = ck.compute_R_gamma(par34)
    Re = ck.compute_R_energy(cyl34)
    assert abs(Rg - Re) / Rg <= 0.01
    assert tail <= 1e-9
    assert terms > 1000


def test_R_series_refinement(par34):
    a, _, _ = ck.compute_R_gamma(par34, rel_tol=1e-10)
    b, _, _ = ck.compute_R_gamma(par34, rel_tol=1e-13)
    assert abs(a - b) / abs(b) <= 1e-9


def test_R_series_decay_exponent(par34):
    res = _ratio_series(par34.p, par34.n, par34.Lam)
    assert res.tail_bound <= 1e-9


def test_R_positive_on_small_sweep():
    for n, p in [(2, 3.0), (3, 2.7), (4, 3.5), (5, 2.5)]:
        R, _, _ = ck.compute_R_gamma(ck.from_pn(p, n))
        assert R > 0


def test_stability_constants_bundle(par34, cyl34):
    sc = ck.stability_constants(cyl34)
    assert sc.F > 0 and sc.E0 + sc.F > 0
    assert abs(sc.R_energy - sc.R_gamma) <= 0.01 * sc.R_gamma
    assert "N=" in sc.grid_signature


def test_stability_constants_validation():
    with pytest.raises(ValueError):
        ck.StabilityConstants(
            E0=-2.0, F=1.0, R_energy=1.0, R_gamma=1.0, series_terms=10,
            tail_bound=0.0, grid_signature="x",
        )


# --- test-function bound ----------------------------------------------------


def test_bound_at_lambda_two(par34, cyl34):
    E0 = ck.compute_E0(cyl34)
    F = ck.compute_F(cyl34)
    got = ck.test_function_bound(cyl34, 2.0, E0=E0, F=F)
    assert got == pytest.approx(2.0 * (E0 + F), rel=1e-14)


def test_bound_coefficient_minimized_at_two():
    lams = np.linspace(0.2, 8.0, 200)
    coeff = (lams + 2.0) ** 2 / (4.0 * lams)
    assert np.all(coeff >= 2.0 - 1e-12)
    assert ((2.0 + 2.0) ** 2 / 8.0) == pytest.approx(2.0)


def test_bound_sign_flip_near_critical():
    par = ck.from_pn(5.8, 3)
    cyl = ck.Cylinder(par)
    E0 = ck.compute_E0(cyl)
    F = ck.compute_F(cyl)
    assert ck.test_function_bound(cyl, 2.0, E0=E0, F=F) > 0
    assert ck.test_function_bound(cyl, 1.0, E0=E0, F=F) < 0


def test_bound_rejects_nonpositive_lambda(cyl34):
    with pytest.raises(ValueError):
        ck.test_function_bound(cyl34, 0.0)


# --- the sharp family -------------------------------------------------------


def test_counterexample_at_zero_is_bubble(par34):
    w = ck.counterexample(par34, 0.0)
    assert np.array_equal(w.profiles, w.cyl.bubble_field(discrete=True).profiles)


def test_counterexample_mu_guard(par34):
    with pytest.raises(ValueError):
        ck.counterexample(par34, 0.06)


def test_corrector_identity_and_orthogonality(par34):
    cor = ck.corrector(par34)
    assert cor.identity_residual_l2 <= 1e-7
    assert max(abs(o) for o in cor.orthogonality) <= 1e-8
    assert cor.eta.boundary_ratio() <= 1e-6


def test_sharpness_input_validation(par34):
    with pytest.raises(ValueError):
        ck.sharpness_study(par34, [1e-3, 2e-3, 4e-3])  # too few
    with pytest.raises(ValueError):
        ck.sharpness_study(par34, [1e-4, 1e-3, 3e-3, 1e-2, 3e-2])  # out of range
