"""Command-line driver: sweeps, tables, and machine-readable reports.

Commands
--------
constants     E0, F, and both R routes per (p, n)
spectrum      sector eigenvalues and the spectral gap per (p, n)
sharpness     log-log slope study of the degenerate family per (p, n)
interactions  pairwise interaction windows and bubble-sum residuals
selftest      quick battery over the package invariants (exit code reports)

Output is CSV (default) or JSON; identical config and seed give identical
bytes.  A flat key=value config file can seed any option; explicit flags win.
"""

import argparse
import json
import math
import sys

import numpy as np

from . import cylinder as cyl_mod
from . import multibubble as mb
from . import spectrum as spec_mod
from . import stability as stab
from .cylinder import Cylinder, Grid, sphere_area, sphere_moment
from .operators import apply_H1, hminus1_norm, riesz_solve
from .params import bubble_profile, emden_fowler, felli_schneider_b, from_pn, two_star

N2_P_CAP = 12.0  # sweep cap for n = 2, where 2* is unbounded


def _parse_values(tokens):
    """Expand 'a:b:step' range syntax; plain floats pass through."""
    out = []
    for tok in tokens:
        if ":" in str(tok):
            a, b, step = (float(x) for x in str(tok).split(":"))
            k = int(math.floor((b - a) / step + 1e-9))
            out.extend(a + i * step for i in range(k + 1))
        else:
            out.append(float(tok))
    return out


def build_parser():
    ap = argparse.ArgumentParser(prog="cknstab", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    for name in ("constants", "spectrum", "sharpness", "interactions", "selftest"):
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="flat key=value file; flags override")
        sp.add_argument("--n", nargs="*", type=int, default=None)
        sp.add_argument("--p", nargs="*", default=None,
                        help="values or a:b:step ranges")
        sp.add_argument("--grid-N", dest="grid_N", type=int, default=None)
        sp.add_argument("--grid-S", dest="grid_S", type=float, default=None)
        sp.add_argument("--L", type=int, default=None)
        sp.add_argument("--M", type=int, default=None)
        sp.add_argument("--mu", nargs="*", type=float, default=None)
        sp.add_argument("--gaps", nargs="*", type=float, default=None,
                        help="center gaps in units of 1/sqrt(Lambda)")
        sp.add_argument("--out", default=None, help="output path (default stdout)")
        sp.add_argument("--format", dest="fmt", choices=("csv", "json"), default=None)
        sp.add_argument("--seed", type=int, default=None)
    return ap


def _load_config_file(path):
    cfg = {}
    with open(path) as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"bad config line: {raw!r}")
            key, val = (x.strip() for x in line.split("=", 1))
            key = key.replace("-", "_")
            if key == "format":
                key = "fmt"
            cfg[key] = val.split()
    return cfg


def resolve_config(args):
    """Merge file values under explicit flags and fill defaults."""
    file_cfg = _load_config_file(args.config) if args.config else {}

    def pick(name, cast, default):
        cli_val = getattr(args, name, None)
        if cli_val is not None:
            return cli_val
        if name in file_cfg:
            return cast(file_cfg[name])
        return default

    ns = pick("n", lambda v: [int(x) for x in v], [3])
    ps = pick("p", list, ["4.0"])
    cfg = {
        "command": args.command,
        "n": ns,
        "p": _parse_values(ps),
        "grid_N": pick("grid_N", lambda v: int(v[0]), None),
        "grid_S": pick("grid_S", lambda v: float(v[0]), None),
        "L": pick("L", lambda v: int(v[0]), cyl_mod.DEFAULT_L),
        "M": pick("M", lambda v: int(v[0]), cyl_mod.DEFAULT_M),
        "mu": pick("mu", lambda v: [float(x) for x in v],
                   list(np.geomspace(1e-3, 3e-2, 7))),
        "gaps": pick("gaps", lambda v: [float(x) for x in v],
                     list(np.linspace(4.0, 12.0, 9))),
        "out": pick("out", lambda v: v[0], None),
        "fmt": pick("fmt", lambda v: v[0], "csv"),
        "seed": pick("seed", lambda v: int(v[0]), 0),
    }
    pairs = []
    for n in cfg["n"]:
        for p in cfg["p"]:
            if not (2.0 < p < two_star(n)):
                raise SystemExit(f"inadmissible pair (p, n) = ({p}, {n})")
            if n == 2 and p > N2_P_CAP:
                raise SystemExit(f"n = 2 sweeps are capped at p <= {N2_P_CAP}")
            pairs.append((p, n))
    cfg["pairs"] = pairs
    return cfg


def _make_cylinder(cfg, params, refine=1):
    if cfg["grid_N"] is None and cfg["grid_S"] is None:
        grid = cyl_mod.default_grid(params, refine)
    else:
        base = cyl_mod.default_grid(params, refine)
        S = cfg["grid_S"] if cfg["grid_S"] is not None else base.S
        N = cfg["grid_N"] if cfg["grid_N"] is not None else base.N
        grid = Grid(S=S, N=N)
    return Cylinder(params, grid=grid, L=cfg["L"], M=cfg["M"])


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def emit(cfg, columns, rows, meta):
    if cfg["fmt"] == "csv":
        lines = [",".join(columns)]
        lines += [",".join(_fmt(r.get(c, "")) for c in columns) for r in rows]
        text = "\n".join(lines) + "\n"
    else:
        text = json.dumps({"meta": meta, "rows": rows}, indent=2, sort_keys=True) + "\n"
    if cfg["out"] in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(cfg["out"], "w") as fh:
            fh.write(text)


def _meta(cfg):
    from . import __version__

    return {
        "version": __version__,
        "command": cfg["command"],
        "pairs": [[p, n] for (p, n) in cfg["pairs"]],
        "L": cfg["L"],
        "M": cfg["M"],
        "seed": cfg["seed"],
    }


def cmd_constants(cfg):
    columns = [
        "n", "p", "E0", "F", "E0_over_F_plus_1", "R_energy", "R_gamma",
        "rel_discrepancy", "series_terms", "tail_bound", "residual_floor",
        "grid_signature", "error",
    ]
    rows = []
    for p, n in cfg["pairs"]:
        row = {"n": n, "p": p, "error": ""}
        try:
            cyl = _make_cylinder(cfg, from_pn(p, n))
            sc = stab.stability_constants(cyl)
            floor = hminus1_norm(apply_H1(cyl.bubble_field()))
            row.update(
                E0=sc.E0, F=sc.F, E0_over_F_plus_1=sc.E0 / sc.F + 1.0,
                R_energy=sc.R_energy, R_gamma=sc.R_gamma,
                rel_discrepancy=abs(sc.R_energy - sc.R_gamma) / sc.R_gamma,
                series_terms=sc.series_terms, tail_bound=sc.tail_bound,
                residual_floor=floor, grid_signature=sc.grid_signature,
            )
        except Exception as exc:  # keep the sweep alive, record the failure
            row["error"] = f"{type(exc).__name__}: {exc}"
        rows.append(row)
    emit(cfg, columns, rows, _meta(cfg))
    return 0


def cmd_spectrum(cfg):
    columns = ["n", "p", "ell", "index", "gamma", "residual", "grid_signature", "error"]
    rows = []
    for p, n in cfg["pairs"]:
        try:
            cyl = _make_cylinder(cfg, from_pn(p, n))
            sig = f"N={cyl.grid.N};S={cyl.grid.S:.6g}"
            for ell, k in ((0, 3), (1, 2)):
                spec = spec_mod.eigensolve_sector(cyl, ell, k=k)
                for i, (g, r) in enumerate(zip(spec.eigenvalues, spec.residuals)):
                    rows.append({"n": n, "p": p, "ell": ell, "index": i,
                                 "gamma": float(g), "residual": float(r),
                                 "grid_signature": sig, "error": ""})
            g3 = spec_mod.gamma3(cyl)
            rows.append({"n": n, "p": p, "ell": "all", "index": "gamma3",
                         "gamma": g3, "residual": 0.0, "grid_signature": sig,
                         "error": ""})
        except Exception as exc:
            rows.append({"n": n, "p": p, "ell": "", "index": "",
                         "gamma": "", "residual": "", "grid_signature": "",
                         "error": f"{type(exc).__name__}: {exc}"})
    emit(cfg, columns, rows, _meta(cfg))
    return 0


def cmd_sharpness(cfg):
    columns = [
        "n", "p", "kind", "mu", "residual", "distance", "proj_norm",
        "perp_distance", "naive_residual", "ratio", "error",
    ]
    rows = []
    for p, n in cfg["pairs"]:
        try:
            rep = stab.sharpness_study(from_pn(p, n), cfg["mu"])
            for i, mu in enumerate(rep.mus):
                rows.append({
                    "n": n, "p": p, "kind": "sample", "mu": float(mu),
                    "residual": float(rep.residuals[i]),
                    "distance": float(rep.distances[i]),
                    "proj_norm": float(rep.proj_norms[i]),
                    "perp_distance": float(rep.perp_distances[i]),
                    "naive_residual": float(rep.naive_residuals[i]),
                    "ratio": float(rep.ratios[i]), "error": "",
                })
            rows.append({
                "n": n, "p": p, "kind": "slopes", "mu": "",
                "residual": rep.residual_slope, "distance": rep.distance_slope,
                "proj_norm": rep.proj_slope, "perp_distance": rep.perp_slope,
                "naive_residual": rep.naive_slope,
                "ratio": float(rep.ratios[-1]), "error": "",
            })
        except Exception as exc:
            rows.append({"n": n, "p": p, "kind": "error", "mu": "",
                         "error": f"{type(exc).__name__}: {exc}"})
    emit(cfg, columns, rows, _meta(cfg))
    return 0


def cmd_interactions(cfg):
    columns = ["n", "p", "kind", "gap", "value", "predicted", "ratio", "error"]
    rows = []
    for p, n in cfg["pairs"]:
        try:
            par = from_pn(p, n)
            rl = par.sqrt_lam
            for rel_gap in cfg["gaps"]:
                gap = rel_gap / rl
                v1 = mb.interaction(par, 0.0, gap, 1.0, p - 1.0)
                pred1 = math.exp(-rl * gap)
                v2 = mb.interaction(par, 0.0, gap, p / 2.0, p / 2.0)
                pred2 = (gap + 1.0) * math.exp(-p * rl / 2.0 * gap)
                v3 = mb.interaction_derivative(par, 0.0, gap)
                pred3 = math.exp(-rl * gap)
                cfg2 = mb.BubbleConfig(params=par, centers=(-gap / 2, gap / 2))
                diag = mb.bubble_sum_residual(cfg2)
                for kind, val, pred in (
                    ("pair_min_exponent", v1, pred1),
                    ("pair_balanced", v2, pred2),
                    ("derivative", v3, pred3),
                    ("sum_residual", diag.residual, diag.Q),
                    (f"gap_norm_W{diag.norm_index}", diag.nonlinear_gap_norm, 1.0),
                ):
                    rows.append({"n": n, "p": p, "kind": kind, "gap": gap,
                                 "value": val, "predicted": pred,
                                 "ratio": val / pred, "error": ""})
        except Exception as exc:
            rows.append({"n": n, "p": p, "kind": "error", "gap": "",
                         "error": f"{type(exc).__name__}: {exc}"})
    emit(cfg, columns, rows, _meta(cfg))
    return 0


# ---------------------------------------------------------------------------
# selftest
# ---------------------------------------------------------------------------


def _selftest_checks(cfg):
    rng = np.random.default_rng(cfg["seed"])
    par = from_pn(4.0, 3)
    cyl = Cylinder(par)

    def curve_roundtrip():
        worst = 0.0
        for n in (2, 3, 4, 5, 6):
            cap = N2_P_CAP if n == 2 else two_star(n) - 0.05
            for p in np.linspace(2.1, cap, 10):
                worst = max(worst, max(from_pn(float(p), n).curve_residuals()))
        return worst <= 1e-12, f"max curve defect {worst:.2e}"

    def moments_vs_beta():
        worst = 0.0
        for n in (2, 3, 4, 5, 6):
            area_nm1 = 2.0 * math.pi ** ((n - 1) / 2.0) / math.gamma((n - 1) / 2.0)
            for k in range(5):
                # |S^{n-2}| * B(k + 1/2, (n-1)/2) in log-Gamma form
                oracle = area_nm1 * math.exp(
                    math.lgamma(k + 0.5) + math.lgamma((n - 1) / 2.0)
                    - math.lgamma(k + n / 2.0)
                )
                got = sphere_moment(n, k)
                worst = max(worst, abs(got - oracle) / oracle)
        return worst <= 1e-12, f"max moment defect {worst:.2e}"

    def bubble_mass():
        from scipy.special import gammaln

        q = par.p
        m = q / (par.p - 2.0)
        exact = par.beta**q * math.sqrt(math.pi) * math.exp(
            gammaln(m) - gammaln(m + 0.5)
        ) / par.alpha
        got = cyl.quad_s(cyl.bubble() ** q)
        return abs(got - exact) / exact <= 1e-9, f"rel err {abs(got-exact)/exact:.2e}"

    def zonal_gram():
        d = cyl.sphere.gram_defect()
        return d <= 1e-12, f"gram defect {d:.2e}"

    def duality():
        prof = rng.standard_normal((cyl.L + 1, cyl.grid.N))
        prof *= cyl.bubble() ** 2  # decay envelope
        f = cyl.field(prof)
        w = cyl.field(rng.standard_normal((cyl.L + 1, cyl.grid.N)) * cyl.bubble())
        lhs = abs(cyl_mod.duality_pairing(f, w))
        bound = hminus1_norm(f) * cyl_mod.h1_norm(w) * (1 + 1e-8)
        phi = riesz_solve(f)
        sharp = abs(
            cyl_mod.duality_pairing(f, phi)
            - hminus1_norm(f) * cyl_mod.h1_norm(phi)
        ) <= 1e-8 * cyl_mod.duality_pairing(f, phi)
        return lhs <= bound and sharp, f"pairing {lhs:.3e} vs bound {bound:.3e}"

    def spectrum_check():
        s0 = spec_mod.eigensolve_sector(cyl, 0, k=2)
        s1 = spec_mod.eigensolve_sector(cyl, 1, k=1)
        e = max(abs(s0.eigenvalues[0] - 1.0), abs(s0.eigenvalues[1] - (par.p - 1)),
                abs(s1.eigenvalues[0] - (par.p - 1)))
        return e <= 1e-4, f"eigenvalue defect {e:.2e}"

    def residual_floor():
        r = hminus1_norm(apply_H1(cyl.bubble_field()))
        return r <= 1e-6, f"floor {r:.2e}"

    def emden_fowler_roundtrip():
        s = np.arange(-cyl.grid.S, cyl.grid.S, 0.005)
        r = np.exp(-s)
        lam_scale = math.exp(1.0)
        w = math.sqrt(par.Lam) * (par.p - 2.0)
        U = lam_scale ** math.sqrt(par.Lam) * (2 * par.p * par.Lam) ** (
            1.0 / (par.p - 2.0)
        ) / (1.0 + (lam_scale * r) ** w) ** (2.0 / (par.p - 2.0))
        fld = emden_fowler(r, U, par, cyl)
        err = np.max(np.abs(fld.radial_profile() - bubble_profile(par, cyl.grid.s, 1.0)))
        return err <= 1e-10, f"max err {err:.2e}"

    def interaction_symmetry():
        a = mb.interaction(par, 0.0, 5.0, 1.5, par.p - 1.5)
        b = mb.interaction(par, 5.0, 0.0, par.p - 1.5, 1.5)
        return a == b, f"|a-b| = {abs(a-b):.2e}"

    def moduli_continuity():
        x = 0.37
        a = mb.moduli("F2", 3.0, x)
        b = x ** (3.0 - 1.0)
        return abs(a - b) <= 1e-15, f"branch gap {abs(a-b):.2e}"

    def elementary_inequalities():
        p = par.p
        x = rng.standard_normal(10000) * 10 ** rng.uniform(-3, 3, 10000)
        y = rng.standard_normal(10000) * 10 ** rng.uniform(-3, 3, 10000)
        lhs = np.abs(
            np.abs(x + y) ** (p - 2) * (x + y)
            - np.abs(x) ** (p - 2) * x
            - (p - 1) * np.abs(x) ** (p - 2) * y
        )
        rhs = (p > 3) * np.abs(x) ** (p - 3) * y**2 + np.abs(y) ** (p - 1)
        c1 = np.max(lhs / rhs)
        return np.isfinite(c1), f"sup ratio {c1:.3f}"

    return [
        ("curve_roundtrip", curve_roundtrip),
        ("sphere_moments_vs_beta", moments_vs_beta),
        ("bubble_mass_vs_gamma", bubble_mass),
        ("zonal_orthonormality", zonal_gram),
        ("duality_sharpness", duality),
        ("sector_spectrum", spectrum_check),
        ("bubble_residual_floor", residual_floor),
        ("emden_fowler_roundtrip", emden_fowler_roundtrip),
        ("interaction_symmetry", interaction_symmetry),
        ("moduli_branch_continuity", moduli_continuity),
        ("elementary_inequalities", elementary_inequalities),
    ]


def cmd_selftest(cfg):
    failures = 0
    rows = []
    for name, check in _selftest_checks(cfg):
        try:
            ok, detail = check()
        except Exception as exc:
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        failures += not ok
        rows.append({"check": name, "status": "PASS" if ok else "FAIL",
                     "detail": detail})
        print(f"{'PASS' if ok else 'FAIL'}  {name}  ({detail})")
    if cfg["out"] is not None:
        emit(cfg, ["check", "status", "detail"], rows, _meta(cfg))
    return 1 if failures else 0


def main(argv=None):
    args = build_parser().parse_args(argv)
    cfg = resolve_config(args)
    handler = {
        "constants": cmd_constants,
        "spectrum": cmd_spectrum,
        "sharpness": cmd_sharpness,
        "interactions": cmd_interactions,
        "selftest": cmd_selftest,
    }[cfg["command"]]
    return handler(cfg)


if __name__ == "__main__":
    raise SystemExit(main())
