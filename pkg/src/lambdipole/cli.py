"""Command-line front end: ``lambdipole <command> [options]``.

Every command writes plain files into ``--out`` (LVF1 fields, CSV tables
with 17 significant digits) and is deterministic for a given set of
options.  Exit status: 0 success, 1 runtime or convergence failure,
2 usage error.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
from contextlib import contextmanager
from importlib import resources
from pathlib import Path

import numpy as np
from scipy import ndimage

from . import energy, evolve, fields, lamb, rearrange, special, variational
from .fields import HalfPlaneGrid, fmt

log = logging.getLogger("lambdipole")

EXIT_OK, EXIT_FAILURE, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


@contextmanager
def _usage():
    """Turn parameter validation errors raised while setting up into usage errors."""
    try:
        yield
    except (ValueError, TypeError) as exc:
        raise UsageError(str(exc)) from exc


# --- argument types -----------------------------------------------------------


def _int_pair(text: str) -> tuple[int, int]:
    try:
        a, b = (int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected n1,n2 but got {text!r}")
    return a, b


def _window(text: str) -> tuple[float, float, float]:
    try:
        a, b, c = (float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected x1min,x1max,x2max but got {text!r}")
    return a, b, c


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers but got {text!r}")


def _bool(text: str) -> bool:
    low = str(text).strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected a boolean but got {text!r}")


# --- small helpers ------------------------------------------------------------


def _grid(args) -> HalfPlaneGrid:
    x1_min, x1_max, x2_max = args.window
    n1, n2 = args.grid
    return HalfPlaneGrid(x1_min, x1_max, x2_max, n1, n2)


def _out(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_table(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_cell(v) for v in row])


def _cell(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return fmt(float(v))
    return str(v)


# --- dipole -------------------------------------------------------------------


def lamb_identities(p: lamb.LambParams, grid: HalfPlaneGrid) -> dict[str, float]:
    """Closed-form constants of the dipole and their numerical checks."""
    a = p.a
    omega = lamb.sample_lamb(p, grid)
    imp = fields.impulse(omega)
    delta = 1e-9
    # along theta = pi/2 the stream function is the radial profile itself
    f = lambda r: lamb.lamb_stream(p, 0.0, r)
    jump = abs(f(a - delta) - f(a + delta))
    # second-order one-sided slopes from each branch
    h = 1e-6 * a
    inner = (3 * f(a) - 4 * f(a - h) + f(a - 2 * h)) / (2 * h)
    outer = (-3 * f(a) + 4 * f(a + h) - f(a + 2 * h)) / (2 * h)
    far = 1e3 * a
    u1, _ = lamb.lamb_velocity(p, 0.0, far)
    return {
        "lam": p.lam,
        "W": p.W,
        "a": a,
        "C_L": p.C_L,
        "mu_L": p.mu_L,
        "impulse_quadrature": imp,
        "impulse_rel_error": abs(imp - p.mu_L) / p.mu_L,
        "mass_quadrature": fields.mass(omega),
        "continuity_residual": jump / (p.W * a),
        "radial_derivative_residual": abs(inner - outer) / p.W,
        "far_field_residual": abs(u1 + p.W) / p.W,
    }


def cmd_dipole(args) -> int:
    with _usage():
        p = lamb.LambParams(args.lam, args.W)
        grid = _grid(args)
        omega = lamb.sample_lamb(p, grid)
    out = _out(args)
    fields.write_lvf1(out / "vorticity.lvf", omega)
    fields.write_lvf1(out / "stream.lvf", lamb.sample_lamb_stream(p, grid, absolute=True))
    ident = lamb_identities(p, grid)
    _write_table(out / "identities.csv", list(ident), [list(ident.values())])
    print(f"a={fmt(p.a)} C_L={fmt(p.C_L)} mu_L={fmt(p.mu_L)} impulse={fmt(ident['impulse_quadrature'])}")
    return EXIT_OK


# --- minimize -----------------------------------------------------------------

SUMMARY_COLUMNS = ("mu", "nu", "lambda", "W", "gamma", "mass", "impulse", "E", "E2", "iters", "converged")


def _summary_row(res: variational.MinimizerResult):
    s = res.spec
    return (
        s.mu,
        s.nu,
        s.lam,
        res.W,
        res.gamma,
        res.mass,
        fields.impulse(res.omega),
        res.energy.kinetic,
        res.energy.penalized,
        res.iterations,
        res.converged,
    )


def _solve_options(args) -> variational.SolveOptions:
    return variational.SolveOptions(
        max_outer_iters=args.max_iters,
        fixed_point_tol=args.tol,
        relaxation=args.relaxation,
        symmetrize_each_iter=args.symmetrize,
    )


def cmd_minimize(args) -> int:
    with _usage():
        lam_ = args.lam
        mu = args.mu if args.mu is not None else special.C0**2 * math.pi / lam_
        nu = args.nu if args.nu is not None else 10.0 * mu
        spec = fields.AdmissibleSpec(mu, nu, lam_)
        grid = _grid(args)
        opts = _solve_options(args)
    res = variational.solve(spec, grid, opts, init=args.init)
    out = _out(args)
    fields.write_lvf1(out / "omega.lvf", res.omega)
    _write_table(out / "summary.csv", SUMMARY_COLUMNS, [_summary_row(res)])
    print(f"W={fmt(res.W)} gamma={fmt(res.gamma)} iters={res.iterations} converged={res.converged}")
    return EXIT_OK if res.converged else EXIT_FAILURE


# --- energy curve -------------------------------------------------------------


def cmd_energy_curve(args) -> int:
    with _usage():
        mu0 = special.C0**2 * math.pi / args.lam
        mus = args.mu if args.mu else [f * mu0 for f in (0.25, 0.5, 1.0, 2.0)]
        nu = args.nu if args.nu is not None else 20.0 * max(mus)
        grid = _grid(args)
        opts = _solve_options(args)
        if any(b <= a for a, b in zip(mus, mus[1:])) or min(mus) <= 0:
            raise ValueError("--mu values must be positive and strictly increasing")
    rows = []
    ok = True
    for mu in mus:
        res = variational.solve(fields.AdmissibleSpec(mu, nu, args.lam), grid, opts, init=args.init)
        ok &= res.converged
        rows.append((mu, res.I, res.W, res.gamma, res.mass, res.iterations, res.converged))
    out = _out(args)
    _write_table(out / "energy_curve.csv", ("mu", "I", "W", "gamma", "mass", "iters", "converged"), rows)
    vals = [r[1] for r in rows]
    negative = all(v < 0 for v in vals)
    decreasing = all(b < a for a, b in zip(vals, vals[1:]))
    print(f"I<0: {negative}  strictly decreasing: {decreasing}")
    return EXIT_OK if ok else EXIT_FAILURE


# --- evolve / stability -------------------------------------------------------

TRACE_COLUMNS = ("t", "l1", "l2", "impulse", "e2", "orbit_distance", "warn_flags")


def _evolution_config(args, zeta, p: lamb.LambParams, frames: Path | None) -> evolve.EvolutionConfig:
    dt = args.dt if args.dt is not None else evolve.cfl_time_step(zeta, args.cfl, args.solver)
    t_end = args.t_end if args.t_end is not None else 2.0 * p.transit_time()
    # land exactly on t_end
    n = max(1, math.ceil(t_end / dt - 1e-12))
    return evolve.EvolutionConfig(
        dt=t_end / n,
        t_end=t_end,
        cfl_max=args.cfl_max,
        output_stride=args.stride,
        velocity_solver=args.solver,
        interpolation=args.interpolation,
        lam=p.lam,
        frames_dir=str(frames) if frames else None,
    )


def _write_trace(path: Path, trace: evolve.EvolutionTrace) -> None:
    _write_table(path, TRACE_COLUMNS, trace.rows())


def cmd_evolve(args) -> int:
    out = _out(args)
    with _usage():
        p = lamb.LambParams(args.lam, args.W)
        if args.init:
            zeta = fields.read_lvf1(args.init)
        else:
            zeta = lamb.sample_lamb(p, _grid(args))
        cfg = _evolution_config(args, zeta, p, out / "frames" if args.frames else None)
    trace = evolve.run(zeta, cfg, reference=p)
    _write_trace(out / "trace.csv", trace)
    fields.write_lvf1(out / "final.lvf", trace.final)
    print(
        f"steps={round(cfg.t_end / cfg.dt)} l2_drift={trace.drift('l2'):.3e} "
        f"impulse_drift={trace.drift('impulse'):.3e} speed={trace.speed():.6f}"
    )
    return EXIT_OK


def random_bump(grid: HalfPlaneGrid, seed: int, scale: float) -> np.ndarray:
    """Smooth seeded field in [0, 1]: filtered white noise."""
    rng = np.random.default_rng(seed)
    noise = rng.standard_normal(grid.shape)
    sigma = (scale / grid.h2, scale / grid.h1)
    g = ndimage.gaussian_filter(noise, sigma, mode="constant")
    g -= g.min()
    top = g.max()
    return g / top if top > 0 else g


def perturbed_initial(p: lamb.LambParams, grid: HalfPlaneGrid, eps: float, kind: str, seed: int, nu=None):
    omega = lamb.sample_lamb(p, grid)
    if kind == "random":
        z = omega.with_values(omega.values * (1.0 + eps * random_bump(grid, seed, 0.25 * p.a)))
        if nu is not None and fields.mass(z) > nu:
            z = z * (nu / fields.mass(z))
        return z
    return evolve.perturb(omega, eps, kind, nu=nu)


def stability_summary(trace: evolve.EvolutionTrace) -> dict[str, float]:
    d = np.asarray(trace.orbit_distance)
    d0 = float(d[0])
    dmax = float(d.max())
    return {
        "d0": d0,
        "dmax": dmax,
        "ratio": dmax / d0 if d0 > 0 else math.nan,
        "speed": trace.speed(),
        "l2_drift": trace.drift("l2"),
        "impulse_drift": trace.drift("impulse"),
    }


def cmd_stability(args) -> int:
    out = _out(args)
    with _usage():
        p = lamb.LambParams(args.lam, args.W)
        grid = _grid(args)
        if args.eps < 0:
            raise ValueError("--eps must be non-negative")
        zeta = perturbed_initial(p, grid, args.eps, args.kind, args.seed, args.nu)
        cfg = _evolution_config(args, zeta, p, out / "frames" if args.frames else None)
    trace = evolve.run(zeta, cfg, reference=p)
    _write_trace(out / "trace.csv", trace)
    summ = {"eps": args.eps, "kind": args.kind, **stability_summary(trace)}
    _write_table(out / "summary.csv", list(summ), [list(summ.values())])
    print(f"orbit distance: initial {fmt(summ['d0'])}, max {fmt(summ['dmax'])}, ratio {summ['ratio']:.4f}")
    return EXIT_OK


# --- verify -------------------------------------------------------------------

SUITES = ("identities", "rearrange", "energy", "scaling")


class Checks:
    """Collects named invariant checks for the verify command."""

    def __init__(self):
        self.rows: list[tuple[str, str, float, float, bool]] = []

    def upper(self, module: str, name: str, observed: float, bound: float) -> None:
        self.rows.append((module, name, float(observed), float(bound), bool(observed <= bound)))

    def lower(self, module: str, name: str, observed: float, bound: float) -> None:
        self.rows.append((module, name, float(observed), float(bound), bool(observed >= bound)))

    def golden(self, module: str, key: str, observed: float, golden: dict, rtol: float) -> None:
        if key not in golden:
            self.rows.append((module, f"golden:{key}", float(observed), math.nan, False))
            return
        ref = float(golden[key])
        err = abs(observed - ref) / max(abs(ref), 1e-300)
        self.rows.append((module, f"golden:{key}", float(observed), ref, bool(err <= rtol)))

    @property
    def failures(self):
        return [r for r in self.rows if not r[4]]


def load_golden(path=None) -> dict:
    if path is None:
        text = resources.files("lambdipole").joinpath("data/golden.json").read_text()
    else:
        text = Path(path).read_text()
    return json.loads(text)


VERIFY_GRID = HalfPlaneGrid(-8.0, 8.0, 8.0, 128, 128)


def _random_fields(rng: np.random.Generator, grid: HalfPlaneGrid, count: int):
    for _ in range(count):
        vals = rng.random(grid.shape) * (rng.random(grid.shape) < 0.3)
        yield fields.ScalarField(grid, vals)


def _smooth_random(rng: np.random.Generator, grid: HalfPlaneGrid, bumps: int = 3) -> fields.ScalarField:
    X1, X2 = grid.mesh()
    vals = np.zeros(grid.shape)
    for _ in range(bumps):
        c1 = rng.uniform(-2.0, 2.0)
        c2 = rng.uniform(1.0, 2.5)
        w = rng.uniform(0.4, 0.9)
        r2 = ((X1 - c1) ** 2 + (X2 - c2) ** 2) / w**2
        vals += rng.uniform(0.5, 2.0) * np.maximum(1.0 - r2, 0.0) ** 2
    return fields.ScalarField(grid, vals)


def suite_identities(chk: Checks, golden: dict, rng) -> None:
    c0 = special.first_zero_j1()
    j0 = special.bessel_j(0, c0)
    chk.upper("special", "abs_J1_at_c0", abs(special.bessel_j(1, c0)), 1e-13)
    chk.upper("special", "c0_bracket_distance", max(3.8316 - c0, c0 - 3.8318, 0.0), 0.0)
    chk.upper("special", "J0_at_c0_sign", j0, 0.0)
    r = np.linspace(0.5, 20.0, 400)
    rec = special._bessel_any(0, r) + special._bessel_any(2, r) - 2.0 / r * special._bessel_any(1, r)
    chk.upper("special", "recurrence_residual", float(np.abs(rec).max()), 1e-10)
    h = 1e-6
    deriv = (special.bessel_j(1, c0 + h) - special.bessel_j(1, c0 - h)) / (2 * h)
    chk.upper("special", "dJ1_at_c0_minus_J0", abs(deriv - j0), 1e-6)
    chk.golden("special", "c0", c0, golden, 1e-13)
    chk.golden("special", "J0_c0", j0, golden, 1e-12)

    p = lamb.LambParams()
    ident = lamb_identities(p, VERIFY_GRID)
    chk.upper("lamb", "continuity_residual", ident["continuity_residual"], 1e-8)
    chk.upper("lamb", "radial_derivative_residual", ident["radial_derivative_residual"], 1e-6)
    chk.upper("lamb", "impulse_rel_error", ident["impulse_rel_error"], 1e-3)
    chk.golden("lamb", "lamb_mass", ident["mass_quadrature"], golden, 2e-3)
    chk.golden("lamb", "lamb_impulse", ident["impulse_quadrature"], golden, 1e-3)
    q = lamb.LambParams(4.0, 1.0)
    chk.upper("lamb", "core_radius_halves", abs(q.a - 0.5 * p.a), 1e-15)
    q = lamb.LambParams(1.0, 2.0)
    chk.upper("lamb", "impulse_linear_in_W", abs(q.mu_L - 2 * p.mu_L) / p.mu_L, 1e-15)


def suite_rearrange(chk: Checks, golden: dict, rng) -> None:
    grid = HalfPlaneGrid(-4.0, 4.0, 4.0, 32, 16)
    worst_norm, worst_gain = 0.0, math.inf
    idem = True
    for omega in _random_fields(rng, grid, 20):
        rep = rearrange.symmetrization_report(omega)
        for a, b in zip(rep.input_norms, rep.output_norms):
            worst_norm = max(worst_norm, abs(a - b) / max(a, 1e-300))
        worst_gain = min(worst_gain, rep.energy_gain / rep.energy_before)
        star = rearrange.steiner_symmetrize(omega)
        idem &= bool(np.array_equal(rearrange.steiner_symmetrize(star).values, star.values))
    chk.upper("rearrange", "norm_preservation", worst_norm, 1e-12)
    chk.lower("rearrange", "relative_energy_gain", worst_gain, -1e-8)
    chk.lower("rearrange", "idempotence", float(idem), 1.0)


def suite_energy(chk: Checks, golden: dict, rng) -> None:
    grid = HalfPlaneGrid(-4.0, 4.0, 4.0, 32, 16)
    worst_pol = worst_sym = 0.0
    min_e = math.inf
    for _ in range(10):
        w1, w2 = (f for f in _random_fields(rng, grid, 2))
        e1, e2 = energy.kinetic_energy(w1), energy.kinetic_energy(w2)
        diff = energy.signed(grid, w1.values - w2.values)
        tot = energy.signed(grid, w1.values + w2.values)
        lhs = 2 * (e1 - e2)
        rhs = energy.interaction_energy(diff, tot)
        worst_pol = max(worst_pol, abs(lhs - rhs) / max(e1 + e2, 1e-300))
        worst_sym = max(worst_sym, abs(energy.interaction_energy(w1, w2) - energy.interaction_energy(w2, w1)))
        min_e = min(min_e, e1, e2)
    chk.upper("energy", "polarization_identity", worst_pol, 1e-10)
    chk.upper("energy", "interaction_symmetry", worst_sym, 0.0)
    chk.lower("energy", "kinetic_nonnegative", min_e, 0.0)

    p = lamb.LambParams()
    omega = lamb.sample_lamb(p, VERIFY_GRID)
    psi = energy.stream_of(omega)
    rep = energy.penalized_energy(omega, p.lam, psi)
    lhs, rhs = energy.hardy_check(psi)
    chk.upper("energy", "hardy_margin", lhs - rhs, 0.0)
    chk.lower("energy", "lamb_penalized_positive", rep.penalized, 0.0)
    chk.golden("energy", "lamb_kinetic", rep.kinetic, golden, 1e-2)
    chk.golden("energy", "lamb_penalized", rep.penalized, golden, 1e-2)
    exact = lamb.sample_lamb_stream(p, VERIFY_GRID).values
    chk.upper("energy", "stream_vs_exact", float(np.abs(psi.values - exact).max() / np.abs(exact).max()), 1e-2)


def suite_scaling(chk: Checks, golden: dict, rng) -> None:
    grid = HalfPlaneGrid(-4.0, 4.0, 4.0, 64, 32)
    omega = _smooth_random(rng, grid)
    lam_ = float(rng.uniform(0.5, 4.0))
    nu = float(rng.uniform(0.5, 4.0))
    hat = fields.scale_field(omega, lam_, nu)
    e_hat = energy.penalized_energy(hat, 1.0).penalized
    e = energy.penalized_energy(omega, lam_).penalized
    chk.upper("fields", "penalized_energy_covariance", abs(e_hat - e / nu**2) / abs(e / nu**2), 1e-3)
    imp = fields.impulse(omega)
    chk.upper(
        "fields", "impulse_map", abs(fields.impulse(hat) - imp * math.sqrt(lam_) / nu) / imp, 1e-3
    )
    m = fields.mass(omega)
    chk.upper("fields", "mass_map", abs(fields.mass(hat) - m / nu) / m, 1e-3)
    ident = fields.scale_field(omega, 1.0, 1.0)
    chk.upper("fields", "unit_scaling_identity", float(np.abs(ident.values - omega.values).max()), 0.0)


_SUITE_FUNCS = {
    "identities": suite_identities,
    "rearrange": suite_rearrange,
    "energy": suite_energy,
    "scaling": suite_scaling,
}


def run_verify(suites, golden: dict, seed: int) -> Checks:
    chk = Checks()
    for name in suites:
        _SUITE_FUNCS[name](chk, golden, np.random.default_rng([seed, SUITES.index(name)]))
    return chk


def cmd_verify(args) -> int:
    with _usage():
        suites = SUITES if args.suite == "all" else (args.suite,)
    try:
        golden = load_golden(args.golden)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"cannot read golden file: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    chk = run_verify(suites, golden, args.seed)
    for module, name, obs, bound, ok in chk.rows:
        status = "PASS" if ok else "FAIL"
        print(f"{status} {module}.{name} observed={fmt(obs)} bound={fmt(bound)}")
    if args.out:
        out = _out(args)
        _write_table(out / "verify.csv", ("module", "invariant", "observed", "bound", "pass"), chk.rows)
    fails = chk.failures
    if fails:
        names = ", ".join(f"{m}.{n}" for m, n, *_ in fails)
        print(f"{len(fails)} check(s) failed: {names}", file=sys.stderr)
        return EXIT_FAILURE
    return EXIT_OK


# --- parser -------------------------------------------------------------------


def _common(p: argparse.ArgumentParser, n=(256, 256)) -> None:
    p.add_argument("--grid", type=_int_pair, default=f"{n[0]},{n[1]}", help="cell counts n1,n2")
    p.add_argument("--window", type=_window, default="-8,8,8", help="x1min,x1max,x2max")
    p.add_argument("--out", default="out", help="output directory")
    p.add_argument("--config", help="key=value file; command-line flags take precedence")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1, help="FFT worker threads")
    p.add_argument("-v", "--verbose", action="store_true")


def _dipole_params(p):
    p.add_argument("--lam", type=float, default=1.0, help="strength lambda")
    p.add_argument("--W", type=float, default=1.0, help="propagation speed")


def _solver_params(p):
    p.add_argument("--lam", type=float, default=1.0)
    p.add_argument("--init", choices=("lamb", "patch"), default="lamb")
    p.add_argument("--max-iters", type=int, default=400)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--relaxation", type=float, default=0.5)
    p.add_argument("--symmetrize", type=_bool, default=True)


def _evolve_params(p):
    _dipole_params(p)
    p.add_argument("--dt", type=float, help="time step (default: from --cfl)")
    p.add_argument("--cfl", type=float, default=0.5, help="target Courant number when --dt is absent")
    p.add_argument("--cfl-max", type=float, default=0.9)
    p.add_argument("--t-end", type=float, help="final time (default: two core transits)")
    p.add_argument("--stride", type=int, default=10, help="record every this many steps")
    p.add_argument("--solver", choices=("direct_greens", "reflected_poisson"), default="direct_greens")
    p.add_argument("--interpolation", choices=("cubic", "linear"), default="cubic")
    p.add_argument("--frames", type=_bool, default=False, help="write LVF1 frames at each record")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lambdipole", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("dipole", help="sample the exact dipole and report its identities")
    _common(p)
    _dipole_params(p)
    p.set_defaults(func=cmd_dipole)

    p = sub.add_parser("minimize", help="maximise the penalised energy at fixed impulse")
    _common(p)
    _solver_params(p)
    p.add_argument("--mu", type=float, help="impulse (default c0^2 pi / lam)")
    p.add_argument("--nu", type=float, help="mass cap (default 10 mu)")
    p.set_defaults(func=cmd_minimize)

    p = sub.add_parser("energy-curve", help="I_mu over a list of impulses")
    _common(p, (128, 128))
    _solver_params(p)
    p.add_argument("--mu", type=_float_list, help="comma-separated increasing impulses")
    p.add_argument("--nu", type=float, help="mass cap (default 20 max(mu))")
    p.set_defaults(func=cmd_energy_curve)

    p = sub.add_parser("evolve", help="evolve a vorticity field and trace the invariants")
    _common(p)
    _evolve_params(p)
    p.add_argument("--init", help="initial vorticity (LVF1); default is the sampled dipole")
    p.set_defaults(func=cmd_evolve)

    p = sub.add_parser("stability", help="evolve a perturbed dipole and track its orbit distance")
    _common(p)
    _evolve_params(p)
    p.add_argument("--eps", type=float, default=0.05)
    p.add_argument("--kind", choices=("multiplicative", "additive", "random"), default="multiplicative")
    p.add_argument("--nu", type=float, help="mass cap for the perturbed field")
    p.set_defaults(func=cmd_stability)

    p = sub.add_parser("verify", help="run the invariant suites against golden values")
    _common(p)
    p.set_defaults(out=None)
    p.add_argument("--suite", choices=SUITES + ("all",), default="all")
    p.add_argument("--golden", help="golden JSON file (default: the packaged one)")
    p.set_defaults(func=cmd_verify)
    return parser


def read_config(path) -> dict[str, str]:
    """Plain ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def _subparser(parser: argparse.ArgumentParser, name: str) -> argparse.ArgumentParser:
    for action in parser._subparsers._group_actions:
        if name in action.choices:
            return action.choices[name]
    raise KeyError(name)


def parse_args(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        try:
            cfg = read_config(args.config)
        except OSError as exc:
            raise UsageError(f"cannot read config: {exc}") from exc
        sub = _subparser(parser, args.command)
        known = {a.dest for a in sub._actions} - {"help", "config", "func"}
        unknown = sorted(set(cfg) - known)
        if unknown:
            raise UsageError(f"unknown config key(s): {', '.join(unknown)}")
        sub.set_defaults(**cfg)
        args = parser.parse_args(argv)
    return args


def main(argv=None) -> int:
    try:
        args = parse_args(argv)
    except UsageError as exc:
        print(f"lambdipole: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # argparse usage errors and --help
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    energy.set_fft_workers(args.threads)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"lambdipole: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # runtime failures map to exit 1
        log.debug("failure", exc_info=True)
        print(f"lambdipole: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
