"""Command-line interface: ``chebmotion {synth,identify,optimize,compare,export}``.

Errors are reported on stderr as ``error: <category>: <message>`` and the
process exits with a category-specific nonzero status (see ``EXIT_CODES``).
"""
import argparse
import math
import sys

from . import __version__, kernels
from .errors import ChebMotionError, ConfigError
from .fileio import (
    RunConfig,
    load_motor,
    load_run_config,
    profile_document,
    read_measurement_csv,
    read_profile_document,
    read_properties_csv,
    sha256_file,
    write_measurement_csv,
    write_plot_data,
    write_profile_document,
    write_properties_csv,
    write_setpoints_csv,
)
from .genetic import solve_ga
from .harness import SyntheticMechanism, synthetic_measurement, synthetic_properties
from .identification import DEFAULT_POSITION_DEGREE, identify_friction
from .optimize import OptimizationContext, degree_sweep, energy_report, reference_tau_rms, solve_bfgs
from .plant import FrictionModel, energy_decomposition, fit_property_model
from .profile import MotionTask, reference_profile

EXIT_CODES = {
    "usage": 2,
    "parse": 3,
    "config": 4,
    "io": 5,
    "invalid-task": 6,
    "range": 7,
    "fit": 8,
    "unidentifiable": 9,
    "domain": 10,
    "dimension": 11,
    "unsupported-order": 12,
    "oracle-refusal": 13,
    "value": 14,
}


# ------------------------------------------------------------------ options

def _add_task_options(p, need_degree=True):
    g = p.add_argument_group("task")
    g.add_argument("--config", help="TOML run configuration (flags override it)")
    g.add_argument("--theta-a", type=float, help="start angle (rad, or deg with --degrees)")
    g.add_argument("--theta-b", type=float, help="end angle")
    g.add_argument("--t-a", type=float, help="start time [s] (default 0)")
    g.add_argument("--dt", type=float, help="move duration [s]")
    g.add_argument("--degrees", action="store_true", default=None,
                   help="angles on the command line and in the config are in degrees")
    if need_degree:
        g.add_argument("--degree", type=int, help="Chebyshev degree n (default 9)")
        g.add_argument("--jerk-zero", action="store_true", default=None,
                       help="also force zero jerk at both ends")
    g.add_argument("--fit-degree", type=int, help="property fit degree (default 20)")
    g.add_argument("--mu-v", type=float, help="viscous friction [N m s/rad]")
    g.add_argument("--motor", help="motor parameter TOML file")


def _add_solver_options(p):
    g = p.add_argument_group("solver")
    g.add_argument("--solver", choices=("bfgs", "ga", "both"))
    g.add_argument("--seed", type=int, help="GA seed (default 0)")
    g.add_argument("--quad-nodes", type=int, help="Gauss-Legendre nodes (odd, >= 33; default 201)")


def _run_config(args):
    cfg = load_run_config(args.config) if getattr(args, "config", None) else RunConfig()
    motor = load_motor(args.motor) if getattr(args, "motor", None) else None
    return cfg.merged(
        theta_a=getattr(args, "theta_a", None),
        theta_b=getattr(args, "theta_b", None),
        t_a=getattr(args, "t_a", None),
        dt=getattr(args, "dt", None),
        angles_in_degrees=getattr(args, "degrees", None),
        degree=getattr(args, "degree", None),
        jerk_zero=getattr(args, "jerk_zero", None),
        solver=getattr(args, "solver", None),
        seed=getattr(args, "seed", None),
        quad_nodes=getattr(args, "quad_nodes", None),
        fit_degree=getattr(args, "fit_degree", None),
        mu_v=getattr(args, "mu_v", None),
        motor=motor,
    )


def _ingest_properties(path, out):
    samples = read_properties_csv(path)
    print(f"{path}: {samples.n_s} samples, theta in [{samples.theta[0]:.6g}, "
          f"{samples.theta[-1]:.6g}] rad", file=out)
    return samples


def _context(cfg, samples, task=None):
    task = task or cfg.task()
    J_m = cfg.motor.J_m if cfg.motor is not None else 0.0
    model = fit_property_model(samples, task, cfg.fit_degree, motor_inertia=J_m)
    return OptimizationContext(task, model, FrictionModel(cfg.mu_v), cfg.motor, cfg.quad_nodes)


def _provenance(cfg, inputs):
    return {
        "package": f"chebmotion {__version__}",
        "kernel_backend": kernels.BACKEND,
        "inputs": {name: {"path": str(path), "sha256": sha256_file(path)}
                   for name, path in inputs.items() if path},
        "config": cfg.to_dict(),
    }


def _fmt(v):
    return f"{v:.6g}"


# ------------------------------------------------------------- subcommands

def cmd_synth(args, out):
    params = {}
    for item in args.param or []:
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"--param expects KEY=VALUE, got {item!r}")
        try:
            params[key.strip()] = float(value)
        except ValueError:
            raise ConfigError(f"--param {key}: {value!r} is not a number") from None
    mech = SyntheticMechanism(args.kind, params)
    cfg = _run_config(args)
    conv = math.radians if cfg.angles_in_degrees else float
    if args.range is not None:
        lo, hi = (conv(v) for v in args.range)
    elif cfg.theta_b is not None:
        lo, hi = sorted((conv(cfg.theta_a), conv(cfg.theta_b)))
    else:
        raise ConfigError("give --range or the task angles (--theta-a/--theta-b)")
    samples = synthetic_properties(mech, (lo, hi), args.n_samples)
    write_properties_csv(samples, args.out)
    print(f"wrote {samples.n_s} property samples to {args.out}", file=out)
    if args.log_out:
        task = cfg.task()
        log = synthetic_measurement(mech, task, cfg.mu_v, args.sample_period,
                                    torque_noise=args.torque_noise,
                                    position_noise=args.position_noise, seed=cfg.seed)
        write_measurement_csv(log, args.log_out)
        print(f"wrote {len(log)} measurement samples to {args.log_out}", file=out)
    return 0


def cmd_identify(args, out):
    cfg = _run_config(args)
    samples = _ingest_properties(args.properties, out)
    log = read_measurement_csv(args.log)
    print(f"{args.log}: {len(log)} samples, t in [{log.time[0]:.6g}, {log.time[-1]:.6g}] s, "
          f"period {log.sample_period:.6g} s", file=out)
    if cfg.theta_b is None or cfg.dt is None:
        # default task: the logged move itself
        task = MotionTask(log.position[0], log.position[-1], log.time[0], log.time[-1])
    else:
        task = cfg.task()
    ctx = _context(cfg, samples, task)
    est = identify_friction(log, ctx.model, args.position_degree)
    fit = est.position_fit
    print(f"position fit: degree {fit.degree}, rms residual {_fmt(fit.residual_rms)} rad, "
          f"max {_fmt(fit.residual_max)} rad", file=out)
    print(f"torque residual norm: before {_fmt(est.residual_before)} N m, "
          f"after {_fmt(est.residual_after)} N m", file=out)
    print(f"mu_v = {est.mu_v_raw!r} N m s/rad", file=out)
    if est.mu_v_raw < 0:
        print("warning: negative estimate clipped to 0", file=out)
    return 0


def _solve(ctx, cfg):
    results = []
    if cfg.solver in ("bfgs", "both"):
        results.append(solve_bfgs(ctx))
    if cfg.solver in ("ga", "both"):
        results.append(solve_ga(ctx, seed=cfg.seed))
    best = min(results, key=lambda r: r.tau_rms)
    return best, [r for r in results if r is not best]


def cmd_optimize(args, out):
    cfg = _run_config(args)
    samples = _ingest_properties(args.properties, out)
    ctx = _context(cfg, samples)
    ref_kind = "poly7J0" if ctx.task.jerk_zero else "poly5"
    ref = reference_tau_rms(ctx, ref_kind)
    best, others = _solve(ctx, cfg)
    for r in [best] + others:
        print(f"{r.solver}: tau_rms {_fmt(r.tau_rms)} N m, {r.iterations} iterations, "
              f"{r.objective_evals} evaluations, {r.wall_time:.3g} s, "
              f"converged={r.converged} ({r.message})", file=out)
    print(f"{ref_kind}: tau_rms {_fmt(ref)} N m; saving {100 * (ref - best.tau_rms) / ref:.2f} %",
          file=out)
    lo, hi = best.profile.phi_range()
    if lo < -1 - 1e-9 or hi > 1 + 1e-9:
        print(f"note: profile overshoots the stroke (phi in [{lo:.4f}, {hi:.4f}])", file=out)
    if args.out:
        doc = profile_document(best, ctx, (ref_kind, ref), others,
                               _provenance(cfg, {"properties": args.properties,
                                                 "config": args.config, "motor": args.motor}))
        write_profile_document(doc, args.out)
        print(f"wrote profile document to {args.out}", file=out)
    return 0


def _parse_degree_list(text):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"--sweep expects comma-separated integers, got {text!r}") from None


def _print_energy(label, e, out):
    print(f"{label}: E_k {_fmt(e.E_k)} J, E_p {_fmt(e.E_p)} J, E_l {_fmt(e.E_l)} J, "
          f"E_total {_fmt(e.E_total)} J", file=out)


def cmd_compare(args, out):
    cfg = _run_config(args)
    samples = _ingest_properties(args.properties, out)
    ctx = _context(cfg, samples)
    degrees = _parse_degree_list(args.sweep) if args.sweep else [ctx.task.degree]
    table = degree_sweep(ctx, degrees, cfg.solver, seed=cfg.seed)
    text = table.to_csv(timing=args.timing)
    out.write(text)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        print(f"wrote sweep table to {args.out}", file=out)
    if ctx.motor is not None:
        ref_kind = table.rows[0].solver
        ref_profile = reference_profile(ref_kind, ctx.task)
        _print_energy(ref_kind, energy_decomposition(ref_profile, ctx.model, ctx.motor,
                                                     ctx.friction, ctx.quadrature_nodes), out)
        best = min(table.results(), key=lambda r: r.tau_rms).result
        sub = ctx.with_degree(best.profile.task.degree, best.profile.task.jerk_zero)
        e = energy_report(best, sub)
        _print_energy(f"best ({best.solver}, n={best.profile.task.degree})", e, out)
        m = ctx.motor
        ident = m.R * ctx.task.duration / m.k_t ** 2 * e.tau_rms ** 2
        print(f"R*dt/k_t^2*tau_rms^2 = {_fmt(ident)} J"
              + (" (equals E_l at zero friction)" if ctx.friction.mu_v == 0 else ""), file=out)
    return 0


def cmd_export(args, out):
    loaded = read_profile_document(args.profile)
    if args.out:
        rows = write_setpoints_csv(loaded.profile, loaded.model, loaded.friction,
                                   args.sample_period, args.out)
        print(f"wrote {rows} setpoints to {args.out}", file=out)
    if args.plot_data:
        write_plot_data(loaded.profile, loaded.model, loaded.friction, args.plot_data,
                        args.plot_points)
        print(f"wrote plot data to {args.plot_data}", file=out)
    if not (args.out or args.plot_data):
        raise ConfigError("nothing to export: give --out and/or --plot-data")
    return 0


# ------------------------------------------------------------------ parser

def build_parser():
    parser = argparse.ArgumentParser(
        prog="chebmotion",
        description="Energy-optimal rest-to-rest motion profiles with Chebyshev polynomials.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="write synthetic property samples (and a measurement log)")
    p.add_argument("--kind", choices=("slider_crank", "constant"), default="slider_crank")
    p.add_argument("--param", action="append", metavar="KEY=VALUE",
                   help="mechanism parameter, e.g. J0=0.01 or F_load=20 (repeatable)")
    p.add_argument("--range", nargs=2, type=float, metavar=("LO", "HI"),
                   help="angle range to sample (default: the task stroke)")
    p.add_argument("--n-samples", type=int, default=200)
    p.add_argument("--out", required=True, help="property CSV to write")
    p.add_argument("--log-out", help="also write a simulated measurement CSV of the task")
    p.add_argument("--sample-period", type=float, default=1e-4, help="log period [s]")
    p.add_argument("--torque-noise", type=float, default=0.0, help="relative torque noise")
    p.add_argument("--position-noise", type=float, default=0.0,
                   help="position noise relative to the stroke")
    p.add_argument("--seed", type=int, help="noise seed (default 0)")
    _add_task_options(p, need_degree=False)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("identify", help="identify viscous friction from a measurement log")
    p.add_argument("--properties", required=True, help="property CSV")
    p.add_argument("--log", required=True, help="measurement CSV")
    p.add_argument("--position-degree", type=int, default=DEFAULT_POSITION_DEGREE,
                   help="degree of the position polynomial (default 9)")
    _add_task_options(p, need_degree=False)
    p.set_defaults(func=cmd_identify)

    p = sub.add_parser("optimize", help="optimise one profile")
    p.add_argument("--properties", required=True, help="property CSV")
    p.add_argument("--out", help="profile JSON document to write")
    _add_task_options(p)
    _add_solver_options(p)
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("compare", help="degree sweep against the reference law")
    p.add_argument("--properties", required=True, help="property CSV")
    p.add_argument("--sweep", help="comma-separated degrees (default: --degree)")
    p.add_argument("--out", help="sweep table CSV to write")
    p.add_argument("--timing", action="store_true",
                   help="fill the wall_time_s column (output is then not reproducible)")
    _add_task_options(p)
    _add_solver_options(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("export", help="feedforward setpoint table and plot data")
    p.add_argument("--profile", required=True, help="profile JSON from 'optimize'")
    p.add_argument("--sample-period", type=float, default=2.5e-4, help="table period [s]")
    p.add_argument("--out", help="setpoint CSV to write")
    p.add_argument("--plot-data", help="plot-data CSV to write")
    p.add_argument("--plot-points", type=int, default=501)
    p.set_defaults(func=cmd_export)
    return parser


def _fail(category, message):
    print(f"error: {category}: {message}", file=sys.stderr)
    return EXIT_CODES.get(category, 1)


def main(argv=None, out=None):
    out = out or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args, out)
    except ChebMotionError as exc:
        return _fail(exc.category, exc)
    except OSError as exc:
        return _fail("io", f"{exc.filename or ''}: {exc.strerror or exc}".lstrip(": "))
    except ValueError as exc:
        return _fail("value", exc)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
