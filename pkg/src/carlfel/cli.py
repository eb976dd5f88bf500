"""Command-line front end: ``carlfel run | preset | compare | scaling | validate``.

Exit codes: 0 on success, 2 on invalid input or failed validation checks,
3 when an integration aborts.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import asdict
from pathlib import Path

from . import __version__
from .errors import NumericalAbort, ValidationError
from .integrate import IntegratorConfig
from .output import write_json, write_timeseries_csv
from .params import CarlPhysicalParams, FelPhysicalParams, PhysicalConstants, carl_scaling, fel_scaling
from .runs import MODELS, RunConfig, compare_models, drift, load_config, resolve_output_dir, run_model

log = logging.getLogger("carlfel")

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_ABORT = 3


def _add_run_flags(p: argparse.ArgumentParser):
    g = p.add_argument_group("run settings (override --config)")
    g.add_argument("--config", help="JSON run configuration")
    g.add_argument("--rho", type=float, dest="rho_bar", help="collective parameter rho_bar")
    g.add_argument("--delta", type=float, help="scaled detuning")
    g.add_argument("--a0", help="complex field seed, e.g. 1e-4 or 1e-4+2e-5j")
    g.add_argument("--tau-end", type=float, dest="tau_end")
    g.add_argument("--n0", type=int, help="initially occupied momentum level")
    g.add_argument("--ladder", type=int, nargs=2, metavar=("N_MIN", "N_MAX"))
    g.add_argument("--grid-m", type=int, dest="grid_m", help="angle points of a phase-space grid")
    g.add_argument("--n-particles", type=int, dest="n_particles")
    g.add_argument("--placement", choices=("equispaced", "seeded-random"))
    g.add_argument("--seed", type=int)
    g.add_argument("--derivative", choices=("fd4", "spectral"), help="Vlasov momentum derivative")
    g.add_argument("--variant", help="two-level variant: consistent-reduction or literal")
    g.add_argument("--phi0", type=float, help="initial Bloch angle of the two-level model")
    g.add_argument("--dt", type=float, help="fixed RK4 step (selects rk4-fixed)")
    g.add_argument("--rtol", type=float, help="adaptive relative tolerance (selects rk45-adaptive)")
    g.add_argument("--atol", type=float)
    g.add_argument("--stride", type=float, help="tau spacing of recorded samples")
    g.add_argument("--out", help="output directory (default: $CARLFEL_OUTPUT_DIR or ./carlfel-output)")
    g.add_argument("--no-figures", action="store_true", help="skip PNG figures")


_RUN_FIELDS = ("rho_bar", "delta", "a0", "tau_end", "n0", "grid_m", "n_particles", "placement", "seed", "derivative", "variant", "phi0")


def build_config(args, model: str | None = None) -> RunConfig:
    """Config file first, then every flag that was given on the command line."""
    base = load_config(args.config) if args.config else RunConfig()
    changes = {name: getattr(args, name) for name in _RUN_FIELDS if getattr(args, name, None) is not None}
    if args.ladder is not None:
        changes["ladder"] = tuple(args.ladder)
    if model is not None:
        changes["model"] = model
    integ = base.integrator
    if args.dt is not None:
        integ = integ.with_(method="rk4-fixed", dt=args.dt)
    if args.rtol is not None:
        integ = integ.with_(method="rk45-adaptive", rtol=args.rtol)
    if args.atol is not None:
        integ = integ.with_(atol=args.atol)
    if args.stride is not None:
        integ = integ.with_(output_stride=args.stride)
    changes["integrator"] = integ
    return RunConfig.from_dict({**base.to_dict(), **_plain(changes)})


def _plain(changes):
    out = dict(changes)
    if isinstance(out.get("integrator"), IntegratorConfig):
        out["integrator"] = asdict(out["integrator"])
    return out


def _summary(res) -> dict:
    s = res.series
    return {
        "model": res.config.model,
        "samples": int(s.tau.size),
        "tau_end": float(s.tau[-1]),
        "final_abs_A2": float(s.intensity[-1]),
        "max_abs_A2": float(s.intensity.max()),
        "norm_drift": drift(s.norm),
        "invariant_drift": drift(s.invariant),
    }


def cmd_run(args) -> int:
    cfg = build_config(args, args.model)
    out = resolve_output_dir(args.out, cfg.out) / f"run-{cfg.model}"
    res = run_model(cfg)
    write_timeseries_csv(res.series, out / "timeseries.csv")
    write_json(cfg.to_dict(), out / "config.json")
    summary = _summary(res)
    write_json(summary, out / "summary.json")
    if not args.no_figures:
        from . import plotting

        fig = plotting.intensity_overlay({cfg.model: (res.series.tau, res.series.intensity)}, f"rho_bar={cfg.rho_bar:g}")
        plotting.save(fig, out / "intensity.png")
    for key, value in summary.items():
        print(f"{key},{value}")
    print(f"output,{out}")
    return EXIT_OK


def cmd_preset(args) -> int:
    from .presets import run_preset

    out = resolve_output_dir(args.out)
    rep = run_preset(args.name, out, figures=not args.no_figures)
    print("check,value,relation,bound,passed")
    for c in rep.report["checks"]:
        print(f"{c['name']},{c['value']},{c['relation']},{json.dumps(c['bound'])},{'pass' if c['passed'] else 'FAIL'}")
    print(f"report,{rep.out_dir / 'report.json'}")
    return EXIT_OK


def cmd_compare(args) -> int:
    cfg_a = build_config(args, args.model_a)
    cfg_b = build_config(args, args.model_b)
    a = run_model(cfg_a)
    b = run_model(cfg_b)
    cmp = compare_models(a, b, args.threshold)
    out = resolve_output_dir(args.out, cfg_a.out) / f"compare-{cfg_a.model}-vs-{cfg_b.model}"
    write_timeseries_csv(a.series, out / f"timeseries_{cfg_a.model}.csv")
    write_timeseries_csv(b.series, out / f"timeseries_{cfg_b.model}.csv")
    write_json(cmp.as_dict(), out / "comparison.json")
    if not args.no_figures:
        from . import plotting

        curves = {cfg_a.model: (a.series.tau, a.series.intensity), cfg_b.model: (b.series.tau, b.series.intensity)}
        plotting.save(plotting.intensity_overlay(curves, f"rho_bar={cfg_a.rho_bar:g}"), out / "intensity.png")
    print("observable,rel_linf,rel_l2")
    for name, row in cmp.observables.items():
        print(f"{name},{row['rel_linf']},{row['rel_l2']}")
    print(f"tau_window,{cmp.tau_window}")
    if cmp.threshold is not None:
        print(f"verdict,{'pass' if cmp.passed else 'FAIL'}")
    print(f"output,{out}")
    return EXIT_OK


def cmd_scaling(args) -> int:
    if args.system == "fel":
        phys = FelPhysicalParams(args.lambda_w, args.a_w, args.gamma0, args.density, args.lambda_r)
        result = fel_scaling(phys, PhysicalConstants.electron())
    else:
        phys = CarlPhysicalParams(
            args.rabi, args.detuning_pump, args.gamma_decay, args.dipole, args.omega, args.omega_p, args.density
        )
        result = carl_scaling(phys, PhysicalConstants.atom(args.mass_u))
    d = asdict(result)
    params = d.pop("params")
    print(f"rho_bar,{float(params['rho_bar'])!r}")
    print(f"delta,{float(params['delta'])!r}")
    for key, value in d.items():
        print(f"{key},{float(value)!r}")
    return EXIT_OK


VALIDATION_RUNS = (
    ("classical", dict(rho_bar=1.0, delta=1.0, tau_end=15.0, n_particles=2000)),
    ("quantum-c", dict(rho_bar=1.0, delta=1.0, tau_end=20.0)),
    ("quantum-rho", dict(rho_bar=1.0, delta=1.0, tau_end=20.0)),
    ("wigner", dict(rho_bar=1.0, delta=1.0, tau_end=20.0, ladder=(-6, 5))),
    ("two-level", dict(rho_bar=0.05, delta=1.0, tau_end=100.0)),
)


def cmd_validate(args) -> int:
    """Short run of each conserving model; fails when a drift exceeds the bound."""
    failed = 0
    print("model,norm_drift,invariant_drift,bound,passed")
    for model, kw in VALIDATION_RUNS:
        res = run_model(RunConfig(model=model, **kw))
        s = _summary(res)
        ok = s["norm_drift"] < args.tol and s["invariant_drift"] < args.tol
        failed += not ok
        print(f"{model},{s['norm_drift']},{s['invariant_drift']},{args.tol},{'pass' if ok else 'FAIL'}")
    return EXIT_OK if failed == 0 else EXIT_INVALID


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="carlfel", description="Collective recoil lasing: classical, quantum, phase-space and two-level models.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run one model and write its time series")
    p.add_argument("--model", choices=MODELS)
    _add_run_flags(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("preset", help="run a named experiment")
    from .presets import PRESETS

    p.add_argument("name", choices=sorted(PRESETS))
    p.add_argument("--out", help="output directory (default: $CARLFEL_OUTPUT_DIR or ./carlfel-output)")
    p.add_argument("--no-figures", action="store_true", help="skip PNG figures")
    p.set_defaults(func=cmd_preset)

    p = sub.add_parser("compare", help="run two models on the same parameters and compare |A|^2")
    p.add_argument("model_a", choices=MODELS)
    p.add_argument("model_b", choices=MODELS, help="reference model; its first peak closes the window")
    p.add_argument("--threshold", type=float, help="relative L-inf bound for the verdict")
    _add_run_flags(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("scaling", help="physical parameters to (rho_bar, delta)")
    ss = p.add_subparsers(dest="system", required=True)
    fel = ss.add_parser("fel")
    fel.add_argument("--lambda-w", type=float, required=True, help="undulator period [m]")
    fel.add_argument("--a-w", type=float, required=True, help="undulator parameter")
    fel.add_argument("--gamma0", type=float, required=True, help="beam Lorentz factor")
    fel.add_argument("--density", type=float, required=True, help="electron density [m^-3]")
    fel.add_argument("--lambda-r", type=float, required=True, help="radiation wavelength [m]")
    carl = ss.add_parser("carl")
    carl.add_argument("--rabi", type=float, required=True, help="pump Rabi frequency [rad/s]")
    carl.add_argument("--detuning-pump", type=float, required=True, help="pump-atom detuning [rad/s]")
    carl.add_argument("--gamma-decay", type=float, required=True, help="atomic decay rate [1/s]")
    carl.add_argument("--dipole", type=float, required=True, help="dipole moment [C m]")
    carl.add_argument("--omega", type=float, required=True, help="probe frequency [rad/s]")
    carl.add_argument("--omega-p", type=float, required=True, help="pump frequency [rad/s]")
    carl.add_argument("--density", type=float, required=True, help="atomic density [m^-3]")
    carl.add_argument("--mass-u", type=float, required=True, help="atomic mass [u]")
    p.set_defaults(func=cmd_scaling)

    p = sub.add_parser("validate", help="check conservation on short runs of every model")
    p.add_argument("--tol", type=float, default=1e-8)
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except NumericalAbort as exc:
        print(f"numerical abort: {exc}", file=sys.stderr)
        if exc.last_good is not None:
            print(f"last good tau: {exc.last_good[0]:.6g}", file=sys.stderr)
        if "edge occupation" in str(exc):
            print("hint: widen the ladder with --ladder", file=sys.stderr)
        return EXIT_ABORT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
