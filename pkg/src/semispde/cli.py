"""Command-line interface.

Every report-producing subcommand writes three files into the output
directory, named ``<command>-<fingerprint>.{json,csv,png}``: the canonical
JSON report, a flat delimited summary, and a figure.  The fingerprint is
the scenario's config hash, so identical configurations land on identical
file names and -- because nothing time- or host-dependent enters the
reports -- identical bytes.

Exit codes: 0 when every verdict passes (or is degenerate), 1 when a
verdict fails, 2 for configuration or usage errors, 3 for numerical
failures (blow-up, linear-solver breakdown).
"""

from __future__ import annotations

import argparse
import struct
import sys
from pathlib import Path

import numpy as np

from semispde import estimators, reporting
from semispde._version import __version__
from semispde.coefficients import check_boundedness, check_discrete_coercivity, check_parabolicity
from semispde.estimators import PreconditionError
from semispde.scenarios import ConfigError, Scenario
from semispde.semilinear import check_assumption_f
from semispde.solver import SolverError, solve_trajectory

__all__ = ["main"]

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_USAGE = 2
EXIT_NUMERICAL = 3

_BINARY_MAGIC = b"SSPD"
_BINARY_VERSION = 1


# ---------------------------------------------------------------------------
# helpers


def _load_scenario(args) -> Scenario:
    scenario = Scenario.from_config(Path(args.config))
    updates: dict = {}
    if getattr(args, "seed", None) is not None:
        updates.setdefault("noise", {})["seed"] = args.seed
    if getattr(args, "samples", None) is not None:
        updates.setdefault("estimators", {})["samples"] = args.samples
    if updates:
        scenario = scenario.with_updates(updates)
    return scenario


def _estimator_overrides(scenario: Scenario, **kv) -> Scenario:
    """Fold command-line estimator settings into the config so the
    fingerprint (and thus the output names) reflects them."""
    updates = {k: v for k, v in kv.items() if v is not None}
    return scenario.with_updates({"estimators": updates}) if updates else scenario


def _workers(args) -> int:
    if getattr(args, "strict_fp", False):
        return 1
    return max(1, getattr(args, "workers", 1))


def _outdir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _emit_report(report, args, command: str) -> int:
    out = _outdir(args)
    base = out / f"{command}-{report.config_hash}"
    reporting.write_json(report, base.with_suffix(".json"))
    reporting.write_report_csv([reporting.report_row(report)], base.with_suffix(".csv"))
    reporting.render_report(report, base.with_suffix(".png"))
    n = "n/a" if report.n_emp is None else f"{report.n_emp:.6g}"
    print(f"{report.estimate_id}: {report.verdict} (N_emp={n}, samples={report.samples})")
    print(f"wrote {base}.json, {base}.csv, {base}.png")
    return EXIT_PASS if report.verdict in ("pass", "degenerate") else EXIT_FAIL


def _float_list(text: str) -> list:
    vals = [float(v) for v in text.split(",") if v.strip()]
    if not vals:
        raise ConfigError(f"expected a comma-separated list of numbers, got {text!r}")
    return vals


def _int_list(text: str) -> list:
    return [int(v) for v in _float_list(text)]


# ---------------------------------------------------------------------------
# subcommands


def _cmd_check_assumptions(args) -> int:
    scenario = _load_scenario(args)
    grid = scenario.grid
    results = {
        "parabolicity": check_parabolicity(scenario.coeffs, grid),
        "boundedness": check_boundedness(scenario.coeffs, grid),
        "semilinear": check_assumption_f(scenario.term, dim=grid.dim),
        "coercivity": check_discrete_coercivity(scenario.coeffs, grid),
    }
    out = _outdir(args)
    base = out / f"check-assumptions-{scenario.fingerprint}"
    payload = {"config_hash": scenario.fingerprint, "checks": results}
    reporting.write_json(payload, base.with_suffix(".json"))
    reporting.write_checks_csv(results, base.with_suffix(".csv"))
    reporting.render_assumptions(results, base.with_suffix(".png"))
    ok = True
    for name in sorted(results):
        passed = bool(results[name]["passed"])
        ok = ok and passed
        print(f"{name}: {'pass' if passed else 'fail'}")
    print(f"wrote {base}.json, {base}.csv, {base}.png")
    return EXIT_PASS if ok else EXIT_FAIL


def _dump_csv(traj, grid, path) -> None:
    import csv

    coords = grid.coords()
    flat = [c.ravel() for c in coords]
    header = ["t", "node", "x", "y"][: 2 + grid.dim] + ["u"]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for t, snap in zip(traj.times, traj.snapshots):
            vals = snap.ravel()
            for node in range(vals.size):
                row = [repr(float(t)), str(node)]
                row += [repr(float(f[node])) for f in flat]
                row.append(repr(float(vals[node])))
                writer.writerow(row)


def _dump_binary(traj, grid, stride: int, path) -> None:
    n_snap = len(traj.times)
    header = struct.pack(
        f"<4sII{grid.dim}III",
        _BINARY_MAGIC,
        _BINARY_VERSION,
        grid.dim,
        *grid.points,
        stride,
        n_snap,
    )
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(traj.times, dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(traj.snapshots, dtype="<f8").tobytes())


def _cmd_simulate(args) -> int:
    scenario = _load_scenario(args)
    cfg = scenario.solver_config()
    traj = solve_trajectory(
        scenario.grid, scenario.coeffs, scenario.forcing, scenario.term,
        scenario.initial, scenario.noise_path(args.stream), cfg,
    )
    out = _outdir(args)
    base = out / f"simulate-{scenario.fingerprint}"
    fmt = scenario.config["output"]["format"]
    if fmt == "csv":
        data_path = base.with_suffix(".csv")
        _dump_csv(traj, scenario.grid, data_path)
    else:
        data_path = base.with_suffix(".bin")
        _dump_binary(traj, scenario.grid, cfg.snapshot_stride, data_path)
    summary = {
        "config_hash": scenario.fingerprint,
        "seed": scenario.seed,
        "stream": args.stream,
        "dt": scenario.dt,
        "t_final": scenario.t_final,
        "snapshots": len(traj.times),
        "snapshot_stride": cfg.snapshot_stride,
        "format": fmt,
        "data_file": data_path.name,
        "final_sup": float(np.max(np.abs(traj.final))),
        "final_l2": float(np.sqrt(np.sum(traj.final**2) * scenario.grid.cell_volume)),
    }
    reporting.write_json(summary, base.with_suffix(".json"))
    reporting.render_trajectory(traj, base.with_suffix(".png"))
    print(f"simulated {len(traj.times)} snapshots (stream {args.stream}, final sup {summary['final_sup']:.6g})")
    print(f"wrote {base}.json, {data_path}, {base}.png")
    return EXIT_PASS


def _cmd_verify_moment(args) -> int:
    scenario = _estimator_overrides(_load_scenario(args), p=args.p)
    report = estimators.verify_moment_bound(scenario, workers=_workers(args))
    return _emit_report(report, args, "verify-moment")


def _cmd_verify_truncation(args) -> int:
    scenario = _load_scenario(args)
    if args.levels is not None:
        scenario = scenario.with_updates({"estimators": {"m_levels": _float_list(args.levels)}})
    report = estimators.verify_truncation_convergence(scenario, workers=_workers(args))
    return _emit_report(report, args, "verify-truncation")


def _cmd_verify_interior(args) -> int:
    scenario = _estimator_overrides(_load_scenario(args), interior_margin=args.margin)
    report = estimators.verify_interior_regularity(scenario, workers=_workers(args))
    return _emit_report(report, args, "verify-interior")


def _cmd_verify_weighted(args) -> int:
    scenario = _estimator_overrides(_load_scenario(args), q=args.q, theta=args.theta)
    report = estimators.verify_weighted_regularity(scenario, workers=_workers(args))
    return _emit_report(report, args, "verify-weighted")


def _cmd_verify_holder(args) -> int:
    scenario = _estimator_overrides(_load_scenario(args), q=args.q, theta=args.theta)
    if args.lags is not None:
        scenario = scenario.with_updates({"estimators": {"lag_steps": _int_list(args.lags)}})
    report = estimators.estimate_holder_exponent(scenario, workers=_workers(args))
    return _emit_report(report, args, "verify-holder")


def _cmd_sweep(args) -> int:
    scenario = _load_scenario(args)
    values = _float_list(args.values)
    workers = _workers(args)
    rows, reports = [], []
    for value in values:
        if args.axis == "m":
            s = scenario.with_updates({"drift": {"truncation": value}})
            rep = estimators.verify_moment_bound(s, workers=workers)
        elif args.axis == "dt":
            # Pin the coupling step to the coarsest dt so every run in the
            # ladder refines one shared noise path.
            s = scenario.with_updates({"time": {"dt": value}, "noise": {"coupling_dt": max(values)}})
            rep = estimators.verify_moment_bound(s, workers=workers)
        else:
            s = scenario.with_updates({"estimators": {"q": value}})
            rep = estimators.estimate_holder_exponent(s, workers=workers)
        rows.append(reporting.report_row(rep, axis=args.axis, value=value))
        reports.append(rep)
        n = "n/a" if rep.n_emp is None else f"{rep.n_emp:.6g}"
        print(f"{args.axis}={value:g}: {rep.verdict} (N_emp={n}, config {rep.config_hash})")
    out = _outdir(args)
    base = out / f"sweep-{args.axis}-{scenario.fingerprint}"
    reporting.write_json({"axis": args.axis, "values": values, "reports": reports}, base.with_suffix(".json"))
    reporting.write_report_csv(rows, base.with_suffix(".csv"))
    reporting.render_sweep(rows, args.axis, base.with_suffix(".png"))
    print(f"wrote {base}.json, {base}.csv, {base}.png")
    ok = all(r.verdict in ("pass", "degenerate") for r in reports)
    return EXIT_PASS if ok else EXIT_FAIL


# ---------------------------------------------------------------------------
# parser


def _add_common(sp, estimation: bool = True) -> None:
    sp.add_argument("--config", required=True, help="scenario YAML file")
    sp.add_argument("--out", default="out", help="output directory (default: out)")
    sp.add_argument("--seed", type=int, default=None, help="override noise.seed")
    if estimation:
        sp.add_argument("--samples", type=int, default=None, help="override estimators.samples")
        sp.add_argument("--workers", type=int, default=1, help="worker processes (default 1; any count gives identical reports)")
        sp.add_argument("--strict-fp", action="store_true", dest="strict_fp",
                        help="force single-process execution for byte-reproducibility audits")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="semispde",
        description="Simulate semilinear stochastic PDEs and verify moment and regularity estimates.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    sp = sub.add_parser("check-assumptions", help="audit parabolicity, bounds, drift assumptions, coercivity")
    _add_common(sp, estimation=False)
    sp.set_defaults(func=_cmd_check_assumptions)

    sp = sub.add_parser("simulate", help="integrate one trajectory and dump its snapshots")
    _add_common(sp, estimation=False)
    sp.add_argument("--stream", type=int, default=0, help="noise stream index (default 0)")
    sp.set_defaults(func=_cmd_simulate)

    sp = sub.add_parser("verify-moment", help="Monte Carlo check of the L^p moment bound")
    _add_common(sp)
    sp.add_argument("--p", type=float, default=None, help="moment exponent (default: estimators.p)")
    sp.set_defaults(func=_cmd_verify_moment)

    sp = sub.add_parser("verify-truncation", help="m-uniform bound and convergence of drift truncations")
    _add_common(sp)
    sp.add_argument("--levels", default=None, help="comma-separated truncation levels (default: estimators.m_levels)")
    sp.set_defaults(func=_cmd_verify_truncation)

    sp = sub.add_parser("verify-interior", help="interior H^1 regularity on a margin subdomain")
    _add_common(sp)
    sp.add_argument("--margin", type=float, default=None, help="interior margin (default: estimators.interior_margin)")
    sp.set_defaults(func=_cmd_verify_interior)

    sp = sub.add_parser("verify-weighted", help="weighted Sobolev regularity up to the boundary")
    _add_common(sp)
    sp.add_argument("--q", type=float, default=None, help="integrability exponent (default: estimators.q)")
    sp.add_argument("--theta", type=float, default=None, help="weight power (default: window midpoint)")
    sp.set_defaults(func=_cmd_verify_weighted)

    sp = sub.add_parser("verify-holder", help="fit the Hoelder-in-time exponent from increment moments")
    _add_common(sp)
    sp.add_argument("--q", type=float, default=None, help="increment exponent (default: estimators.q)")
    sp.add_argument("--theta", type=float, default=None, help="weight power (default: window midpoint)")
    sp.add_argument("--lags", default=None, help="comma-separated lags in steps (default: estimators.lag_steps)")
    sp.set_defaults(func=_cmd_verify_holder)

    sp = sub.add_parser("sweep", help="re-run an estimator along one config axis")
    _add_common(sp)
    sp.add_argument("--axis", required=True, choices=("m", "dt", "q"), help="config axis to sweep")
    sp.add_argument("--values", required=True, help="comma-separated axis values")
    sp.set_defaults(func=_cmd_sweep)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except PreconditionError as exc:
        print(f"precondition failed: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SolverError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
