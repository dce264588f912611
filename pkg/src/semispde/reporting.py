"""Report serialization and figures.

Writers emit byte-stable output: JSON is dumped with sorted keys, two-space
indents and a trailing newline, CSV uses a fixed column set and ``\\n`` line
endings, and neither embeds timestamps, hostnames or anything else that
varies between identical runs.  Figures are rendered through the Agg
backend straight to PNG files; they are documentation, not part of the
reproducibility contract.
"""

from __future__ import annotations

import csv
import json

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from semispde.estimators import EstimateReport

__all__ = [
    "REPORT_FIELDS",
    "write_json",
    "write_report_csv",
    "write_checks_csv",
    "report_row",
    "render_report",
    "render_trajectory",
    "render_assumptions",
    "render_sweep",
]

REPORT_FIELDS = [
    "estimate_id",
    "axis",
    "value",
    "lhs_mean",
    "lhs_stderr",
    "rhs_mean",
    "rhs_stderr",
    "n_emp",
    "samples",
    "config_hash",
    "verdict",
    "gamma_fit",
    "implied_order",
]

_PNG_METADATA = {"Software": "semispde"}


def _jsonable(obj):
    if isinstance(obj, EstimateReport):
        return _jsonable(obj.to_dict())
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


def write_json(obj, path) -> None:
    """Canonical JSON: sorted keys, indent 2, trailing newline."""
    text = json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n"
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _cell(value) -> str:
    if value is None or value == "":
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def report_row(report: EstimateReport, axis: str = "", value="") -> dict:
    """Flatten one report into the fixed CSV column set."""
    d = report.details
    return {
        "estimate_id": report.estimate_id,
        "axis": axis,
        "value": _cell(value),
        "lhs_mean": _cell(report.lhs.mean),
        "lhs_stderr": _cell(report.lhs.stderr),
        "rhs_mean": _cell(report.rhs.mean),
        "rhs_stderr": _cell(report.rhs.stderr),
        "n_emp": _cell(report.n_emp),
        "samples": str(report.samples),
        "config_hash": report.config_hash,
        "verdict": report.verdict,
        "gamma_fit": _cell(d.get("gamma_fit")),
        "implied_order": _cell(d.get("implied_order")),
    }


def write_report_csv(rows, path) -> None:
    """Write flattened report rows (dicts over REPORT_FIELDS) to CSV."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=REPORT_FIELDS, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow(row)


def write_checks_csv(results: dict, path) -> None:
    """Flatten assumption-check reports to (check, metric, value, passed) rows."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["check", "metric", "value", "passed"])
        for name in sorted(results):
            rep = _jsonable(results[name])
            passed = str(bool(rep["passed"])).lower()
            for key in sorted(rep):
                val = rep[key]
                if key == "passed" or isinstance(val, (dict, list)):
                    continue
                writer.writerow([name, key, _cell(val), passed])
            for key in sorted(rep):
                if isinstance(rep[key], dict):
                    for sub in sorted(rep[key]):
                        writer.writerow([name, f"{key}.{sub}", _cell(rep[key][sub]), passed])


# ---------------------------------------------------------------------------
# figures


def _save(fig, path) -> None:
    fig.savefig(path, dpi=120, metadata=_PNG_METADATA)
    plt.close(fig)


def _verdict_color(verdict: str) -> str:
    return {"pass": "tab:green", "fail": "tab:red"}.get(verdict, "tab:orange")


def _sides_panel(ax, report: EstimateReport) -> None:
    sides = [report.lhs, report.rhs]
    ax.bar(
        ["LHS", "RHS"],
        [s.mean for s in sides],
        yerr=[s.stderr for s in sides],
        color=["tab:blue", "tab:gray"],
        capsize=4.0,
    )
    n = "n/a" if report.n_emp is None else f"{report.n_emp:.3g}"
    ax.set_title(f"{report.estimate_id}: {report.verdict} (N_emp = {n})", color=_verdict_color(report.verdict))
    ax.set_ylabel("mean over samples")


def _render_moment(report: EstimateReport, path) -> None:
    fig, ax = plt.subplots(figsize=(5.0, 3.6), constrained_layout=True)
    _sides_panel(ax, report)
    _save(fig, path)


def _render_truncation(report: EstimateReport, path) -> None:
    levels = report.details["per_level"]
    ms = [lv["m"] for lv in levels]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(8.4, 3.6), constrained_layout=True)
    ax1.plot(ms, [lv["n_emp"] for lv in levels], "o-", label="N_emp(m)")
    if report.n_emp is not None:
        ax1.axhline(report.n_emp, color="tab:gray", ls="--", label="untruncated")
        ax1.axhline(2.0 * report.n_emp, color="tab:red", ls=":", label="2x untruncated")
    ax1.set_xscale("log", base=2)
    ax1.set_xlabel("truncation level m")
    ax1.set_ylabel("N_emp")
    ax1.legend(fontsize=8)
    ax1.set_title(f"uniformity in m: {report.verdict}", color=_verdict_color(report.verdict))
    gaps = np.array([lv["gap_max"] for lv in levels])
    ax2.plot(ms, gaps, "s-", color="tab:purple")
    ax2.set_xscale("log", base=2)
    if np.any(gaps > 0):
        ax2.set_yscale("log")
    ax2.set_xlabel("truncation level m")
    ax2.set_ylabel("max L2 gap to reference")
    ax2.set_title("convergence to the largest-m run")
    _save(fig, path)


def _render_interior(report: EstimateReport, path) -> None:
    per_axis = report.details["per_axis"]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(8.4, 3.6), constrained_layout=True)
    _sides_panel(ax1, report)
    labels = [f"axis {e['axis']}" for e in per_axis]
    vals = [0.0 if e["n_emp"] is None else e["n_emp"] for e in per_axis]
    ax2.bar(labels, vals, color="tab:blue")
    ax2.set_ylabel("per-axis N_emp")
    ax2.set_title(f"interior margin {report.details['margin']:g}")
    _save(fig, path)


def _render_weighted(report: EstimateReport, path) -> None:
    d = report.details
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(8.8, 3.6), constrained_layout=True)
    _sides_panel(ax1, report)
    labels = ["|u| piece"]
    vals = [d["zeroth_piece"]]
    for e in d["first_derivative_pieces"]:
        labels.append(f"d{e['axis']} u")
        vals.append(e["value"])
    for e in d["weighted_second_derivative_pieces"]:
        i, j = e["axes"]
        labels.append(f"d{i}d{j} u")
        vals.append(e["value"])
    ax2.bar(range(len(vals)), vals, color="tab:blue")
    ax2.set_xticks(range(len(vals)))
    ax2.set_xticklabels(labels, rotation=45, ha="right", fontsize=8)
    ax2.set_ylabel("time-integrated piece")
    ax2.set_title(f"decomposition (q={d['q']:g}, theta={d['theta']:g})")
    for w in d["warnings"]:
        ax2.annotate(w, (0.02, 0.95), xycoords="axes fraction", fontsize=7, color="tab:red")
    _save(fig, path)


def _render_holder(report: EstimateReport, path) -> None:
    d = report.details
    curve = d["moment_curve"]
    taus = np.array([e["tau"] for e in curve])
    m = np.array([e["m"] for e in curve])
    fig, ax = plt.subplots(figsize=(5.4, 3.8), constrained_layout=True)
    if np.all(m > 0):
        ax.errorbar(taus, m, yerr=[e["m_stderr"] for e in curve], fmt="o", color="tab:blue", label="m(tau)")
        ax.set_xscale("log")
        ax.set_yscale("log")
        if d.get("gamma_fit") is not None:
            fit = np.exp(d["fit_intercept"]) * taus ** d["gamma_fit"]
            ax.plot(taus, fit, "-", color="tab:orange", label=f"fit slope {d['gamma_fit']:.3f}")
            guide = m[-1] * (taus / taus[-1]) ** d["target_slope"]
            ax.plot(taus, guide, "--", color="tab:gray", label=f"target slope {d['target_slope']:g}")
    else:
        ax.plot(taus, m, "o", color="tab:blue")
    ax.set_xlabel("lag tau")
    ax.set_ylabel("increment moment m(tau)")
    order = d.get("implied_order")
    order_txt = "n/a" if order is None else f"{order:.4f}"
    ax.set_title(f"{report.verdict}: implied time order {order_txt}", color=_verdict_color(report.verdict))
    ax.legend(fontsize=8)
    _save(fig, path)


_RENDERERS = {
    "moment_bound": _render_moment,
    "truncation_convergence": _render_truncation,
    "interior_regularity": _render_interior,
    "weighted_regularity": _render_weighted,
    "holder_exponent": _render_holder,
}


def render_report(report: EstimateReport, path) -> None:
    """Render the figure matching the report's estimate_id."""
    _RENDERERS.get(report.estimate_id, _render_moment)(report, path)


def render_trajectory(traj, path) -> None:
    """Snapshot figure: line family in 1D, final heat map in 2D."""
    grid = traj.grid
    fig, ax = plt.subplots(figsize=(5.4, 3.8), constrained_layout=True)
    if grid.dim == 1:
        x = grid.axis_coords(0)
        n_show = min(6, len(traj.times))
        picks = np.unique(np.linspace(0, len(traj.times) - 1, n_show).astype(int))
        cmap = plt.get_cmap("viridis")
        for idx in picks:
            frac = traj.times[idx] / max(traj.times[-1], 1e-300)
            ax.plot(x, traj.snapshots[idx], color=cmap(frac), lw=1.2, label=f"t={traj.times[idx]:.3g}")
        ax.set_xlabel("x")
        ax.set_ylabel("u")
        ax.legend(fontsize=7)
    else:
        im = ax.imshow(
            traj.final.T,
            origin="lower",
            extent=(0.0, grid.extents[0], 0.0, grid.extents[1]),
            cmap="viridis",
            aspect="auto",
        )
        fig.colorbar(im, ax=ax, label="u")
        ax.set_xlabel("x")
        ax.set_ylabel("y")
    ax.set_title(f"trajectory (seed {traj.seed}, stream {traj.stream}, T={traj.times[-1]:g})")
    _save(fig, path)


def render_assumptions(results: dict, path) -> None:
    """Margins and worst violations for the standing-assumption checks."""
    fig, axes = plt.subplots(2, 2, figsize=(8.4, 6.2), constrained_layout=True)
    para = results["parabolicity"]
    ax = axes[0, 0]
    ax.bar(["margin", "kappa"], [para["margin"], para["kappa"]], color=["tab:blue", "tab:gray"])
    ax.set_title(f"stochastic parabolicity: {'pass' if para['passed'] else 'fail'}")
    bnd = results["boundedness"]
    ax = axes[0, 1]
    ax.bar(
        ["worst a,b,c", "sigma+mu l2", "K"],
        [bnd["worst_abc"], bnd["sigma_mu_l2_sum"], bnd["K"]],
        color=["tab:blue", "tab:blue", "tab:gray"],
    )
    ax.set_title(f"coefficient bounds: {'pass' if bnd['passed'] else 'fail'}")
    fch = results["semilinear"]
    ax = axes[1, 0]
    names = list(fch["violations"])
    ax.bar(names, [fch["violations"][k] for k in names], color="tab:blue")
    ax.axhline(fch["tol"], color="tab:red", ls=":", label="tolerance")
    ax.set_title(f"drift assumptions: {'pass' if fch['passed'] else 'fail'}")
    ax.legend(fontsize=8)
    coer = results["coercivity"]
    ax = axes[1, 1]
    ax.bar(["kappa_obs", "kprime_obs"], [coer["kappa_obs"], coer["kprime_obs"]], color="tab:blue")
    ax.set_title(f"discrete coercivity: {'pass' if coer['passed'] else 'fail'}")
    _save(fig, path)


def render_sweep(rows: list, axis: str, path) -> None:
    """Trend of the swept quantity: N_emp, or the fitted slope on the q axis."""
    vals = np.array([float(r["value"]) for r in rows])
    fig, ax = plt.subplots(figsize=(5.4, 3.8), constrained_layout=True)
    if axis == "q":
        y = np.array([float(r["gamma_fit"]) if r["gamma_fit"] else np.nan for r in rows])
        ax.plot(vals, y, "o-", color="tab:blue", label="fitted slope")
        ax.plot(vals, vals / 2.0 - 1.0, "--", color="tab:gray", label="target q/2 - 1")
        ax.set_ylabel("gamma_fit")
        ax.legend(fontsize=8)
    else:
        y = np.array([float(r["n_emp"]) if r["n_emp"] else np.nan for r in rows])
        ax.plot(vals, y, "o-", color="tab:blue")
        if np.all(vals > 0):
            ax.set_xscale("log", base=2)
        ax.set_ylabel("N_emp")
    ax.set_xlabel(axis)
    ax.set_title(f"sweep over {axis}")
    _save(fig, path)
