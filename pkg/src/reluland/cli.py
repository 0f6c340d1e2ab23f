"""Command-line front end.

Subcommands: ``minima`` (zero-gradient / constant-risk / Hessian / gap
certificates for the benchmark target), ``enumerate`` (width-1 critical
catalog for a piecewise-polynomial target), ``train`` (GD ensemble with
greedy L2 deduplication) and ``gf`` (gradient-flow integration).

Exit codes: 0 success, 1 certificate/assertion failure, 2 usage or input
error.  Reports are JSON (schema_version 1; schemas in docs/schemas/),
realizations export as CSV, and ``train --svg`` also emits a minimal
polyline overlay plot.
"""

from __future__ import annotations

import json
import os
import sys
from pathlib import Path

import click

from . import __version__
from .errors import DomainError, FinitenessError, WitnessError
from .landscape import closed_hessian_M, grad, hessian_fd, risk
from .minima import certify_gap, minima_risk, sample_M, verify_zero_integrals
from .network import Params, write_realization_csv
from .enumeration import enumerate_all, grid_oracle, oracle_check
from .target import BenchmarkTarget, parse_target_json
from .train import TrainConfig, ensemble, gf_run, xavier_init

SCHEMA_VERSION = 1


class Rational(click.ParamType):
    """Float parameter also accepting fractions like 1/3."""

    name = "rational"

    def convert(self, value, param, ctx):
        if isinstance(value, float):
            return value
        try:
            if "/" in str(value):
                num, den = str(value).split("/", 1)
                return float(num) / float(den)
            return float(value)
        except (ValueError, ZeroDivisionError):
            self.fail(f"{value!r} is not a number or fraction", param, ctx)


RATIONAL = Rational()


def _out_path(out_dir: str, name: str, force: bool) -> Path:
    path = Path(out_dir) / name
    path.parent.mkdir(parents=True, exist_ok=True)
    if path.exists() and not force:
        raise click.UsageError(f"{path} exists; pass --force to overwrite")
    return path


def _write_json(path: Path, doc: dict) -> None:
    doc = {"schema_version": SCHEMA_VERSION, **doc}
    path.write_text(json.dumps(doc, indent=2) + "\n")


def _load_target(target_file: str):
    try:
        return parse_target_json(Path(target_file).read_text())
    except OSError as exc:
        raise click.UsageError(f"cannot read target file: {exc}") from exc
    except DomainError as exc:
        raise click.UsageError(str(exc)) from exc


@click.group()
@click.version_option(version=__version__, prog_name="reluland")
def main():
    """Loss-landscape toolkit for one-hidden-layer ReLU networks."""


@main.command("minima")
@click.option("--alpha", type=RATIONAL, default=1 / 3, show_default="1/3")
@click.option("--beta", type=RATIONAL, default=2 / 3, show_default="2/3")
@click.option("--a", "a_", type=RATIONAL, default=0.0, show_default=True)
@click.option("--b", "b_", type=RATIONAL, default=1.0, show_default=True)
@click.option("--h", "--H", "width", type=int, default=4, show_default=True)
@click.option("--samples", type=int, default=10, show_default=True,
              help="Evenly spaced kink positions inside (alpha, beta).")
@click.option("--x", "xs", type=RATIONAL, multiple=True,
              help="Explicit kink positions (overrides --samples).")
@click.option("--y", "y_", type=RATIONAL, default=1.0, show_default=True,
              help="Inner scale of the sampled parameter vectors.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--gap", is_flag=True, help="Also certify the two-kink risk gap.")
@click.option("--p", "p_", type=RATIONAL, default=0.5, show_default=True)
@click.option("--eps", type=RATIONAL, default=0.05, show_default=True)
@click.option("--out", "out_dir", default=".", show_default=True)
@click.option("--force", is_flag=True)
def cmd_minima(alpha, beta, a_, b_, width, samples, xs, y_, seed, gap, p_, eps,
               out_dir, force):
    """Certify zero gradient, constant risk and Hessian structure on the
    single-kink local-minimum family of the benchmark target."""
    try:
        t = BenchmarkTarget(alpha, beta, a_, b_)
    except DomainError as exc:
        raise click.UsageError(str(exc)) from exc
    if xs:
        positions = list(xs)
    else:
        if samples < 1:
            raise click.UsageError("--samples must be >= 1")
        positions = [alpha + (beta - alpha) * (k + 1) / (samples + 1)
                     for k in range(samples)]
    for x in positions:
        if not (alpha < x < beta):
            raise click.UsageError(f"sample x={x!r} outside (alpha, beta)")

    ref_risk = minima_risk(t)
    ref_risk_simpson = minima_risk(t, method="simpson")
    ok = abs(ref_risk - ref_risk_simpson) <= 1e-10 * max(1.0, abs(ref_risk))
    rows = []
    for k, x in enumerate(positions):
        s = sample_M(t, width, x, y_, seed=seed + k)
        gn = grad(s.theta, t).max_norm()
        r = risk(s.theta, t)
        full = hessian_fd(s.theta, t, coords="all")
        restricted = hessian_fd(s.theta, t, coords="restricted4")
        closed = closed_hessian_M(x, s.theta.w(0), t)
        rel = max(abs(restricted.matrix[i][j] - closed.matrix[i][j])
                  / max(abs(closed.matrix[i][j]), 1e-300)
                  for i in range(4) for j in range(4))
        res = verify_zero_integrals(t, x)
        row_ok = (gn < 1e-10
                  and abs(r - ref_risk) <= 1e-9 * max(abs(ref_risk), 1e-300)
                  and full.numerical_rank == 2
                  and full.min_eigenvalue > -1e-8
                  and rel < 1e-5
                  and max(abs(v) for v in res) < 1e-10)
        ok = ok and row_ok
        rows.append({
            "x": x, "y": y_, "grad_max_norm": gn, "risk": r,
            "zero_integral_residuals": list(res),
            "hessian_summary": {
                "full_rank": full.numerical_rank,
                "full_min_eigenvalue": full.min_eigenvalue,
                "restricted_vs_closed_rel": rel,
            },
            "pass": row_ok,
        })
    doc = {
        "kind": "minima_report",
        "target": {"alpha": alpha, "beta": beta, "a": a_, "b": b_},
        "H": width,
        "reference_risk": ref_risk,
        "reference_risk_cross_check": ref_risk_simpson,
        "samples": rows,
    }
    if gap:
        try:
            cert = certify_gap(t, width, p_, eps, seed=seed)
            doc["gap"] = {"p": p_, "eps": eps, "risk_theta": cert.risk_theta,
                          "risk_witness": cert.risk_witness, "gap": cert.gap,
                          "pass": cert.gap > 0.0}
        except DomainError as exc:
            raise click.UsageError(str(exc)) from exc
        except WitnessError as exc:
            doc["gap"] = {"p": p_, "eps": eps, "error": str(exc), "pass": False}
            ok = False
    doc["pass"] = ok
    _write_json(_out_path(out_dir, "minima_report.json", force), doc)
    click.echo(f"minima report: {'PASS' if ok else 'FAIL'} "
               f"({len(rows)} samples, risk {ref_risk:.12g})")
    sys.exit(0 if ok else 1)


@main.command("enumerate")
@click.option("--target", "target_file", required=True, type=click.Path())
@click.option("--dedup", type=RATIONAL, default=1e-8, show_default=True)
@click.option("--grid", "grid_n", type=int, default=256, show_default=True,
              help="Samples per realization in the CSV export.")
@click.option("--out", "out_dir", default=".", show_default=True)
@click.option("--force", is_flag=True)
def cmd_enumerate(target_file, dedup, grid_n, out_dir, force):
    """Enumerate all width-1 critical realizations of a continuous
    piecewise-polynomial target and cross-check with the grid oracle."""
    t = _load_target(target_file)
    try:
        catalog = enumerate_all(t, dedup=dedup)
    except FinitenessError as exc:
        raise click.UsageError(str(exc)) from exc
    oracle_ok = oracle_check(t)
    entries = []
    ok = oracle_ok
    for e in catalog.entries:
        ok = ok and e.grad_norm < 1e-9
        entries.append({
            "kind": e.kind, "q": e.q, "c": e.c, "vw": e.vw,
            "risk": e.risk, "grad_norm": e.grad_norm,
            "class": None if e.crit_class is None else e.crit_class.value,
        })
    doc = {"kind": "catalog", "entries": entries, "oracle_check": oracle_ok,
           "brackets_increasing": [list(b) for b in grid_oracle(t).brackets],
           "brackets_decreasing": [list(b) for b in
                                   grid_oracle(t, orientation="decreasing").brackets],
           "pass": ok}
    _write_json(_out_path(out_dir, "catalog.json", force), doc)
    for i, e in enumerate(catalog.entries):
        write_realization_csv(e.realization,
                              _out_path(out_dir, f"catalog_entry_{i}.csv", force),
                              grid=grid_n)
    click.echo(f"catalog: {len(entries)} entries, oracle "
               f"{'PASS' if oracle_ok else 'FAIL'}")
    sys.exit(0 if ok else 1)


def _default_benchmark() -> BenchmarkTarget:
    return BenchmarkTarget(1 / 3, 2 / 3, 0.0, 1.0)


@main.command("train")
@click.option("--target", "target_file", type=click.Path(), default=None,
              help="Target spec JSON; defaults to the benchmark target.")
@click.option("--h", "--H", "width", type=int, default=4, show_default=True)
@click.option("--lr", type=RATIONAL, default=1 / 20, show_default="1/20")
@click.option("--grad-tol", type=RATIONAL, default=1e-4, show_default=True)
@click.option("--max-iters", type=int, default=10_000_000, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--runs", type=int, default=50, show_default=True)
@click.option("--dedup", type=RATIONAL, default=1e-4, show_default=True)
@click.option("--grid", "grid_n", type=int, default=256, show_default=True,
              help="Samples per realization in the CSV export.")
@click.option("--svg", is_flag=True, help="Also plot target + clusters.")
@click.option("--out", "out_dir", default=".", show_default=True)
@click.option("--force", is_flag=True)
def cmd_train(target_file, width, lr, grad_tol, max_iters, seed, runs, dedup,
              grid_n, svg, out_dir, force):
    """Run the GD ensemble and report deduplicated realization clusters."""
    if lr <= 0:
        raise click.UsageError("learning rate must be positive")
    t = _load_target(target_file) if target_file else _default_benchmark()
    try:
        cfg = TrainConfig(H=width, lr=lr, grad_tol=grad_tol, max_iters=max_iters,
                          master_seed=seed, runs=runs, dedup_l2=dedup)
    except DomainError as exc:
        raise click.UsageError(str(exc)) from exc
    threads = int(os.environ.get("RELULAND_THREADS", "1") or 1)
    report = ensemble(t, cfg, threads=threads)
    ok = all(r.converged for r in report.runs) and not any(r.diverged for r in report.runs)
    doc = {
        "kind": "ensemble_report",
        "config": {"H": cfg.H, "lr": cfg.lr, "grad_tol": cfg.grad_tol,
                   "max_iters": cfg.max_iters, "weight_var": cfg.effective_weight_var,
                   "dedup_l2": cfg.dedup_l2, "master_seed": cfg.master_seed,
                   "runs": cfg.runs},
        "runs": [{"seed": r.seed, "iterations": r.iterations,
                  "grad_max_norm": r.grad_max_norm, "risk": r.risk,
                  "converged": r.converged, "diverged": r.diverged,
                  "nonsmooth_hits": r.nonsmooth_hits} for r in report.runs],
        "clusters": [{"risk": c.risk, "size": len(c.seeds), "seeds": list(c.seeds)}
                     for c in report.clusters],
        "all_co_clustered": report.all_co_clustered,
        "risk_spread": report.risk_spread(),
        "pass": ok,
    }
    _write_json(_out_path(out_dir, "ensemble_report.json", force), doc)
    for i, cl in enumerate(report.clusters):
        write_realization_csv(cl.representative,
                              _out_path(out_dir, f"cluster_{i}.csv", force),
                              grid=grid_n)
    if svg:
        a, b = t.domain
        curves = [[(x, t.eval(x)) for x, _ in _grid(a, b, 257)]]
        labels = ["target"]
        for i, cl in enumerate(report.clusters):
            curves.append(cl.representative.sample(257))
            labels.append(f"cluster {i} (risk {cl.risk:.3g})")
        write_svg(_out_path(out_dir, "ensemble.svg", force), curves, labels)
    click.echo(f"train: {len(report.clusters)} clusters from {runs} runs, "
               f"spread {report.risk_spread():.3g}, {'PASS' if ok else 'FAIL'}")
    sys.exit(0 if ok else 1)


@main.command("gf")
@click.option("--target", "target_file", type=click.Path(), default=None)
@click.option("--h", "--H", "width", type=int, default=1, show_default=True)
@click.option("--theta0", "theta_file", type=click.Path(), default=None,
              help="Initial Params JSON; defaults to a seeded Xavier draw.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--t-end", type=RATIONAL, default=50.0, show_default=True)
@click.option("--rtol", type=RATIONAL, default=1e-8, show_default=True)
@click.option("--out", "out_dir", default=".", show_default=True)
@click.option("--force", is_flag=True)
def cmd_gf(target_file, width, theta_file, seed, t_end, rtol, out_dir, force):
    """Integrate the gradient-flow ODE and report the risk trajectory."""
    if t_end <= 0 or rtol <= 0:
        raise click.UsageError("t-end and rtol must be positive")
    t = _load_target(target_file) if target_file else _default_benchmark()
    if theta_file:
        from .network import params_from_json
        p0 = params_from_json(Path(theta_file).read_text())
    else:
        p0 = xavier_init(width, seed)
    run = gf_run(p0, t, t_end, rtol)
    risks = [r for _, r in run.samples]
    monotone = all(r1 - r0 <= 10.0 * rtol * (1.0 + abs(r0))
                   for r0, r1 in zip(risks, risks[1:]))
    ok = monotone and not run.step_underflow
    doc = {
        "kind": "gf_report",
        "t_end": run.t_end, "reached_t": run.reached_t,
        "steps_accepted": run.steps_accepted, "steps_rejected": run.steps_rejected,
        "final_risk": run.final_risk, "monotone": monotone,
        "step_underflow": run.step_underflow,
        "samples": [[tt, rr] for tt, rr in run.samples],
        "pass": ok,
    }
    _write_json(_out_path(out_dir, "gf_report.json", force), doc)
    click.echo(f"gf: final risk {run.final_risk:.6g} at t={run.reached_t:.3g}, "
               f"{'PASS' if ok else 'FAIL'}")
    sys.exit(0 if ok else 1)


def _grid(a: float, b: float, n: int):
    step = (b - a) / (n - 1)
    return [(min(a + i * step, b), 0.0) for i in range(n)]


_PALETTE = ["#000000", "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
            "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"]


def write_svg(path, curves, labels, width=640, height=400, margin=50):
    """Minimal polyline overlay plot; no plotting dependency."""
    xs = [x for c in curves for x, _ in c]
    ys = [y for c in curves for _, y in c]
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    if y1 - y0 < 1e-12:
        y0, y1 = y0 - 1.0, y1 + 1.0
    sx = (width - 2 * margin) / (x1 - x0)
    sy = (height - 2 * margin) / (y1 - y0)

    def px(x):
        return margin + (x - x0) * sx

    def py(y):
        return height - margin - (y - y0) * sy

    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {width} {height}">',
             f'<rect width="{width}" height="{height}" fill="white"/>']
    # axes + ticks
    parts.append(f'<line x1="{margin}" y1="{height - margin}" x2="{width - margin}" '
                 f'y2="{height - margin}" stroke="black"/>')
    parts.append(f'<line x1="{margin}" y1="{margin}" x2="{margin}" '
                 f'y2="{height - margin}" stroke="black"/>')
    for k in range(5):
        tx = x0 + (x1 - x0) * k / 4
        ty = y0 + (y1 - y0) * k / 4
        parts.append(f'<line x1="{px(tx):.1f}" y1="{height - margin}" '
                     f'x2="{px(tx):.1f}" y2="{height - margin + 5}" stroke="black"/>')
        parts.append(f'<text x="{px(tx):.1f}" y="{height - margin + 18}" '
                     f'font-size="10" text-anchor="middle">{tx:.3g}</text>')
        parts.append(f'<line x1="{margin - 5}" y1="{py(ty):.1f}" x2="{margin}" '
                     f'y2="{py(ty):.1f}" stroke="black"/>')
        parts.append(f'<text x="{margin - 8}" y="{py(ty):.1f}" font-size="10" '
                     f'text-anchor="end" dominant-baseline="middle">{ty:.3g}</text>')
    for i, (curve, label) in enumerate(zip(curves, labels)):
        color = _PALETTE[i % len(_PALETTE)]
        pts = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in curve)
        parts.append(f'<polyline points="{pts}" fill="none" stroke="{color}" '
                     f'stroke-width="1.5"/>')
        parts.append(f'<text x="{width - margin - 150}" y="{margin + 14 * (i + 1)}" '
                     f'font-size="11" fill="{color}">{label}</text>')
    parts.append("</svg>")
    Path(path).write_text("\n".join(parts) + "\n")


if __name__ == "__main__":
    main()
