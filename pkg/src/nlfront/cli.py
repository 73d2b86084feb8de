"""Command line entry point.

Usage::

    nlfront SUBCOMMAND CONFIG [--run-id ID] [--outdir DIR] [--plot]
                              [--emit-plotscript] [--resume CKPT] [--stop-time T]

Outputs go to ``<outdir>/<subcommand>/<run-id>/`` (run id defaults to a
UTC timestamp) together with a ``manifest.ini`` echoing the resolved
configuration.  Errors print one ``error <CODE>: message`` line to stderr
and exit with the status attached to the error class.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .checkpoint import load_checkpoint, save_checkpoint
from .config import RunConfig, parse_config
from .errors import HarnessViolation, NlfrontError
from .experiments import comparison_harness, estimate_speed, fit_acceleration
from .fixed_domain import assemble, ell_star, principal_eigenvalue
from .free_boundary import classify_outcome, mu_star, run
from .kernels import c_star, theory_acceleration
from .semiwave import M_of_c, WaveKind, extract_wave, find_c0, find_c0_left, residual

__all__ = ["SUBCOMMANDS", "main", "dispatch", "build_parser"]

SUBCOMMANDS = ("validate", "simulate", "eigen", "ell-star", "mu-star", "semiwave", "speed", "accelerate", "harness")
WORKERS_ENV = "NLFRONT_WORKERS"


def workers() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


class Output:
    """Run directory plus the small set of writers every subcommand uses."""

    def __init__(self, root: Path, subcommand: str, run_id: str, rc: RunConfig):
        self.dir = root / subcommand / run_id
        self.dir.mkdir(parents=True, exist_ok=True)
        manifest = f"# nlfront {__version__}\n# subcommand = {subcommand}\n\n" + rc.to_ini()
        (self.dir / "manifest.ini").write_text(manifest)
        self.files = []

    def path(self, name: str) -> Path:
        p = self.dir / name
        self.files.append(name)
        return p

    def table(self, name: str, header, rows) -> Path:
        p = self.path(name)
        with open(p, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for r in rows:
                w.writerow([repr(v) if isinstance(v, float) else v for v in r])
        return p

    def record(self, summary: dict) -> None:
        with open(self.path("summary.json"), "w") as fh:
            json.dump(summary, fh, indent=1, sort_keys=True, default=float)
            fh.write("\n")


def _ell_star(rc: RunConfig) -> float:
    return ell_star(rc.kernel, rc["model"]["d_rate"], rc.reaction.f0, rc["ell_star"]["tol_length"])


# ---------------------------------------------------------------------------
# subcommands; each returns (one-line summary, list of figure jobs)
# ---------------------------------------------------------------------------


def cmd_validate(rc, out, args):
    return f"valid: {rc.source}", []


def cmd_simulate(rc, out, args):
    cfg = rc.sim_config()
    echo = rc.sim_echo()
    if args.resume:
        state, series = load_checkpoint(args.resume, echo)
        series, state = run(cfg, state, series, stop_time=args.stop_time)
    else:
        series, state = run(cfg, stop_time=args.stop_time)
    series.to_csv(out.path("series.csv"))
    out.table("state.csv", ("x", "u"), zip(map(float, state.nodes), map(float, state.values)))
    save_checkpoint(out.path("checkpoint.json"), state, series, echo)
    outcome = "n/a"
    try:
        outcome = classify_outcome(series, _ell_star(rc)).value
    except NlfrontError:
        pass
    out.record({"t": state.t, "g": state.g, "h": state.h, "sup_u": state.sup_u, "outcome": outcome})
    line = f"simulate: t={state.t:g} g={state.g:.6g} h={state.h:.6g} sup_u={state.sup_u:.4g} outcome={outcome}"
    return line, [("series", out.dir / "series.csv", out.dir / "series.png")]


def cmd_eigen(rc, out, args):
    e, d, f0 = rc["eigen"], rc["model"]["d_rate"], rc.reaction.f0

    def solve(half):
        op = assemble(rc.kernel, d, e["c_speed"], (-half, half), e["n_nodes"], f0)
        return principal_eigenvalue(op, tol=e["tol"], method=e["method"])

    with ThreadPoolExecutor(max_workers=workers()) as pool:
        results = list(pool.map(solve, e["half_lengths"]))
    rows = [(float(l), r.n, r.lambda_p, r.residual, r.iterations) for l, r in zip(e["half_lengths"], results)]
    out.table("eigen.csv", ("l", "n", "lambda_p", "residual", "iterations"), rows)
    out.record({"lambda_p": {repr(r[0]): r[2] for r in rows}})
    worst = max(r.residual for r in results)
    line = "eigen: " + " ".join(f"l={r[0]:g}:{r[2]:.8g}" for r in rows) + f" residual={worst:.2g}"
    return line, [("eigen", out.dir / "eigen.csv", out.dir / "eigen.png")]


def cmd_ell_star(rc, out, args):
    value = _ell_star(rc)
    out.record({"ell_star": value, "tol": rc["ell_star"]["tol_length"]})
    return f"ell-star: {value:.8g} (tol {rc['ell_star']['tol_length']:g})", []


def cmd_mu_star(rc, out, args):
    ell = _ell_star(rc)
    template = rc.sim_config(ell_star=ell)
    m = rc["mu_star"]
    trace = []
    try:
        value = mu_star(template, (m["bracket_lo"], m["bracket_hi"]), m["tol_rel"], workers(), trace)
    finally:
        out.table("mu_star.csv", ("mu", "outcome"), trace)
    out.record({"mu_star": value, "ell_star": ell, "probes": len(trace)})
    return f"mu-star: {value:.6g} (ell*={ell:.6g}, {len(trace)} probes)", []


def cmd_semiwave(rc, out, args):
    s, d = rc["semiwave"], rc["model"]["d_rate"]
    kern, reac = rc.kernel, rc.reaction

    def solve(c):
        return extract_wave(c, kern, reac, d, s["deltas"], s["X_length"], s["n_nodes"], s["tol"])

    with ThreadPoolExecutor(max_workers=workers()) as pool:
        waves = list(pool.map(solve, s["c_speeds"]))
    rows, jobs = [], []
    for i, w in enumerate(waves):
        name = f"profile_{i}.csv"
        out.table(name, ("x", "phi"), zip(map(float, w.x), map(float, w.phi)))
        M = M_of_c(w, kern, rc["model"]["mu_rate"]) if w.kind is WaveKind.SEMI and kern.tail_class.j1_plus else math.nan
        rows.append((float(w.c), w.kind.value, w.front_anchor, residual(w, kern, reac, d), M))
        jobs.append(out.dir / name)
    out.table("semiwave.csv", ("c", "kind", "anchor", "residual", "M"), rows)
    summary = {"c_star_plus": c_star(kern, d, reac.f0).value, "waves": [list(r) for r in rows]}
    line = "semiwave: " + " ".join(f"c={r[0]:g}:{r[1]}" for r in rows)
    if kern.tail_class.j1_plus:
        sol = find_c0(kern, reac, rc["model"]["mu_rate"], d, rc["speed"]["c0_tol"], s["X_length"], s["n_nodes"])
        summary.update(c0=sol.c0, c0_residual=sol.residual)
        line += f" c0={sol.c0:.8g} residual={sol.residual:.2g}"
    out.record(summary)
    labels = [f"c={r[0]:g}" for r in rows]
    return line, [("profiles", jobs, labels, out.dir / "profiles.png")]


def cmd_speed(rc, out, args):
    d, mu = rc["model"]["d_rate"], rc["model"]["mu_rate"]
    s = rc["semiwave"]
    tol = rc["speed"]["c0_tol"]
    right = find_c0(rc.kernel, rc.reaction, mu, d, tol, s["X_length"], s["n_nodes"])
    left = find_c0_left(rc.kernel, rc.reaction, mu, d, tol, s["X_length"], s["n_nodes"])
    series, state = run(rc.sim_config())
    series.to_csv(out.path("series.csv"))
    frac = rc["speed"]["window_frac"]
    est = {"right": estimate_speed(series, "right", frac, right.c0), "left": estimate_speed(series, "left", frac, left.c0)}
    rows = [(k, e.slope, e.stderr, e.theory, e.rel_error, e.window[0], e.window[1]) for k, e in est.items()]
    out.table("speed.csv", ("side", "slope", "stderr", "theory", "rel_error", "t_lo", "t_hi"), rows)
    out.record({k: {"slope": e.slope, "c0": e.theory, "rel_error": e.rel_error} for k, e in est.items()})
    r = est["right"]
    line = f"speed: slope={r.slope:.6g} c0={right.c0:.6g} rel_error={r.rel_error:.3g} left={est['left'].slope:.6g}"
    return line, [("series", out.dir / "series.csv", out.dir / "series.png")]


def cmd_accelerate(rc, out, args):
    a = rc["accelerate"]
    cfg = rc.sim_config(max_nodes=a["max_nodes"])
    series, state = run(cfg)
    series.to_csv(out.path("series.csv"))
    theory = theory_acceleration(rc.kernel, cfg.mu) or {}
    model = a["model"] if a["model"] != "auto" else theory.get("model", "power")
    fit = fit_acceleration(series, model, beta=theory.get("beta", rc["kernel"]["beta_exponent"]), window_frac=a["window_frac"])
    rows = [(model, k, float(v), float(theory[k]) if k in theory else math.nan) for k, v in sorted(fit.params.items())]
    rows.append((model, "r2", fit.r2, math.nan))
    out.table("accel.csv", ("model", "param", "fitted", "theory"), rows)
    out.record({"model": model, "fit": fit.params, "r2": fit.r2, "theory": theory, "h_final": state.h})
    params = " ".join(f"{k}={v:.4g}" for k, v in sorted(fit.params.items()))
    return f"accelerate: {model} {params} R2={fit.r2:.4f} h={state.h:.4g}", [
        ("series", out.dir / "series.csv", out.dir / "series.png")
    ]


def cmd_harness(rc, out, args):
    h = rc["harness"]
    report = comparison_harness(rc.sim_config(), h["n_pairs"], rc["output"]["seed"], h["T_time"])
    rows = [(v["pair"], v["t"], v["kind"], v["amount"], v["x"]) for v in report.violations]
    out.table("harness.csv", ("pair", "t", "kind", "amount", "x"), rows)
    out.record({"pairs": report.pairs, "comparisons": report.comparisons, "violations": len(report.violations)})
    if not report.ok:
        raise HarnessViolation(f"{len(report.violations)} ordering violations in {report.pairs} pairs")
    return f"harness: {report.pairs} pairs, {report.comparisons} comparisons, 0 violations", []


COMMANDS = {
    "validate": cmd_validate,
    "simulate": cmd_simulate,
    "eigen": cmd_eigen,
    "ell-star": cmd_ell_star,
    "mu-star": cmd_mu_star,
    "semiwave": cmd_semiwave,
    "speed": cmd_speed,
    "accelerate": cmd_accelerate,
    "harness": cmd_harness,
}


def _render(jobs) -> None:
    from . import plotting

    for job in jobs:
        if job[0] == "series":
            plotting.plot_series(job[1], job[2])
        elif job[0] == "eigen":
            plotting.plot_eigen(job[1], job[2])
        elif job[0] == "profiles":
            plotting.plot_profiles(job[1], job[2], job[3])


def dispatch(rc: RunConfig, subcommand: str, args) -> int:
    if subcommand not in COMMANDS:
        raise ValueError(f"unknown subcommand {subcommand!r}")
    if subcommand == "validate":
        print(f"valid: {rc.source}")
        return 0
    root = Path(args.outdir or rc["output"]["outdir"])
    run_id = args.run_id or datetime.now(timezone.utc).strftime("%Y%m%dT%H%M%SZ")
    out = Output(root, subcommand, run_id, rc)
    line, jobs = COMMANDS[subcommand](rc, out, args)
    if args.plot:
        _render(jobs)
    if args.emit_plotscript:
        from .plotting import PLOTSCRIPT

        (out.dir / "plot.py").write_text(PLOTSCRIPT)
    print(line)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="nlfront", description="Nonlocal KPP free-boundary experiments.")
    p.add_argument("subcommand", choices=SUBCOMMANDS)
    p.add_argument("config", help="INI configuration file")
    p.add_argument("--run-id", help="name of the run directory (default: UTC timestamp)")
    p.add_argument("--outdir", help="override [output] outdir")
    p.add_argument("--plot", action="store_true", help="render PNG figures next to the CSV files")
    p.add_argument("--emit-plotscript", action="store_true", help="write a matplotlib script for the CSV files")
    p.add_argument("--resume", metavar="CKPT", help="simulate: continue from a checkpoint")
    p.add_argument("--stop-time", type=float, help="simulate: stop early at this time (checkpoint is still written)")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        rc = parse_config(args.config)
        return dispatch(rc, args.subcommand, args)
    except NlfrontError as exc:
        print(f"error {exc.code}: {exc}", file=sys.stderr)
        return exc.exit_status


if __name__ == "__main__":
    sys.exit(main())
