"""Command-line front end: run, exact, sample, eval.

Exit codes: 0 finished with a feasible result, 2 finished but infeasible,
1 on any input or configuration error.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import logging
import math
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import ga
from .fitness import FitnessConfig, FitnessContext, constraints, objective
from .netlist import CircuitModel, NetlistError, load_netlist
from .numeric import build_pencil, extract_coeffs
from .oracle import OracleNotApplicable, exact_symbolic, render_exact
from .sampling import (
    FrequencyGrid,
    frequency_grid,
    make_dataset,
    sample_dataset,
    write_dataset_csv,
)
from .symbolic import (
    SimplifiedSingular,
    SymbolicRational,
    canonicalize_rational,
    decode,
    evaluate_rational,
    from_json,
    render,
    to_json,
)

EXIT_OK, EXIT_ERROR, EXIT_INFEASIBLE = 0, 1, 2

log = logging.getLogger("dssa")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    netlist: str
    ga: ga.GaConfig = field(default_factory=ga.GaConfig)
    fitness: FitnessConfig = field(default_factory=FitnessConfig)
    train: int = 100
    test: int = 50
    points_per_decade: int = 3
    T: int = 15
    output: str = "dssa_out"
    parallel: bool = False

    @property
    def seed(self) -> int:
        return self.ga.seed

    def echo(self) -> dict:
        """Complete effective configuration, JSON-ready."""
        g = dataclasses.asdict(self.ga)
        g["ts_init_probs"] = list(g["ts_init_probs"])
        return {
            "netlist": Path(self.netlist).name,
            "ga": g,
            "fitness": dataclasses.asdict(self.fitness),
            "train": self.train,
            "test": self.test,
            "points_per_decade": self.points_per_decade,
            "T": self.T,
        }


_GA_KEYS = {f.name: f.type for f in dataclasses.fields(ga.GaConfig)}
_FIT_KEYS = {f.name: f.type for f in dataclasses.fields(FitnessConfig)}
_RUN_KEYS = {"train": int, "test": int, "points_per_decade": int, "T": int}


def _convert(key: str, text: str):
    if key == "ts_init_probs":
        return tuple(float(v) for v in text.replace(",", " ").split())
    if key in ("population", "iterations", "seed") or key in _RUN_KEYS:
        return int(text)
    return float(text)


def read_config_file(path) -> dict:
    """Flat ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _GA_KEYS and key not in _FIT_KEYS and key not in _RUN_KEYS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        try:
            out[key] = _convert(key, value)
        except ValueError:
            raise ConfigError(f"{path}:{lineno}: bad value for {key}: {value!r}") from None
    return out


def build_run_config(netlist: str, settings: dict, output: str = "dssa_out",
                     parallel: bool = False) -> RunConfig:
    try:
        g = ga.GaConfig(**{k: v for k, v in settings.items() if k in _GA_KEYS})
        f = FitnessConfig(**{k: v for k, v in settings.items() if k in _FIT_KEYS})
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    run = {k: v for k, v in settings.items() if k in _RUN_KEYS}
    for k, v in run.items():
        if v < 1:
            raise ConfigError(f"{k} must be positive")
    return RunConfig(netlist=netlist, ga=g, fitness=f, output=output, parallel=parallel, **run)


# -- metrics -------------------------------------------------------------------


def score_points(sr: SymbolicRational, points, cfg: FitnessConfig, grid: FrequencyGrid) -> dict:
    """dc-gain and pole/zero errors of ``sr`` over ``points``.

    Averages run over points (dc) and over every exact root of every point
    (pole/zero); an exact root with no simplified partner counts as 100%.
    """
    dc, roots, worst_root, feasible = [], [], [], True
    for p in points:
        sl = constraints(sr, p, cfg, grid.lowest_omega)
        dc.append(sl.dc_err)
        roots.extend(sl.root_errs)
        worst_root.append(max(sl.root_errs, default=0.0))
        feasible &= max(sl.dc, sl.pole, sl.zero, sl.degree) <= 0
    roots = roots or [0.0]
    return {
        "points": len(points),
        "feasible": bool(feasible),
        "avg_dc_error_db": float(np.mean(dc)),
        "max_dc_error_db": float(np.max(dc)),
        "avg_root_error_pct": 100 * float(np.mean(roots)),
        "max_root_error_pct": 100 * float(np.max(roots)),
        "per_point_dc_error_db": [float(v) for v in dc],
        "per_point_max_root_error_pct": [100 * float(v) for v in worst_root],
    }


def _term_counts(sr: SymbolicRational) -> dict:
    return {
        "num": [len(p) for p in sr.num_polys],
        "den": [len(p) for p in sr.den_polys],
        "total": sr.term_count(),
    }


def _write_errors_csv(path: Path, metrics: dict) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["d", "dc_error_db", "max_root_error_pct"])
        for d, (e, r) in enumerate(zip(metrics["per_point_dc_error_db"],
                                       metrics["per_point_max_root_error_pct"])):
            w.writerow([d, f"{e:.9g}", f"{r:.9g}"])


def _write_response_csv(path: Path, model: CircuitModel, sr: SymbolicRational,
                        grid: FrequencyGrid) -> None:
    exact = extract_coeffs(build_pencil(model, model.nominal))
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["freq_hz", "exact_mag_db", "exact_phase_deg", "simp_mag_db", "simp_phase_deg"])
        for f, s in zip(grid.freqs, grid.points):
            he = exact(s)
            try:
                hs = evaluate_rational(sr, model.nominal, s)
                simp = [f"{20 * math.log10(abs(hs)):.9g}", f"{math.degrees(np.angle(hs)):.9g}"]
            except (SimplifiedSingular, ValueError):
                simp = ["nan", "nan"]
            w.writerow([f"{f:.9g}", f"{20 * math.log10(abs(he)):.9g}",
                        f"{math.degrees(np.angle(he)):.9g}", *simp])


def _summary(metrics: dict, terms: dict) -> str:
    return "\n".join([
        f"terms            {terms['total']}  (num {terms['num']}, den {terms['den']})",
        f"test points      {metrics['points']}",
        f"dc error (dB)    avg {metrics['avg_dc_error_db']:.4g}   max {metrics['max_dc_error_db']:.4g}",
        f"root error (%)   avg {metrics['avg_root_error_pct']:.4g}   max {metrics['max_root_error_pct']:.4g}",
    ])


# -- commands --------------------------------------------------------------------


def execute(cfg: RunConfig, verbose: bool = False):
    """Run the full pipeline; returns (report dict, model, sr, grid)."""
    model = load_netlist(cfg.netlist)
    nominal = extract_coeffs(build_pencil(model, model.nominal))
    grid = frequency_grid(nominal, cfg.points_per_decade)
    data = make_dataset(model, cfg.train, cfg.test, cfg.seed)
    ctx = FitnessContext.build(data.train, grid, cfg.fitness, cfg.T)
    result = ga.run(cfg.ga, ctx, verbose=verbose, parallel=cfg.parallel)
    sr = canonicalize_rational(decode(result.best, model), model.parameter_names)
    final = objective(result.best, ctx)
    metrics = score_points(sr, data.test, cfg.fitness, grid)
    report = {
        "config": cfg.echo(),
        "circuit": {
            "title": model.title,
            "nodes": model.node_count,
            "parameters": list(model.parameter_names),
            "M": ctx.M,
            "N": ctx.N,
        },
        "expression": to_json(sr, model.parameter_names),
        "rendered": render(sr, model),
        "terms": _term_counts(sr),
        "objective": {
            "objective": final.objective,
            "complexity": final.complexity,
            "error": final.error,
            "penalty": final.penalty,
            "train_feasible": final.feasible,
            "violations": final.violations.as_dict(),
        },
        "history": {
            "final_best": result.history[-1],
            "first_feasible_iteration": next(
                (i for i, f in enumerate(result.feasible_history) if f), None
            ),
        },
        "test": metrics,
    }
    return report, model, sr, grid


def cmd_run(args) -> int:
    settings = read_config_file(args.config) if args.config else {}
    for key, flag in (("seed", args.seed), ("population", args.pop), ("iterations", args.iters),
                      ("train", args.train), ("test", args.test)):
        if flag is not None:
            settings[key] = flag
    cfg = build_run_config(args.netlist, settings, args.output, args.parallel)
    if cfg.parallel:
        print("note: --parallel evaluates fitness concurrently; results stay seed-reproducible "
              "but timing-dependent output (progress lines) may interleave", file=sys.stderr)
    t0 = time.perf_counter()
    report, model, sr, grid = execute(cfg, verbose=args.verbose)
    wall = time.perf_counter() - t0

    out = Path(cfg.output)
    out.mkdir(parents=True, exist_ok=True)
    (out / "result.json").write_text(json.dumps(report, indent=2) + "\n")
    _write_errors_csv(out / "errors.csv", report["test"])
    _write_response_csv(out / "response.csv", model, sr, grid)

    print(report["rendered"])
    print(_summary(report["test"], report["terms"]))
    print(f"train feasible   {report['objective']['train_feasible']}")
    print(f"wall time        {wall:.1f} s")
    print(f"wrote {out / 'result.json'}, errors.csv, response.csv")
    if not report["objective"]["train_feasible"]:
        print("warning: no feasible solution found; reported expression violates constraints",
              file=sys.stderr)
        return EXIT_INFEASIBLE
    return EXIT_OK


def cmd_exact(args) -> int:
    model = load_netlist(args.netlist)
    e = exact_symbolic(model)
    print(f"circuit: {model.title or Path(args.netlist).name}")
    print(f"nodes: {model.node_count}  parameters: K = {model.K}")
    print(render_exact(e))
    return EXIT_OK


def cmd_sample(args) -> int:
    if args.n < 1:
        raise ConfigError("-n must be positive")
    model = load_netlist(args.netlist)
    points = sample_dataset(model, args.n, np.random.default_rng(args.seed))
    if args.output:
        with open(args.output, "w", newline="") as fh:
            write_dataset_csv(points, model.parameter_names, fh)
    else:
        write_dataset_csv(points, model.parameter_names, sys.stdout)
    return EXIT_OK


def cmd_eval(args) -> int:
    model = load_netlist(args.netlist)
    saved = json.loads(Path(args.result).read_text())
    try:
        sr = from_json(saved["expression"], model.parameter_names)
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"{args.result}: malformed expression ({exc})") from None
    except ValueError as exc:
        raise ConfigError(f"{args.result}: {exc}") from None
    conf = saved.get("config", {})
    fit = FitnessConfig(**conf.get("fitness", {}))
    train, test = conf.get("train", 100), args.test or conf.get("test", 50)
    ppd = conf.get("points_per_decade", 3)
    seed = args.seed if args.seed is not None else conf.get("ga", {}).get("seed", 0)

    nominal = extract_coeffs(build_pencil(model, model.nominal))
    grid = frequency_grid(nominal, ppd)
    data = make_dataset(model, train, test, seed)
    metrics = score_points(sr, data.test, fit, grid)
    print(render(sr, model))
    print(_summary(metrics, _term_counts(sr)))
    print(f"test feasible    {metrics['feasible']}")
    return EXIT_OK


def make_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dssa", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="search for a simplified transfer function")
    run.add_argument("netlist")
    run.add_argument("--config", help="flat 'key = value' settings file")
    run.add_argument("--seed", type=int)
    run.add_argument("--pop", type=int, help="population size")
    run.add_argument("--iters", type=int, help="GA iterations")
    run.add_argument("--train", type=int)
    run.add_argument("--test", type=int)
    run.add_argument("--parallel", action="store_true", help="evaluate fitness concurrently")
    run.add_argument("--verbose", action="store_true", help="print per-iteration progress")
    run.add_argument("-o", "--output", default="dssa_out", help="output directory")
    run.set_defaults(func=cmd_run)

    ex = sub.add_parser("exact", help="print the exact symbolic transfer function")
    ex.add_argument("netlist")
    ex.set_defaults(func=cmd_exact)

    sa = sub.add_parser("sample", help="write Monte Carlo data points as CSV")
    sa.add_argument("netlist")
    sa.add_argument("-n", type=int, required=True)
    sa.add_argument("--seed", type=int, default=0)
    sa.add_argument("-o", "--output", help="CSV file (default: stdout)")
    sa.set_defaults(func=cmd_sample)

    ev = sub.add_parser("eval", help="re-score a saved result on a sampled test set")
    ev.add_argument("netlist")
    ev.add_argument("result", help="result.json from a previous run")
    ev.add_argument("--seed", type=int, help="dataset seed (default: the run's seed)")
    ev.add_argument("--test", type=int, help="test-set size (default: the run's)")
    ev.set_defaults(func=cmd_eval)
    return ap


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"error: file not found: {exc.filename}", file=sys.stderr)
    except NetlistError as exc:
        print(f"error: {exc}", file=sys.stderr)
    except (ConfigError, OracleNotApplicable) as exc:
        print(f"error: {exc}", file=sys.stderr)
    return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
