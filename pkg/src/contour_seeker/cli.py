"""Command-line front end.

Subcommands: ``run`` (adaptive or one-shot campaign from a JSON config),
``suggest`` (stateless next-point selection from a saved model), ``fit``
(hyperparameter estimation from a CSV), ``bench`` (replicated strategy
comparison), ``verify`` (Monte-Carlo check of the band guarantees).

Exit codes: 0 success, 2 invalid input, 3 runtime failure.  Failures
print a one-line JSON object to stderr.  The environment variable
CONTOUR_SEEKER_THREADS caps worker processes.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .bench import BenchConfig, coverage_check, replicate_benchmark, resolve_workers
from .design_space import CandidateSet, MixedPoint, candidate_set
from .engine import (CampaignConfig, Strategy, run_adaptive, run_one_shot, suggest_next)
from .errors import CampaignError, ContourSeekerError, ValidationError
from .ezgp import Dataset, FitConfig, fit, load_model, save_model
from .simulators import builtin_simulator, get_transform, tabular_simulator
from .traceio import (config_to_dict, fit_config_from_dict, fit_config_to_dict, read_csv,
                      save_trace, space_from_dict, space_to_dict, strategy_from_dict,
                      strategy_to_dict, write_csv)

EXIT_OK = 0
EXIT_USER = 2
EXIT_RUNTIME = 3


def _fail(exc, code: int) -> int:
    doc = {"error": type(exc).__name__, "message": str(exc)}
    print(json.dumps(doc), file=sys.stderr)
    return code


def _load_json(path) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise ValidationError(f"config file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON ({exc})")


def _require(doc: dict, key: str, where: str):
    if key not in doc:
        raise ValidationError(f"{where}: missing field {key!r}")
    return doc[key]


def _build_simulator(doc: dict, where: str):
    sim_doc = _require(doc, "simulator", where)
    if "builtin" in sim_doc:
        return builtin_simulator(sim_doc["builtin"])
    if "table" in sim_doc:
        space = space_from_dict(_require(doc, "space", where))
        # Campaign-level transform is applied at ingestion, so the table
        # itself is loaded untransformed here.
        return tabular_simulator(sim_doc["table"], space,
                                 response_column=sim_doc.get("response_column", "y"))
    raise ValidationError(f"{where}: simulator must declare 'builtin' or 'table'")


def _build_strategy(spec, overrides: dict, where: str) -> Strategy:
    if isinstance(spec, str):
        base = Strategy(spec)
    elif isinstance(spec, dict):
        base = strategy_from_dict({**spec, "kind": _require(spec, "kind", where)})
    else:
        raise ValidationError(f"{where}: strategy must be a name or an object")
    fields = {k: v for k, v in overrides.items() if v is not None}
    if not fields:
        return base
    merged = strategy_to_dict(base)
    merged.update(fields)
    return strategy_from_dict(merged)


def _strategy_overrides(args) -> dict:
    return {"kind": args.strategy, "delta": args.delta, "rho": args.rho,
            "alpha": args.alpha, "ei_alpha": args.ei_alpha}


def cmd_run(args) -> int:
    doc = _load_json(args.config)
    where = args.config
    sim = _build_simulator(doc, where)
    space = space_from_dict(doc["space"]) if "space" in doc else sim.space
    strategy = _build_strategy(doc.get("strategy", "rcc"), _strategy_overrides(args), where)

    level = args.level if args.level is not None else _require(doc, "level", where)
    n0 = int(_require(doc, "n0", where))
    total = int(_require(doc, "N", where))
    if n0 >= total and strategy.kind != "one_shot":
        raise ValidationError(f"{where}: field 'n0' must be smaller than field 'N' (got n0={n0}, N={total})")
    seed = args.seed if args.seed is not None else int(doc.get("seed", 0))
    per_combo = (args.candidates_per_combo if args.candidates_per_combo is not None
                 else int(doc.get("candidates_per_combo", 100)))
    cfg = CampaignConfig(
        space=space,
        strategy=strategy,
        level=float(level),
        n0=n0,
        total_runs=total,
        per_combo=per_combo,
        seed=seed,
        fit=fit_config_from_dict(doc.get("fit", {})),
        transform=doc.get("transform", "identity"),
        checkpoint_sizes=tuple(doc.get("checkpoint_sizes", [])),
    )
    outdir = args.out or _require(doc, "out", where)
    extra = {"simulator": doc["simulator"], "out": outdir}
    try:
        if strategy.kind == "one_shot":
            trace = run_one_shot(sim, space, total, seed, cfg.fit, cfg.transform, cfg.level)
        else:
            trace = run_adaptive(sim, cfg)
    except CampaignError as exc:
        if exc.trace is not None:
            save_trace(exc.trace, outdir, extra)
        raise
    save_trace(trace, outdir, extra)
    print(json.dumps({"out": outdir, "n": len(trace.dataset), "iterations": len(trace.records)}))
    return EXIT_OK


def _read_points_csv(path, space) -> list[MixedPoint]:
    header, rows = read_csv(path)
    wanted = [f"x_{k + 1}" for k in range(space.p)] + [f"z_{h + 1}" for h in range(space.q)]
    try:
        cols = [header.index(c) for c in wanted]
    except ValueError as exc:
        raise ValidationError(f"{path}: missing column ({exc}); expected {wanted}")
    points = []
    for i, row in enumerate(rows):
        try:
            x_phys = [float(row[c]) for c in cols[:space.p]]
            z = tuple(int(row[c]) for c in cols[space.p:])
        except (ValueError, IndexError) as exc:
            raise ValidationError(f"{path}: row {i + 1}: {exc}")
        point = MixedPoint(space.normalize(x_phys), z)
        space.validate_point(point)
        points.append(point)
    return points


def cmd_suggest(args) -> int:
    model = load_model(args.model)
    strategy = _build_strategy(args.strategy or "rcc", _strategy_overrides(args), "suggest")
    if args.candidates:
        points = _read_points_csv(args.candidates, model.space)
        if not points:
            raise ValidationError(f"{args.candidates}: no candidate rows")
        cands = CandidateSet(tuple(points), per_combo=0, seed=-1)
    else:
        cands = candidate_set(model.space, args.per_combo, args.seed or 0)
    if args.level is None:
        raise ValidationError("suggest: --level is required")
    point, report = suggest_next(model, cands, strategy, args.level)
    out = {
        "point": {"x": list(model.space.denormalize(point.x)), "z": list(point.z)},
        "report": {
            "chosen_index": report.chosen_index,
            "region": report.region,
            "a1_size": report.a1_size,
            "a2_size": report.a2_size,
            "a1_min_size": report.a1_min_size,
        },
        "strategy": strategy_to_dict(strategy),
        "level": args.level,
    }
    print(json.dumps(out))
    return EXIT_OK


def cmd_fit(args) -> int:
    space = space_from_dict(_load_json(args.space))
    header, rows = read_csv(args.data)
    if len(rows) < 2:
        raise ValidationError(f"{args.data}: need at least 2 data rows, got {len(rows)}")
    tr = get_transform(args.transform)
    if "y" not in header:
        raise ValidationError(f"{args.data}: missing response column 'y'")
    y_col = header.index("y")
    points = _read_points_csv(args.data, space)
    responses = np.array([tr.apply(float(row[y_col])) for row in rows])
    data = Dataset(tuple(points), responses, transform=args.transform)
    config = FitConfig(n_starts=args.starts, seed=args.seed or 0, max_fev=args.max_fev)
    model = fit(data, space, config)
    save_model(model, args.out)
    print(json.dumps({"out": args.out, "nll": model.nll, "jitter": model.jitter,
                      "fit": fit_config_to_dict(config), "transform": args.transform}))
    return EXIT_OK


def cmd_bench(args) -> int:
    doc = _load_json(args.config)
    where = args.config
    sim = _build_simulator(doc, where)
    strategies = tuple(_build_strategy(s, {}, where) for s in _require(doc, "strategies", where))
    cfg = BenchConfig(
        strategies=strategies,
        levels=tuple(float(v) for v in _require(doc, "levels", where)),
        budgets=tuple(int(v) for v in _require(doc, "budgets", where)),
        n0=int(_require(doc, "n0", where)),
        replicates=args.replicates or int(doc.get("replicates", 10)),
        per_combo=int(doc.get("candidates_per_combo", 100)),
        ref_per_combo=int(doc.get("ref_per_combo", 200)),
        eps=float(doc.get("eps", 0.05)),
        seed=args.seed if args.seed is not None else int(doc.get("seed", 0)),
        fit=fit_config_from_dict(doc.get("fit", {})),
        transform=doc.get("transform", "identity"),
    )
    outdir = args.out or _require(doc, "out", where)
    result = replicate_benchmark(sim, cfg, workers=resolve_workers(args.parallel))
    os.makedirs(outdir, exist_ok=True)
    write_csv(os.path.join(outdir, "results.csv"),
              ["strategy", "a", "N", "replicate", "m_c0", "wall_time_s", "failed", "error"],
              [[r.strategy, r.level, r.budget, r.replicate, r.m_c0, r.wall_time_s,
                int(r.failed), r.error] for r in result.rows])
    write_csv(os.path.join(outdir, "summary.csv"),
              ["strategy", "a", "N", "mean_m_c0", "rel_efficiency", "n_ok", "n_failed", "valid"],
              [[s.strategy, s.level, s.budget, s.mean_m_c0, s.rel_efficiency,
                s.n_ok, s.n_failed, int(s.valid)] for s in result.summary])
    resolved = {
        "simulator": doc["simulator"],
        "strategies": [strategy_to_dict(s) for s in cfg.strategies],
        "levels": list(cfg.levels), "budgets": list(cfg.budgets), "n0": cfg.n0,
        "replicates": cfg.replicates, "candidates_per_combo": cfg.per_combo,
        "ref_per_combo": cfg.ref_per_combo, "eps": cfg.eps, "seed": cfg.seed,
        "transform": cfg.transform, "fit": fit_config_to_dict(cfg.fit), "out": outdir,
        "fairness_checked": result.fairness_checked,
        "fairness_violations": result.fairness_violations,
    }
    with open(os.path.join(outdir, "config.json"), "w") as fh:
        json.dump(resolved, fh, indent=1, sort_keys=True)
        fh.write("\n")
    print(json.dumps({"out": outdir, "rows": len(result.rows),
                      "fairness_violations": result.fairness_violations}))
    return EXIT_OK


def cmd_verify(args) -> int:
    doc = _load_json(args.config)
    where = args.config
    from .ezgp import params_from_dict, params_to_dict
    space = space_from_dict(_require(doc, "space", where))
    params = params_from_dict(_require(doc, "params", where))
    resolved = {
        "space": doc["space"],
        "params": params_to_dict(params),
        "level": float(_require(doc, "level", where)),
        "alpha": float(doc.get("alpha", 0.1)),
        "draws": int(doc.get("draws", 500)),
        "per_combo": int(doc.get("per_combo", 50)),
        "seed": args.seed if args.seed is not None else int(doc.get("seed", 0)),
        "n_train": int(doc.get("n_train", 10)),
    }
    result = coverage_check(
        space=space,
        true_params=params,
        level=resolved["level"],
        alpha=resolved["alpha"],
        draws=resolved["draws"],
        per_combo=resolved["per_combo"],
        seed=resolved["seed"],
        n_train=resolved["n_train"],
    )
    outdir = args.out or _require(doc, "out", where)
    os.makedirs(outdir, exist_ok=True)
    resolved["out"] = outdir
    write_csv(os.path.join(outdir, "coverage.csv"),
              ["alpha", "draws", "hits", "skipped", "coverage", "target",
               "theorem1_checked", "theorem1_violations"],
              [[resolved["alpha"], result.draws, result.hits, result.skipped,
                result.coverage, result.target, result.theorem1_checked,
                result.theorem1_violations]])
    with open(os.path.join(outdir, "config.json"), "w") as fh:
        json.dump(resolved, fh, indent=1, sort_keys=True)
        fh.write("\n")
    print(json.dumps({"coverage": result.coverage, "target": result.target,
                      "theorem1_violations": result.theorem1_violations}))
    return EXIT_OK


def _add_tuning_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--strategy", choices=["rcc", "rcc_ei", "arsd", "ecl", "ei", "lcb", "one_shot"])
    p.add_argument("--level", type=float, help="contour level on the raw response scale")
    p.add_argument("--delta", type=float, help="arbitration threshold")
    p.add_argument("--rho", type=float, help="confidence-bound tuning parameter")
    p.add_argument("--alpha", type=float, help="band coverage parameter in (0,1)")
    p.add_argument("--ei-alpha", dest="ei_alpha", type=float, help="improvement band width in sd units")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="contour-seeker",
                                     description="Adaptive contour estimation for mixed-input computer experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a campaign from a JSON config")
    p_run.add_argument("config")
    p_run.add_argument("--seed", type=int)
    p_run.add_argument("--candidates-per-combo", dest="candidates_per_combo", type=int)
    p_run.add_argument("--out")
    _add_tuning_flags(p_run)
    p_run.set_defaults(func=cmd_run)

    p_sug = sub.add_parser("suggest", help="suggest the next input from a saved model")
    p_sug.add_argument("--model", required=True)
    p_sug.add_argument("--candidates", help="CSV of candidate points (x_1..x_p, z_1..z_q)")
    p_sug.add_argument("--per-combo", dest="per_combo", type=int, default=100)
    p_sug.add_argument("--seed", type=int)
    _add_tuning_flags(p_sug)
    p_sug.set_defaults(func=cmd_suggest)

    p_fit = sub.add_parser("fit", help="fit the surrogate to a CSV dataset")
    p_fit.add_argument("--data", required=True)
    p_fit.add_argument("--space", required=True, help="JSON file with quant_bounds/qual_levels")
    p_fit.add_argument("--out", default="model.json")
    p_fit.add_argument("--seed", type=int)
    p_fit.add_argument("--starts", type=int, default=8)
    p_fit.add_argument("--max-fev", dest="max_fev", type=int)
    p_fit.add_argument("--transform", default="identity", choices=["identity", "log"])
    p_fit.set_defaults(func=cmd_fit)

    p_bench = sub.add_parser("bench", help="replicated strategy benchmark")
    p_bench.add_argument("--config", required=True)
    p_bench.add_argument("--replicates", type=int)
    p_bench.add_argument("--parallel", type=int, default=1)
    p_bench.add_argument("--seed", type=int)
    p_bench.add_argument("--out")
    p_bench.set_defaults(func=cmd_bench)

    p_ver = sub.add_parser("verify", help="Monte-Carlo verification of the band guarantees")
    p_ver.add_argument("--config", required=True)
    p_ver.add_argument("--seed", type=int)
    p_ver.add_argument("--out")
    p_ver.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        return _fail(exc, EXIT_USER)
    except ContourSeekerError as exc:
        return _fail(exc, EXIT_RUNTIME)


if __name__ == "__main__":
    sys.exit(main())
