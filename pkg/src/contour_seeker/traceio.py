"""Stable on-disk formats for campaign traces and tabular results.

A trace directory holds ``trace.csv`` (one row per adaptive iteration),
``design.csv`` (the final dataset), ``model.json`` (final fit),
``config.json`` (fully resolved configuration) and ``timing.csv``
(wall-clock durations, kept separate so the other files are byte-stable
across reruns).  CSV files start with a ``# schema=1`` comment line;
floats are written with ``repr`` for lossless round-trips.
"""
from __future__ import annotations

import csv
import json
import os

from .design_space import DesignSpace
from .engine import CampaignConfig, CampaignTrace, Strategy
from .errors import IngestionError
from .ezgp import FitConfig, model_to_dict

SCHEMA_LINE = "# schema=1"


def fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    if value is None:
        return ""
    return str(value)


def write_csv(path, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(SCHEMA_LINE + "\n")
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(v) for v in row])


def read_csv(path) -> tuple[list[str], list[list[str]]]:
    """Header and string rows, skipping '#' comment lines."""
    with open(path, newline="") as fh:
        rows = [row for row in csv.reader(fh) if row and not row[0].lstrip().startswith("#")]
    if not rows:
        raise IngestionError(f"{path}: no rows")
    return rows[0], rows[1:]


def space_to_dict(space: DesignSpace) -> dict:
    return {
        "quant_bounds": [[lo, hi] for lo, hi in space.quant_bounds],
        "qual_levels": list(space.qual_levels),
    }


def space_from_dict(d: dict) -> DesignSpace:
    return DesignSpace(
        tuple((float(lo), float(hi)) for lo, hi in d["quant_bounds"]),
        tuple(int(m) for m in d.get("qual_levels", [])),
    )


def strategy_to_dict(s: Strategy) -> dict:
    return {"kind": s.kind, "rho": s.rho, "delta": s.delta,
            "alpha": s.alpha, "ei_alpha": s.ei_alpha}


def strategy_from_dict(d: dict) -> Strategy:
    return Strategy(
        kind=d["kind"],
        rho=float(d.get("rho", 2.0)),
        delta=None if d.get("delta") is None else float(d["delta"]),
        alpha=float(d.get("alpha", 0.05)),
        ei_alpha=float(d.get("ei_alpha", 1.96)),
    )


def fit_config_to_dict(f: FitConfig) -> dict:
    return {"n_starts": f.n_starts, "seed": f.seed,
            "theta_bounds": list(f.theta_bounds),
            "sigma2_rel_bounds": list(f.sigma2_rel_bounds),
            "max_fev": f.max_fev, "jitter_scale": f.jitter_scale}


def fit_config_from_dict(d: dict) -> FitConfig:
    base = FitConfig()
    return FitConfig(
        n_starts=int(d.get("n_starts", base.n_starts)),
        seed=int(d.get("seed", base.seed)),
        theta_bounds=tuple(d.get("theta_bounds", base.theta_bounds)),
        sigma2_rel_bounds=tuple(d.get("sigma2_rel_bounds", base.sigma2_rel_bounds)),
        max_fev=None if d.get("max_fev") is None else int(d["max_fev"]),
        jitter_scale=float(d.get("jitter_scale", 1.0)),
    )


def config_to_dict(cfg: CampaignConfig) -> dict:
    return {
        "space": space_to_dict(cfg.space),
        "strategy": strategy_to_dict(cfg.strategy),
        "level": cfg.level,
        "n0": cfg.n0,
        "N": cfg.total_runs,
        "candidates_per_combo": cfg.per_combo,
        "seed": cfg.seed,
        "transform": cfg.transform,
        "fit": fit_config_to_dict(cfg.fit),
        "checkpoint_sizes": list(cfg.checkpoint_sizes),
    }


def _trace_header(space: DesignSpace) -> list[str]:
    return (
        ["iteration", "n_before", "candidate_seed", "chosen_index", "region"]
        + [f"x_{k + 1}" for k in range(space.p)]
        + [f"z_{h + 1}" for h in range(space.q)]
        + ["y_raw", "y_model", "beta", "delta",
           "a1_size", "a2_size", "a1_min_size", "min_ub",
           "i1_index", "i1_mean", "i1_sd", "i1_acq", "i1_score",
           "i2_index", "i2_mean", "i2_sd", "i2_acq", "i2_score",
           "nll", "params", "note"]
    )


def _finalist_cells(f):
    if f is None:
        return [None, None, None, None, None]
    return [f.index, f.mean, f.sd, f.acq_value, f.score]


def save_trace(trace: CampaignTrace, outdir, extra_config: dict | None = None) -> None:
    os.makedirs(outdir, exist_ok=True)
    space = trace.config.space

    rows = []
    for rec in trace.records:
        rows.append(
            [rec.iteration, rec.n_before, rec.candidate_seed, rec.report.chosen_index, rec.report.region]
            + list(space.denormalize(rec.point.x)) + list(rec.point.z)
            + [rec.y_raw, rec.y_model, rec.beta, rec.delta,
               rec.report.a1_size, rec.report.a2_size, rec.report.a1_min_size, rec.report.min_ub]
            + _finalist_cells(rec.report.a1_finalist)
            + _finalist_cells(rec.report.a2_finalist)
            + [rec.nll, json.dumps(rec.params, separators=(",", ":")), rec.note]
        )
    write_csv(os.path.join(outdir, "trace.csv"), _trace_header(space), rows)

    design_header = ([f"x_{k + 1}" for k in range(space.p)]
                     + [f"z_{h + 1}" for h in range(space.q)] + ["y_raw", "y_model"])
    design_rows = []
    for pt, y_raw, y_model in zip(trace.dataset.points, trace.raw_responses, trace.dataset.responses):
        design_rows.append(list(space.denormalize(pt.x)) + list(pt.z) + [y_raw, float(y_model)])
    write_csv(os.path.join(outdir, "design.csv"), design_header, design_rows)

    write_csv(os.path.join(outdir, "timing.csv"), ["iteration", "duration_s"],
              [[rec.iteration, rec.duration_s] for rec in trace.records])

    doc = config_to_dict(trace.config)
    if extra_config:
        doc.update(extra_config)
    doc["aborted"] = trace.aborted
    if trace.error:
        doc["error"] = trace.error
    with open(os.path.join(outdir, "config.json"), "w") as fh:
        json.dump(doc, fh, indent=1, sort_keys=True)
        fh.write("\n")

    if trace.model is not None:
        with open(os.path.join(outdir, "model.json"), "w") as fh:
            json.dump(model_to_dict(trace.model), fh, indent=1)
            fh.write("\n")
