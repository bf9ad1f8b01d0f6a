"""Sequential campaign driver and its one-shot baseline.

A campaign starts from a balanced initial design, then repeats: fit the
surrogate, draw a fresh per-combination candidate LHD, score candidates
with the configured strategy, evaluate the chosen input, append.  All
randomness is derived from the campaign seed with fixed tags, so two
strategies sharing a seed see identical initial designs and candidate
streams and differ only at the selection step.
"""
from __future__ import annotations

import json
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .acquisition import AcquisitionContext, SelectionReport, select_arsd, select_global, select_rcc
from .design_space import CandidateSet, DesignSpace, MixedPoint, candidate_set, initial_design, one_shot_design
from .errors import CampaignError, ContourSeekerError, EvaluationError, ValidationError
from .ezgp import (DUPLICATE_TOL, Dataset, FitConfig, FittedModel, fit,
                   params_to_dict, predict_batch)
from .simulators import Simulator, get_transform

STRATEGY_KINDS = ("rcc", "rcc_ei", "arsd", "ecl", "ei", "lcb", "one_shot")

# Seed-derivation tags; fixed so that replays and paired strategies agree.
_TAG_INIT = 0
_TAG_FIT = 1
_TAG_CAND = 2

_DELTA_RANGE_FRACTION = 0.05


def derive_seed(seed: int, *tags: int) -> int:
    """Deterministic child seed for a tagged sub-stream of a campaign.

    Tags are offset and length-suffixed because SeedSequence ignores
    trailing zero entropy words.
    """
    entropy = [int(seed), *(int(t) + 1 for t in tags), len(tags)]
    return int(np.random.SeedSequence(entropy).generate_state(1)[0])


@dataclass(frozen=True)
class Strategy:
    """Selection rule plus its tuning constants.

    ``delta`` of None resolves per iteration to 5% of the observed
    response range (on the modeling scale).
    """

    kind: str
    rho: float = 2.0
    delta: float | None = None
    alpha: float = 0.05
    ei_alpha: float = 1.96

    def __post_init__(self):
        if self.kind not in STRATEGY_KINDS:
            raise ValidationError(f"unknown strategy {self.kind!r}; choose from {STRATEGY_KINDS}")


@dataclass(frozen=True)
class CampaignConfig:
    space: DesignSpace
    strategy: Strategy
    level: float                      # contour level on the raw response scale
    n0: int
    total_runs: int                   # budget N including the initial design
    per_combo: int = 100
    seed: int = 0
    fit: FitConfig = FitConfig()
    transform: str = "identity"
    checkpoint_sizes: tuple[int, ...] = ()

    def __post_init__(self):
        if self.n0 < 2:
            raise ValidationError(f"n0 must be >= 2, got {self.n0}")
        if self.total_runs < self.n0:
            raise ValidationError(f"total_runs must be >= n0, got {self.total_runs} < {self.n0}")
        if self.per_combo < 1:
            raise ValidationError(f"per_combo must be >= 1, got {self.per_combo}")
        get_transform(self.transform)
        for s in self.checkpoint_sizes:
            if not self.n0 <= s <= self.total_runs:
                raise ValidationError(f"checkpoint size {s} outside [{self.n0}, {self.total_runs}]")


@dataclass
class IterationRecord:
    iteration: int
    n_before: int
    candidate_seed: int
    point: MixedPoint
    y_raw: float
    y_model: float
    report: SelectionReport
    beta: float
    delta: float
    nll: float
    params: dict
    duration_s: float
    note: str = ""


@dataclass
class CampaignTrace:
    """Complete audit log of one campaign run."""

    config: CampaignConfig
    records: list[IterationRecord]
    dataset: Dataset
    raw_responses: list[float]
    model: FittedModel | None
    checkpoints: dict[int, FittedModel] = field(default_factory=dict)
    checkpoint_times: dict[int, float] = field(default_factory=dict)
    aborted: bool = False
    error: str | None = None


def default_delta(responses: np.ndarray) -> float:
    span = float(np.max(responses) - np.min(responses))
    return max(_DELTA_RANGE_FRACTION * span, 1e-8)


def _context(strategy: Strategy, level_eff: float, data: Dataset, num_combos: int) -> AcquisitionContext:
    delta = strategy.delta if strategy.delta is not None else default_delta(data.responses)
    return AcquisitionContext(
        contour_level=level_eff,
        n=len(data),
        num_combos=num_combos,
        alpha=strategy.alpha,
        delta=delta,
        rho=strategy.rho,
        ei_alpha=strategy.ei_alpha,
    )


def select_point(preds, ctx: AcquisitionContext, strategy: Strategy) -> SelectionReport:
    """Dispatch one selection step; returns a report with the chosen index."""
    if strategy.kind == "rcc":
        return select_rcc(preds, ctx, inner="ecl")
    if strategy.kind == "rcc_ei":
        return select_rcc(preds, ctx, inner="ei")
    if strategy.kind == "arsd":
        idx = select_arsd(preds, ctx)
    elif strategy.kind in ("ecl", "ei", "lcb"):
        idx = select_global(preds, ctx, strategy.kind)
    else:
        raise ValidationError(f"strategy {strategy.kind!r} has no selection step")
    return SelectionReport(idx, "global", None, None, 0, 0, 0, float("nan"))


def _duplicate_mask(points, data: Dataset) -> np.ndarray:
    """True where a candidate coincides with an existing design point."""
    xc = np.array([pt.x for pt in points], dtype=float)
    mask = np.zeros(len(points), dtype=bool)
    for existing in data.points:
        same_x = np.max(np.abs(xc - np.array(existing.x)), axis=1) <= DUPLICATE_TOL
        if same_x.any():
            for i in np.flatnonzero(same_x):
                if points[i].z == existing.z:
                    mask[i] = True
    return mask


def _remap_report(report: SelectionReport, keep_idx: np.ndarray) -> SelectionReport:
    def remap_finalist(f):
        return None if f is None else replace(f, index=int(keep_idx[f.index]))

    return replace(
        report,
        chosen_index=int(keep_idx[report.chosen_index]),
        a1_finalist=remap_finalist(report.a1_finalist),
        a2_finalist=remap_finalist(report.a2_finalist),
    )


def _fit_with_retry(data: Dataset, space: DesignSpace, cfg: FitConfig, warm) -> FittedModel:
    try:
        return fit(data, space, cfg, warm_start=warm)
    except ContourSeekerError:
        retry = replace(cfg, seed=cfg.seed + 1, jitter_scale=cfg.jitter_scale * 100.0)
        return fit(data, space, retry, warm_start=warm)


def run_adaptive(sim: Simulator, cfg: CampaignConfig) -> CampaignTrace:
    """Execute one adaptive campaign; raises CampaignError with the partial
    trace attached if the simulator or a retried fit fails."""
    tr = get_transform(cfg.transform)
    level_eff = tr.apply(cfg.level)
    space = cfg.space
    t0 = time.perf_counter()

    points = initial_design(space, cfg.n0, derive_seed(cfg.seed, _TAG_INIT))
    raw = [sim.evaluate(pt) for pt in points]
    data = Dataset(tuple(points), np.array([tr.apply(v) for v in raw]), transform=cfg.transform)

    trace = CampaignTrace(cfg, [], data, list(raw), None)
    checkpoints = set(cfg.checkpoint_sizes)
    warm = None
    iteration = 0
    while True:
        n = len(data)
        it_start = time.perf_counter()
        try:
            model = _fit_with_retry(data, space, cfg.fit.reseeded(derive_seed(cfg.seed, _TAG_FIT, n)), warm)
        except ContourSeekerError as exc:
            trace.aborted, trace.error = True, f"fit failed at n={n}: {exc}"
            raise CampaignError(trace.error, trace) from exc
        warm = model.params
        trace.dataset, trace.model = data, model
        if n in checkpoints or n == cfg.total_runs:
            trace.checkpoints[n] = model
            trace.checkpoint_times[n] = time.perf_counter() - t0
        if n >= cfg.total_runs:
            break

        cand_seed = derive_seed(cfg.seed, _TAG_CAND, n)
        cand = candidate_set(space, cfg.per_combo, cand_seed)
        dup = _duplicate_mask(cand.points, data)
        keep_idx = np.flatnonzero(~dup)
        if len(keep_idx) == 0:
            trace.aborted, trace.error = True, f"all candidates duplicate existing design points at n={n}"
            raise CampaignError(trace.error, trace)
        kept = [cand.points[i] for i in keep_idx]
        note = "" if len(kept) == len(cand.points) else f"skipped {int(dup.sum())} duplicate candidates"

        preds = predict_batch(model, kept)
        ctx = _context(cfg.strategy, level_eff, data, space.num_combos)
        report = _remap_report(select_point(preds, ctx, cfg.strategy), keep_idx)
        chosen = cand.points[report.chosen_index]

        try:
            y_raw = sim.evaluate(chosen)
        except EvaluationError as exc:
            trace.aborted, trace.error = True, f"simulator failed at n={n}: {exc}"
            raise CampaignError(trace.error, trace) from exc
        y_model = tr.apply(y_raw)
        data = data.extended(chosen, y_model)
        trace.raw_responses.append(y_raw)
        trace.records.append(IterationRecord(
            iteration=iteration,
            n_before=n,
            candidate_seed=cand_seed,
            point=chosen,
            y_raw=y_raw,
            y_model=y_model,
            report=report,
            beta=ctx.beta,
            delta=ctx.delta,
            nll=model.nll,
            params=params_to_dict(model.params),
            duration_s=time.perf_counter() - it_start,
            note=note,
        ))
        iteration += 1
    return trace


def run_one_shot(sim: Simulator, space: DesignSpace, n: int, seed: int,
                 fit_config: FitConfig = FitConfig(), transform: str = "identity",
                 level: float = 0.0) -> CampaignTrace:
    """Fixed design, one evaluation pass, one fit; no adaptive records."""
    if n < 2:
        raise ValidationError(f"one-shot design size must be >= 2, got {n}")
    tr = get_transform(transform)
    cfg = CampaignConfig(space, Strategy("one_shot"), level, n0=n, total_runs=n,
                         per_combo=1, seed=seed, fit=fit_config, transform=transform)
    t0 = time.perf_counter()
    points = one_shot_design(space, n, derive_seed(seed, _TAG_INIT))
    raw = [sim.evaluate(pt) for pt in points]
    data = Dataset(tuple(points), np.array([tr.apply(v) for v in raw]), transform=transform)
    trace = CampaignTrace(cfg, [], data, list(raw), None)
    try:
        model = _fit_with_retry(data, space, fit_config.reseeded(derive_seed(seed, _TAG_FIT, n)), None)
    except ContourSeekerError as exc:
        trace.aborted, trace.error = True, f"fit failed: {exc}"
        raise CampaignError(trace.error, trace) from exc
    trace.model = model
    trace.checkpoints[n] = model
    trace.checkpoint_times[n] = time.perf_counter() - t0
    return trace


def suggest_next(model: FittedModel, candidates: CandidateSet, strategy: Strategy,
                 level: float) -> tuple[MixedPoint, SelectionReport]:
    """Stateless selection step for externally driven loops.

    ``level`` is on the raw response scale and is mapped through the
    model's response transform.
    """
    points = candidates.points if hasattr(candidates, "points") else tuple(candidates)
    if len(points) == 0:
        raise ValidationError("suggest_next: empty candidate set")
    level_eff = get_transform(model.data.transform).apply(level)
    preds = predict_batch(model, points)
    ctx = _context(strategy, level_eff, model.data, model.space.num_combos)
    report = select_point(preds, ctx, strategy)
    return points[report.chosen_index], report
