"""Benchmark harness, contour accuracy metric, and coverage verification.

``replicate_benchmark`` reruns every (strategy, budget, level) cell over
seeded replicates with paired randomness: within a replicate all
strategies share the initial design and candidate streams, so observed
differences come from the selection rules alone.  ``coverage_check``
verifies the confidence-interval guarantees of the band construction by
Monte Carlo on GP paths sampled from known hyperparameters.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .acquisition import AcquisitionContext, beta_n, partition
from .design_space import DesignSpace, MixedPoint, candidate_set
from .engine import CampaignConfig, Strategy, derive_seed, run_adaptive, run_one_shot
from .errors import ContourSeekerError, MetricUndefinedError, ValidationError
from .ezgp import Dataset, EzGpParams, FitConfig, FittedModel, condition, predict_batch
from .simulators import Simulator, get_transform

# Seed tags local to the benchmark layer.
_TAG_REFERENCE = 90
_TAG_REPLICATE = 100
_TAG_ONESHOT = 7


@dataclass(frozen=True)
class ReferenceContour:
    """Near-contour reference points with their true (modeling-scale) values."""

    points: tuple[MixedPoint, ...]
    truths: np.ndarray
    level: float
    eps: float


def reference_contour(sim: Simulator, space: DesignSpace, level: float, eps: float,
                      per_combo: int, seed: int, transform: str = "identity") -> ReferenceContour:
    """Evaluate a dense candidate grid and keep points within eps of the level.

    Raises MetricUndefinedError when the band captures nothing; widen eps
    (or move the level) in that case.
    """
    if eps <= 0:
        raise ValidationError(f"reference_contour: eps must be positive, got {eps}")
    tr = get_transform(transform)
    level_eff = tr.apply(level)
    cand = candidate_set(space, per_combo, seed)
    truths = np.array([tr.apply(sim.evaluate(pt)) for pt in cand.points])
    keep = np.abs(truths - level_eff) <= eps
    if not keep.any():
        raise MetricUndefinedError(
            f"no reference points within {eps} of level {level}; use a larger eps")
    pts = tuple(pt for pt, k in zip(cand.points, keep) if k)
    return ReferenceContour(pts, truths[keep], level_eff, eps)


def m_c0(model: FittedModel, ref: ReferenceContour) -> float:
    """Mean absolute gap between true values and predictive means on the
    reference set; zero iff the surrogate is exact there."""
    preds = predict_batch(model, ref.points)
    means = np.array([p.mean for p in preds])
    return float(np.mean(np.abs(ref.truths - means)))


@dataclass(frozen=True)
class BenchConfig:
    strategies: tuple[Strategy, ...]
    levels: tuple[float, ...]
    budgets: tuple[int, ...]
    n0: int
    replicates: int
    per_combo: int = 100
    ref_per_combo: int = 200
    eps: float = 0.05
    seed: int = 0
    fit: FitConfig = FitConfig()
    transform: str = "identity"

    def __post_init__(self):
        if not self.strategies or not self.levels or not self.budgets:
            raise ValidationError("benchmark grid must have strategies, levels, and budgets")
        if self.replicates < 1:
            raise ValidationError("replicates must be >= 1")
        for n in self.budgets:
            if n <= self.n0 and not self._only_one_shot():
                raise ValidationError(f"budget {n} must exceed n0={self.n0} for adaptive strategies")

    def _only_one_shot(self) -> bool:
        return all(s.kind == "one_shot" for s in self.strategies)


@dataclass
class BenchRow:
    strategy: str
    level: float
    budget: int
    replicate: int
    m_c0: float
    wall_time_s: float
    failed: bool = False
    error: str = ""


@dataclass
class SummaryRow:
    strategy: str
    level: float
    budget: int
    mean_m_c0: float
    rel_efficiency: float
    n_ok: int
    n_failed: int
    valid: bool


@dataclass
class BenchResult:
    rows: list[BenchRow]
    summary: list[SummaryRow]
    fairness_checked: int = 0
    fairness_violations: int = 0


def _dataset_fingerprint(data: Dataset):
    return tuple((pt.x, pt.z, float(y)) for pt, y in zip(data.points, data.responses))


def _fail_rows(strategy: Strategy, level: float, budgets, replicate: int, exc) -> list[BenchRow]:
    return [BenchRow(strategy.kind, level, n, replicate, float("nan"), float("nan"),
                     failed=True, error=str(exc)) for n in budgets]


def _run_replicate(sim: Simulator, cfg: BenchConfig, replicate: int, refs: dict):
    """All cells of one replicate; returns (rows, initial-design fingerprints)."""
    rep_seed = derive_seed(cfg.seed, _TAG_REPLICATE, replicate)
    rows: list[BenchRow] = []
    fingerprints = []
    n_max = max(cfg.budgets)

    for strategy in cfg.strategies:
        if strategy.kind == "one_shot":
            for n in cfg.budgets:
                try:
                    trace = run_one_shot(sim, sim.space, n, derive_seed(rep_seed, _TAG_ONESHOT, n),
                                         cfg.fit, cfg.transform)
                except ContourSeekerError as exc:
                    for level in cfg.levels:
                        rows.extend(_fail_rows(strategy, level, [n], replicate, exc))
                    continue
                for level in cfg.levels:
                    rows.append(BenchRow(strategy.kind, level, n, replicate,
                                         m_c0(trace.model, refs[level]),
                                         trace.checkpoint_times[n]))
            continue

        for level in cfg.levels:
            run_cfg = CampaignConfig(
                space=sim.space, strategy=strategy, level=level, n0=cfg.n0,
                total_runs=n_max, per_combo=cfg.per_combo, seed=rep_seed,
                fit=cfg.fit, transform=cfg.transform, checkpoint_sizes=tuple(cfg.budgets),
            )
            try:
                trace = run_adaptive(sim, run_cfg)
            except ContourSeekerError as exc:
                rows.extend(_fail_rows(strategy, level, cfg.budgets, replicate, exc))
                continue
            fingerprints.append((strategy.kind, level,
                                 _dataset_fingerprint(_initial_slice(trace.dataset, cfg.n0))))
            for n in cfg.budgets:
                rows.append(BenchRow(strategy.kind, level, n, replicate,
                                     m_c0(trace.checkpoints[n], refs[level]),
                                     trace.checkpoint_times[n]))
    return rows, fingerprints


def _initial_slice(data: Dataset, n0: int) -> Dataset:
    return Dataset(data.points[:n0], data.responses[:n0], data.transform)


def resolve_workers(requested: int) -> int:
    """Apply the CONTOUR_SEEKER_THREADS cap to a requested worker count."""
    cap = os.environ.get("CONTOUR_SEEKER_THREADS")
    if cap:
        try:
            requested = min(requested, max(int(cap), 1))
        except ValueError:
            raise ValidationError(f"CONTOUR_SEEKER_THREADS must be an integer, got {cap!r}")
    return max(requested, 1)


def replicate_benchmark(sim: Simulator, cfg: BenchConfig, workers: int = 1) -> BenchResult:
    """Run the full grid; replicates may run in parallel processes.

    Cells with more than 20% failed replicates are marked invalid in the
    summary.  Relative efficiency is the one-shot mean divided by the
    strategy mean for the same (level, budget) cell.
    """
    refs = {level: reference_contour(sim, sim.space, level, cfg.eps, cfg.ref_per_combo,
                                     derive_seed(cfg.seed, _TAG_REFERENCE, i), cfg.transform)
            for i, level in enumerate(cfg.levels)}

    workers = resolve_workers(workers)
    if workers > 1 and cfg.replicates > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_run_replicate,
                                     [sim] * cfg.replicates, [cfg] * cfg.replicates,
                                     range(cfg.replicates), [refs] * cfg.replicates))
    else:
        outcomes = [_run_replicate(sim, cfg, r, refs) for r in range(cfg.replicates)]

    rows: list[BenchRow] = []
    fairness_checked = 0
    fairness_violations = 0
    for rep_rows, fingerprints in outcomes:
        rows.extend(rep_rows)
        if fingerprints:
            baseline = fingerprints[0][2]
            for _kind, _level, fp in fingerprints[1:]:
                fairness_checked += 1
                if fp != baseline:
                    fairness_violations += 1

    summary = _summarize(rows, cfg)
    return BenchResult(rows, summary, fairness_checked, fairness_violations)


def _summarize(rows: list[BenchRow], cfg: BenchConfig) -> list[SummaryRow]:
    def cell(kind, level, n):
        return [r for r in rows if r.strategy == kind and r.level == level and r.budget == n]

    one_shot_mean = {}
    if any(s.kind == "one_shot" for s in cfg.strategies):
        for level in cfg.levels:
            for n in cfg.budgets:
                ok = [r.m_c0 for r in cell("one_shot", level, n) if not r.failed]
                one_shot_mean[(level, n)] = float(np.mean(ok)) if ok else float("nan")

    summary = []
    for strategy in cfg.strategies:
        for level in cfg.levels:
            for n in cfg.budgets:
                rows_cell = cell(strategy.kind, level, n)
                ok = [r.m_c0 for r in rows_cell if not r.failed]
                n_failed = len(rows_cell) - len(ok)
                mean = float(np.mean(ok)) if ok else float("nan")
                base = one_shot_mean.get((level, n), float("nan"))
                rel = base / mean if ok and math.isfinite(base) and mean > 0 else float("nan")
                valid = bool(rows_cell) and n_failed <= 0.2 * len(rows_cell)
                summary.append(SummaryRow(strategy.kind, level, n, mean, rel, len(ok), n_failed, valid))
    return summary


@dataclass
class CoverageResult:
    """Monte-Carlo check of the band guarantees under known hyperparameters."""

    draws: int
    hits: int
    skipped: int
    coverage: float
    target: float
    theorem1_checked: int
    theorem1_violations: int


def _sampling_cholesky(gram: np.ndarray) -> np.ndarray:
    scale = float(np.mean(np.diag(gram)))
    jitter = 1e-8 * scale
    while jitter <= 1e-4 * scale * (1 + 1e-9):
        try:
            return np.linalg.cholesky(gram + jitter * np.eye(gram.shape[0]))
        except np.linalg.LinAlgError:
            jitter *= 10
    raise ContourSeekerError("grid Gram matrix is not factorizable for path sampling")


def coverage_check(space: DesignSpace, true_params: EzGpParams, level: float, alpha: float,
                   draws: int, per_combo: int, seed: int, n_train: int = 10) -> CoverageResult:
    """Sample GP paths on a finite grid, condition on a small random subset
    with the true hyperparameters, and count how often the minimum of
    |Y - level| falls inside [min lb, min ub].

    Also verifies, on every covered draw, the bound
    |min |mean - level| - min |Y - level|| <= sqrt(beta) * sup sd over the
    union of the restricted regions.
    """
    if draws < 1:
        raise ValidationError("coverage_check: draws must be >= 1")
    if n_train < 2:
        raise ValidationError("coverage_check: n_train must be >= 2")
    grid = candidate_set(space, per_combo, derive_seed(seed, 0))
    points = grid.points
    n_grid = len(points)
    if n_train > n_grid:
        raise ValidationError(f"n_train={n_train} exceeds grid size {n_grid}")

    from .ezgp import cross_covariance
    x = np.array([pt.x for pt in points])
    z = (np.array([pt.z for pt in points], dtype=int)
         if space.q else np.zeros((n_grid, 0), dtype=int))
    chol = _sampling_cholesky(cross_covariance(true_params, x, z, x, z))
    beta = beta_n(n_train, space.num_combos, alpha)
    root_beta = math.sqrt(beta)

    hits = skipped = violations = checked = 0
    for d in range(draws):
        rng = np.random.default_rng(derive_seed(seed, 1, d))
        path = true_params.mu + chol @ rng.standard_normal(n_grid)
        train = rng.choice(n_grid, size=n_train, replace=False)
        try:
            model = condition(true_params, Dataset(tuple(points[i] for i in train), path[train]), space)
        except ContourSeekerError:
            skipped += 1
            continue
        preds = predict_batch(model, points)
        ctx = AcquisitionContext(contour_level=level, n=n_train, num_combos=space.num_combos,
                                 alpha=alpha, delta=1.0)
        part = partition(preds, ctx)
        h = np.abs(path - level)
        h_min = float(np.min(h))
        lo, hi = float(np.min(part.lb)), float(np.min(part.ub))
        if lo - 1e-12 <= h_min <= hi + 1e-12:
            hits += 1
            checked += 1
            sds = np.array([p.sd for p in preds])
            means = np.array([p.mean for p in preds])
            region = np.concatenate([part.a1_min, part.a2])
            sup_sd = float(np.max(sds[region])) if len(region) else 0.0
            mu_tilde_min = float(np.min(np.abs(means - level)))
            if abs(mu_tilde_min - h_min) > root_beta * sup_sd + 1e-12:
                violations += 1

    return CoverageResult(
        draws=draws,
        hits=hits,
        skipped=skipped,
        coverage=hits / draws,
        target=1.0 - alpha,
        theorem1_checked=checked,
        theorem1_violations=violations,
    )
