"""Additive mixed-input Gaussian process surrogate.

The covariance is a base squared-exponential term on the quantitative
coordinates plus, for each qualitative factor, a level-specific
squared-exponential term that is active only when both points share that
level.  Hyperparameters are estimated by multi-start bounded Nelder-Mead
on the profiled negative log-likelihood (the process mean has a closed
form given the rest).
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace

import numpy as np
import scipy.linalg as sla
from scipy.optimize import minimize

from .design_space import DesignSpace, MixedPoint, _unit_lhd
from .errors import FitFailureError, IllConditionedModelError, ValidationError

# Jitter ladder, relative to the (constant) Gram diagonal.
_JITTER_START = 1e-8
_JITTER_CAP = 1e-4

DUPLICATE_TOL = 1e-12


@dataclass(frozen=True)
class EzGpParams:
    """Hyperparameters: mean, q+1 variances, base rates, per-level rate matrices.

    ``theta`` holds one (p, m_h) array per qualitative factor; column l_h
    contains the rates of the term active at level l_h.
    """

    mu: float
    sigma2: np.ndarray            # (q+1,)
    theta0: np.ndarray            # (p,)
    theta: tuple[np.ndarray, ...]  # q arrays of shape (p, m_h)

    def validate(self, space: DesignSpace) -> None:
        if len(self.sigma2) != space.q + 1:
            raise ValidationError(f"sigma2 must have length q+1={space.q + 1}")
        if self.sigma2[0] <= 0 or np.any(np.asarray(self.sigma2) < 0):
            raise ValidationError("variances must be >= 0 with the base variance > 0")
        if len(self.theta0) != space.p:
            raise ValidationError(f"theta0 must have length p={space.p}")
        if np.any(np.asarray(self.theta0) <= 0):
            raise ValidationError("base rates must be positive")
        if len(self.theta) != space.q:
            raise ValidationError(f"theta must have one matrix per factor (q={space.q})")
        for h, (mat, m) in enumerate(zip(self.theta, space.qual_levels)):
            if mat.shape != (space.p, m):
                raise ValidationError(f"theta[{h}] must have shape ({space.p}, {m})")
            if np.any(mat <= 0):
                raise ValidationError(f"theta[{h}] rates must be positive")

    @property
    def total_variance(self) -> float:
        return float(np.sum(self.sigma2))


@dataclass(frozen=True, eq=False)
class Dataset:
    """Ordered training pairs on the modeling (possibly transformed) scale."""

    points: tuple[MixedPoint, ...]
    responses: np.ndarray
    transform: str = "identity"

    def __post_init__(self):
        object.__setattr__(self, "responses", np.asarray(self.responses, dtype=float))
        if len(self.points) != len(self.responses):
            raise ValidationError("points and responses must have equal length")
        if len(self.points) < 2:
            raise ValidationError("a dataset needs at least 2 observations")
        dupes = self.duplicate_pairs()
        if dupes:
            raise ValidationError(f"duplicate design points at index pairs {dupes}")

    def __len__(self) -> int:
        return len(self.points)

    def duplicate_pairs(self) -> list[tuple[int, int]]:
        x = self.x_matrix()
        pairs = []
        for i in range(len(self.points)):
            for j in range(i + 1, len(self.points)):
                if self.points[i].z == self.points[j].z and np.max(np.abs(x[i] - x[j])) <= DUPLICATE_TOL:
                    pairs.append((i, j))
        return pairs

    def x_matrix(self) -> np.ndarray:
        return np.array([pt.x for pt in self.points], dtype=float)

    def z_matrix(self) -> np.ndarray:
        if self.points[0].z == ():
            return np.zeros((len(self.points), 0), dtype=int)
        return np.array([pt.z for pt in self.points], dtype=int)

    def extended(self, point: MixedPoint, y: float) -> "Dataset":
        return Dataset(self.points + (point,), np.append(self.responses, y), self.transform)


@dataclass(frozen=True)
class Prediction:
    mean: float
    sd: float


def covariance(params: EzGpParams, a: MixedPoint, b: MixedPoint) -> float:
    """Covariance between two inputs; symmetric by construction."""
    d2 = np.square(np.asarray(a.x) - np.asarray(b.x))
    val = params.sigma2[0] * math.exp(-float(d2 @ params.theta0))
    for h, (la, lb) in enumerate(zip(a.z, b.z)):
        if la == lb:
            val += params.sigma2[h + 1] * math.exp(-float(d2 @ params.theta[h][:, la - 1]))
    return float(val)


def cross_covariance(params: EzGpParams, x1, z1, x2, z2) -> np.ndarray:
    """Covariance matrix between two point sets given as (n,p) and (n,q) arrays."""
    d2 = np.square(x1[:, None, :] - x2[None, :, :])  # (n1, n2, p)
    k = params.sigma2[0] * np.exp(-(d2 @ params.theta0))
    for h, mat in enumerate(params.theta):
        for level in range(mat.shape[1]):
            mask = (z1[:, h] == level + 1)[:, None] & (z2[:, h] == level + 1)[None, :]
            if mask.any():
                k += np.where(mask, params.sigma2[h + 1] * np.exp(-(d2 @ mat[:, level])), 0.0)
    return k


class _KernelWorkspace:
    """Caches the squared-distance tensor and level masks of one dataset,
    so repeated likelihood evaluations only reweight and exponentiate."""

    def __init__(self, data: Dataset, space: DesignSpace):
        x = data.x_matrix()
        z = data.z_matrix()
        self.n = len(data)
        self.d2 = np.square(x[:, None, :] - x[None, :, :])  # (n, n, p)
        self.masks = []  # per factor: list of boolean (n, n) masks per level
        for h, m in enumerate(space.qual_levels):
            per_level = []
            for level in range(1, m + 1):
                eq = z[:, h] == level
                per_level.append(eq[:, None] & eq[None, :])
            self.masks.append(per_level)

    def gram(self, params: EzGpParams) -> np.ndarray:
        k = params.sigma2[0] * np.exp(-(self.d2 @ params.theta0))
        for h, per_level in enumerate(self.masks):
            for level, mask in enumerate(per_level):
                if mask.any():
                    k += np.where(mask, params.sigma2[h + 1] * np.exp(-(self.d2 @ params.theta[h][:, level])), 0.0)
        return k


def _try_cholesky(phi: np.ndarray, jitter: float):
    try:
        return sla.cho_factor(phi + jitter * np.eye(phi.shape[0]), lower=True)
    except np.linalg.LinAlgError:
        return None


def build_gram(params: EzGpParams, data: Dataset, space: DesignSpace, jitter: float | None = None):
    """Factorize the jittered Gram matrix; returns (cho_factor, jitter_used).

    When ``jitter`` is None, starts at 1e-8 x (mean Gram diagonal) and
    escalates tenfold up to 1e-4 before giving up.
    """
    ws = _KernelWorkspace(data, space)
    return _factor_gram(ws.gram(params), jitter)


def _factor_gram(phi: np.ndarray, jitter: float | None = None):
    scale = float(np.mean(np.diag(phi)))
    if jitter is not None:
        ladder = [jitter]
    else:
        ladder, j = [], _JITTER_START * scale
        while j <= _JITTER_CAP * scale * (1 + 1e-9):
            ladder.append(j)
            j *= 10
    for j in ladder:
        factor = _try_cholesky(phi, j)
        if factor is not None:
            return factor, j
    cond = float(np.linalg.cond(phi)) if phi.shape[0] <= 500 else float("inf")
    raise IllConditionedModelError(
        f"Gram factorization failed at jitter {ladder[-1]:.3e} (condition ~{cond:.3e})",
        condition=cond,
    )


def _profiled_nll(factor, y: np.ndarray) -> tuple[float, float]:
    """(objective, profiled mean): log|Phi| + y'P y - (1'P 1)^{-1} (1'P y)^2."""
    n = len(y)
    logdet = 2.0 * float(np.sum(np.log(np.diag(factor[0]))))
    ones = np.ones(n)
    sol_y = sla.cho_solve(factor, y)
    sol_1 = sla.cho_solve(factor, ones)
    one_quad = float(ones @ sol_1)
    one_y = float(ones @ sol_y)
    obj = logdet + float(y @ sol_y) - one_y * one_y / one_quad
    return obj, one_y / one_quad


def neg_log_likelihood(params: EzGpParams, data: Dataset, space: DesignSpace, jitter: float | None = None) -> float:
    """Profiled negative log-likelihood (constants dropped, mean profiled out)."""
    factor, _ = build_gram(params, data, space, jitter)
    return _profiled_nll(factor, data.responses)[0]


@dataclass
class FittedModel:
    """Conditioned surrogate: hyperparameters plus cached Gram factorization.

    Immutable in all fields that matter for prediction; ``clip_count`` is a
    diagnostic counter (number of variance clips larger than 1e-8) and is
    not synchronized across threads.
    """

    params: EzGpParams
    data: Dataset
    space: DesignSpace
    jitter: float
    factor: tuple
    mu_hat: float
    resid_solve: np.ndarray   # Phi^{-1} (y - mu_hat 1)
    ones_solve: np.ndarray    # Phi^{-1} 1
    ones_quad: float          # 1' Phi^{-1} 1
    nll: float
    start_objectives: tuple[tuple[float, float], ...] = ()
    clip_count: int = 0

    @property
    def prior_variance(self) -> float:
        """Far-field predictive variance: total variance plus mean uncertainty."""
        return self.params.total_variance + 1.0 / self.ones_quad


def condition(params: EzGpParams, data: Dataset, space: DesignSpace,
              jitter: float | None = None, nll: float | None = None) -> FittedModel:
    """Build a FittedModel from known hyperparameters (no estimation).

    The process mean is profiled from the data even when ``params.mu`` is
    set; the stored params carry the profiled value.
    """
    params.validate(space)
    factor, jitter_used = build_gram(params, data, space, jitter)
    y = data.responses
    obj, mu_hat = _profiled_nll(factor, y)
    ones = np.ones(len(y))
    resid_solve = sla.cho_solve(factor, y - mu_hat * ones)
    ones_solve = sla.cho_solve(factor, ones)
    return FittedModel(
        params=replace(params, mu=mu_hat),
        data=data,
        space=space,
        jitter=jitter_used,
        factor=factor,
        mu_hat=mu_hat,
        resid_solve=resid_solve,
        ones_solve=ones_solve,
        ones_quad=float(ones @ ones_solve),
        nll=obj if nll is None else nll,
    )


@dataclass(frozen=True)
class FitConfig:
    """Multi-start settings for hyperparameter estimation.

    Starts are 1 centered point plus LHD points in log-parameter space
    (a warm start, when provided, replaces one LHD start).  ``max_fev``
    caps Nelder-Mead evaluations per start (None = scipy default);
    ``jitter_scale`` multiplies the base jitter used inside the objective
    (raised on retry after a failed fit).
    """

    n_starts: int = 8
    seed: int = 0
    theta_bounds: tuple[float, float] = (1e-2, 1e2)
    sigma2_rel_bounds: tuple[float, float] = (1e-6, 10.0)
    max_fev: int | None = None
    jitter_scale: float = 1.0

    def reseeded(self, seed: int) -> "FitConfig":
        return replace(self, seed=seed)


def _pack(params: EzGpParams) -> np.ndarray:
    parts = [np.log(params.sigma2), np.log(params.theta0)]
    parts.extend(np.log(mat).ravel() for mat in params.theta)
    return np.concatenate(parts)


def _unpack(vec: np.ndarray, space: DesignSpace) -> EzGpParams:
    p, q = space.p, space.q
    sigma2 = np.exp(vec[:q + 1])
    theta0 = np.exp(vec[q + 1:q + 1 + p])
    mats, pos = [], q + 1 + p
    for m in space.qual_levels:
        mats.append(np.exp(vec[pos:pos + p * m]).reshape(p, m))
        pos += p * m
    return EzGpParams(mu=0.0, sigma2=sigma2, theta0=theta0, theta=tuple(mats))


def _log_bounds(space: DesignSpace, config: FitConfig, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    var_y = float(np.var(y))
    var_eff = var_y if var_y > 0 else 1e-12
    s_lo, s_hi = (math.log(config.sigma2_rel_bounds[0] * var_eff),
                  math.log(config.sigma2_rel_bounds[1] * var_eff))
    t_lo, t_hi = math.log(config.theta_bounds[0]), math.log(config.theta_bounds[1])
    n_sigma = space.q + 1
    n_theta = space.p + space.p * sum(space.qual_levels)
    lo = np.array([s_lo] * n_sigma + [t_lo] * n_theta)
    hi = np.array([s_hi] * n_sigma + [t_hi] * n_theta)
    return lo, hi


def fit(data: Dataset, space: DesignSpace, config: FitConfig = FitConfig(),
        warm_start: EzGpParams | None = None) -> FittedModel:
    """Maximum likelihood fit by multi-start bounded Nelder-Mead in log space.

    Returns the best factorizable local optimum over all starts; the
    achieved objective never exceeds any start's initial objective.
    """
    ws = _KernelWorkspace(data, space)
    y = data.responses
    lo, hi = _log_bounds(space, config, y)
    dim = len(lo)

    def objective(vec: np.ndarray) -> float:
        phi = ws.gram(_unpack(vec, space))
        factor = _try_cholesky(phi, _JITTER_START * config.jitter_scale * float(np.mean(np.diag(phi))))
        if factor is None:
            return np.inf
        return _profiled_nll(factor, y)[0]

    starts = []
    if warm_start is not None:
        starts.append(np.clip(_pack(warm_start), lo, hi))
    starts.append((lo + hi) / 2.0)
    n_lhd = max(config.n_starts - len(starts), 0)
    if n_lhd:
        rng = np.random.default_rng(config.seed)
        starts.extend(lo + u * (hi - lo) for u in _unit_lhd(n_lhd, dim, rng))

    results = []
    for idx, x0 in enumerate(starts):
        f0 = objective(x0)
        res = minimize(objective, x0, method="Nelder-Mead", bounds=list(zip(lo, hi)),
                       options={} if config.max_fev is None else {"maxfev": config.max_fev})
        xb, fb = (res.x, float(res.fun)) if res.fun <= f0 else (x0, f0)
        results.append((fb, idx, xb, f0))

    results.sort(key=lambda r: (r[0], r[1]))
    path = tuple((r[3], r[0]) for r in sorted(results, key=lambda r: r[1]))
    for fb, _idx, xb, _f0 in results:
        if not np.isfinite(fb):
            continue
        try:
            model = condition(_unpack(xb, space), data, space, nll=fb)
        except IllConditionedModelError:
            continue
        model.start_objectives = path
        return model
    raise FitFailureError("no optimizer start produced a factorizable model")


def predict(model: FittedModel, w: MixedPoint) -> Prediction:
    """Predictive mean and standard deviation at one input."""
    return predict_batch(model, [w])[0]


def predict_batch(model: FittedModel, pts) -> list[Prediction]:
    """Elementwise predictions, order preserved.

    Accepts a CandidateSet or any sequence of MixedPoint.
    """
    seq = pts.points if hasattr(pts, "points") else pts
    if len(seq) == 0:
        return []
    xc = np.array([pt.x for pt in seq], dtype=float)
    zc = (np.array([pt.z for pt in seq], dtype=int)
          if seq[0].z != () else np.zeros((len(seq), 0), dtype=int))
    x = model.data.x_matrix()
    z = model.data.z_matrix()
    r = cross_covariance(model.params, x, z, xc, zc)  # (n, m)
    means = model.mu_hat + r.T @ model.resid_solve
    sol_r = sla.cho_solve(model.factor, r)
    quad = np.sum(r * sol_r, axis=0)
    s = r.T @ model.ones_solve
    var = model.params.total_variance - quad + np.square(1.0 - s) / model.ones_quad
    clipped = var < -1e-8
    if clipped.any():
        model.clip_count += int(np.sum(clipped))
    var = np.maximum(var, 0.0)
    return [Prediction(float(m), float(sd)) for m, sd in zip(means, np.sqrt(var))]


def params_to_dict(params: EzGpParams) -> dict:
    return {
        "mu": float(params.mu),
        "sigma2": [float(v) for v in params.sigma2],
        "theta0": [float(v) for v in params.theta0],
        "theta": [[[float(v) for v in row] for row in mat] for mat in params.theta],
    }


def params_from_dict(d: dict) -> EzGpParams:
    return EzGpParams(
        mu=float(d["mu"]),
        sigma2=np.array(d["sigma2"], dtype=float),
        theta0=np.array(d["theta0"], dtype=float),
        theta=tuple(np.array(mat, dtype=float) for mat in d["theta"]),
    )


def model_to_dict(model: FittedModel) -> dict:
    """JSON-ready document; reloading reproduces predictions bit-for-bit
    under the same numeric environment (cross-platform equality is
    best-effort)."""
    return {
        "schema": 1,
        "space": {
            "quant_bounds": [[lo, hi] for lo, hi in model.space.quant_bounds],
            "qual_levels": list(model.space.qual_levels),
        },
        "params": params_to_dict(model.params),
        "jitter": float(model.jitter),
        "nll": float(model.nll),
        "data": {
            "x_norm": [[float(v) for v in pt.x] for pt in model.data.points],
            "z": [list(pt.z) for pt in model.data.points],
            "y": [float(v) for v in model.data.responses],
            "transform": model.data.transform,
        },
    }


def model_from_dict(doc: dict) -> FittedModel:
    space = DesignSpace(
        tuple((float(lo), float(hi)) for lo, hi in doc["space"]["quant_bounds"]),
        tuple(int(m) for m in doc["space"]["qual_levels"]),
    )
    pts = tuple(MixedPoint(tuple(x), tuple(z)) for x, z in zip(doc["data"]["x_norm"], doc["data"]["z"]))
    data = Dataset(pts, np.array(doc["data"]["y"], dtype=float), doc["data"].get("transform", "identity"))
    return condition(params_from_dict(doc["params"]), data, space,
                     jitter=float(doc["jitter"]), nll=float(doc["nll"]))


def save_model(model: FittedModel, path) -> None:
    with open(path, "w") as fh:
        json.dump(model_to_dict(model), fh, indent=1)
        fh.write("\n")


def load_model(path) -> FittedModel:
    with open(path) as fh:
        return model_from_dict(json.load(fh))
