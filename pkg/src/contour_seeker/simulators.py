"""Test functions and tabular simulators.

A simulator exposes a declared design space and a deterministic
``evaluate(point)`` returning the raw response at a (normalized)
MixedPoint.  Response transforms (identity / log) are applied by the
campaign at ingestion; ``tabular_simulator`` can additionally transform
at load time for standalone use, in which case the campaign should run
with the identity transform.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Callable, Protocol

import numpy as np

from .design_space import DesignSpace, MixedPoint, make_space
from .errors import EvaluationError, IngestionError, ValidationError


class Simulator(Protocol):
    space: DesignSpace
    name: str

    def evaluate(self, point: MixedPoint) -> float: ...


@dataclass(frozen=True)
class ResponseTransform:
    name: str

    def apply(self, value: float) -> float:
        if self.name == "identity":
            return float(value)
        if value <= 0:
            raise ValidationError(f"log transform requires a positive response, got {value}")
        return math.log(value)

    def invert(self, value: float) -> float:
        if self.name == "identity":
            return float(value)
        return math.exp(value)


def get_transform(name: str) -> ResponseTransform:
    if name not in ("identity", "log"):
        raise ValidationError(f"unknown response transform {name!r}")
    return ResponseTransform(name)


@dataclass(frozen=True)
class FunctionSimulator:
    """Deterministic closed-form test function over a declared space."""

    space: DesignSpace
    fn: Callable
    name: str

    def evaluate(self, point: MixedPoint) -> float:
        self.space.validate_point(point)
        return float(self.fn(self.space.denormalize(point.x), point.z))


def _example1(x, z):
    x1, = x
    if z[0] == 1:
        return 2.0 - math.cos(2.0 * math.pi * x1)
    if z[0] == 2:
        return 1.0 - math.cos(4.0 * math.pi * x1)
    return math.cos(2.0 * math.pi * x1)


def _example2(x, z):
    x1, x2 = x
    i = (x1 + x2 ** 2, x1 ** 2 + x2, x1 ** 2 + x2 ** 2)[z[0] - 1]
    g = (math.cos(x1) + math.cos(2.0 * x2),
         math.cos(2.0 * x1) + math.cos(x2),
         math.cos(2.0 * x1) + math.cos(2.0 * x2))[z[1] - 1]
    return i + g


def _example3(x, z):
    x1, x2, x3 = x
    i = (x1 + x2 ** 2 + x3, x1 ** 2 + x2 + x3, x3 + x1 + x2 ** 2)[z[0] - 1]
    g = (math.cos(x1) + math.cos(2.0 * x2) + math.cos(x3),
         math.cos(x1) + math.cos(2.0 * x2) + math.cos(x3),
         math.cos(2.0 * x1) + math.cos(x2) + math.cos(x3))[z[1] - 1]
    h = (math.sin(x1) + math.sin(2.0 * x2) + math.sin(x3),
         math.sin(x1) + math.sin(2.0 * x2) + math.sin(x3),
         math.sin(2.0 * x1) + math.sin(x2) + math.sin(x3))[z[2] - 1]
    return i + g + h


_BUILTINS = {
    "example1": (_example1, ((0.0, 1.0),), (3,)),
    "example2": (_example2, ((0.0, 1.0), (0.0, 1.0)), (3, 3)),
    "example3": (_example3, ((0.0, 1.0),) * 3, (3, 3, 3)),
}


def builtin_simulator(name: str) -> FunctionSimulator:
    """One of the three closed-form mixed-input test functions."""
    if name not in _BUILTINS:
        raise ValidationError(f"unknown builtin simulator {name!r}; choose from {sorted(_BUILTINS)}")
    fn, bounds, levels = _BUILTINS[name]
    return FunctionSimulator(make_space(bounds, levels), fn, name)


@dataclass(frozen=True, eq=False)
class TabularSimulator:
    """Nearest-grid-row lookup over an ingested table.

    Distance is Euclidean on normalized quantitative coordinates; the
    qualitative levels must match exactly.  Equidistant rows resolve to
    the smaller row index.
    """

    space: DesignSpace
    x_norm: np.ndarray   # (r, p)
    z: np.ndarray        # (r, q)
    y: np.ndarray        # (r,) on the stored (possibly transformed) scale
    name: str = "tabular"

    def evaluate(self, point: MixedPoint) -> float:
        self.space.validate_point(point)
        if self.space.q:
            match = np.all(self.z == np.array(point.z), axis=1)
        else:
            match = np.ones(len(self.y), dtype=bool)
        if not match.any():
            raise EvaluationError(f"no table rows for level combination {point.z}")
        rows = np.flatnonzero(match)
        d2 = np.sum((self.x_norm[rows] - np.array(point.x)) ** 2, axis=1)
        return float(self.y[rows[np.argmin(d2)]])


def tabular_simulator(path, space: DesignSpace, transform: str = "identity",
                      response_column: str = "y") -> TabularSimulator:
    """Ingest a CSV grid with columns x_1..x_p, z_1..z_q and a response.

    Lines starting with '#' are ignored.  The optional log transform is
    applied to the response at load time.
    """
    tr = get_transform(transform)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        rows = [(i + 1, row) for i, row in enumerate(reader)
                if row and not row[0].lstrip().startswith("#")]
    if not rows:
        raise IngestionError("empty table", row=None)

    header = [c.strip() for c in rows[0][1]]
    wanted = [f"x_{k + 1}" for k in range(space.p)] + [f"z_{h + 1}" for h in range(space.q)] + [response_column]
    try:
        cols = [header.index(c) for c in wanted]
    except ValueError as exc:
        raise IngestionError(f"missing column: {exc}", row=rows[0][0]) from None

    x_list, z_list, y_list = [], [], []
    for lineno, row in rows[1:]:
        try:
            vals = [row[c] for c in cols]
            x_phys = [float(v) for v in vals[:space.p]]
            z = [int(v) for v in vals[space.p:space.p + space.q]]
            y = float(vals[-1])
        except (ValueError, IndexError) as exc:
            raise IngestionError(f"row {lineno}: {exc}", row=lineno) from None
        for h, (l, m) in enumerate(zip(z, space.qual_levels)):
            if not 1 <= l <= m:
                raise IngestionError(f"row {lineno}: z_{h + 1}={l} outside 1..{m}", row=lineno)
        try:
            y_list.append(tr.apply(y))
        except ValidationError as exc:
            raise IngestionError(f"row {lineno}: {exc}", row=lineno) from None
        x_list.append(space.normalize(x_phys))
        z_list.append(z)
    if not x_list:
        raise IngestionError("table has a header but no data rows", row=rows[0][0])

    return TabularSimulator(
        space=space,
        x_norm=np.array(x_list, dtype=float),
        z=np.array(z_list, dtype=int).reshape(len(z_list), space.q),
        y=np.array(y_list, dtype=float),
    )
