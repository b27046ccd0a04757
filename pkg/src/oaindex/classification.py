"""Map classes: exact Jenks natural breaks and symmetric classes around 1.

``jenks_partition`` solves the one-dimensional optimal partition problem
exactly by dynamic programming over the sorted *distinct* values, each
weighted by its multiplicity. Working on distinct values means equal values
are never split across classes, and duplicating the input leaves the
partition unchanged.

Among partitions of equal cost the lexicographically smallest vector of
break indices (into the sorted distinct values) wins. Costs closer than a
relative ``1e-9`` of the total sum of squares are treated as ties.
"""

from __future__ import annotations

import bisect
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from oaindex.errors import ClassificationError

DEFAULT_JENKS_CLASSES = 9
DEFAULT_SYMMETRIC_BOUNDS = (0.5, 0.75, 0.9, 1.1, 1.5, 2.0)
KINDS = ("jenks", "symmetric")

_TIE_RTOL = 1e-9
_BLOCK = 512


@dataclass(frozen=True)
class ClassScheme:
    kind: str
    boundaries: tuple[float, ...]
    labels: tuple[str, ...]
    neutral_class_index: int | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ClassificationError(f"unknown scheme kind {self.kind!r}")
        b = self.boundaries
        if any(not math.isfinite(x) for x in b) or any(x >= y for x, y in zip(b, b[1:])):
            raise ClassificationError("boundaries must be finite and strictly increasing")
        if len(self.labels) != len(b) + 1:
            raise ClassificationError("need exactly one label per class")
        if self.kind == "symmetric":
            k = len(b) + 1
            if k % 2 == 0 or self.neutral_class_index != k // 2:
                raise ClassificationError("symmetric scheme needs an odd class count with a middle neutral class")
            lo, hi = b[k // 2 - 1], b[k // 2]
            if not lo <= 1.0 < hi:
                raise ClassificationError("neutral class must contain 1")
        elif self.neutral_class_index is not None:
            raise ClassificationError("only symmetric schemes have a neutral class")

    @property
    def n_classes(self) -> int:
        return len(self.boundaries) + 1

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "boundaries": list(self.boundaries),
            "labels": list(self.labels),
            "neutral_class_index": self.neutral_class_index,
        }

    @classmethod
    def from_dict(cls, d: dict) -> ClassScheme:
        return cls(
            d["kind"],
            tuple(float(x) for x in d["boundaries"]),
            tuple(d["labels"]),
            d.get("neutral_class_index"),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> ClassScheme:
        return cls.from_dict(json.loads(text))


def _label(x: float) -> str:
    return format(x, ".6g")


def interval_labels(boundaries: Sequence[float]) -> tuple[str, ...]:
    if not boundaries:
        return ("all values",)
    labels = [f"< {_label(boundaries[0])}"]
    for lo, hi in zip(boundaries, boundaries[1:]):
        labels.append(f"[{_label(lo)}, {_label(hi)})")
    labels.append(f">= {_label(boundaries[-1])}")
    return tuple(labels)


def classify(value: float, scheme: ClassScheme) -> int:
    """Index of the class ``[b[i-1], b[i])`` holding ``value``; boundary values go up."""
    if value is None or not isinstance(value, (int, float)) or not math.isfinite(value) or value < 0:
        raise ClassificationError(f"unclassifiable value: {value!r}")
    return bisect.bisect_right(scheme.boundaries, value)


@dataclass(frozen=True)
class JenksPartition:
    values: tuple[float, ...]  # sorted distinct values
    weights: tuple[int, ...]  # multiplicity of each distinct value
    breaks: tuple[int, ...]  # start index of classes 2..k in ``values``
    cost: float  # within-class sum of squared deviations, correctly rounded

    @property
    def classes(self) -> list[tuple[float, ...]]:
        edges = (0, *self.breaks, len(self.values))
        return [self.values[a:b] for a, b in zip(edges, edges[1:])]

    @property
    def boundaries(self) -> tuple[float, ...]:
        out = []
        for l in self.breaks:
            lo, hi = self.values[l - 1], self.values[l]
            mid = (lo + hi) / 2
            if not math.isfinite(mid):
                mid = lo + (hi - lo) / 2
            out.append(mid if lo < mid <= hi else hi)
        return tuple(out)


def partition_cost(values: Sequence[float], weights: Sequence[int], breaks: Sequence[int]) -> Fraction:
    """Exact weighted within-class sum of squares of a break placement."""
    edges = (0, *breaks, len(values))
    total = Fraction(0)
    for a, b in zip(edges, edges[1:]):
        w = s = q = Fraction(0)
        for x, m in zip(values[a:b], weights[a:b]):
            fx = Fraction(x)
            w += m
            s += m * fx
            q += m * fx * fx
        total += q - s * s / w
    return total


def _distinct(values: Iterable[float]) -> tuple[np.ndarray, np.ndarray]:
    arr = np.asarray(list(values), dtype=np.float64)
    if arr.size == 0:
        raise ClassificationError("no data")
    if not np.all(np.isfinite(arr)):
        raise ClassificationError("unclassifiable value: non-finite input")
    return np.unique(arr, return_counts=True)


def jenks_partition(values: Iterable[float], k: int) -> JenksPartition:
    uniq, counts = _distinct(values)
    m = uniq.size
    if k < 1:
        raise ClassificationError("class count must be at least 1")
    if k > m:
        raise ClassificationError(f"too many classes: {k} requested, {m} distinct values")

    w = counts.astype(np.float64)
    x = uniq - np.dot(uniq, w) / w.sum()
    W = np.concatenate(([0.0], np.cumsum(w)))
    S = np.concatenate(([0.0], np.cumsum(w * x)))
    Q = np.concatenate(([0.0], np.cumsum(w * x * x)))

    def sse(i, j):
        # segment [i, j) of the distinct values; i, j broadcast
        dw = W[j] - W[i]
        ds = S[j] - S[i]
        return np.maximum(Q[j] - Q[i] - ds * ds / dw, 0.0)

    idx = np.arange(m + 1)
    # suffix[c][i]: optimal cost of splitting values[i:] into c classes
    suffix = np.full((k + 1, m + 1), np.inf)
    suffix[1, :m] = sse(idx[:m], m)
    for c in range(2, k + 1):
        prev = suffix[c - 1]
        last = m - c  # largest start index that leaves room for c classes
        for start in range(0, last + 1, _BLOCK):
            rows = idx[start:min(start + _BLOCK, last + 1)]
            ls = idx[1:m]
            with np.errstate(invalid="ignore", divide="ignore"):
                cost = sse(rows[:, None], ls[None, :]) + prev[ls][None, :]
            cost[ls[None, :] <= rows[:, None]] = np.inf
            suffix[c, rows] = cost.min(axis=1)

    tol = _TIE_RTOL * float(suffix[1, 0])
    breaks = []
    start = 0
    for c in range(k, 1, -1):
        ls = idx[start + 1 : m - c + 2]
        cand = sse(start, ls) + suffix[c - 1][ls]
        pick = int(np.flatnonzero(cand <= suffix[c, start] + tol)[0])
        start = int(ls[pick])
        breaks.append(start)

    vals = tuple(float(v) for v in uniq)
    wts = tuple(int(c) for c in counts)
    exact = partition_cost(vals, wts, breaks)
    return JenksPartition(vals, wts, tuple(breaks), float(exact))


def jenks_breaks(values: Iterable[float], k: int = DEFAULT_JENKS_CLASSES) -> ClassScheme:
    """Optimal ``k``-class natural breaks, boundaries at midpoints between classes."""
    part = jenks_partition(values, k)
    bounds = part.boundaries
    return ClassScheme("jenks", bounds, interval_labels(bounds))


def pooled_breaks(values_per_period: Iterable[Iterable[float]], k: int = DEFAULT_JENKS_CLASSES) -> ClassScheme:
    """One Jenks scheme fitted on every period's values together."""
    pooled = [v for period in values_per_period for v in period]
    if not pooled:
        raise ClassificationError("no data")
    return jenks_breaks(pooled, k)


def symmetric_scheme(bounds: Sequence[float] = DEFAULT_SYMMETRIC_BOUNDS) -> ClassScheme:
    """Manual classes around 1 with a central neutral class."""
    b = tuple(float(x) for x in bounds)
    half = len(b) // 2
    valid = (
        len(b) >= 2
        and len(b) % 2 == 0
        and all(math.isfinite(x) for x in b)
        and all(x < y for x, y in zip(b, b[1:]))
        and b[half - 1] <= 1.0 < b[half]
    )
    if not valid:
        raise ClassificationError(f"invalid symmetric bounds: {list(b)}")
    return ClassScheme("symmetric", b, interval_labels(b), half)


def write_schemes(schemes: dict[str, ClassScheme], dest: str | Path) -> None:
    payload = {key: s.to_dict() for key, s in sorted(schemes.items())}
    Path(dest).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def read_schemes(source: str | Path) -> dict[str, ClassScheme]:
    payload = json.loads(Path(source).read_text(encoding="utf-8"))
    return {key: ClassScheme.from_dict(d) for key, d in payload.items()}
