"""Exhaustive bi-criteria solver over all interval mappings.

A query fixes one criterion under a threshold and minimizes the other.  The
solver walks every partition of the stage chain into ``m`` consecutive
intervals (``m`` ascending, cut positions lexicographic) and, for each
partition, evaluates every ordered tuple of ``m`` distinct processors with a
vectorized kernel (see :mod:`pipemap._kernels`).  That enumeration order is
the canonical order used for tie-breaking and by :func:`enumerate_mappings`.

Optima are compared with exact float equality when breaking ties: among
feasible mappings the solver picks the smallest objective, then the smallest
value of the other criterion, then the canonically first mapping.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, replace
from typing import Iterator, NamedTuple, Sequence

import numpy as np

from . import _kernels
from .model import (
    IntervalMapping,
    MappingMetrics,
    PipelineSpec,
    Platform,
    evaluate_metrics,
    padded_threshold,
)

__all__ = [
    "BicriteriaQuery",
    "SolveResult",
    "SweepPoint",
    "count_mappings",
    "enumerate_mappings",
    "solve",
    "sweep",
]

OBJECTIVES = ("latency", "period")


@dataclass(frozen=True)
class BicriteriaQuery:
    """Minimize one criterion subject to a bound on the other.

    ``objective`` names the minimized criterion; ``threshold`` bounds the
    other one.  ``math.inf`` is a valid threshold and makes the query an
    unconstrained minimization.
    """

    objective: str
    threshold: float

    def __post_init__(self) -> None:
        if self.objective not in OBJECTIVES:
            raise ValueError(
                f"objective must be one of {OBJECTIVES}, got {self.objective!r}"
            )
        thr = float(self.threshold)
        if math.isnan(thr) or thr <= 0:
            raise ValueError(f"threshold must be positive, got {self.threshold!r}")
        object.__setattr__(self, "threshold", thr)

    @classmethod
    def minimize_latency(cls, max_period: float = math.inf) -> "BicriteriaQuery":
        return cls(objective="latency", threshold=max_period)

    @classmethod
    def minimize_period(cls, max_latency: float = math.inf) -> "BicriteriaQuery":
        return cls(objective="period", threshold=max_latency)

    @property
    def fixed_criterion(self) -> str:
        """The criterion the threshold applies to."""
        return "period" if self.objective == "latency" else "latency"


@dataclass(frozen=True)
class SolveResult:
    """Outcome of one exhaustive query.

    ``mapping``/``metrics`` are ``None`` when no mapping satisfies the
    threshold; ``min_period`` and ``min_latency`` always carry the
    unconstrained minima seen during the scan, so an infeasible result still
    reports the best achievable bound on each criterion.
    """

    query: BicriteriaQuery
    mapping: IntervalMapping | None
    metrics: MappingMetrics | None
    evaluated: int
    min_period: float
    min_latency: float

    @property
    def feasible(self) -> bool:
        return self.mapping is not None

    @property
    def objective_value(self) -> float | None:
        if self.metrics is None:
            return None
        return (
            self.metrics.latency
            if self.query.objective == "latency"
            else self.metrics.period
        )

    @property
    def fixed_value(self) -> float | None:
        if self.metrics is None:
            return None
        return (
            self.metrics.period
            if self.query.objective == "latency"
            else self.metrics.latency
        )

    def to_dict(self) -> dict:
        return {
            "objective": self.query.objective,
            "threshold": self.query.threshold,
            "feasible": self.feasible,
            "mapping": self.mapping.signature() if self.mapping else None,
            "period": self.metrics.period if self.metrics else None,
            "latency": self.metrics.latency if self.metrics else None,
            "evaluated": self.evaluated,
            "min_period": self.min_period,
            "min_latency": self.min_latency,
        }


class SweepPoint(NamedTuple):
    threshold: float
    result: SolveResult


def count_mappings(n: int, p: int) -> int:
    """Number of interval mappings of ``n`` stages onto ``p`` processors.

    For each interval count ``m`` there are ``C(n-1, m-1)`` ways to cut the
    chain and ``p! / (p-m)!`` ordered choices of distinct processors.
    """
    if n < 1 or p < 1:
        raise ValueError("count_mappings requires n >= 1 and p >= 1")
    return sum(
        math.comb(n - 1, m - 1) * math.perm(p, m)
        for m in range(1, min(n, p) + 1)
    )


def _cuts_to_intervals(n: int, cuts: tuple[int, ...]) -> tuple[tuple[int, int], ...]:
    bounds = (0,) + cuts + (n,)
    return tuple(
        (bounds[i] + 1, bounds[i + 1]) for i in range(len(bounds) - 1)
    )


def enumerate_mappings(
    spec: PipelineSpec, platform: Platform
) -> Iterator[IntervalMapping]:
    """Yield every interval mapping in canonical order.

    Canonical order: interval count ``m`` ascending, then cut positions in
    lexicographic order, then assignee tuples in lexicographic order.
    """
    n, p = spec.n, platform.p
    for m in range(1, min(n, p) + 1):
        for cuts in itertools.combinations(range(1, n), m - 1):
            intervals = _cuts_to_intervals(n, cuts)
            for procs in itertools.permutations(range(1, p + 1), m):
                yield IntervalMapping(intervals=intervals, assignees=procs)


_PERM_TABLES: dict[tuple[int, int], np.ndarray] = {}


def _perm_table(p: int, m: int) -> np.ndarray:
    """All ordered ``m``-tuples of distinct processors, lexicographic, cached."""
    key = (p, m)
    table = _PERM_TABLES.get(key)
    if table is None:
        flat = np.fromiter(
            itertools.chain.from_iterable(
                itertools.permutations(range(1, p + 1), m)
            ),
            dtype=np.int64,
            count=math.perm(p, m) * m,
        )
        table = flat.reshape(-1, m)
        table.setflags(write=False)
        _PERM_TABLES[key] = table
    return table


def _partition_arrays(
    spec: PipelineSpec, intervals: tuple[tuple[int, int], ...]
) -> tuple[np.ndarray, np.ndarray]:
    m = len(intervals)
    wsum = np.empty(m, dtype=np.float64)
    bvol = np.empty(m + 1, dtype=np.float64)
    for j, (d, e) in enumerate(intervals):
        acc = 0.0
        for k in range(d, e + 1):
            acc += spec.w[k - 1]
        wsum[j] = acc
        bvol[j] = spec.delta[d - 1]
    bvol[m] = spec.delta[intervals[-1][1]]
    return wsum, bvol


def solve(
    spec: PipelineSpec, platform: Platform, query: BicriteriaQuery
) -> SolveResult:
    """Exhaustively find the optimal mapping for a bi-criteria query."""
    n, p = spec.n, platform.p
    s, b = platform.s, platform.b
    padded = padded_threshold(query.threshold)
    want_latency = query.objective == "latency"

    evaluated = 0
    min_period = math.inf
    min_latency = math.inf
    best_obj = math.inf
    best_sec = math.inf
    best_mapping: IntervalMapping | None = None

    for m in range(1, min(n, p) + 1):
        perms = _perm_table(p, m)
        count = perms.shape[0]
        periods = np.empty(count, dtype=np.float64)
        latencies = np.empty(count, dtype=np.float64)
        for cuts in itertools.combinations(range(1, n), m - 1):
            intervals = _cuts_to_intervals(n, cuts)
            wsum, bvol = _partition_arrays(spec, intervals)
            _kernels.scan_perms(wsum, bvol, s, b, perms, periods, latencies)
            evaluated += count

            part_min_period = float(periods.min())
            part_min_latency = float(latencies.min())
            if part_min_period < min_period:
                min_period = part_min_period
            if part_min_latency < min_latency:
                min_latency = part_min_latency

            obj_arr, fix_arr = (
                (latencies, periods) if want_latency else (periods, latencies)
            )
            feasible_obj = np.where(fix_arr <= padded, obj_arr, math.inf)
            i = int(np.argmin(feasible_obj))
            if math.isinf(feasible_obj[i]):
                continue
            # Secondary tie-break inside the partition: among rows sharing the
            # exact optimal objective, take the smallest other criterion; the
            # first row wins remaining ties (canonical order).
            ties = np.flatnonzero(feasible_obj == feasible_obj[i])
            if ties.size > 1:
                i = int(ties[int(np.argmin(fix_arr[ties]))])
            cand_obj = float(obj_arr[i])
            cand_sec = float(fix_arr[i])
            if cand_obj < best_obj or (
                cand_obj == best_obj and cand_sec < best_sec
            ):
                best_obj = cand_obj
                best_sec = cand_sec
                best_mapping = IntervalMapping(
                    intervals=intervals, assignees=tuple(int(u) for u in perms[i])
                )

    metrics = (
        evaluate_metrics(spec, platform, best_mapping)
        if best_mapping is not None
        else None
    )
    return SolveResult(
        query=query,
        mapping=best_mapping,
        metrics=metrics,
        evaluated=evaluated,
        min_period=min_period,
        min_latency=min_latency,
    )


def sweep(
    spec: PipelineSpec,
    platform: Platform,
    query: BicriteriaQuery,
    thresholds: Sequence[float],
) -> list[SweepPoint]:
    """Run one solve per threshold; ``query`` supplies the objective.

    ``thresholds`` must be sorted ascending; the returned rows preserve input
    order, one per threshold, infeasible rows included.
    """
    values = [float(t) for t in thresholds]
    if not values:
        raise ValueError("sweep needs at least one threshold")
    for a, b_ in zip(values, values[1:]):
        if b_ < a:
            raise ValueError("sweep thresholds must be sorted ascending")
    return [
        SweepPoint(t, solve(spec, platform, replace(query, threshold=t)))
        for t in values
    ]
