"""Shared builders for randomized tests."""

from __future__ import annotations

import numpy as np

from pipemap import IntervalMapping, PipelineSpec, Platform


def random_instance(
    rng: np.random.Generator,
    n_range: tuple[int, int] = (1, 5),
    p_range: tuple[int, int] = (1, 4),
    allow_zero_delta: bool = True,
) -> tuple[PipelineSpec, Platform]:
    n = int(rng.integers(n_range[0], n_range[1] + 1))
    p = int(rng.integers(p_range[0], p_range[1] + 1))
    w = rng.uniform(1.0, 100.0, n)
    delta = rng.uniform(0.5, 50.0, n + 1)
    if allow_zero_delta and rng.random() < 0.2:
        delta[int(rng.integers(0, n + 1))] = 0.0
    s = rng.uniform(50.0, 200.0, p)
    b = rng.uniform(50.0, 200.0, (p + 2, p + 2))
    np.fill_diagonal(b, 0.0)
    spec = PipelineSpec(
        stage_names=tuple(f"stage{k}" for k in range(1, n + 1)), w=w, delta=delta
    )
    return spec, Platform(s=s, b=b)


def random_valid_mapping(
    rng: np.random.Generator, n: int, p: int
) -> IntervalMapping:
    m = int(rng.integers(1, min(n, p) + 1))
    cuts = sorted(rng.choice(np.arange(1, n), size=m - 1, replace=False).tolist()) if m > 1 else []
    bounds = [0] + cuts + [n]
    intervals = tuple((bounds[i] + 1, bounds[i + 1]) for i in range(m))
    procs = tuple(int(u) for u in rng.choice(np.arange(1, p + 1), size=m, replace=False))
    return IntervalMapping(intervals=intervals, assignees=procs)


def as_lists(spec: PipelineSpec, platform: Platform):
    """Plain-list views of an instance for the oracle module."""
    return (
        spec.w.tolist(),
        spec.delta.tolist(),
        platform.s.tolist(),
        platform.b.tolist(),
    )
