"""Greedy covering selections for rectangle families.

Three procedures, all deterministic in the input order:

* half-overlap: keep a rectangle when under half of it is already covered
  by the kept ones; the kept family splits into pairwise disjoint parts
  each holding more than half of its rectangle.
* alpha-scattered: keep a rectangle when at most a lambda-fraction is
  covered; every discarded rectangle then sits inside the superlevel set
  {M chi_(kept union) > lambda}.
* exponential-overlap: after sorting by decreasing second-axis side, keep
  a rectangle while the exponential of the overlap count integrates to at
  most twice its measure; the overlap count of the kept family then has a
  finite exponential-class norm on the union.

Selections are sequential by nature (each step depends on the accepted
prefix); only the per-step overlap integrals vectorize.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .basis import Rect
from .grid import Box, CellSet, GridFunction
from .orlicz import YoungSpec, luxemburg_norm

__all__ = [
    "SelectionResult",
    "ExpOverlapResult",
    "select_half_overlap",
    "select_alpha_scattered",
    "select_exp_overlap",
]


@dataclass
class SelectionResult:
    """Outcome of a greedy selection pass.

    ``selected`` and ``rejected`` index the input list and partition it;
    ``disjoint_parts[k]`` is what the k-th kept rectangle adds on top of
    the earlier kept ones (pairwise disjoint by construction).  ``stats``
    carries per-step overlap ratios.
    """

    selected: list[int]
    rejected: list[int]
    disjoint_parts: list[CellSet]
    stats: dict = field(default_factory=dict)


@dataclass
class ExpOverlapResult(SelectionResult):
    union_ratio: float = float("nan")
    psi_norm: float = float("nan")
    delta0: float = float("nan")


def _unit_box(dims: tuple[int, ...]) -> Box:
    return Box((0.0,) * len(dims), tuple(float(d) for d in dims), dims)


def _check_rects(rects: list[Rect], dims: tuple[int, ...]) -> None:
    if not rects:
        raise ValueError("selection needs a nonempty rectangle list")
    for r in rects:
        if r.ndim != len(dims) or not r.within(dims):
            raise ValueError(f"rectangle {r} outside grid dims {dims}")


def select_half_overlap(rects: list[Rect], dims) -> SelectionResult:
    """Greedy pass in input order keeping rectangles under half covered.

    A rectangle is kept when its overlap with the union of earlier kept
    ones is strictly below half its cell count, so each disjoint part
    holds more than half of its rectangle.  Because the kept union only
    grows, every rejected rectangle is at least half covered by the final
    union as well; the final-union overlap ratios are recorded in
    ``stats['rejected_final_overlap']``.
    """
    dims = tuple(int(d) for d in dims)
    _check_rects(rects, dims)
    box = _unit_box(dims)
    union = np.zeros(dims, dtype=bool)
    selected: list[int] = []
    rejected: list[int] = []
    parts: list[CellSet] = []
    accept_overlap: list[float] = []
    for i, r in enumerate(rects):
        sl = r.slices()
        overlap = int(np.count_nonzero(union[sl]))
        ratio = overlap / r.ncells
        if overlap < r.ncells / 2:
            selected.append(i)
            accept_overlap.append(ratio)
            part = np.zeros(dims, dtype=bool)
            part[sl] = ~union[sl]
            parts.append(CellSet(box, part))
            union[sl] = True
        else:
            rejected.append(i)
    rejected_final = []
    for i in rejected:
        sl = rects[i].slices()
        rejected_final.append(int(np.count_nonzero(union[sl])) / rects[i].ncells)
    return SelectionResult(
        selected,
        rejected,
        parts,
        stats={
            "accept_overlap": accept_overlap,
            "rejected_final_overlap": rejected_final,
            "union": CellSet(box, union),
        },
    )


def select_alpha_scattered(rects: list[Rect], dims, lam: float) -> SelectionResult:
    """Greedy subsequence whose members overlap their predecessors by at
    most a lambda fraction.

    Every rejected rectangle was, at rejection time, covered by the kept
    union beyond the lambda fraction, hence lies inside the strict
    superlevel set of the maximal map of the final kept-union indicator at
    level lambda.
    """
    if not 0 < lam < 1:
        raise ValueError("lambda must lie in (0, 1)")
    dims = tuple(int(d) for d in dims)
    _check_rects(rects, dims)
    box = _unit_box(dims)
    union = np.zeros(dims, dtype=bool)
    selected: list[int] = []
    rejected: list[int] = []
    parts: list[CellSet] = []
    accept_overlap: list[float] = []
    reject_overlap: list[float] = []
    for i, r in enumerate(rects):
        sl = r.slices()
        overlap = int(np.count_nonzero(union[sl]))
        ratio = overlap / r.ncells
        if overlap <= lam * r.ncells:
            selected.append(i)
            accept_overlap.append(ratio)
            part = np.zeros(dims, dtype=bool)
            part[sl] = ~union[sl]
            parts.append(CellSet(box, part))
            union[sl] = True
        else:
            rejected.append(i)
            reject_overlap.append(ratio)
    return SelectionResult(
        selected,
        rejected,
        parts,
        stats={
            "lambda": lam,
            "accept_overlap": accept_overlap,
            "reject_overlap_at_time": reject_overlap,
            "union": CellSet(box, union),
        },
    )


def select_exp_overlap(
    rects: list[Rect],
    dims,
    n: int = 2,
    delta0: float = 1.0,
) -> ExpOverlapResult:
    """Exponential-overlap selection after sorting by second-axis side.

    A candidate R is kept while the cell sum over R of
    exp((delta0 * overlap count)^(1/(n-1))) stays within twice its cell
    count, counting previously kept rectangles only.  Returns the measure
    ratio of the full union to the kept union and the exponential-class
    norm of the kept overlap count on the kept union.
    """
    if delta0 <= 0:
        raise ValueError("delta0 must be positive")
    if n < 2:
        raise ValueError("n must be >= 2")
    dims = tuple(int(d) for d in dims)
    _check_rects(rects, dims)
    if len(dims) != n:
        raise ValueError(f"grid is {len(dims)}D but n = {n}")
    box = _unit_box(dims)
    order = sorted(
        range(len(rects)),
        key=lambda i: (-(rects[i].hi[1] - rects[i].lo[1]), i),
    )
    count = np.zeros(dims, dtype=np.int64)
    union = np.zeros(dims, dtype=bool)
    selected: list[int] = []
    rejected: list[int] = []
    parts: list[CellSet] = []
    root = 1.0 / (n - 1)
    for i in order:
        r = rects[i]
        sl = r.slices()
        with np.errstate(over="ignore"):
            integral = float(np.sum(np.exp((delta0 * count[sl]) ** root)))
        if integral <= 2.0 * r.ncells:
            selected.append(i)
            part = np.zeros(dims, dtype=bool)
            part[sl] = ~union[sl]
            parts.append(CellSet(box, part))
            union[sl] = True
            count[sl] += 1
        else:
            rejected.append(i)
    all_union = np.zeros(dims, dtype=bool)
    for r in rects:
        all_union[r.slices()] = True
    union_cells = int(np.count_nonzero(union))
    union_ratio = int(np.count_nonzero(all_union)) / union_cells if union_cells else float("inf")
    overlap_fn = GridFunction(box, count.astype(np.float64))
    psi = luxemburg_norm(overlap_fn, CellSet(box, union), YoungSpec("psi", n=n))
    # scatter measure of the kept family in the alpha-scattered sense
    alphas = []
    seen = np.zeros(dims, dtype=bool)
    for i in selected:
        sl = rects[i].slices()
        alphas.append(int(np.count_nonzero(seen[sl])) / rects[i].ncells)
        seen[sl] = True
    return ExpOverlapResult(
        selected,
        rejected,
        parts,
        stats={
            "order": order,
            "alpha_measured": max(alphas) if alphas else 0.0,
            "union": CellSet(box, union),
            "all_union": CellSet(box, all_union),
        },
        union_ratio=float(union_ratio),
        psi_norm=psi.value,
        delta0=delta0,
    )
