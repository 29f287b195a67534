"""Enumerable families of axis-parallel index rectangles.

Five families are supported on a cell grid: all rectangles, all cubes,
dyadic cubes, eccentric rectangles in 2D (side pair ``(s, round(N*s))``
in either orientation), and the 3D family with sides ``(s, t, s*t)`` in
cells.  Members are half-open index boxes, which keeps unions and
intersections exact and removes boundary questions at cell resolution.

Enumeration order is deterministic: shapes in increasing size, positions
in lexicographic order.  Streams count every yielded set against a budget
and abort with ``BudgetExceededError`` once it is exhausted.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

__all__ = [
    "Rect",
    "BasisSpec",
    "BasisBudget",
    "BudgetExceededError",
    "iter_basis",
    "rects_containing",
    "basis_count",
    "basis_visit_count",
    "basis_rect_arrays",
    "axis_interval_pairs",
]

DEFAULT_BUDGET = 10**8

KINDS = ("cubes", "dyadic_cubes", "rectangles", "eccentricity", "zygmund_sts")


class BudgetExceededError(RuntimeError):
    """Raised when an enumeration passes its set-visit budget."""

    def __init__(self, message: str, partial_count: int):
        super().__init__(message)
        self.partial_count = partial_count


@dataclass(frozen=True)
class Rect:
    """Half-open cell-index box: lo[i] <= c[i] < hi[i] on every axis."""

    lo: tuple[int, ...]
    hi: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "lo", tuple(int(v) for v in self.lo))
        object.__setattr__(self, "hi", tuple(int(v) for v in self.hi))
        if len(self.lo) != len(self.hi):
            raise ValueError("lo and hi must have equal length")
        for i, (a, b) in enumerate(zip(self.lo, self.hi)):
            if a >= b:
                raise ValueError(f"axis {i}: lo must be < hi")

    @property
    def ndim(self) -> int:
        return len(self.lo)

    @property
    def ncells(self) -> int:
        n = 1
        for a, b in zip(self.lo, self.hi):
            n *= b - a
        return n

    @property
    def sides(self) -> tuple[int, ...]:
        return tuple(b - a for a, b in zip(self.lo, self.hi))

    def contains(self, cell: Sequence[int]) -> bool:
        return all(a <= c < b for a, b, c in zip(self.lo, self.hi, cell))

    def slices(self) -> tuple[slice, ...]:
        return tuple(slice(a, b) for a, b in zip(self.lo, self.hi))

    def within(self, dims: Sequence[int]) -> bool:
        return all(0 <= a and b <= d for a, b, d in zip(self.lo, self.hi, dims))


@dataclass(frozen=True)
class BasisSpec:
    """Declarative description of a basis family.

    ``kind`` is one of ``cubes``, ``dyadic_cubes``, ``rectangles``,
    ``eccentricity`` (needs ``N > 1``, 2D only) or ``zygmund_sts`` (3D only).
    """

    kind: str
    N: float | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown basis kind '{self.kind}'")
        if self.kind == "eccentricity":
            if self.N is None or not self.N > 1:
                raise ValueError("eccentricity basis needs N > 1")
        elif self.N is not None:
            raise ValueError(f"basis kind '{self.kind}' takes no parameter N")

    def required_ndim(self) -> int | None:
        if self.kind == "eccentricity":
            return 2
        if self.kind == "zygmund_sts":
            return 3
        return None

    def check_dims(self, dims: Sequence[int]) -> tuple[int, ...]:
        dims = tuple(int(d) for d in dims)
        need = self.required_ndim()
        if need is not None and len(dims) != need:
            raise ValueError(
                f"basis '{self.kind}' requires {need}D grids, got {len(dims)}D"
            )
        if any(d < 1 for d in dims):
            raise ValueError("dims must be positive")
        return dims


@dataclass(frozen=True)
class BasisBudget:
    max_sets: int = DEFAULT_BUDGET

    def __post_init__(self):
        if self.max_sets < 1:
            raise ValueError("max_sets must be >= 1")


def _ecc_side_pairs(N: float, dims: tuple[int, int]) -> list[tuple[int, int]]:
    # (s, round(N*s)) with both orientations; long side at least 1 cell
    pairs: list[tuple[int, int]] = []
    seen = set()
    s = 1
    while True:
        long = max(1, int(np.rint(N * s)))
        fits = (s <= dims[0] and long <= dims[1]) or (long <= dims[0] and s <= dims[1])
        if not fits:
            break
        for shape in ((s, long), (long, s)) if long != s else ((s, s),):
            if shape not in seen and shape[0] <= dims[0] and shape[1] <= dims[1]:
                seen.add(shape)
                pairs.append(shape)
        s += 1
    return sorted(pairs)


def _shape_list(spec: BasisSpec, dims: tuple[int, ...]) -> list[tuple[int, ...]]:
    """All side-length tuples of members of the family on ``dims``."""
    n = len(dims)
    if spec.kind == "rectangles":
        return [()]  # sentinel: positions enumerated per-axis directly
    if spec.kind == "cubes":
        return [(s,) * n for s in range(1, min(dims) + 1)]
    if spec.kind == "dyadic_cubes":
        shapes = []
        s = 1
        while s <= min(dims):
            shapes.append((s,) * n)
            s *= 2
        return shapes
    if spec.kind == "eccentricity":
        return [p for p in _ecc_side_pairs(float(spec.N), dims)]  # type: ignore[arg-type]
    if spec.kind == "zygmund_sts":
        shapes = []
        for s in range(1, dims[0] + 1):
            for t in range(1, dims[1] + 1):
                if s * t <= dims[2]:
                    shapes.append((s, t, s * t))
        return shapes
    raise AssertionError(spec.kind)


def _positions(shape: tuple[int, ...], dims: tuple[int, ...], dyadic: bool):
    ranges = []
    for s, d in zip(shape, dims):
        if dyadic:
            ranges.append(range(0, d - s + 1, s))
        else:
            ranges.append(range(0, d - s + 1))
    return ranges


class _Counter:
    __slots__ = ("count", "limit")

    def __init__(self, limit: int):
        self.count = 0
        self.limit = limit

    def tick(self, k: int = 1) -> None:
        self.count += k
        if self.count > self.limit:
            raise BudgetExceededError(
                f"basis enumeration exceeded budget of {self.limit} sets",
                partial_count=self.count,
            )


def iter_basis(
    spec: BasisSpec,
    dims: Sequence[int],
    budget: BasisBudget | None = None,
) -> Iterator[Rect]:
    """Yield every member of the family on a grid of the given dims."""
    dims = spec.check_dims(dims)
    counter = _Counter((budget or BasisBudget()).max_sets)
    if spec.kind == "rectangles":
        n = len(dims)
        pair_lists = [
            [(a, b) for a in range(d) for b in range(a + 1, d + 1)] for d in dims
        ]
        idx = [0] * n
        # odometer over per-axis interval pairs
        while True:
            lo = tuple(pair_lists[i][idx[i]][0] for i in range(n))
            hi = tuple(pair_lists[i][idx[i]][1] for i in range(n))
            counter.tick()
            yield Rect(lo, hi)
            axis = n - 1
            while axis >= 0:
                idx[axis] += 1
                if idx[axis] < len(pair_lists[axis]):
                    break
                idx[axis] = 0
                axis -= 1
            if axis < 0:
                return
    dyadic = spec.kind == "dyadic_cubes"
    for shape in _shape_list(spec, dims):
        ranges = _positions(shape, dims, dyadic)
        for pos in np.ndindex(*(len(r) for r in ranges)):
            lo = tuple(ranges[i][pos[i]] for i in range(len(dims)))
            hi = tuple(lo[i] + shape[i] for i in range(len(dims)))
            counter.tick()
            yield Rect(lo, hi)


def rects_containing(
    spec: BasisSpec,
    dims: Sequence[int],
    cell: Sequence[int],
    budget: BasisBudget | None = None,
) -> Iterator[Rect]:
    """Yield exactly the members of the family containing ``cell``."""
    dims = spec.check_dims(dims)
    cell = tuple(int(c) for c in cell)
    if len(cell) != len(dims) or any(not 0 <= c < d for c, d in zip(cell, dims)):
        raise ValueError(f"cell {cell} outside grid dims {dims}")
    counter = _Counter((budget or BasisBudget()).max_sets)
    if spec.kind == "rectangles":
        n = len(dims)
        pair_lists = [
            [(a, b) for a in range(cell[i] + 1) for b in range(cell[i] + 1, dims[i] + 1)]
            for i in range(n)
        ]
        for pos in np.ndindex(*(len(p) for p in pair_lists)):
            lo = tuple(pair_lists[i][pos[i]][0] for i in range(n))
            hi = tuple(pair_lists[i][pos[i]][1] for i in range(n))
            counter.tick()
            yield Rect(lo, hi)
        return
    dyadic = spec.kind == "dyadic_cubes"
    for shape in _shape_list(spec, dims):
        offsets = []
        feasible = True
        for i, (s, d) in enumerate(zip(shape, dims)):
            lo_min = max(0, cell[i] - s + 1)
            lo_max = min(cell[i], d - s)
            if dyadic:
                # dyadic offset containing the cell is unique per scale
                o = (cell[i] // s) * s
                opts = [o] if lo_min <= o <= lo_max else []
            else:
                opts = list(range(lo_min, lo_max + 1))
            if not opts:
                feasible = False
                break
            offsets.append(opts)
        if not feasible:
            continue
        for pos in np.ndindex(*(len(o) for o in offsets)):
            lo = tuple(offsets[i][pos[i]] for i in range(len(dims)))
            hi = tuple(lo[i] + shape[i] for i in range(len(dims)))
            counter.tick()
            yield Rect(lo, hi)


def basis_count(spec: BasisSpec, dims: Sequence[int]) -> int:
    """Number of members without materializing them."""
    dims = spec.check_dims(dims)
    if spec.kind == "rectangles":
        total = 1
        for d in dims:
            total *= d * (d + 1) // 2
        return total
    dyadic = spec.kind == "dyadic_cubes"
    total = 0
    for shape in _shape_list(spec, dims):
        c = 1
        for s, d in zip(shape, dims):
            c *= len(range(0, d - s + 1, s)) if dyadic else (d - s + 1)
        total += c
    return total


def basis_visit_count(spec: BasisSpec, dims: Sequence[int]) -> int:
    """Total rectangle-cell visits: sum of member cell counts."""
    dims = spec.check_dims(dims)
    if spec.kind == "rectangles":
        total = 1
        for d in dims:
            # sum over interval pairs of interval length
            total *= d * (d + 1) * (d + 2) // 6
        return total
    dyadic = spec.kind == "dyadic_cubes"
    total = 0
    for shape in _shape_list(spec, dims):
        positions = 1
        cells = 1
        for s, d in zip(shape, dims):
            positions *= len(range(0, d - s + 1, s)) if dyadic else (d - s + 1)
            cells *= s
        total += positions * cells
    return total


def axis_interval_pairs(d: int) -> tuple[np.ndarray, np.ndarray]:
    """All (lo, hi) interval pairs on one axis of d cells, lexicographic."""
    lo, hi = [], []
    for a in range(d):
        for b in range(a + 1, d + 1):
            lo.append(a)
            hi.append(b)
    return np.asarray(lo, dtype=np.int64), np.asarray(hi, dtype=np.int64)


def basis_rect_arrays(
    spec: BasisSpec,
    dims: Sequence[int],
    budget: BasisBudget | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Materialize the family as (lo, hi) index arrays of shape (M, n).

    The row order matches ``iter_basis``.  Raises BudgetExceededError before
    materializing if the member count already exceeds the budget.
    """
    dims = spec.check_dims(dims)
    limit = (budget or BasisBudget()).max_sets
    count = basis_count(spec, dims)
    if count > limit:
        raise BudgetExceededError(
            f"basis has {count} members, over budget {limit}", partial_count=count
        )
    n = len(dims)
    if spec.kind == "rectangles":
        axis_pairs = [axis_interval_pairs(d) for d in dims]
        grids_lo = np.meshgrid(*[p[0] for p in axis_pairs], indexing="ij")
        grids_hi = np.meshgrid(*[p[1] for p in axis_pairs], indexing="ij")
        lo = np.stack([g.reshape(-1) for g in grids_lo], axis=1)
        hi = np.stack([g.reshape(-1) for g in grids_hi], axis=1)
        return lo, hi
    dyadic = spec.kind == "dyadic_cubes"
    lo_rows, hi_rows = [], []
    for shape in _shape_list(spec, dims):
        ranges = _positions(shape, dims, dyadic)
        if any(len(r) == 0 for r in ranges):
            continue
        grids = np.meshgrid(*[np.asarray(r, dtype=np.int64) for r in ranges],
                            indexing="ij")
        lo = np.stack([g.reshape(-1) for g in grids], axis=1)
        hi = lo + np.asarray(shape, dtype=np.int64)[None, :]
        lo_rows.append(lo)
        hi_rows.append(hi)
    if not lo_rows:
        return np.zeros((0, n), dtype=np.int64), np.zeros((0, n), dtype=np.int64)
    return np.concatenate(lo_rows, axis=0), np.concatenate(hi_rows, axis=0)
