"""Maximal-operator kernels: brute, offline sweep, and a 2D marginal path.

All paths share one candidate-value routine (rectangle averages off the
summed tables, multiplied across functions in slot order), so per-cell
maxima agree bit-for-bit between the brute and sweep engines: both reduce
the same float multiset with ``max``, which is order independent.  Work may
be partitioned across threads; partial results merge by cellwise maximum,
so the output is identical for any worker count.

The ``auto`` algorithm uses the dedicated marginal path for a single
function over all rectangles in 2D (one 1D maximal problem per second-axis
interval, O(N^4) total), brute force below 1e5 rectangle-cell visits, and
the offline sweep otherwise.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .basis import BasisBudget, BasisSpec, BudgetExceededError, basis_rect_arrays, basis_visit_count
from .grid import Box, GridFunction, prefix_sums

__all__ = [
    "MaximalRequest",
    "maximal_map",
    "weighted_maximal_map",
    "multilinear_maximal_map",
    "sweep_engine",
    "brute_engine",
    "candidate_values",
]

BRUTE_VISIT_LIMIT = 10**5


@dataclass
class MaximalRequest:
    """One maximal-map computation: functions, optional weight, basis, path."""

    functions: list[GridFunction]
    spec: BasisSpec
    weight: GridFunction | None = None
    algorithm: str = "auto"
    budget: BasisBudget = field(default_factory=BasisBudget)
    threads: int = 1

    def __post_init__(self):
        if not self.functions:
            raise ValueError("at least one function is required")
        box = self.functions[0].box
        for f in self.functions[1:]:
            if f.box != box:
                raise ValueError("all functions must share one grid")
        if self.weight is not None:
            if self.weight.box != box:
                raise ValueError("weight must share the functions' grid")
            if len(self.functions) != 1:
                raise ValueError("weighted maps are defined for one function")
            if np.any(self.weight.values <= 0):
                raise ValueError("weight must be strictly positive on every cell")
        if self.algorithm not in ("brute", "sweep", "auto"):
            raise ValueError(f"unknown algorithm '{self.algorithm}'")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")

    @property
    def box(self) -> Box:
        return self.functions[0].box

    def run(self) -> GridFunction:
        return _run(self)


def maximal_map(
    f: GridFunction,
    spec: BasisSpec,
    *,
    algorithm: str = "auto",
    budget: BasisBudget | None = None,
    threads: int = 1,
) -> GridFunction:
    """Pointwise sup of rectangle averages of ``f`` over the basis members."""
    req = MaximalRequest([f], spec, algorithm=algorithm,
                         budget=budget or BasisBudget(), threads=threads)
    return req.run()


def weighted_maximal_map(
    f: GridFunction,
    w: GridFunction,
    spec: BasisSpec,
    *,
    algorithm: str = "auto",
    budget: BasisBudget | None = None,
    threads: int = 1,
) -> GridFunction:
    """Pointwise sup of w-averages (sum f*w / sum w) over basis members."""
    req = MaximalRequest([f], spec, weight=w, algorithm=algorithm,
                         budget=budget or BasisBudget(), threads=threads)
    return req.run()


def multilinear_maximal_map(
    fs: Sequence[GridFunction],
    spec: BasisSpec,
    *,
    algorithm: str = "auto",
    budget: BasisBudget | None = None,
    threads: int = 1,
) -> GridFunction:
    """Pointwise sup over members of the product of the slot averages."""
    if len(fs) < 2:
        raise ValueError("multilinear map needs at least two functions")
    req = MaximalRequest(list(fs), spec, algorithm=algorithm,
                         budget=budget or BasisBudget(), threads=threads)
    return req.run()


# ---------------------------------------------------------------------------
# Candidate values
# ---------------------------------------------------------------------------

def _gather_orthant_sums(table: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """Rectangle sums for rows of (lo, hi) via corner inclusion-exclusion.

    Corner visit order matches the scalar routine in ``grid`` so results are
    bitwise identical to per-rectangle queries.
    """
    n = lo.shape[1]
    total = np.zeros(lo.shape[0], dtype=np.longdouble)
    for corner in range(1 << n):
        idx = tuple(
            lo[:, i] if (corner >> i) & 1 else hi[:, i] for i in range(n)
        )
        if bin(corner).count("1") % 2:
            total -= table[idx]
        else:
            total += table[idx]
    return total


def candidate_values(
    functions: Sequence[GridFunction],
    lo: np.ndarray,
    hi: np.ndarray,
    weight: GridFunction | None = None,
) -> np.ndarray:
    """Per-rectangle candidate values: product of averages, or w-averages."""
    if weight is not None:
        tw = prefix_sums(weight)
        fw = GridFunction(weight.box, functions[0].values * weight.values)
        tfw = prefix_sums(fw)
        num = _gather_orthant_sums(tfw.table, lo, hi)
        den = _gather_orthant_sums(tw.table, lo, hi)
        return (num / den).astype(np.float64)
    ncells = np.ones(lo.shape[0], dtype=np.longdouble)
    for i in range(lo.shape[1]):
        ncells *= (hi[:, i] - lo[:, i]).astype(np.longdouble)
    values: np.ndarray | None = None
    for f in functions:
        t = prefix_sums(f)
        avg = (_gather_orthant_sums(t.table, lo, hi) / ncells).astype(np.float64)
        values = avg if values is None else values * avg
    assert values is not None
    return values


# ---------------------------------------------------------------------------
# Engines: per-cell max over covering rectangles
# ---------------------------------------------------------------------------

def brute_engine(dims: Sequence[int], lo: np.ndarray, hi: np.ndarray,
                 values: np.ndarray) -> np.ndarray:
    """Reference engine: scan every rectangle's cells with a running max."""
    out = np.zeros(tuple(dims), dtype=np.float64)
    for k in range(lo.shape[0]):
        sl = tuple(slice(lo[k, i], hi[k, i]) for i in range(lo.shape[1]))
        np.maximum(out[sl], values[k], out=out[sl])
    return out


def _suffix_max(a: np.ndarray, axis: int) -> np.ndarray:
    return np.flip(np.maximum.accumulate(np.flip(a, axis), axis=axis), axis)


def _stab_1d(d: int, lo: np.ndarray, hi: np.ndarray, values: np.ndarray) -> np.ndarray:
    """Per-cell max over covering intervals on one axis; -inf where uncovered."""
    W = np.full((d + 1, d + 1), -np.inf)
    np.maximum.at(W, (lo, hi), values)
    T = np.maximum.accumulate(W, axis=0)          # max over interval starts <= row
    S = _suffix_max(T, axis=1)                    # max over interval ends > col
    cells = np.arange(d)
    return S[cells, cells + 1]


def _stab_2d(d1: int, d2: int, lo1, hi1, lo2, hi2, values) -> np.ndarray:
    """Per-cell max over covering boxes on two axes; -inf where uncovered."""
    W = np.full((d1 + 1, d1 + 1, d2 + 1, d2 + 1), -np.inf)
    np.maximum.at(W, (lo1, hi1, lo2, hi2), values)
    W = np.maximum.accumulate(W, axis=0)
    W = _suffix_max(W, axis=1)
    W = np.maximum.accumulate(W, axis=2)
    W = _suffix_max(W, axis=3)
    c1 = np.arange(d1)
    c2 = np.arange(d2)
    return W[c1[:, None], c1[:, None] + 1, c2[None, :], c2[None, :] + 1]


_STAB_2D_CELL_LIMIT = 8 * 10**6  # tensor entries before falling back to painting


def _paint_sorted(shape: tuple[int, ...], lo, hi, values) -> np.ndarray:
    # painting in ascending value order leaves the max at every covered cell
    out = np.full(shape, -np.inf)
    order = np.argsort(values, kind="stable")
    for k in order:
        sl = tuple(slice(lo[k, i], hi[k, i]) for i in range(lo.shape[1]))
        out[sl] = values[k]
    return out


def sweep_engine(dims: Sequence[int], lo: np.ndarray, hi: np.ndarray,
                 values: np.ndarray) -> np.ndarray:
    """Offline range-assign-max without per-cell scanning.

    Rectangles are grouped by their first-axis interval; each group is an
    interval-stabbing problem on the remaining axes, solved by scattered
    running maxima over interval endpoints.
    """
    dims = tuple(int(d) for d in dims)
    n = len(dims)
    out = np.zeros(dims, dtype=np.float64)
    if lo.shape[0] == 0:
        return out
    if n == 1:
        line = _stab_1d(dims[0], lo[:, 0], hi[:, 0], values)
        return np.maximum(out, np.where(np.isneginf(line), 0.0, line))
    key = lo[:, 0] * np.int64(dims[0] + 1) + hi[:, 0]
    order = np.argsort(key, kind="stable")
    lo_s, hi_s, val_s = lo[order], hi[order], values[order]
    key_s = key[order]
    boundaries = np.flatnonzero(np.diff(key_s)) + 1
    starts = np.concatenate([[0], boundaries])
    ends = np.concatenate([boundaries, [key_s.size]])
    for a, b in zip(starts, ends):
        x0, x1 = int(lo_s[a, 0]), int(hi_s[a, 0])
        glo, ghi, gval = lo_s[a:b], hi_s[a:b], val_s[a:b]
        if n == 2:
            field = _stab_1d(dims[1], glo[:, 1], ghi[:, 1], gval)
        elif n == 3:
            tensor_cells = (dims[1] + 1) ** 2 * (dims[2] + 1) ** 2
            if tensor_cells <= _STAB_2D_CELL_LIMIT:
                field = _stab_2d(dims[1], dims[2], glo[:, 1], ghi[:, 1],
                                 glo[:, 2], ghi[:, 2], gval)
            else:
                field = _paint_sorted(dims[1:], glo[:, 1:], ghi[:, 1:], gval)
        else:
            field = _paint_sorted(dims[1:], glo[:, 1:], ghi[:, 1:], gval)
        field = np.where(np.isneginf(field), 0.0, field)
        np.maximum(out[x0:x1], field[None, ...], out=out[x0:x1])
    return out


# ---------------------------------------------------------------------------
# Marginal fast path: one function, all rectangles, 2D
# ---------------------------------------------------------------------------

def _marginal_chunk(values: np.ndarray, pairs: list[tuple[int, int]]) -> np.ndarray:
    d0, d1 = values.shape
    out = np.zeros((d0, d1), dtype=np.float64)
    col_prefix = np.zeros((d0, d1 + 1), dtype=np.float64)
    np.cumsum(values, axis=1, out=col_prefix[:, 1:])
    # inv_len[a, b] = 1/(b-a) for b > a; zero entries never reach the output
    ar = np.arange(d0 + 1, dtype=np.float64)
    span = ar[None, :] - ar[:, None]
    with np.errstate(divide="ignore"):
        inv_len = np.where(span > 0, 1.0 / np.where(span > 0, span, 1.0), 0.0)
    p = np.empty(d0 + 1, dtype=np.float64)
    p[0] = 0.0
    cells = np.arange(d0)
    for c, d in pairs:
        marg = (col_prefix[:, d] - col_prefix[:, c]) / (d - c)
        np.cumsum(marg, out=p[1:])
        D = (p[None, :] - p[:, None]) * inv_len
        T = np.maximum.accumulate(D, axis=0)
        S = _suffix_max(T, axis=1)
        line = S[cells, cells + 1]
        np.maximum(out[:, c:d], line[:, None], out=out[:, c:d])
    return out


def _marginal_map_2d(f: GridFunction, threads: int) -> np.ndarray:
    """Full strong maximal map of one function over all rectangles in 2D.

    For each second-axis interval J the problem reduces to the 1D maximal
    map of the x-marginal avg_{v in J} f(., v); each 1D map is solved with
    cumulative maxima over interval endpoints.
    """
    d0, d1 = f.box.dims
    pairs = [(c, d) for c in range(d1) for d in range(c + 1, d1 + 1)]
    if threads <= 1 or len(pairs) < 64:
        return _marginal_chunk(f.values, pairs)
    chunks = np.array_split(np.arange(len(pairs)), threads)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        futures = [
            pool.submit(_marginal_chunk, f.values, [pairs[i] for i in idx])
            for idx in chunks if idx.size
        ]
        parts = [fut.result() for fut in futures]
    out = parts[0]
    for p in parts[1:]:
        np.maximum(out, p, out=out)
    return out


# ---------------------------------------------------------------------------
# Dispatch
# ---------------------------------------------------------------------------

def _engine_run(engine, dims, lo, hi, values, threads: int) -> np.ndarray:
    if threads <= 1 or lo.shape[0] < 1024:
        return engine(dims, lo, hi, values)
    chunks = np.array_split(np.arange(lo.shape[0]), threads)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        futures = [
            pool.submit(engine, dims, lo[idx], hi[idx], values[idx])
            for idx in chunks if idx.size
        ]
        parts = [fut.result() for fut in futures]
    out = parts[0]
    for p in parts[1:]:
        np.maximum(out, p, out=out)
    return out


def _run(req: MaximalRequest) -> GridFunction:
    dims = req.spec.check_dims(req.box.dims)
    if req.algorithm == "auto":
        visits = basis_visit_count(req.spec, dims)
        if (
            len(req.functions) == 1
            and req.weight is None
            and req.spec.kind == "rectangles"
            and len(dims) == 2
            and visits >= BRUTE_VISIT_LIMIT
        ):
            return GridFunction(req.box, _marginal_map_2d(req.functions[0], req.threads))
        algorithm = "brute" if visits < BRUTE_VISIT_LIMIT else "sweep"
    else:
        algorithm = req.algorithm
    lo, hi = basis_rect_arrays(req.spec, dims, req.budget)
    values = candidate_values(req.functions, lo, hi, weight=req.weight)
    engine = brute_engine if algorithm == "brute" else sweep_engine
    out = _engine_run(engine, dims, lo, hi, values, req.threads)
    return GridFunction(req.box, out)
