"""Weight-class constants over enumerated bases.

Every constant here is a maximum of a per-rectangle quantity over the
cell-aligned members of a basis family, hence a lower bound for the
continuous supremum.  Reports carry the attaining rectangle so divergence
under grid refinement can be inspected directly.

Strict positivity of weights is enforced on input; this removes the
0^(negative) ambiguity from the dual-power averages.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .basis import BasisBudget, BasisSpec, Rect, basis_rect_arrays
from .grid import CellSet, GridFunction, prefix_sums, set_mass, superlevel_set
from .maximal import _gather_orthant_sums, maximal_map

__all__ = [
    "ExponentVector",
    "WeightVector",
    "ConstantReport",
    "nu_of",
    "ap_constant",
    "multi_ap_constant",
    "bump_constant",
    "condition_a_probe",
]


@dataclass(frozen=True)
class ExponentVector:
    """Exponents (p_1, ..., p_m), each in (1, inf) or exactly 1."""

    ps: tuple[float, ...]

    def __post_init__(self):
        ps = tuple(float(p) for p in self.ps)
        object.__setattr__(self, "ps", ps)
        if not ps:
            raise ValueError("need at least one exponent")
        for p in ps:
            if not (p == 1.0 or p > 1.0):
                raise ValueError(f"exponent {p} outside [1, inf)")
            if not np.isfinite(p):
                raise ValueError("exponents must be finite")

    @property
    def m(self) -> int:
        return len(self.ps)

    @property
    def p(self) -> float:
        return 1.0 / sum(1.0 / q for q in self.ps)

    def conjugate(self, j: int) -> float:
        pj = self.ps[j]
        if pj == 1.0:
            raise ValueError("conjugate undefined for p_j = 1")
        return pj / (pj - 1.0)


@dataclass(frozen=True)
class WeightVector:
    """Strictly positive weights sharing one grid."""

    ws: tuple[GridFunction, ...]

    def __post_init__(self):
        ws = tuple(self.ws)
        object.__setattr__(self, "ws", ws)
        if not ws:
            raise ValueError("need at least one weight")
        box = ws[0].box
        for w in ws:
            if w.box != box:
                raise ValueError("weights must share one grid")
            if np.any(w.values <= 0):
                raise ValueError("weights must be strictly positive on every cell")

    @property
    def box(self):
        return self.ws[0].box

    @property
    def m(self) -> int:
        return len(self.ws)


@dataclass(frozen=True)
class ConstantReport:
    value: float
    attaining_rect: Rect | None
    sets_scanned: int


def nu_of(ws: WeightVector, P: ExponentVector) -> GridFunction:
    """Composite weight: cellwise product of w_j^(p/p_j)."""
    if ws.m != P.m:
        raise ValueError("weight and exponent vectors must have equal length")
    p = P.p
    out = np.ones(ws.box.dims, dtype=np.float64)
    for w, pj in zip(ws.ws, P.ps):
        out = out * w.values ** (p / pj)
    return GridFunction(ws.box, out)


def _rect_averages(values: np.ndarray, box, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    table = prefix_sums(GridFunction(box, values)).table
    ncells = np.ones(lo.shape[0], dtype=np.longdouble)
    for i in range(lo.shape[1]):
        ncells *= (hi[:, i] - lo[:, i]).astype(np.longdouble)
    return (_gather_orthant_sums(table, lo, hi) / ncells).astype(np.float64)


def _report_from_quantities(q: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> ConstantReport:
    k = int(np.argmax(q))
    rect = Rect(tuple(int(v) for v in lo[k]), tuple(int(v) for v in hi[k]))
    return ConstantReport(float(q[k]), rect, int(q.size))


def ap_constant(
    w: GridFunction,
    p: float,
    spec: BasisSpec,
    budget: BasisBudget | None = None,
) -> ConstantReport:
    """Muckenhoupt-type constant of one weight over the family.

    For p > 1 this is the max over members of (avg w)(avg w^(1-p'))^(p/p'),
    for p = 1 the max over cells of the maximal map of w divided by w.
    """
    if np.any(w.values <= 0):
        raise ValueError("weight must be strictly positive on every cell")
    if p < 1:
        raise ValueError("p must be >= 1")
    dims = spec.check_dims(w.box.dims)
    if p == 1.0:
        mw = maximal_map(w, spec, budget=budget)
        ratio = mw.values / w.values
        cell = np.unravel_index(int(np.argmax(ratio)), w.box.dims)
        rect = Rect(tuple(cell), tuple(c + 1 for c in cell))
        return ConstantReport(float(ratio.max()), rect, int(w.values.size))
    pprime = p / (p - 1.0)
    lo, hi = basis_rect_arrays(spec, dims, budget)
    avg_w = _rect_averages(w.values, w.box, lo, hi)
    avg_dual = _rect_averages(w.values ** (1.0 - pprime), w.box, lo, hi)
    q = avg_w * avg_dual ** (p / pprime)
    return _report_from_quantities(q, lo, hi)


def _slice_mins(values: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    out = np.empty(lo.shape[0], dtype=np.float64)
    for k in range(lo.shape[0]):
        sl = tuple(slice(lo[k, i], hi[k, i]) for i in range(lo.shape[1]))
        out[k] = values[sl].min()
    return out


def multi_ap_constant(
    ws: WeightVector,
    P: ExponentVector,
    spec: BasisSpec,
    nu_override: GridFunction | None = None,
    budget: BasisBudget | None = None,
) -> ConstantReport:
    """Multiple-weight constant: max over members of
    (avg nu) * prod_j (avg w_j^(1-p_j'))^(p/p_j').

    With ``nu_override`` the first average uses the supplied weight instead
    of the composite one.  For p_j = 1 the j-th factor is (min over the
    member of w_j)^(-p).
    """
    if ws.m != P.m:
        raise ValueError("weight and exponent vectors must have equal length")
    if nu_override is not None and nu_override.box != ws.box:
        raise ValueError("nu_override must share the weights' grid")
    nu = nu_override if nu_override is not None else nu_of(ws, P)
    dims = spec.check_dims(ws.box.dims)
    lo, hi = basis_rect_arrays(spec, dims, budget)
    p = P.p
    q = _rect_averages(nu.values, nu.box, lo, hi)
    for j, (w, pj) in enumerate(zip(ws.ws, P.ps)):
        if pj == 1.0:
            q = q * _slice_mins(w.values, lo, hi) ** (-p)
        else:
            pjp = P.conjugate(j)
            avg = _rect_averages(w.values ** (1.0 - pjp), w.box, lo, hi)
            q = q * avg ** (p / pjp)
    return _report_from_quantities(q, lo, hi)


def bump_constant(
    nu: GridFunction,
    ws: WeightVector,
    P: ExponentVector,
    r: float,
    spec: BasisSpec,
    budget: BasisBudget | None = None,
) -> ConstantReport:
    """Power-bump constant: the dual averages carry an extra power r > 1.

    max over members of (avg nu) * prod_j (avg w_j^((1-p_j') r))^(p/(p_j' r)).
    """
    if r <= 1:
        raise ValueError("bump exponent r must be > 1")
    if any(pj == 1.0 for pj in P.ps):
        raise ValueError("bump condition requires every p_j > 1")
    if ws.m != P.m:
        raise ValueError("weight and exponent vectors must have equal length")
    if nu.box != ws.box:
        raise ValueError("nu must share the weights' grid")
    dims = spec.check_dims(ws.box.dims)
    lo, hi = basis_rect_arrays(spec, dims, budget)
    p = P.p
    q = _rect_averages(nu.values, nu.box, lo, hi)
    for j, (w, pj) in enumerate(zip(ws.ws, P.ps)):
        pjp = P.conjugate(j)
        avg = _rect_averages(w.values ** ((1.0 - pjp) * r), w.box, lo, hi)
        q = q * avg ** (p / (pjp * r))
    return _report_from_quantities(q, lo, hi)


@dataclass(frozen=True)
class ConditionAReport:
    c_hat: float
    worst_set: CellSet | None
    trials: int
    skipped: int
    ratios: tuple[float, ...]


def condition_a_probe(
    w: GridFunction,
    spec: BasisSpec,
    lam: float,
    trials: int,
    seed: int = 0,
    max_rects: int = 3,
    algorithm: str = "auto",
) -> ConditionAReport:
    """Sample the covering-property ratio w({M chi_E > lam}) / w(E).

    E is drawn as a union of 1..max_rects random rectangles; the report
    carries the largest ratio seen and the set attaining it.
    """
    if not 0 < lam < 1:
        raise ValueError("lambda must lie in (0, 1)")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    dims = spec.check_dims(w.box.dims)
    ratios = []
    worst: CellSet | None = None
    c_hat = -np.inf
    skipped = 0
    for _ in range(trials):
        mask = np.zeros(dims, dtype=bool)
        for _ in range(int(rng.integers(1, max_rects + 1))):
            lo = [int(rng.integers(0, d)) for d in dims]
            hi = [int(rng.integers(lo[i] + 1, dims[i] + 1)) for i in range(len(dims))]
            mask[tuple(slice(lo[i], hi[i]) for i in range(len(dims)))] = True
        E = CellSet(w.box, mask)
        wE = set_mass(w, E)
        if wE <= 0:
            skipped += 1
            continue
        m_chi = maximal_map(E.indicator(), spec, algorithm=algorithm)
        wG = set_mass(w, superlevel_set(m_chi, lam))
        ratio = wG / wE
        ratios.append(ratio)
        if ratio > c_hat:
            c_hat = ratio
            worst = E
    return ConditionAReport(float(c_hat), worst, trials, skipped, tuple(ratios))
