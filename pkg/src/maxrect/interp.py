"""Constant calculators for bilinear interpolation between distributional
estimates.

``l1xlp_bound`` assembles the level-set bound for a bisublinear operator
from two hypothesis constants: B1 for the product-of-integrals estimate
and B2 for the bounded-second-slot estimate.  The second slot is split at
a threshold chosen so both halves of the bound balance, and every step of
the chain uses explicit constants (argument doubling costs a factor
2^(n-1) Phi_n(sqrt 2) through submultiplicativity), so the returned bound
rigorously dominates whenever the hypotheses hold for the split pairs.

``strong_type_constant`` evaluates the four-piece decomposition of the
strong-type norm integral: an endpoint piece by quadrature and three
closed-form pieces whose exponents pin the admissible parameter region
s1/2 < p < s < s2/2, p > 1/2.  Outside the region the failing integral is
named in a divergence error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .grid import GridFunction, integral
from .orlicz import YoungSpec, young_eval, young_inverse

__all__ = [
    "DivergenceError",
    "InterpConstants",
    "l1xlp_bound",
    "strong_type_constant",
    "adaptive_simpson",
    "endpoint_weight_integral",
]


class DivergenceError(ValueError):
    """A constant integral diverges; ``integral`` names the failing piece."""

    def __init__(self, integral_name: str, reason: str):
        super().__init__(f"{integral_name} diverges: {reason}")
        self.integral = integral_name


@dataclass(frozen=True)
class InterpConstants:
    """Inputs of the strong-type assembly.

    B1, B2 are the two weak-type norms at the symmetric exponent pairs,
    B the diagonal weak-type norm, A the endpoint distributional constant.
    s is derived from 1/s = 1/s1 + 1/s2 when omitted.
    """

    B1: float
    B2: float
    B: float
    A: float
    s1: float
    s2: float
    p: float
    s: float | None = None

    def __post_init__(self):
        for name in ("B1", "B2", "B", "A"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")
        if not 1.0 < self.s1 < self.s2:
            raise ValueError("need 1 < s1 < s2")
        harmonic = 1.0 / (1.0 / self.s1 + 1.0 / self.s2)
        if self.s is None:
            object.__setattr__(self, "s", harmonic)
        elif abs(self.s - harmonic) > 1e-9 * harmonic:
            raise ValueError("s must satisfy 1/s = 1/s1 + 1/s2")

    def check_region(self) -> None:
        """Raise DivergenceError when p leaves the open convergence region."""
        if self.p <= 0.5:
            raise DivergenceError("I-integral", f"p = {self.p} <= 1/2")
        if self.p <= self.s1 / 2:
            raise DivergenceError(
                "II/III first factor", f"p = {self.p} <= s1/2 = {self.s1 / 2}"
            )
        if self.p >= self.s2 / 2:
            raise DivergenceError(
                "II/III second factor", f"p = {self.p} >= s2/2 = {self.s2 / 2}"
            )
        if self.p >= self.s:
            raise DivergenceError("IV-integral", f"p = {self.p} >= s = {self.s}")


def adaptive_simpson(f, a: float, b: float, tol: float = 1e-10,
                     max_depth: int = 40) -> float:
    """Adaptive Simpson quadrature with absolute tolerance."""

    def simpson(x0, x2, f0, f1, f2):
        return (x2 - x0) / 6.0 * (f0 + 4.0 * f1 + f2)

    def recurse(x0, x2, f0, f1, f2, whole, eps, depth):
        x1 = 0.5 * (x0 + x2)
        lm, rm = 0.5 * (x0 + x1), 0.5 * (x1 + x2)
        flm, frm = f(lm), f(rm)
        left = simpson(x0, x1, f0, flm, f1)
        right = simpson(x1, x2, f1, frm, f2)
        if depth >= max_depth or abs(left + right - whole) <= 15.0 * eps:
            return left + right + (left + right - whole) / 15.0
        return (
            recurse(x0, x1, f0, flm, f1, left, eps / 2.0, depth + 1)
            + recurse(x1, x2, f1, frm, f2, right, eps / 2.0, depth + 1)
        )

    fa, fb = f(a), f(b)
    mid = 0.5 * (a + b)
    fm = f(mid)
    whole = simpson(a, b, fa, fm, fb)
    return recurse(a, b, fa, fm, fb, whole, tol, 0)


def endpoint_weight_integral(young: YoungSpec, p: float, tol: float = 1e-10) -> float:
    """int_0^1 lam^(2p-1) Phi(1/lam) d lam for p > 1/2.

    The substitution u = 1/lam moves the singular end to infinity, where
    the integrand decays like u^(-2p) times logarithms; dyadic blocks are
    integrated adaptively until the tail is negligible.
    """
    if p <= 0.5:
        raise DivergenceError("I-integral", f"p = {p} <= 1/2")

    def g(u: float) -> float:
        return float(young_eval(young, u)) * u ** (-2.0 * p - 1.0)

    total = 0.0
    a = 1.0
    for _ in range(200):
        b = 2.0 * a
        block = adaptive_simpson(g, a, b, tol=tol * 0.01)
        total += block
        a = b
        if abs(block) < tol * 0.001 * max(1.0, abs(total)):
            break
    return total


def strong_type_constant(c: InterpConstants, young: YoungSpec) -> dict:
    """Four-piece strong-type assembly at unit input norms.

    Returns the pieces I..IV and their sum.  This is an upper-bound recipe
    assembled from the level-set decomposition, not a sharp constant.
    """
    c.check_region()
    p, s, s1, s2 = c.p, float(c.s), c.s1, c.s2
    J = endpoint_weight_integral(young, p)
    piece_I = 2.0 * c.A * J
    f1 = 1.0 / (s1 * (p / s1 - 0.5))
    f2 = 1.0 / (s2 * (0.5 - p / s2))
    shape = f1 ** (s / s1) * f2 ** (s / s2)
    piece_II = c.B1 ** s * shape
    piece_III = c.B2 ** s * shape
    piece_IV = c.B ** s / (s - p)
    return {
        "I": piece_I,
        "II": piece_II,
        "III": piece_III,
        "IV": piece_IV,
        "total": piece_I + piece_II + piece_III + piece_IV,
    }


def _doubling_constant(n: int) -> float:
    # Phi_n(sqrt(2) t) <= 2^(n-1) Phi_n(sqrt 2) Phi_n(t) by submultiplicativity
    return 2.0 ** (n - 1) * float(young_eval(YoungSpec("phi", n=n), math.sqrt(2.0)))


def l1xlp_bound(
    f: GridFunction,
    g: GridFunction,
    alpha: float,
    B1: float,
    B2: float,
    p: float,
    n: int = 2,
) -> dict:
    """Level-set bound for a bisublinear operator at threshold alpha.

    Computes Nf = ||Phi_n(f/sqrt(alpha))||_1 and Ng = ||Phi_n(g/sqrt(alpha))||_p
    as plain Lebesgue norms of the composed functions, balances the split
    threshold via the inverse Young function, and returns the two split
    bounds and their sum.  The returned dict carries epsilon, the split
    bounds L1_bound, L2_bound, the final bound and the norms.
    """
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    if p <= 1:
        raise ValueError("p must exceed 1")
    if B1 <= 0 or B2 <= 0:
        raise ValueError("B1 and B2 must be positive")
    if f.box != g.box:
        raise ValueError("f and g must share one grid")
    if not np.any(g.values > 0):
        raise ValueError("g must not vanish identically")
    spec = YoungSpec("phi", n=n)
    root_alpha = math.sqrt(alpha)
    cellvol = f.box.cell_volume
    Nf = float(np.sum(young_eval(spec, f.values / root_alpha))) * cellvol
    Ng_p = float(np.sum(young_eval(spec, g.values / root_alpha) ** p)) * cellvol
    Ng = Ng_p ** (1.0 / p)
    if Nf == 0.0:
        return {
            "epsilon": 0.0,
            "phi_epsilon": 0.0,
            "bound": 0.0,
            "L1_bound": 0.0,
            "L2_bound": 0.0,
            "Nf": 0.0,
            "Ng": Ng,
        }
    phi_eps = (B1 * Ng_p / (B2 ** 2 * Nf)) ** (1.0 / (p + 1.0))
    eps = young_inverse(spec, phi_eps)
    D = _doubling_constant(n)
    L1 = math.sqrt(B1 * D ** (p + 1.0) * Nf * Ng_p * phi_eps ** (1.0 - p))
    L2 = B2 * D * Nf * phi_eps
    return {
        "epsilon": eps,
        "phi_epsilon": phi_eps,
        "bound": L1 + L2,
        "L1_bound": L1,
        "L2_bound": L2,
        "Nf": Nf,
        "Ng": Ng,
    }
