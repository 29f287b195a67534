"""Numerical toolkit for strong and multilinear maximal functions on grids.

Everything is cell-constant: functions, weights and sets are stored per cell
of an axis-aligned box, rectangle averages are exact means of cell values,
and every measure is a cell count times the cell volume.  On top of that
sit basis enumerations (cubes, dyadic cubes, rectangles, eccentric and
s/t/st families), maximal-operator kernels, Orlicz/Luxemburg norms,
Muckenhoupt-type weight constants, covering selections and distributional
inequality experiments.
"""

from .grid import (
    Box,
    CellSet,
    GridFunction,
    SummedTable,
    build_grid,
    prefix_sums,
    rect_average,
    rect_sum,
    set_mass,
    superlevel_measure,
)
from .basis import (
    BasisBudget,
    BasisSpec,
    BudgetExceededError,
    Rect,
    basis_count,
    basis_rect_arrays,
    iter_basis,
    rects_containing,
)
from .maximal import (
    MaximalRequest,
    maximal_map,
    multilinear_maximal_map,
    sweep_engine,
    weighted_maximal_map,
)
from .orlicz import (
    NormResult,
    YoungSpec,
    holder_check,
    iterated_modular_check,
    luxemburg_norm,
    modular,
    young_eval,
    young_inverse,
)
from .weights import (
    ConstantReport,
    ExponentVector,
    WeightVector,
    ap_constant,
    bump_constant,
    condition_a_probe,
    multi_ap_constant,
    nu_of,
)
from .covering import (
    SelectionResult,
    select_alpha_scattered,
    select_exp_overlap,
    select_half_overlap,
)
from .interp import (
    DivergenceError,
    InterpConstants,
    l1xlp_bound,
    strong_type_constant,
)

__version__ = "0.1.0"
