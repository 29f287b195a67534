import numpy as np
import pytest

from maxrect.basis import BasisBudget, BasisSpec, BudgetExceededError, basis_rect_arrays, iter_basis
from maxrect.grid import Box, GridFunction, grid_from_array
from maxrect.maximal import (
    brute_engine,
    candidate_values,
    maximal_map,
    multilinear_maximal_map,
    sweep_engine,
    weighted_maximal_map,
    _marginal_map_2d,
)

RECTS = BasisSpec("rectangles")


def unit_box(*dims):
    return Box((0.0,) * len(dims), (1.0,) * len(dims), dims)


def percell_oracle(f: GridFunction, spec: BasisSpec, weight=None) -> np.ndarray:
    """Independent reference: per-cell scan of containing members with
    direct slice means (no summed tables)."""
    out = np.zeros(f.box.dims)
    for r in iter_basis(spec, f.box.dims):
        sl = r.slices()
        if weight is None:
            v = float(np.mean(f.values[sl]))
        else:
            v = float(np.sum(f.values[sl] * weight.values[sl]) / np.sum(weight.values[sl]))
        np.maximum(out[sl], v, out=out[sl])
    return out


class TestMaximalMap:
    def test_constant_function(self):
        g = grid_from_array(unit_box(6, 6), np.ones((6, 6)))
        out = maximal_map(g, RECTS, algorithm="brute")
        assert np.allclose(out.values, 1.0, rtol=1e-14)

    def test_indicator_far_cell_quarter(self):
        # unit square on [0,4]^2; at (2,2) the best rectangle is [0,2]^2
        box = Box((0.0, 0.0), (4.0, 4.0), (64, 64))
        vals = np.zeros((64, 64))
        vals[:16, :16] = 1.0
        g = grid_from_array(box, vals)
        out = maximal_map(g, RECTS, algorithm="sweep")
        cell = (31, 31)  # center near (2,2)
        x, y = box.cell_center(cell)
        analytic = 1.0 / (x * y)
        assert abs(out.values[cell] - analytic) <= 1.0 / 16.0

    def test_indicator_inside_square_is_one(self):
        box = Box((0.0, 0.0), (4.0, 4.0), (16, 16))
        vals = np.zeros((16, 16))
        vals[:4, :4] = 1.0
        g = grid_from_array(box, vals)
        out = maximal_map(g, RECTS, algorithm="brute")
        assert np.all(out.values[:4, :4] == 1.0)

    @pytest.mark.parametrize(
        "spec",
        [
            RECTS,
            BasisSpec("cubes"),
            BasisSpec("dyadic_cubes"),
            BasisSpec("eccentricity", N=2.0),
        ],
    )
    def test_matches_percell_oracle(self, spec):
        rng = np.random.default_rng(12)
        g = grid_from_array(unit_box(8, 8), rng.random((8, 8)))
        out = maximal_map(g, spec, algorithm="brute")
        oracle = percell_oracle(g, spec)
        assert np.allclose(out.values, oracle, rtol=1e-12, atol=1e-14)

    def test_budget_error_carries_count(self):
        g = grid_from_array(unit_box(8, 8), np.ones((8, 8)))
        with pytest.raises(BudgetExceededError) as err:
            maximal_map(g, RECTS, algorithm="brute", budget=BasisBudget(5))
        assert err.value.partial_count > 5


class TestWeightedMap:
    def test_unit_weight_reduces_to_plain(self):
        rng = np.random.default_rng(4)
        g = grid_from_array(unit_box(6, 6), rng.random((6, 6)))
        w = grid_from_array(g.box, np.ones((6, 6)))
        a = weighted_maximal_map(g, w, RECTS, algorithm="brute")
        b = maximal_map(g, RECTS, algorithm="brute")
        assert np.allclose(a.values, b.values, rtol=1e-12)

    def test_constant_function_any_weight(self):
        rng = np.random.default_rng(5)
        w = grid_from_array(unit_box(6, 6), 0.1 + rng.random((6, 6)))
        g = grid_from_array(w.box, np.full((6, 6), 3.0))
        out = weighted_maximal_map(g, w, RECTS, algorithm="brute")
        assert np.allclose(out.values, 3.0, rtol=1e-12)

    def test_random_against_oracle(self):
        rng = np.random.default_rng(6)
        g = grid_from_array(unit_box(8, 8), rng.random((8, 8)))
        w = grid_from_array(g.box, 0.1 + rng.random((8, 8)))
        out = weighted_maximal_map(g, w, RECTS, algorithm="brute")
        oracle = percell_oracle(g, RECTS, weight=w)
        assert np.allclose(out.values, oracle, rtol=1e-12, atol=1e-14)

    def test_nonpositive_weight_rejected(self):
        g = grid_from_array(unit_box(4, 4), np.ones((4, 4)))
        w_vals = np.ones((4, 4))
        w_vals[0, 0] = 0.0
        with pytest.raises(ValueError):
            weighted_maximal_map(g, grid_from_array(g.box, w_vals), RECTS)


class TestMultilinear:
    def test_equal_slots_power_identity_bitwise(self):
        rng = np.random.default_rng(7)
        g = grid_from_array(unit_box(10, 10), rng.random((10, 10)))
        m1 = maximal_map(g, RECTS, algorithm="sweep")
        m2 = multilinear_maximal_map([g, g], RECTS, algorithm="sweep")
        m3 = multilinear_maximal_map([g, g, g], RECTS, algorithm="sweep")
        assert np.array_equal(m2.values, m1.values * m1.values)
        assert np.array_equal(m3.values, (m1.values * m1.values) * m1.values)

    def test_scalar_slot_homogeneity(self):
        box = Box((0.0, 0.0), (4.0, 4.0), (12, 12))
        vals = np.zeros((12, 12))
        vals[:3, :3] = 1.0
        chi = grid_from_array(box, vals)
        chi_n = grid_from_array(box, 8.0 * vals)
        m1 = maximal_map(chi, RECTS, algorithm="sweep")
        out = multilinear_maximal_map([chi, chi_n], RECTS, algorithm="sweep")
        assert np.allclose(out.values, 8.0 * m1.values ** 2, rtol=1e-12)

    def test_sweep_equals_brute_bitwise_2d(self):
        rng = np.random.default_rng(8)
        for _ in range(10):
            f1 = grid_from_array(unit_box(12, 12), rng.random((12, 12)))
            f2 = grid_from_array(f1.box, rng.random((12, 12)))
            a = multilinear_maximal_map([f1, f2], RECTS, algorithm="sweep")
            b = multilinear_maximal_map([f1, f2], RECTS, algorithm="brute")
            assert np.array_equal(a.values, b.values)

    def test_sweep_equals_brute_bitwise_3d(self):
        rng = np.random.default_rng(9)
        for _ in range(5):
            fs = [
                grid_from_array(unit_box(8, 8, 1), rng.random((8, 8, 1)))
                for _ in range(3)
            ]
            a = multilinear_maximal_map(fs, RECTS, algorithm="sweep")
            b = multilinear_maximal_map(fs, RECTS, algorithm="brute")
            assert np.array_equal(a.values, b.values)


class TestInvariants:
    def test_tensor_domination_exact(self):
        rng = np.random.default_rng(10)
        f1 = grid_from_array(unit_box(9, 9), rng.random((9, 9)))
        f2 = grid_from_array(f1.box, rng.random((9, 9)))
        multi = multilinear_maximal_map([f1, f2], RECTS, algorithm="sweep")
        tensor = (
            maximal_map(f1, RECTS, algorithm="sweep").values
            * maximal_map(f2, RECTS, algorithm="sweep").values
        )
        assert np.all(multi.values <= tensor)

    def test_monotone_in_function(self):
        rng = np.random.default_rng(11)
        f = rng.random((8, 8))
        g = f + rng.random((8, 8))
        mf = maximal_map(grid_from_array(unit_box(8, 8), f), RECTS, algorithm="brute")
        mg = maximal_map(grid_from_array(unit_box(8, 8), g), RECTS, algorithm="brute")
        assert np.all(mf.values <= mg.values)

    def test_homogeneity_exact(self):
        rng = np.random.default_rng(12)
        g = grid_from_array(unit_box(8, 8), rng.random((8, 8)))
        m = maximal_map(g, RECTS, algorithm="sweep")
        m4 = maximal_map(g.scaled(4.0), RECTS, algorithm="sweep")
        assert np.array_equal(m4.values, 4.0 * m.values)

    def test_basis_monotonicity(self):
        rng = np.random.default_rng(13)
        g = grid_from_array(unit_box(8, 8), rng.random((8, 8)))
        md = maximal_map(g, BasisSpec("dyadic_cubes"), algorithm="brute").values
        mq = maximal_map(g, BasisSpec("cubes"), algorithm="brute").values
        mr = maximal_map(g, RECTS, algorithm="brute").values
        assert np.all(md <= mq) and np.all(mq <= mr)

    @pytest.mark.parametrize(
        "spec",
        [RECTS, BasisSpec("cubes"), BasisSpec("dyadic_cubes")],
    )
    def test_function_below_map_on_covered_cells(self, spec):
        rng = np.random.default_rng(14)
        g = grid_from_array(unit_box(8, 8), rng.random((8, 8)))
        out = maximal_map(g, spec, algorithm="brute")
        assert np.all(g.values <= out.values)

    def test_sweep_brute_equivalence_many_seeds(self):
        for seed in range(50):
            rng = np.random.default_rng(seed)
            g = grid_from_array(unit_box(16, 16), rng.random((16, 16)))
            a = maximal_map(g, RECTS, algorithm="sweep")
            b = maximal_map(g, RECTS, algorithm="brute")
            assert np.array_equal(a.values, b.values)


class TestSweepEngine:
    def test_single_rect(self):
        lo = np.array([[1, 1]])
        hi = np.array([[3, 4]])
        out = sweep_engine((5, 5), lo, hi, np.array([2.5]))
        expected = np.zeros((5, 5))
        expected[1:3, 1:4] = 2.5
        assert np.array_equal(out, expected)

    def test_nested_rects(self):
        lo = np.array([[0, 0], [1, 1]])
        hi = np.array([[4, 4], [3, 3]])
        out = sweep_engine((4, 4), lo, hi, np.array([1.0, 2.0]))
        assert out[0, 0] == 1.0
        assert out[1, 1] == 2.0
        assert out[2, 3] == 1.0

    def test_random_rects_vs_brute(self):
        rng = np.random.default_rng(15)
        M = 10_000
        lo = np.stack(
            [rng.integers(0, 64, M), rng.integers(0, 64, M)], axis=1
        ).astype(np.int64)
        hi = np.stack(
            [
                np.array([rng.integers(l + 1, 65) for l in lo[:, 0]]),
                np.array([rng.integers(l + 1, 65) for l in lo[:, 1]]),
            ],
            axis=1,
        ).astype(np.int64)
        v = rng.random(M)
        a = sweep_engine((64, 64), lo, hi, v)
        b = brute_engine((64, 64), lo, hi, v)
        assert np.array_equal(a, b)


class TestMarginalPath:
    def test_matches_brute(self):
        rng = np.random.default_rng(16)
        g = grid_from_array(unit_box(20, 14), rng.random((20, 14)))
        lo, hi = basis_rect_arrays(RECTS, (20, 14))
        vals = candidate_values([g], lo, hi)
        b = brute_engine((20, 14), lo, hi, vals)
        m = _marginal_map_2d(g, 1)
        assert np.allclose(b, m, rtol=1e-12, atol=1e-14)

    def test_thread_count_does_not_change_bytes(self):
        rng = np.random.default_rng(17)
        g = grid_from_array(unit_box(48, 48), rng.random((48, 48)))
        outs = [maximal_map(g, RECTS, threads=k).values for k in (1, 2, 5)]
        assert np.array_equal(outs[0], outs[1])
        assert outs[0].tobytes() == outs[2].tobytes()
