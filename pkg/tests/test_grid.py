import numpy as np
import pytest

from maxrect.grid import (
    Box,
    CellSet,
    GridFunction,
    build_grid,
    grid_from_array,
    gridfunction_from_dict,
    gridfunction_to_dict,
    prefix_sums,
    preset_gridfunction,
    rect_average,
    rect_sum,
    set_mass,
    superlevel_measure,
)


def unit_box(*dims):
    return Box((0.0,) * len(dims), (1.0,) * len(dims), dims)


class TestBox:
    def test_invalid_bounds(self):
        with pytest.raises(ValueError):
            Box((0.0,), (0.0,), (4,))
        with pytest.raises(ValueError):
            Box((0.0,), (1.0,), (0,))

    def test_cell_geometry(self):
        box = Box((0.0, -1.0), (2.0, 1.0), (4, 8))
        assert box.cell_widths == (0.5, 0.25)
        assert box.cell_volume == pytest.approx(0.125)
        assert box.volume == pytest.approx(4.0)


class TestBuildGrid:
    def test_constant_sampler(self):
        g = build_grid(unit_box(4, 4), lambda x: 1.0)
        assert np.all(g.values == 1.0)
        assert g.total_mass() == pytest.approx(1.0)

    def test_aligned_indicator(self):
        box = Box((0.0, 0.0), (4.0, 4.0), (64, 64))
        g = build_grid(box, lambda x: 1.0 if (x[0] <= 1 and x[1] <= 1) else 0.0)
        assert g.values[:16, :16].sum() == 256
        assert g.values.sum() == 256

    def test_sqrt_profile_mass(self):
        # midpoint oracle: values at centers (2k+1)/16, mass approximates 2/3
        box = Box((0.0,), (1.0,), (8,))
        g = build_grid(box, lambda x: abs(x[0]) ** 0.5)
        centers = (2 * np.arange(8) + 1) / 16.0
        assert np.allclose(g.values, np.sqrt(centers))
        assert abs(g.total_mass() - 2.0 / 3.0) <= 0.02 * (2.0 / 3.0)

    def test_rejects_bad_samples(self):
        with pytest.raises(ValueError, match="cell"):
            build_grid(unit_box(2, 2), lambda x: -1.0)
        with pytest.raises(ValueError, match="cell"):
            build_grid(unit_box(2), lambda x: float("nan"))

    def test_rejects_negative_values(self):
        with pytest.raises(ValueError):
            grid_from_array(unit_box(2), np.array([1.0, -0.5]))


class TestPrefixSums:
    def test_all_ones_2x2_corners(self):
        t = prefix_sums(grid_from_array(unit_box(2, 2), np.ones((2, 2))))
        assert t.table[1, 1] == 1
        assert t.table[1, 2] == 2
        assert t.table[2, 1] == 2
        assert t.table[2, 2] == 4

    def test_single_cell_orthants(self):
        vals = np.zeros((3, 3))
        vals[0, 0] = 7.0
        t = prefix_sums(grid_from_array(unit_box(3, 3), vals))
        assert np.all(t.table[1:, 1:] == 7.0)

    def test_exhaustive_8x8_sums(self):
        rng = np.random.default_rng(42)
        g = grid_from_array(unit_box(8, 8), rng.random((8, 8)))
        t = prefix_sums(g)
        for x0 in range(8):
            for x1 in range(x0 + 1, 9):
                for y0 in range(8):
                    for y1 in range(y0 + 1, 9):
                        direct = float(g.values[x0:x1, y0:y1].sum())
                        got = rect_sum(t, (x0, y0), (x1, y1))
                        assert abs(got - direct) <= 1e-12 * max(1.0, direct)

    @pytest.mark.parametrize("dims", [(32,), (32, 32), (16, 16, 16)])
    def test_random_rect_sums_match_direct(self, dims):
        rng = np.random.default_rng(7)
        g = grid_from_array(unit_box(*dims), rng.random(dims))
        t = prefix_sums(g)
        for _ in range(1000):
            lo = [int(rng.integers(0, d)) for d in dims]
            hi = [int(rng.integers(lo[i] + 1, dims[i] + 1)) for i in range(len(dims))]
            sl = tuple(slice(lo[i], hi[i]) for i in range(len(dims)))
            direct = float(g.values[sl].sum())
            got = rect_sum(t, lo, hi)
            assert abs(got - direct) <= 1e-12 * max(1.0, abs(direct))


class TestRectAverage:
    def test_constant(self):
        g = grid_from_array(unit_box(5, 3), np.full((5, 3), 2.5))
        t = prefix_sums(g)
        assert rect_average(t, (1, 0), (4, 2)) == pytest.approx(2.5)

    def test_aligned_indicator_quarter(self):
        box = Box((0.0, 0.0), (2.0, 2.0), (8, 8))
        vals = np.zeros((8, 8))
        vals[:4, :4] = 1.0
        t = prefix_sums(grid_from_array(box, vals))
        assert rect_average(t, (0, 0), (8, 8)) == 0.25

    def test_all_rects_match_direct_mean(self):
        rng = np.random.default_rng(3)
        g = grid_from_array(unit_box(8, 8), rng.random((8, 8)))
        t = prefix_sums(g)
        for x0 in range(8):
            for x1 in range(x0 + 1, 9):
                for y0 in range(8):
                    for y1 in range(y0 + 1, 9):
                        direct = float(g.values[x0:x1, y0:y1].mean())
                        got = rect_average(t, (x0, y0), (x1, y1))
                        assert got == pytest.approx(direct, rel=1e-12)

    def test_out_of_range_raises(self):
        t = prefix_sums(grid_from_array(unit_box(4, 4), np.ones((4, 4))))
        with pytest.raises(IndexError):
            rect_average(t, (0, 0), (5, 1))
        with pytest.raises(IndexError):
            rect_average(t, (2, 2), (2, 3))


class TestSuperlevel:
    def test_constant_levels(self):
        g = grid_from_array(unit_box(4, 4), np.ones((4, 4)))
        assert superlevel_measure(g, 2.0) == 0.0
        assert superlevel_measure(g, 0.5) == pytest.approx(1.0)
        # strict inequality at the attained value
        assert superlevel_measure(g, 1.0) == 0.0

    def test_nonincreasing_and_piecewise_constant(self):
        rng = np.random.default_rng(11)
        g = grid_from_array(unit_box(6, 6), rng.random((6, 6)))
        lams = np.linspace(0, 1.2, 50)
        vals = [superlevel_measure(g, l) for l in lams]
        assert all(a >= b for a, b in zip(vals, vals[1:]))
        # jumps only at attained values
        attained = set(np.round(g.values.reshape(-1), 12))
        for a, b, la, lb in zip(vals, vals[1:], lams, lams[1:]):
            if a != b:
                assert any(la <= v < lb or abs(v - la) < 1e-9 for v in attained)


class TestSetMass:
    def test_lebesgue_reduction(self):
        box = unit_box(4, 4)
        w = grid_from_array(box, np.ones((4, 4)))
        E = CellSet.from_slices(box, [(slice(0, 2), slice(0, 3))])
        assert set_mass(w, E) == pytest.approx(E.measure())

    def test_empty_set(self):
        box = unit_box(4, 4)
        w = grid_from_array(box, np.ones((4, 4)))
        assert set_mass(w, CellSet.empty(box)) == 0.0

    def test_matches_rect_sum(self):
        rng = np.random.default_rng(5)
        box = unit_box(8, 8)
        w = grid_from_array(box, rng.random((8, 8)))
        t = prefix_sums(w)
        E = CellSet.from_slices(box, [(slice(2, 7), slice(1, 4))])
        expected = rect_sum(t, (2, 1), (7, 4)) * box.cell_volume
        assert set_mass(w, E) == pytest.approx(expected, rel=1e-12)

    def test_additive_over_disjoint_sets(self):
        rng = np.random.default_rng(9)
        box = unit_box(8, 8)
        w = grid_from_array(box, rng.random((8, 8)))
        A = CellSet.from_slices(box, [(slice(0, 3), slice(0, 8))])
        B = CellSet.from_slices(box, [(slice(3, 8), slice(0, 8))])
        assert A.intersect(B).is_empty()
        assert set_mass(w, A.union(B)) == pytest.approx(
            set_mass(w, A) + set_mass(w, B), rel=1e-12
        )

    def test_mismatched_grids_raise(self):
        w = grid_from_array(unit_box(4, 4), np.ones((4, 4)))
        E = CellSet.empty(unit_box(5, 5))
        with pytest.raises(ValueError):
            set_mass(w, E)


class TestSerialization:
    def test_round_trip(self):
        rng = np.random.default_rng(1)
        g = grid_from_array(Box((0, -1), (2, 3), (3, 5)), rng.random((3, 5)))
        doc = gridfunction_to_dict(g)
        back = gridfunction_from_dict(doc)
        assert back.box == g.box
        assert np.array_equal(back.values, g.values)

    def test_missing_field(self):
        with pytest.raises(ValueError, match="values"):
            gridfunction_from_dict({"lower": [0], "upper": [1], "dims": [2]})

    def test_presets(self):
        box = Box((0.0, 0.0), (4.0, 4.0), (16, 16))
        ind = preset_gridfunction("indicator_box", box)
        assert ind.values.sum() == 16  # 4x4 cells cover [0,1]^2
        scaled = preset_gridfunction("scaled_indicator|3", box)
        assert np.array_equal(scaled.values, 3.0 * ind.values)
        const = preset_gridfunction("constant|2.5", box)
        assert np.all(const.values == 2.5)
        power = preset_gridfunction("power|0.5", Box((0.0,), (1.0,), (8,)))
        centers = (2 * np.arange(8) + 1) / 16.0
        assert np.allclose(power.values, np.sqrt(centers))

    def test_zero_function_is_legal(self):
        g = grid_from_array(unit_box(3, 3), np.zeros((3, 3)))
        assert g.total_mass() == 0.0
