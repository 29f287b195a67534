import numpy as np
import pytest

from maxrect.basis import (
    BasisBudget,
    BasisSpec,
    BudgetExceededError,
    Rect,
    basis_count,
    basis_rect_arrays,
    basis_visit_count,
    iter_basis,
    rects_containing,
)


class TestRect:
    def test_validation(self):
        with pytest.raises(ValueError):
            Rect((0, 0), (0, 1))
        r = Rect((1, 2), (3, 5))
        assert r.ncells == 6
        assert r.sides == (2, 3)
        assert r.contains((2, 4))
        assert not r.contains((3, 4))


class TestSpec:
    def test_kind_validation(self):
        with pytest.raises(ValueError):
            BasisSpec("squares")
        with pytest.raises(ValueError):
            BasisSpec("eccentricity")  # needs N
        with pytest.raises(ValueError):
            BasisSpec("eccentricity", N=1.0)
        with pytest.raises(ValueError):
            BasisSpec("cubes", N=2.0)

    def test_dimension_requirements(self):
        with pytest.raises(ValueError):
            BasisSpec("eccentricity", N=2.0).check_dims((4, 4, 4))
        with pytest.raises(ValueError):
            BasisSpec("zygmund_sts").check_dims((4, 4))


class TestEnumerate:
    def test_rectangle_count_closed_form(self):
        # product over axes of d(d+1)/2
        members = list(iter_basis(BasisSpec("rectangles"), (4, 4)))
        assert len(members) == 100
        assert len(set(members)) == 100
        assert basis_count(BasisSpec("rectangles"), (4, 4)) == 100

    def test_dyadic_count(self):
        members = list(iter_basis(BasisSpec("dyadic_cubes"), (4, 4)))
        assert len(members) == 16 + 4 + 1

    def test_dyadic_fixed_scale_tiles_grid(self):
        for side in (1, 2, 4):
            cover = np.zeros((4, 4), dtype=int)
            for r in iter_basis(BasisSpec("dyadic_cubes"), (4, 4)):
                if r.sides == (side, side):
                    cover[r.slices()] += 1
            assert np.all(cover == 1)

    def test_eccentricity_sides(self):
        spec = BasisSpec("eccentricity", N=2.0)
        members = list(iter_basis(spec, (8, 8)))
        shapes = {r.sides for r in members}
        assert shapes == {(1, 2), (2, 1), (2, 4), (4, 2), (3, 6), (6, 3), (4, 8), (8, 4)}
        # exhaustive cross-check of the per-shape position counts
        expected = sum(
            (8 - a + 1) * (8 - b + 1) for a, b in shapes
        )
        assert len(members) == expected == basis_count(spec, (8, 8))

    def test_zygmund_shapes(self):
        spec = BasisSpec("zygmund_sts")
        members = list(iter_basis(spec, (4, 4, 8)))
        assert all(r.sides[2] == r.sides[0] * r.sides[1] for r in members)
        assert {r.sides for r in members} == {
            (s, t, s * t) for s in range(1, 5) for t in range(1, 5) if s * t <= 8
        }

    def test_cubes(self):
        members = list(iter_basis(BasisSpec("cubes"), (3, 3)))
        assert {r.sides for r in members} == {(1, 1), (2, 2), (3, 3)}
        assert len(members) == 9 + 4 + 1

    def test_all_members_in_bounds(self):
        for spec, dims in [
            (BasisSpec("rectangles"), (5, 3)),
            (BasisSpec("cubes"), (5, 3)),
            (BasisSpec("dyadic_cubes"), (5, 3)),
            (BasisSpec("eccentricity", N=2.5), (6, 6)),
            (BasisSpec("zygmund_sts"), (3, 3, 6)),
        ]:
            for r in iter_basis(spec, dims):
                assert r.within(dims)
                assert r.ncells >= 1

    def test_budget_exceeded(self):
        stream = iter_basis(BasisSpec("rectangles"), (8, 8), BasisBudget(10))
        with pytest.raises(BudgetExceededError) as err:
            list(stream)
        assert err.value.partial_count == 11


class TestContaining:
    def test_rectangles_containing_corner(self):
        # index boxes containing (0,0) on a 2x2 grid: lo=0, hi in {1,2} per axis
        # times the (lo,hi) pairs that straddle 0 -> 1*2 per axis... enumerated
        got = list(rects_containing(BasisSpec("rectangles"), (2, 2), (0, 0)))
        oracle = [
            r for r in iter_basis(BasisSpec("rectangles"), (2, 2)) if r.contains((0, 0))
        ]
        assert len(got) == len(oracle) == 4
        # larger grid: closed form (c+1)(d-c) per axis
        got3 = list(rects_containing(BasisSpec("rectangles"), (3, 3), (0, 0)))
        assert len(got3) == 9

    def test_dyadic_one_per_scale(self):
        got = list(rects_containing(BasisSpec("dyadic_cubes"), (4, 4), (2, 1)))
        assert len(got) == 3
        assert sorted(r.sides for r in got) == [(1, 1), (2, 2), (4, 4)]

    def test_cell_outside_dims(self):
        with pytest.raises(ValueError):
            list(rects_containing(BasisSpec("rectangles"), (4, 4), (4, 0)))

    @pytest.mark.parametrize(
        "spec,dims",
        [
            (BasisSpec("rectangles"), (5, 4)),
            (BasisSpec("cubes"), (5, 4)),
            (BasisSpec("dyadic_cubes"), (8, 8)),
            (BasisSpec("eccentricity", N=3.0), (8, 8)),
            (BasisSpec("zygmund_sts"), (3, 3, 4)),
        ],
    )
    def test_matches_filtered_enumeration(self, spec, dims):
        rng = np.random.default_rng(0)
        all_members = list(iter_basis(spec, dims))
        for _ in range(5):
            cell = tuple(int(rng.integers(0, d)) for d in dims)
            got = sorted(
                (r.lo, r.hi) for r in rects_containing(spec, dims, cell)
            )
            want = sorted((r.lo, r.hi) for r in all_members if r.contains(cell))
            assert got == want


class TestArrays:
    @pytest.mark.parametrize(
        "spec,dims",
        [
            (BasisSpec("rectangles"), (4, 5)),
            (BasisSpec("cubes"), (4, 5)),
            (BasisSpec("dyadic_cubes"), (8, 4)),
            (BasisSpec("eccentricity", N=2.0), (6, 6)),
            (BasisSpec("zygmund_sts"), (3, 2, 6)),
        ],
    )
    def test_arrays_match_stream(self, spec, dims):
        lo, hi = basis_rect_arrays(spec, dims)
        stream = list(iter_basis(spec, dims))
        assert lo.shape[0] == len(stream)
        for k, r in enumerate(stream):
            assert tuple(lo[k]) == r.lo
            assert tuple(hi[k]) == r.hi

    def test_visit_count_matches_enumeration(self):
        for spec, dims in [
            (BasisSpec("rectangles"), (5, 4)),
            (BasisSpec("dyadic_cubes"), (8, 8)),
            (BasisSpec("eccentricity", N=2.0), (6, 6)),
        ]:
            total = sum(r.ncells for r in iter_basis(spec, dims))
            assert basis_visit_count(spec, dims) == total

    def test_budget_guard(self):
        with pytest.raises(BudgetExceededError):
            basis_rect_arrays(BasisSpec("rectangles"), (16, 16), BasisBudget(100))
