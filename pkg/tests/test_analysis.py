import math
from fractions import Fraction

import pytest

from oracles import dense_grid_extrema, naive_sup_half_grid
from quasigrid.analysis import (
    _sweep_extrema,
    density_R,
    density_R_plus,
    density_profile_csv,
    density_report_text,
    epsilon_translations,
    subadditivity_check,
    translation_report_text,
    uniform_density,
    weak_ap_probe,
    weakap_report_text,
)
from quasigrid.cutproject import enumerate_model_set, translation_set, zn_scheme
from quasigrid.errors import DomainError
from quasigrid.pointset import PointSet, sym_diff, translate
from quasigrid.rng import RngState


def int_line(lo, hi, step=1, radius=None):
    pts = [(Fraction(v),) for v in range(lo, hi + 1, step)]
    radius = Fraction(radius if radius is not None else max(abs(lo), abs(hi)) + 1)
    return PointSet.build(1, pts, (0,), radius)


@pytest.fixture(scope="module")
def residue_patch(residue_scheme):
    return enumerate_model_set(residue_scheme, (0,), 3100).patch


class TestDensityR:
    def test_identical_sets(self):
        s = int_line(-10, 10)
        assert density_R(s, s, (0,), 5) == 0

    def test_odd_integers_half(self):
        z = int_line(-19, 19, radius=20)
        evens = int_line(-18, 18, 2, radius=20)
        assert density_R(z, evens, (0,), 10) == Fraction(1, 2)

    def test_full_grid_against_empty(self):
        grid = enumerate_model_set(zn_scheme(2), (0, 0), 20).patch
        empty = PointSet.build(2, [], (0, 0), 20)
        assert density_R(grid, empty, (0, 0), Fraction(5, 2)) == 1

    def test_symmetric_and_below_sup(self):
        a = int_line(-30, 30, 2, radius=32)
        b = int_line(-30, 30, 3, radius=32)
        assert density_R(a, b, (0,), 10) == density_R(b, a, (0,), 10)
        assert density_R(a, b, (0,), 10) <= density_R_plus(a, b, 10)

    def test_domain_violation(self):
        s = int_line(-10, 10)
        with pytest.raises(DomainError):
            density_R(s, s, (9,), 5)


class TestDensityRPlus:
    def test_zero_for_equal_sets(self):
        s = int_line(-20, 20)
        assert density_R_plus(s, s, 5) == 0

    def test_odd_integers(self):
        z = int_line(-49, 49, radius=50)
        evens = int_line(-48, 48, 2, radius=50)
        assert density_R_plus(z, evens, 10) == Fraction(1, 2)

    def test_sweep_matches_dense_grid_1d(self):
        # coordinates on the 1/32 grid, oracle walks the 1/64 grid
        rng = RngState(61)
        for _ in range(70):
            count = 5 + rng.randrange(16)
            pts = sorted({rng.randrange(193) - 96 for _ in range(count)})
            radius32 = 32 * (1 + rng.randrange(3))
            region = (-(128 - radius32), 128 - radius32)
            lo, hi = _sweep_extrema(
                [(Fraction(p, 32),) for p in pts], 1, Fraction(radius32, 32),
                ((Fraction(region[0], 32), Fraction(region[1], 32)),),
            )
            olo, ohi = dense_grid_extrema(
                [(2 * p,) for p in pts], 2 * radius32,
                [(2 * region[0], 2 * region[1])], 1,
            )
            assert (lo, hi) == (olo, ohi)

    def test_sweep_matches_dense_grid_2d(self):
        rng = RngState(62)
        for _ in range(30):
            count = 6 + rng.randrange(10)
            pts = list({(rng.randrange(9) - 4, rng.randrange(9) - 4)
                        for _ in range(count)})
            radius2 = 1 + rng.randrange(2)  # radius in halves
            slack2 = 6 - radius2
            lo, hi = _sweep_extrema(
                [(Fraction(x, 2), Fraction(y, 2)) for x, y in pts], 2,
                Fraction(radius2, 2),
                ((Fraction(-slack2, 2), Fraction(slack2, 2)),) * 2,
            )
            olo, ohi = dense_grid_extrema(
                [(32 * x, 32 * y) for x, y in pts], 32 * radius2,
                [(-32 * slack2, 32 * slack2)] * 2, 1,
            )
            assert (lo, hi) == (olo, ohi)

    def test_empty_difference_is_zero(self):
        s = int_line(-20, 20)
        t = translate(s, (0,))
        assert density_R_plus(s, t, 5) == 0


class TestUniformDensity:
    def test_unit_grid_brackets(self):
        grid = enumerate_model_set(zn_scheme(2), (0, 0), Fraction(105, 2)).patch
        prof = uniform_density(
            grid, [Fraction(5, 2), Fraction(21, 2), Fraction(101, 2)],
            Fraction(1, 100),
        )
        for radius, _, d_max in prof.samples[:2]:
            k = math.ceil(radius - Fraction(1, 2))
            assert d_max == Fraction((2 * k + 1) ** 2) / (2 * radius) ** 2
        assert prof.samples[0][1] == Fraction(16, 25)
        assert prof.converged
        assert abs(prof.density - 1) <= Fraction(1, 100)
        assert prof.r_eps == Fraction(101, 2)

    def test_residue_two_thirds(self, residue_patch):
        prof = uniform_density(
            residue_patch, [Fraction(375, 2), 375, 750, 1500, 3000],
            Fraction(1, 100),
        )
        assert prof.converged
        assert abs(prof.density - Fraction(2, 3)) <= Fraction(1, 100)

    def test_golden_density_stable(self, golden_scheme):
        patch = enumerate_model_set(golden_scheme, (0,), 4100).patch
        prof = uniform_density(patch, [2000, 4000], Fraction(1, 100))
        assert prof.converged
        assert prof.density == Fraction(3777, 16000)
        mid_2000 = (prof.samples[0][1] + prof.samples[0][2]) / 2
        assert abs(mid_2000 - prof.density) <= prof.density / 100

    def test_requires_domain(self):
        s = int_line(-10, 10)
        with pytest.raises(DomainError):
            uniform_density(s, [20], Fraction(1, 100))


class TestEpsilonTranslations:
    def test_residue_accepts_periods_rejects_shift(self, residue_patch):
        report = epsilon_translations(residue_patch, Fraction(1, 10), 10, 10)
        vals = [p[0] for p in report.translations.points]
        assert vals == [Fraction(v) for v in (-9, -6, -3, 0, 3, 6, 9)]
        assert report.largest_gap == 3
        assert (Fraction(0),) in report.translations.points

    def test_period_density_exactly_zero(self, residue_patch):
        assert density_R_plus(translate(residue_patch, (3,)),
                              residue_patch, 3000) == 0

    def test_rejected_shift_density_two_thirds(self, residue_patch):
        assert density_R_plus(translate(residue_patch, (1,)),
                              residue_patch, 3000) == Fraction(2, 3)

    def test_unit_grid_accepts_all_integer_shifts(self):
        grid = enumerate_model_set(zn_scheme(2), (0, 0), 30).patch
        report = epsilon_translations(grid, Fraction(1, 10), 5, 3)
        expected = sorted(
            (Fraction(x), Fraction(y))
            for x in range(-3, 4) for y in range(-3, 4)
        )
        assert list(report.translations.points) == expected

    def test_nesting_and_symmetry(self, residue_patch):
        small = epsilon_translations(residue_patch, Fraction(1, 10), 10, 10)
        large = epsilon_translations(residue_patch, Fraction(7, 10), 10, 10)
        small_set = set(small.translations.points)
        large_set = set(large.translations.points)
        assert small_set <= large_set
        for v in small_set | large_set:
            flipped = tuple(-c for c in v)
            if v in small_set:
                assert flipped in small_set
            if v in large_set:
                assert flipped in large_set

    def test_accepted_reverify_with_naive_checker(self, residue_patch):
        report = epsilon_translations(residue_patch, Fraction(1, 10), 10, 10)
        for v in report.translations.points:
            diff = sym_diff(translate(residue_patch, v), residue_patch)
            top = residue_patch.radius - abs(v[0]) - 10
            naive = naive_sup_half_grid(
                [p[0] for p in diff.points], diff.center[0], diff.radius, top
            )
            assert Fraction(naive) / (2 * top) < Fraction(1, 10)

    def test_domain_precondition(self, residue_patch):
        with pytest.raises(DomainError):
            epsilon_translations(residue_patch, Fraction(1, 10), 1600, 10)


class TestSubadditivity:
    def test_zero_translations(self, residue_patch):
        lhs, rhs, ok = subadditivity_check(residue_patch, [(0,), (0,)], 100)
        assert lhs == rhs == 0 and ok

    def test_residue_periods(self, residue_patch):
        lhs, rhs, ok = subadditivity_check(residue_patch, [(3,), (3,)], 100)
        assert lhs == rhs == 0 and ok

    def test_golden_translations(self, golden_scheme):
        patch = enumerate_model_set(golden_scheme, (0,), 1600).patch
        ts = translation_set(golden_scheme, Fraction(1, 10), 600)
        v1, v2 = [v for v in ts.points if v[0] != 0][:2]
        lhs, rhs, ok = subadditivity_check(patch, [v1, v2], 100)
        assert ok
        assert lhs == Fraction(3, 100) and rhs == Fraction(19, 200)


class TestWeakApProbe:
    def test_unit_grid_worst_zero(self):
        grid = enumerate_model_set(zn_scheme(2), (0, 0), 20).patch
        result = weak_ap_probe(grid, Fraction(1, 10), Fraction(5, 2), 20,
                               RngState(7))
        assert result.worst == 0
        assert len(result.witnesses) == 20

    def test_residue_within_tolerance(self, residue_scheme):
        patch = enumerate_model_set(residue_scheme, (0,), 150).patch
        result = weak_ap_probe(patch, Fraction(1, 10), 50, 20, RngState(11))
        assert result.worst == Fraction(1, 50)
        assert result.worst <= Fraction(1, 10)

    def test_one_sided_set_fails_probe(self):
        pts = [(Fraction(k),) for k in range(-29, 30)]
        pts += [(Fraction(2 * k + 1, 2),) for k in range(0, 30)]
        asym = PointSet.build(1, pts, (0,), 30)
        result = weak_ap_probe(asym, Fraction(1, 10), 10, 20, RngState(5))
        assert result.worst == 1
        assert result.worst > Fraction(1, 10)

    def test_empty_windows_fall_back_to_plain_shift(self):
        sparse = PointSet.build(1, [(-90,), (90,)], (0,), 100)
        result = weak_ap_probe(sparse, Fraction(1, 10), 2, 10, RngState(2))
        assert result.worst <= Fraction(1, 2)  # at worst one unmatched point

    def test_domain_precondition(self):
        s = int_line(-10, 10)
        with pytest.raises(DomainError):
            weak_ap_probe(s, Fraction(1, 10), 6, 5, RngState(1))


class TestHighDimensionFallback:
    def test_sampled_bracket_with_warning(self):
        pts = [(Fraction(x), Fraction(y), Fraction(z))
               for x in range(-2, 3) for y in range(-2, 3) for z in range(-2, 3)]
        cube = PointSet.build(3, pts, (0, 0, 0), 3)
        with pytest.warns(UserWarning, match="lower bound"):
            prof = uniform_density(cube, [Fraction(3, 2)], Fraction(1, 2))
        radius, d_min, d_max = prof.samples[0]
        assert d_min <= 1 <= d_max  # true density of Z^3 sits in the bracket

    def test_sup_density_warns_too(self):
        pts = [(Fraction(x), Fraction(y), Fraction(z))
               for x in range(-2, 3) for y in range(-2, 3) for z in range(-2, 3)]
        cube = PointSet.build(3, pts, (0, 0, 0), 3)
        empty = PointSet.build(3, [], (0, 0, 0), 3)
        with pytest.warns(UserWarning, match="lower bound"):
            d = density_R_plus(cube, empty, 2)
        assert d > 0


class TestReports:
    def test_density_report_text(self):
        s = int_line(-20, 20, radius=21)
        prof = uniform_density(s, [5, 10], Fraction(1, 10))
        text = density_report_text(prof, Fraction(1, 10))
        assert text.startswith("rpt 1\nkind density\neps 1/10\n")
        assert "verdict converged" in text
        assert text.endswith("sample 5 9/10 1\nsample 10 19/20 1\n")
        csv = density_profile_csv(prof)
        assert csv.splitlines()[0] == "R,d_min,d_max"
        assert csv.splitlines()[2] == "10,19/20,1"

    def test_translation_report_text(self, residue_patch):
        report = epsilon_translations(residue_patch, Fraction(1, 10), 10, 4)
        text = translation_report_text(report)
        lines = text.splitlines()
        assert lines[0] == "rpt 1" and lines[1] == "kind translations"
        assert "count 3" in lines
        assert lines[-3:] == ["v -3", "v 0", "v 3"]

    def test_weakap_report_text(self):
        grid = enumerate_model_set(zn_scheme(2), (0, 0), 10).patch
        result = weak_ap_probe(grid, Fraction(1, 10), 2, 3, RngState(3))
        text = weakap_report_text(result, Fraction(1, 10), 2, 3)
        lines = text.splitlines()
        assert "worst 0" in lines and "pass true" in lines
        assert sum(1 for ln in lines if ln.startswith("pair ")) == 3
