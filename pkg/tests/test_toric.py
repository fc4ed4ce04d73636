from fractions import Fraction as F

import pytest

from slopestab.models import IntersectionTable, MixedTable
from slopestab.slope import alpha_polys, slope_mu
from slopestab.toric import (
    Fan,
    LatticePolytope,
    ToricDivisor,
    ToricError,
    ToricModel,
    _alpha_samples,
    _exceptional_setup,
    check_fan,
    curve_degree,
    export_table,
    nef_threshold,
    polytope_of,
    star_subdivide,
    walls,
)

P2_FAN = Fan(((1, 0), (0, 1), (-1, -1)), ((0, 1), (1, 2), (0, 2)))
F1_FAN = Fan(((1, 0), (0, 1), (-1, -1), (1, 1)), ((0, 3), (1, 3), (1, 2), (0, 2)))


def wall_with_rays(fan, rays):
    for w in walls(fan):
        if w.rays == tuple(sorted(rays)):
            return w
    raise AssertionError(f"no wall {rays}")


class TestCheckFan:
    def test_p2_ok(self):
        assert check_fan(P2_FAN).ok

    def test_non_smooth_cone(self):
        fan = Fan(((1, 0), (1, 2), (-1, -1)), ((0, 1), (1, 2), (0, 2)))
        diags = check_fan(fan)
        assert any("non-smooth" in d.message and "2" in d.message for d in diags.errors)

    def test_missing_cone(self):
        fan = Fan(((1, 0), (0, 1), (-1, -1)), ((0, 1), (1, 2)))
        diags = check_fan(fan)
        assert any("incident cone" in d.message for d in diags.errors)


class TestStarSubdivide:
    def test_p2_corner(self):
        fan, e_idx = star_subdivide(P2_FAN, (0, 1))
        assert fan.rays[e_idx] == (1, 1)
        assert len(fan.max_cones) == 4
        assert check_fan(fan).ok

    def test_single_ray_identity(self):
        fan, e_idx = star_subdivide(P2_FAN, (2,))
        assert fan is P2_FAN and e_idx == 2

    def test_p3_full_cone(self):
        rays = ((1, 0, 0), (0, 1, 0), (0, 0, 1), (-1, -1, -1))
        cones = ((0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3))
        fan, e_idx = star_subdivide(Fan(rays, cones), (0, 1, 2))
        assert fan.rays[e_idx] == (1, 1, 1)
        assert len(fan.max_cones) == 6
        assert check_fan(fan).ok

    def test_not_a_face(self):
        with pytest.raises(ToricError, match="not a face"):
            star_subdivide(F1_FAN, (2, 3))


class TestCurveDegree:
    def test_p2_lines(self):
        # O(1) as the single prime divisor of the ray (-1,-1)
        d = ToricDivisor((0, 0, 1))
        for w in walls(P2_FAN):
            assert curve_degree(P2_FAN, w, d) == 1

    def test_exceptional_self_intersection(self):
        e = ToricDivisor((0, 0, 0, 1))
        w = wall_with_rays(F1_FAN, (3,))
        assert curve_degree(F1_FAN, w, e) == -1

    def test_zero_divisor(self):
        z = ToricDivisor((0, 0, 0, 0))
        for w in walls(F1_FAN):
            assert curve_degree(F1_FAN, w, z) == 0


class TestNefThreshold:
    def test_p2_blowup(self):
        fan, e_idx = star_subdivide(P2_FAN, (0, 1))
        pi_l = ToricDivisor((0, 0, 1, 0))
        assert nef_threshold(fan, pi_l, e_idx) == 1

    def test_scales_with_l(self):
        fan, e_idx = star_subdivide(P2_FAN, (0, 1))
        for d in (2, 3, 5):
            pi_l = ToricDivisor((0, 0, d, 0))
            assert nef_threshold(fan, pi_l, e_idx) == d

    def test_f1_divisor_case(self):
        # L = 2H - E0 with E = the (1,1) ray's divisor
        assert nef_threshold(F1_FAN, ToricDivisor((0, 0, 2, -1)), 3) == 1

    def test_threshold_boundary_is_sharp(self):
        fan, e_idx = star_subdivide(P2_FAN, (0, 1))
        pi_l = ToricDivisor((0, 0, 1, 0))
        eps = nef_threshold(fan, pi_l, e_idx)
        e = ToricDivisor(tuple(int(i == e_idx) for i in range(4)))
        at = [curve_degree(fan, w, pi_l) - eps * curve_degree(fan, w, e)
              for w in walls(fan)]
        assert min(at) == 0
        past = [
            curve_degree(fan, w, pi_l)
            - (eps + F(1, 1000)) * curve_degree(fan, w, e)
            for w in walls(fan)
        ]
        assert min(past) < 0


class TestPolytopes:
    def test_unit_simplex(self):
        p = polytope_of(P2_FAN, ToricDivisor((0, 0, 1)))
        assert set(p.vertices) == {(0, 0), (1, 0), (0, 1)}
        assert p.volume() == F(1, 2)

    def test_truncated_simplex(self):
        fan, e_idx = star_subdivide(P2_FAN, (0, 1))
        p = polytope_of(fan, ToricDivisor((0, 0, 1, F(-1, 2))))
        assert set(p.vertices) == {
            (F(1, 2), F(0)), (F(0), F(1, 2)), (F(1), F(0)), (F(0), F(1)),
        }
        # inclusion-exclusion oracle: 1/2 - (1/2)^2/2
        assert p.volume() == F(3, 8)

    def test_empty_beyond_threshold(self):
        fan, e_idx = star_subdivide(P2_FAN, (0, 1))
        p = polytope_of(fan, ToricDivisor((0, 0, 1, -2)))
        assert p.is_empty
        assert p.volume() == 0

    def test_unit_square_volume(self):
        square = LatticePolytope(
            [((1, 0), 0), ((0, 1), 0), ((-1, 0), 1), ((0, -1), 1)]
        )
        assert square.volume() == 1

    def test_unit_simplex_3d(self):
        fan = Fan(
            ((1, 0, 0), (0, 1, 0), (0, 0, 1), (-1, -1, -1)),
            ((0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3)),
        )
        p = polytope_of(fan, ToricDivisor((0, 0, 0, 1)))
        assert p.volume() == F(1, 6)


class TestFacetLatticeVolume:
    def test_horizontal_segment(self):
        rect = LatticePolytope(
            [((1, 0), 0), ((0, 1), 0), ((-1, 0), 2), ((0, -1), 1)]
        )
        # facet y = 0 runs from (0,0) to (2,0)
        assert rect.facet_lattice_volume(1) == 2

    def test_hypotenuse(self):
        tri = LatticePolytope([((1, 0), 0), ((0, 1), 0), ((-1, -1), 1)])
        assert tri.facet_lattice_volume(2) == 1

    def test_simplex_facet_3d(self):
        simplex = LatticePolytope(
            [((1, 0, 0), 0), ((0, 1, 0), 0), ((0, 0, 1), 0), ((-1, -1, -1), 1)]
        )
        assert simplex.facet_lattice_volume(3) == F(1, 2)

    def test_non_primitive_normal_rejected(self):
        p = LatticePolytope([((2, 0), 0), ((0, 1), 0), ((-1, -1), 1)])
        with pytest.raises(ToricError, match="primitive"):
            p.facet_lattice_volume(0)


class TestExportTable:
    def test_p2_is_t1(self, load_model):
        t = export_table(load_model("p2"))
        assert t == IntersectionTable(
            "P2 O(1) point", 2, (F(1), F(0), F(-1)), (F(-3), F(-1)), F(1)
        )

    def test_p3(self, load_model):
        t = export_table(load_model("p3"))
        assert t.ae == (F(1), F(0), F(0), F(1))
        pair = alpha_polys(t)
        assert pair.alpha0.coeffs == (F(1, 6), F(0), F(0), F(-1, 6))
        assert pair.alpha1.coeffs == (F(1), F(0), F(-1, 2))
        assert t.epsilon == 1

    def test_f1_big_nef_matches_p2_slope(self, load_model):
        mx = export_table(load_model("f1_bignef"))
        assert isinstance(mx, MixedTable)
        base = mx.base_table()
        p2 = export_table(load_model("p2"))
        assert base.ae == p2.ae and base.kae == p2.kae
        assert slope_mu(alpha_polys(base)) == 3

    def test_invalid_model_rejected(self):
        model = ToricModel(
            "bad", P2_FAN, ToricDivisor((0, 0, -1)), (0, 1)
        )
        with pytest.raises(ToricError, match="nef"):
            export_table(model)


class TestTwoPathConsistency:
    # volume-interpolated alpha polynomials must equal the binomial expansion
    # of the exported table, coefficient by coefficient
    @pytest.mark.parametrize(
        "name", ["p2", "p2_o2", "p3", "f1_ample", "f1_bignef"]
    )
    def test_fixture(self, load_model, name):
        model = load_model(name)
        fan1, e_idx, pullback = _exceptional_setup(model)
        pi_l = pullback(model.L)
        table = export_table(model)
        if isinstance(table, MixedTable):
            table = table.base_table()
        sampled0, sampled1 = _alpha_samples(
            fan1, e_idx, pi_l, table.epsilon, model.fan.dim
        )
        pair = alpha_polys(table)
        assert sampled0 == pair.alpha0
        assert sampled1 == pair.alpha1


class TestScaling:
    def test_alpha0_covariance(self, load_model):
        # replacing L by dL: epsilon scales by d, alpha0(dL; t) = d^n alpha0(L; t/d)
        base = alpha_polys(export_table(load_model("p2")))
        for d, name in ((2, "p2_o2"),):
            scaled = alpha_polys(export_table(load_model(name)))
            assert scaled.epsilon == d * base.epsilon
            assert scaled.alpha0 == d**2 * base.alpha0.scale_input(F(1, d))

    def test_birational_invariance(self, load_model):
        # mu from the subdivided fan equals the value on the base variety
        f1 = export_table(load_model("f1_bignef")).base_table()
        p2 = export_table(load_model("p2"))
        assert slope_mu(alpha_polys(f1)) == slope_mu(alpha_polys(p2))


class TestModelValidation:
    def test_good_fixtures(self, load_model):
        for name in ("p2", "p2_o2", "p3", "f1_ample", "f1_bignef"):
            assert load_model(name).validate().ok

    def test_h_must_be_ample(self, load_model):
        m = load_model("p2")
        bad = ToricModel(m.label, m.fan, m.L, m.sigma, H=ToricDivisor((0, 0, 0)))
        diags = bad.validate()
        assert any("ample" in d.message for d in diags.errors)
