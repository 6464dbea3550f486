import cmath
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hypersub.geometry import (
    EUCLIDEAN_PLANE,
    ORIGIN,
    POINCARE_DISK,
    DiskPoint,
    Tangent,
    scaled_disk,
)
from hypersub.oracles import (
    LengthMismatch,
    ball_hinge_oracle,
    busemann_gradient,
    busemann_oracle,
    busemann_value,
    distance_oracle,
    format_complex,
    make_oracle,
    parse_complex,
    two_busemann_oracle,
    two_busemann_value_polar,
    weighted_sum,
)
from hypersub.verify import sample_point

from reference import mp_busemann_limit

M = POINCARE_DISK


def subgradient_slacks(m, oracle, n_pairs, seed, cap=2.0):
    """Worst slack of f(y) - f(x) - <g, log_x y> over random pairs; a valid
    subgradient keeps this nonnegative."""
    rng = np.random.default_rng(seed)
    worst = math.inf
    for _ in range(n_pairs):
        x = sample_point(rng, cap)
        y = sample_point(rng, cap)
        fx, g = oracle.evaluate(m, x)
        fy = oracle.value(m, y)
        worst = min(worst, fy - fx - m.inner(g, m.log(x, y)))
    return worst


class TestBusemannValue:
    def test_at_origin(self):
        assert busemann_value(1.0, ORIGIN) == 0.0

    def test_half_radius(self):
        # ln(0.25 / 0.75), cross-checked against the truncated limit
        got = busemann_value(1.0, DiskPoint(0.5, 0.0))
        assert got == pytest.approx(-math.log(3.0), abs=1e-14)
        assert got == pytest.approx(mp_busemann_limit(1.0, 0.5 + 0.0j), abs=1e-6)

    @pytest.mark.parametrize("t", [0.5, 1.0, 2.5])
    def test_along_own_ray(self, t):
        p = DiskPoint(math.tanh(t / 2), 0.0)
        assert busemann_value(1.0, p) == pytest.approx(-t, abs=1e-12)
        assert mp_busemann_limit(1.0, p.z) == pytest.approx(-t, abs=1e-6)

    def test_agrees_with_limit_definition(self):
        rng = np.random.default_rng(21)
        for _ in range(200):
            p = sample_point(rng, 2.5)
            eta = cmath.exp(1j * rng.uniform(0, 2 * math.pi))
            assert busemann_value(eta, p) == pytest.approx(
                mp_busemann_limit(eta, p.z), abs=1e-6
            )

    def test_one_lipschitz(self):
        rng = np.random.default_rng(22)
        eta = cmath.exp(0.3j)
        for _ in range(2000):
            x = sample_point(rng, 2.5)
            y = sample_point(rng, 2.5)
            assert abs(busemann_value(eta, x) - busemann_value(eta, y)) <= (
                M.distance(x, y) + 1e-12
            )

    def test_rejects_non_unit_direction(self):
        with pytest.raises(ValueError):
            busemann_value(0.5 + 0.0j, ORIGIN)


class TestBusemannGradient:
    def test_at_origin(self):
        g = busemann_gradient(1.0, ORIGIN)
        assert g.v == -0.5 + 0.0j
        assert M.norm(g) == 1.0

    def test_unit_norm_everywhere(self):
        rng = np.random.default_rng(23)
        for _ in range(2000):
            p = sample_point(rng, 2.5)
            eta = cmath.exp(1j * rng.uniform(0, 2 * math.pi))
            assert abs(M.norm(busemann_gradient(eta, p)) - 1.0) < 1e-10

    def test_oracle_subgradient_inequality(self):
        oracle = busemann_oracle(cmath.exp(0.5j))
        assert subgradient_slacks(M, oracle, 2000, seed=24) >= -1e-9

    def test_scaled_disk_gradient_is_rescaled(self):
        m2 = scaled_disk(2.0)
        oracle = busemann_oracle(1.0)
        p = DiskPoint(0.1, 0.3)
        g1 = oracle.subgradient(M, p)
        g2 = oracle.subgradient(m2, p)
        assert g2.v == pytest.approx(4.0 * g1.v, rel=1e-15)
        # still a valid subgradient in the scaled metric
        assert subgradient_slacks(m2, oracle, 1000, seed=25) >= -1e-9

    def test_flat_model_rejected(self):
        with pytest.raises(ValueError):
            busemann_oracle(1.0).evaluate(EUCLIDEAN_PLANE, DiskPoint.plane(2.0, 0.0))


class TestTwoBusemann:
    def test_zero_at_origin_and_on_axis(self):
        oracle = two_busemann_oracle()
        assert oracle.value(M, ORIGIN) == 0.0
        for x in (-0.9, -0.3, 0.4, 0.8):
            assert abs(oracle.value(M, DiskPoint(x, 0.0))) < 1e-13

    def test_polar_and_sum_forms_agree(self):
        oracle = two_busemann_oracle()
        assert oracle.value(M, DiskPoint(0.0, 0.5)) == pytest.approx(
            two_busemann_value_polar(DiskPoint(0.0, 0.5)), abs=1e-12
        )
        rng = np.random.default_rng(26)
        for _ in range(500):
            p = sample_point(rng, 2.5)
            assert oracle.value(M, p) == pytest.approx(
                two_busemann_value_polar(p), abs=1e-12
            )

    def test_value_at_half_i(self):
        # ln(1 + sinh^2(2 artanh 1/2)) with sin(theta) = 1
        t = 2 * math.atanh(0.5)
        want = math.log1p(math.sinh(t) ** 2)
        assert two_busemann_oracle().value(M, DiskPoint(0.0, 0.5)) == pytest.approx(
            want, abs=1e-14
        )

    @pytest.mark.parametrize("q", [-0.9, -0.5, -0.1, 0.1, 0.5, 0.9])
    def test_gradient_on_y_axis(self, q):
        g = two_busemann_oracle().subgradient(M, DiskPoint(0.0, q))
        want = 2 * (1 - q * q) / (1 + q * q) * q
        assert abs(g.vx) < 1e-12
        assert g.vy == pytest.approx(want, abs=1e-12)

    def test_nonnegative_and_zero_only_near_axis(self):
        oracle = two_busemann_oracle()
        rng = np.random.default_rng(27)
        for _ in range(5000):
            p = sample_point(rng, 2.3)
            f = oracle.value(M, p)
            assert f >= -1e-13
            if abs(p.y) <= 1e-9:
                assert f < 1e-12
            if f < 1e-12:
                assert abs(p.y) < 1e-6

    def test_subgradient_inequality(self):
        assert subgradient_slacks(M, two_busemann_oracle(), 2000, seed=28) >= -1e-9

    def test_solution_set_is_axis(self):
        sset = two_busemann_oracle().solution_set
        assert sset.kind == "x-axis"
        assert sset.distance_to(M, DiskPoint(0.0, 0.5)) == pytest.approx(
            2 * math.atanh(0.5), abs=1e-13
        )


class TestBallHinge:
    def test_inside_is_flat_zero(self):
        oracle = ball_hinge_oracle(ORIGIN, 0.5)
        f, g = oracle.evaluate(M, DiskPoint(0.1, 0.1))
        assert f == 0.0 and g.is_zero()

    def test_value_one_past_the_ball(self):
        r = 0.4
        oracle = ball_hinge_oracle(ORIGIN, r)
        p = DiskPoint(math.tanh((r + 1.0) / 2), 0.0)  # distance r + 1 from 0
        assert oracle.value(M, p) == pytest.approx(1.0, abs=1e-12)

    def test_subgradient_inequality(self):
        oracle = ball_hinge_oracle(DiskPoint(0.2, -0.1), 0.3)
        assert subgradient_slacks(M, oracle, 10_000, seed=29) >= -1e-10

    def test_subgradient_is_unit_outside(self):
        oracle = ball_hinge_oracle(ORIGIN, 0.3)
        g = oracle.subgradient(M, DiskPoint(0.0, 0.8))
        assert M.norm(g) == pytest.approx(1.0, abs=1e-12)

    def test_rejects_bad_radius(self):
        with pytest.raises(ValueError):
            ball_hinge_oracle(ORIGIN, 0.0)


class TestDistanceOracle:
    def test_at_anchor(self):
        anchor = DiskPoint(0.3, 0.0)
        f, g = distance_oracle(anchor).evaluate(M, anchor)
        assert f == 0.0 and g.is_zero()

    def test_unit_speed_values(self):
        anchor = DiskPoint(0.1, 0.2)
        oracle = distance_oracle(anchor)
        rng = np.random.default_rng(30)
        for _ in range(100):
            t = rng.uniform(0.1, 3.0)
            phi = rng.uniform(0, 2 * math.pi)
            s = Tangent.from_complex(anchor, cmath.exp(1j * phi))
            s = s.scaled(t / M.norm(s))
            assert oracle.value(M, M.exp(anchor, s)) == pytest.approx(t, abs=1e-11)

    def test_subgradient_inequality(self):
        oracle = distance_oracle(DiskPoint(-0.2, 0.4))
        assert subgradient_slacks(M, oracle, 10_000, seed=31) >= -1e-10
        assert subgradient_slacks(EUCLIDEAN_PLANE, oracle, 2000, seed=32) >= -1e-10

    def test_gradient_matches_finite_differences(self):
        # smooth away from the anchor
        oracle = distance_oracle(DiskPoint(0.05, -0.15))
        rng = np.random.default_rng(33)
        h = 1e-5
        for _ in range(500):
            p = sample_point(rng, 2.0)
            if oracle.value(M, p) < 0.1:
                continue
            phi = rng.uniform(0, 2 * math.pi)
            s = Tangent.from_complex(p, cmath.exp(1j * phi))
            s = s.scaled(1.0 / M.norm(s))
            fd = (oracle.value(M, M.exp(p, s.scaled(h))) - oracle.value(M, p)) / h
            g = oracle.subgradient(M, p)
            assert fd == pytest.approx(M.inner(g, s), abs=1e-4)


class TestWeightedSum:
    def test_singleton_identity(self):
        inner = distance_oracle(DiskPoint(0.2, 0.2))
        combo = weighted_sum([inner], [1.0])
        p = DiskPoint(-0.4, 0.1)
        assert combo.evaluate(M, p) == inner.evaluate(M, p)

    def test_matches_two_busemann_on_y_axis(self):
        combo = weighted_sum([busemann_oracle(1.0), busemann_oracle(-1.0)], [1.0, 1.0])
        ref = two_busemann_oracle()
        for q in (-0.7, -0.2, 0.3, 0.8):
            p = DiskPoint(0.0, q)
            fc, gc = combo.evaluate(M, p)
            fr, gr = ref.evaluate(M, p)
            assert fc == pytest.approx(fr, abs=1e-14)
            assert abs(gc.v - gr.v) < 1e-14

    def test_doubling_weight_doubles_values(self):
        inner = two_busemann_oracle()
        combo = weighted_sum([inner], [2.0])
        rng = np.random.default_rng(34)
        for _ in range(100):
            p = sample_point(rng, 2.0)
            assert combo.value(M, p) == pytest.approx(2 * inner.value(M, p), rel=1e-15)

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            weighted_sum([two_busemann_oracle()], [1.0, 2.0])


class TestRegistry:
    def test_round_trips(self):
        for spec in (
            "two-busemann",
            "ball-hinge:center=0.0+0.0i,r=0.3",
            "distance:anchor=0.5+0.0i",
            "busemann:eta=1.0+0.0i",
        ):
            oracle = make_oracle(spec)
            rebuilt = make_oracle(oracle.name)
            p = DiskPoint(0.2, 0.3)
            assert rebuilt.value(M, p) == oracle.value(M, p)

    def test_unknown_name(self):
        with pytest.raises(ValueError):
            make_oracle("nonsense")

    def test_unknown_parameter(self):
        with pytest.raises(ValueError):
            make_oracle("two-busemann:x=1")

    @given(st.floats(-0.95, 0.95), st.floats(-0.95, 0.95))
    def test_complex_format_round_trip(self, a, b):
        z = complex(a, b)
        assert parse_complex(format_complex(z)) == z

    def test_parse_complex_forms(self):
        assert parse_complex("0.9i") == 0.9j
        assert parse_complex("-0.5") == -0.5
        assert parse_complex("1+2i") == 1 + 2j
        with pytest.raises(ValueError):
            parse_complex("zz")
