import random
from fractions import Fraction
from math import gcd

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from mpmath import mp, mpf, mpc, sqrt, pi

from ramcf.errors import (
    NonPositiveCoefficient,
    NonPositiveDeterminant,
    NotElliptic,
    NotHyperbolic,
    OutOfRange,
    PoleDerivative,
)
from ramcf.moebius import (
    INF,
    MoebiusMap,
    boundary_from_angle,
    cayley_angle,
    cf_map,
    chordal_distance,
    classify,
    compose,
    derivative_at,
    elliptic_fixed_point,
    hyperbolic_fixed_points,
    inverse_rotation_number,
    power,
    rotation_number,
)
from ramcf.precision import machine_epsilon, working_precision


def test_cf_map_action_on_cycle(mp256):
    t = cf_map(1)
    assert t(mpf(0)) == -1
    assert t(mpf(-1)) == INF
    assert t(INF) == 0


def test_cf_map_rejects_nonpositive(mp256):
    with pytest.raises(NonPositiveCoefficient):
        cf_map(0)
    with pytest.raises(NonPositiveCoefficient):
        cf_map(-2)


def test_cf_map_quarter_is_parabolic(mp256):
    m = cf_map(Fraction(1, 4))
    assert classify(m).is_parabolic
    # unique boundary fixed point -1/2 (double root of z^2 + z + 1/4)
    half = -mpf(1) / 2
    assert chordal_distance(m(half), half) < mpf(2) ** -200


def test_cf_map_hyperbolic_fixed_points(mp256):
    att, rep, mu = hyperbolic_fixed_points(cf_map("0.2"))
    root = sqrt(mpf("0.2"))
    assert abs(att - (-1 + root) / 2) < mpf(2) ** -200
    assert abs(rep - (-1 - root) / 2) < mpf(2) ** -200
    assert 0 < mu < 1
    # both solve z^2 + z + 0.2 = 0
    for z in (att, rep):
        assert abs(z * z + z + mpf("0.2")) < mpf(2) ** -200


def test_linear_map_fixed_points(mp256):
    quarter = MoebiusMap(1, 0, 0, 4)  # x -> x/4
    att, rep, mu = hyperbolic_fixed_points(quarter)
    assert att == 0 and rep == INF
    assert abs(mu - mpf(1) / 4) < mpf(2) ** -200
    scale = MoebiusMap(4, 0, 0, 1)  # x -> 4x
    att, rep, mu = hyperbolic_fixed_points(scale)
    assert att == INF and rep == 0
    assert abs(mu - mpf(1) / 4) < mpf(2) ** -200


def test_nonpositive_determinant_rejected(mp256):
    with pytest.raises(NonPositiveDeterminant):
        MoebiusMap(1, 0, 0, -1)
    with pytest.raises(NonPositiveDeterminant):
        MoebiusMap(1, 2, 2, 4)  # det = 0


def test_compose_identity(mp256):
    m = cf_map("1.7")
    tol = mpf(2) ** -240
    assert m.compose(MoebiusMap.identity()).distance_to(m) < tol
    assert MoebiusMap.identity().compose(m).distance_to(m) < tol


def test_cube_of_unit_map_is_identity(mp256):
    t = cf_map(1)
    assert compose(t, compose(t, t)).is_identity()


def test_compose_matches_pointwise_iteration(mp256):
    rng = random.Random(7)
    coeffs = [mpf(rng.uniform(0.3, 2.0)) for _ in range(1000)]
    m = MoebiusMap.identity()
    for b in coeffs:
        m = m.compose(cf_map(b))
    # apply the innermost map first
    y = mpf(0)
    for b in reversed(coeffs):
        y = cf_map(b)(y)
    assert chordal_distance(m(mpf(0)), y) < mpf(10) ** -20


def test_apply_homomorphism_including_poles(mp256):
    rng = random.Random(3)
    special = [INF, mpf(0), mpf(-1)]
    for k in range(40):
        f = cf_map(mpf(rng.uniform(0.3, 3.0)))
        g = cf_map(mpf(rng.uniform(0.3, 3.0)))
        xs = special + [mpf(rng.uniform(-5, 5))]
        # include the exact pole of g and of the composition
        xs.append(g.pole())
        xs.append(f.compose(g).pole())
        for x in xs:
            lhs = f.compose(g)(x)
            rhs = f(g(x))
            assert chordal_distance(lhs, rhs) < mpf(2) ** -200


def test_apply_interior_fixes_elliptic_center(mp256):
    assert MoebiusMap.identity().apply_interior(mpc(0, 1)) == mpc(0, 1)
    for a in (mpf(1), mpf(1) / 2):
        c = elliptic_fixed_point(a)
        image = cf_map(a).apply_interior(c)
        assert abs(image - c) < mpf(2) ** -200
        assert image.imag >= 0


def test_apply_interior_pole_maps_to_infinity(mp256):
    assert cf_map(1).apply_interior(mpc(-1, 0)) == INF


def test_classify_examples(mp256):
    assert classify(cf_map(1)).is_elliptic
    assert classify(cf_map("0.2")).is_hyperbolic
    assert classify(cf_map(Fraction(1, 4))).is_parabolic
    assert classify(MoebiusMap.identity()).is_identity


def test_classify_grid(mp256):
    for k in range(1, 1001):
        b = mpf(k) / 250  # (0, 4]
        if b == mpf(1) / 4:
            continue
        cls = classify(cf_map(b))
        if b > mpf(1) / 4:
            assert cls.is_elliptic, b
        else:
            assert cls.is_hyperbolic, b


def test_hyperbolic_fixed_points_requires_hyperbolic(mp256):
    with pytest.raises(NotHyperbolic):
        hyperbolic_fixed_points(cf_map(1))


def test_derivative_identity(mp256):
    for x in (mpf(0), mpf(3), mpf("-2.5"), INF):
        assert derivative_at(MoebiusMap.identity(), x) == 1


def test_derivative_at_attractor_in_unit_interval(mp256):
    att, _, mu = hyperbolic_fixed_points(cf_map("0.2"))
    assert derivative_at(cf_map("0.2"), att) == mu
    assert 0 < mu < 1


def test_derivative_pole_raises(mp256):
    with pytest.raises(PoleDerivative):
        derivative_at(cf_map(1), mpf(-1))


def test_derivative_matches_finite_differences(mp128):
    rng = random.Random(11)
    h = mpf(10) ** -8
    for _ in range(100):
        m = cf_map(mpf(rng.uniform(0.1, 3.0)))
        if rng.random() < 0.5:
            m = m.compose(cf_map(mpf(rng.uniform(0.1, 3.0))))
        x = mpf(rng.uniform(-4, 4))
        if abs(m.m21 * x + m.m22) < mpf("0.05"):
            continue  # too close to the pole for a fair quotient
        fd = (m(x + h) - m(x - h)) / (2 * h)
        exact = derivative_at(m, x)
        assert abs(fd - exact) <= mpf(10) ** -6 * abs(exact)


def test_elliptic_fixed_point_values(mp256):
    c1 = elliptic_fixed_point(1)
    assert abs(c1 - mpc(mpf(-1) / 2, sqrt(3) / 2)) < mpf(2) ** -200
    c2 = elliptic_fixed_point(Fraction(1, 2))
    assert abs(c2 - mpc(mpf(-1) / 2, mpf(1) / 2)) < mpf(2) ** -200
    c3 = elliptic_fixed_point("0.3")
    assert abs(c3.real + mpf(1) / 2) < mpf(2) ** -200
    assert abs(cf_map("0.3").apply_interior(c3) - c3) < mpf(2) ** -200
    with pytest.raises(NotElliptic):
        elliptic_fixed_point(Fraction(1, 4))


def test_rotation_number_anchors(mp256):
    assert abs(rotation_number(1) - mpf(1) / 3) < mpf(10) ** -30
    assert abs(rotation_number(Fraction(1, 2)) - mpf(1) / 4) < mpf(10) ** -30
    assert abs(rotation_number(Fraction(1, 3)) - mpf(1) / 6) < mpf(10) ** -30
    with pytest.raises(NotElliptic):
        rotation_number(Fraction(1, 4))


def test_rotation_number_monotone(mp256):
    values = [rotation_number(mpf(1) / 4 + mpf(k) / 20) for k in range(1, 40)]
    assert all(v2 > v1 for v1, v2 in zip(values, values[1:]))


def test_inverse_rotation_number_values(mp256):
    assert abs(inverse_rotation_number(Fraction(1, 3)) - 1) < mpf(10) ** -30
    assert abs(inverse_rotation_number(Fraction(1, 4)) - mpf(1) / 2) < mpf(10) ** -30
    # a -> 1/4 as rho -> 0+
    assert abs(inverse_rotation_number("1e-8") - mpf(1) / 4) < mpf("1e-14")
    with pytest.raises(OutOfRange):
        inverse_rotation_number(Fraction(1, 2))
    with pytest.raises(OutOfRange):
        inverse_rotation_number(0)


def test_rotation_roundtrip_grid(mp256):
    tol = 10 * machine_epsilon()
    for k in range(1, 50):
        rho = mpf("0.01") + (mpf("0.48") * k) / 49
        assert abs(rotation_number(inverse_rotation_number(rho)) - rho) <= tol


def test_power_basics(mp256):
    t = cf_map(1)
    assert t.power(0).is_identity()
    assert t.power(3).is_identity()
    assert power(cf_map(Fraction(1, 2)), 4).is_identity()
    with pytest.raises(OutOfRange):
        t.power(-1)


def test_power_periodicity_all_reduced_fractions(mp256):
    tol = mpf(2) ** (20 - mp.prec)
    for q in range(3, 13):
        for p in range(1, q):
            if gcd(p, q) != 1 or 2 * p >= q:
                continue
            a = inverse_rotation_number(Fraction(p, q))
            m = cf_map(a).power(q)
            assert m.distance_to(MoebiusMap.identity()) <= tol, (p, q)


def test_chordal_examples(mp256):
    assert chordal_distance(mpf("0.7"), mpf("0.7")) == 0
    assert abs(chordal_distance(0, INF) - pi) < mpf(2) ** -250
    assert abs(chordal_distance(1, -1) - pi) < mpf(2) ** -250


def test_cayley_angle_continuous_at_infinity(mp256):
    a_inf = cayley_angle(INF)
    assert a_inf == 0
    assert abs(cayley_angle(mpf(10) ** 30)) < mpf(10) ** -29
    assert abs(cayley_angle(-mpf(10) ** 30)) < mpf(10) ** -29


def test_boundary_from_angle_roundtrip(mp256):
    for k in range(-6, 7):
        theta = mpf(k) * pi / 7
        x = boundary_from_angle(theta)
        assert abs(cayley_angle(x) - theta) < mpf(2) ** -240 or (
            k == 0 and x == INF
        )


@settings(max_examples=60, deadline=None)
@given(
    st.floats(-1e6, 1e6).filter(lambda v: abs(v) > 1e-9 or v == 0.0),
    st.floats(-1e6, 1e6),
    st.floats(-1e6, 1e6),
)
def test_chordal_metric_axioms(x, y, z):
    with working_precision(128):
        xs, ys, zs = mpf(x), mpf(y), mpf(z)
        assert chordal_distance(xs, xs) == 0
        dxy = chordal_distance(xs, ys)
        assert dxy == chordal_distance(ys, xs)
        assert dxy <= chordal_distance(xs, zs) + chordal_distance(zs, ys) + mpf(2) ** -100
        assert dxy <= pi + mpf(2) ** -100


@settings(max_examples=40, deadline=None)
@given(
    st.floats(0.3, 3.0),
    st.floats(0.3, 3.0),
    st.floats(-20.0, 20.0),
)
def test_compose_apply_homomorphism_property(bf, bg, x):
    with working_precision(128):
        f, g = cf_map(mpf(bf)), cf_map(mpf(bg))
        lhs = f.compose(g)(mpf(x))
        rhs = f(g(mpf(x)))
        assert chordal_distance(lhs, rhs) < mpf(2) ** -90


def test_hyperbolic_iteration_contracts_to_attractor(mp256):
    m = cf_map("0.2")
    att, rep, mu = hyperbolic_fixed_points(m)
    x = mpf(3)
    dists = []
    for _ in range(60):
        x = m(x)
        dists.append(chordal_distance(x, att))
    assert dists[-1] < mpf(10) ** -20
    # contraction ratio approaches the multiplier
    ratios = [dists[i + 1] / dists[i] for i in range(40, 50)]
    for r in ratios:
        assert abs(r - mu) < mpf("0.01")


def test_normalization_determinant_and_sign(mp256):
    m = MoebiusMap(-3, 1, 2, -5)  # det = 13 > 0
    assert abs(m.det - 1) < mpf(2) ** -250
    for entry in m.entries:
        if entry != 0:
            assert entry > 0
            break


def test_compose_associative(mp256):
    rng = random.Random(23)
    for _ in range(20):
        f, g, h = (cf_map(mpf(rng.uniform(0.2, 3.0))) for _ in range(3))
        lhs = f.compose(g).compose(h)
        rhs = f.compose(g.compose(h))
        assert lhs.distance_to(rhs) < mpf(2) ** -240
