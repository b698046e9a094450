from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wallx.graded_algebra import TruncatedAlgebra, coefficient_field
from wallx.stability_engine import (
    CentralCharge,
    DegenerateCharge,
    NotStrict,
    PhaseCollision,
    Sector,
    StabilityData,
    check_support,
    clockwise_key,
    clockwise_product,
    dilog_coefficient,
    extract_spectrum,
    factor_check,
    in_sector,
    rays,
    sector_element,
    wall_cross,
)

P = ((0, 1), (-1, 0))
S = ((1, 0), (0, 1))
# gamma1 at phase 1/2, gamma2 at phase 0: clockwise order gamma1 then gamma2
Z_OLD = CentralCharge(((0, 1), (1, 0)))
Z_NEW = CentralCharge(((1, 0), (0, 1)))


def _dilog_data(alg, charge, rays_):
    a = {}
    for ray in rays_:
        for k in range(1, alg.N + 1):
            vec = tuple(k * x for x in ray)
            if alg.height(vec) <= alg.N:
                a[(0, 0, vec)] = dilog_coefficient(alg, k)
    return StabilityData(charge, a, alg)


@pytest.fixture(scope="module")
def pentagon():
    alg = TruncatedAlgebra(1, P, S, 6)
    old = _dilog_data(alg, Z_OLD, [(1, 0), (0, 1)])
    return old, wall_cross(old, Z_NEW)


def test_pentagon_support_and_omega(pentagon):
    old, new = pentagon
    groups = rays(new)
    assert [sorted({k[2] for k in g})[0] for g in groups] == [(0, 1), (1, 1), (1, 0)]
    assert extract_spectrum(new).omega == {(0, 0, (0, 1)): 1, (0, 0, (1, 1)): 1, (0, 0, (1, 0)): 1}


def test_pentagon_products_agree(pentagon):
    old, new = pentagon
    assert factor_check(new, mode="reference", reference=old)


def test_pentagon_involution(pentagon):
    old, new = pentagon
    back = wall_cross(new, Z_OLD)
    assert old.algebra.equal(back.a, old.a)


def test_pentagon_output_support_certificate(pentagon):
    _, new = pentagon
    cert = check_support(new)
    assert cert.passed
    # max |gamma|^2/|Z|^2 over the height-6 support is attained on the axes
    assert cert.C_squared == Fraction(1)


def test_wall_cross_identity_charge():
    alg = TruncatedAlgebra(1, P, S, 4)
    old = _dilog_data(alg, Z_OLD, [(1, 0), (0, 1)])
    assert wall_cross(old, Z_OLD).a == old.a


def test_wall_cross_is_deterministic():
    alg = TruncatedAlgebra(1, P, S, 4)
    old = _dilog_data(alg, Z_OLD, [(1, 0), (0, 1)])
    assert wall_cross(old, Z_NEW).a == wall_cross(old, Z_NEW).a


def test_cecotti_vafa_middle_factor():
    fd = coefficient_field(("x", "y"))
    K, t, (x, y) = fd
    alg = TruncatedAlgebra(3, ((0, 0), (0, 0)), S, 2, field_data=fd)
    old = StabilityData(Z_OLD, {(0, 1, (1, 0)): x, (1, 2, (0, 1)): y}, alg)
    new = wall_cross(old, Z_NEW)
    assert new.a == {(0, 1, (1, 0)): x, (1, 2, (0, 1)): y, (0, 2, (1, 1)): x * y}
    assert extract_spectrum(new).mu[(0, 2, (1, 1))] == x * y


def test_support_zero_charge_witness():
    alg = TruncatedAlgebra(1, P, S, 3)
    z = CentralCharge(((1, 0), (-1, 0)))
    data = StabilityData(z, {(0, 0, (1, 1)): alg.K.one}, alg)
    cert = check_support(data)
    assert not cert.passed and cert.witness == (0, 0, (1, 1))


def test_support_minimal_constant_and_bound():
    alg = TruncatedAlgebra(1, P, S, 3)
    data = StabilityData(Z_OLD, {(0, 0, (1, 0)): alg.K.one, (0, 0, (1, 1)): alg.K.one}, alg)
    cert = check_support(data)
    assert cert.passed and cert.C_squared == 1
    assert not check_support(data, C=Fraction(1, 2)).passed


def test_support_quadratic_mode():
    alg = TruncatedAlgebra(1, ((0, 1, 0), (-1, 0, 0), (0, 0, 0)), ((1, 0, 0), (0, 1, 0), (0, 0, 1)), 2)
    z = CentralCharge(((1, 0), (0, 1), (1, 1)))  # kernel spanned by (1, 1, -1)
    data = StabilityData(z, {(0, 0, (1, 0, 0)): alg.K.one}, alg)
    q_good = ((1, 0, 0), (0, 0, 0), (0, 0, -2))
    assert check_support(data, mode="quadratic", Q=q_good).passed
    q_bad = ((1, 0, 0), (0, 1, 0), (0, 0, 1))
    assert not check_support(data, mode="quadratic", Q=q_bad).passed


def test_sector_element_examples():
    fd = coefficient_field(("x",))
    K, t, (x,) = fd
    alg = TruncatedAlgebra(3, ((0, 0), (0, 0)), S, 2, field_data=fd)
    empty = StabilityData(Z_OLD, {}, alg)
    assert alg.equal(sector_element(empty), alg.one())
    one_ray = StabilityData(Z_OLD, {(0, 1, (1, 0)): x}, alg)
    assert alg.equal(sector_element(one_ray), alg.add(alg.one(), {(0, 1, (1, 0)): x}))


def test_sector_element_quadratic_terms():
    alg = TruncatedAlgebra(1, P, S, 2)
    data = StabilityData(Z_OLD, {(0, 0, (1, 0)): alg.K.one, (0, 0, (0, 1)): alg.K.one}, alg)
    g = sector_element(data)
    t = alg.t
    # exp(e1 + e2) = 1 + e1 + e2 + (e1^2 + e2^2 + e1 e2 + e2 e1) / 2
    assert g[(0, 0, (1, 1))] == (t + 1 / t) / 2
    assert g[(0, 0, (2, 0))] == alg.K(Fraction(1, 2))


def test_factor_check_commuting_rays():
    alg = TruncatedAlgebra(1, ((0, 0), (0, 0)), S, 4)
    data = StabilityData(Z_OLD, {(0, 0, (1, 0)): alg.K.one, (0, 0, (0, 1)): alg.K(3)}, alg)
    assert factor_check(data)


def test_factor_check_reports_height_two_discrepancy():
    alg = TruncatedAlgebra(1, P, S, 3)
    data = StabilityData(Z_OLD, {(0, 0, (1, 0)): alg.K.one, (0, 0, (0, 1)): alg.K.one}, alg)
    rep = factor_check(data)
    assert not rep.passed
    assert alg.height(rep.key[2]) == 2


def test_factor_check_split():
    alg = TruncatedAlgebra(1, P, S, 4)
    data = _dilog_data(alg, Z_OLD, [(1, 0), (0, 1)])
    assert factor_check(data, Sector(Fraction(-1, 8), Fraction(5, 8)), mode="split", split=Fraction(1, 8))


def test_phase_collision():
    alg = TruncatedAlgebra(1, P, S, 2)
    same = CentralCharge(((1, 0), (2, 0)))
    data = StabilityData(Z_OLD, {(0, 0, (1, 0)): alg.K.one, (0, 0, (0, 1)): alg.K.one}, alg)
    with pytest.raises(PhaseCollision):
        wall_cross(data, same)


def test_degenerate_charge():
    alg = TruncatedAlgebra(1, P, S, 2)
    data = StabilityData(Z_OLD, {(0, 0, (1, 0)): alg.K.one}, alg)
    with pytest.raises(DegenerateCharge):
        wall_cross(data, CentralCharge(((1, 0), (-1, 0))))


def test_spectrum_examples():
    alg = TruncatedAlgebra(1, P, S, 3)
    assert extract_spectrum(StabilityData(Z_OLD, {}, alg)).rays == []
    data = StabilityData(Z_OLD, {(0, 0, (1, 0)): 2 * dilog_coefficient(alg, 1)}, alg)
    assert extract_spectrum(data).omega == {(0, 0, (1, 0)): 2}
    odd = StabilityData(Z_OLD, {(0, 0, (1, 0)): alg.K(Fraction(1, 3))}, alg)
    assert extract_spectrum(odd).omega is None


def test_sector_strictness_and_half_open():
    with pytest.raises(NotStrict):
        Sector(0, 1)
    v = Sector(Fraction(0), Fraction(1, 2))
    assert in_sector((Fraction(1), Fraction(0)), v)
    assert not in_sector((Fraction(0), Fraction(1)), v)
    assert in_sector((Fraction(1), Fraction(1)), v)


def test_float_mode_charge():
    z = CentralCharge(((0.0, 1.0), (1.0, 0.0)), mode="float")
    assert abs(z.phase((1, 1)) - 0.25) < 1e-12


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.integers(-5, 5), st.integers(1, 5)), min_size=2, max_size=6))
def test_clockwise_order_matches_phases(vecs):
    # upper half plane is a strict sector
    z = CentralCharge(((1, 0), (0, 1)))
    keyed = sorted(vecs, key=lambda v: clockwise_key(z)(z(v)))
    phases = [z.phase(v) for v in keyed]
    assert phases == sorted(phases, reverse=True)


@settings(max_examples=8, deadline=None)
@given(st.integers(1, 4), st.integers(1, 4), st.integers(1, 4), st.integers(1, 4))
def test_product_invariance_random_charges(a, b, c, d):
    alg = TruncatedAlgebra(1, P, S, 4)
    old = _dilog_data(alg, Z_OLD, [(1, 0), (0, 1)])
    # both generators in the upper half plane
    new_charge = CentralCharge(((a, b), (-c, d)))
    new = wall_cross(old, new_charge)
    assert factor_check(new, mode="reference", reference=old)
    assert alg.equal(clockwise_product(wall_cross(new, Z_OLD)), clockwise_product(old))
