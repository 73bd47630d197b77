from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bourgainlab.errors import BoundViolation, PreconditionError, SearchExhausted
from bourgainlab.group import GroupSet, GroupSpec, dilate_set, subgroup_generated
from bourgainlab.systems import (
    DEFAULT_CONSTANTS,
    TabulatedSystem,
    averaging_check,
    bohr_density_check,
    bohr_system,
    coset_progression,
    dilate_system,
    ell,
    image_system,
    intersect_systems,
    is_regular,
    regularity_scan,
    snap,
    subgroup_system,
    system_from_dict,
    verify_axioms,
)


def circle(q: Fraction) -> Fraction:
    q = q - (q.numerator // q.denominator)
    return min(q, 1 - q)


def oracle_bohr(spec, freqs, radius):
    """Exact rational membership scan."""
    out = []
    for i in range(spec.order):
        x = spec.decode(i)
        if all(circle(sum((Fraction(g * v, m) for g, v, m in zip(gam, x, spec.moduli)), Fraction(0))) <= radius
               for gam in freqs):
            out.append(i)
    return out


@st.composite
def bohr_instances(draw, order_max=300):
    n = draw(st.integers(5, order_max))
    spec = GroupSpec.cyclic(n)
    k = draw(st.integers(1, 3))
    freqs = [(draw(st.integers(0, n - 1)),) for _ in range(k)]
    delta = Fraction(draw(st.integers(1, 32)), 64)
    return spec, freqs, delta


def test_constants_match_reference_values():
    assert DEFAULT_CONSTANTS.C0 == 2**5 and DEFAULT_CONSTANTS.C1 == 2**6
    assert abs(ell(1) - 1) < 1e-15 and abs(ell(np.e ** -2) - 3) < 1e-12


def test_bohr_interval_example():
    spec = GroupSpec.cyclic(100)
    B = bohr_system(spec, [(1,)], Fraction(1, 20))
    assert sorted(B.realize(1).indices().tolist()) == [0, 1, 2, 3, 4, 5, 95, 96, 97, 98, 99]


def test_empty_frequency_set_is_whole_group():
    spec = GroupSpec.cyclic(30)
    assert bohr_system(spec, [], Fraction(1, 8)).realize(Fraction(1, 3)) == GroupSet.full(spec)


def test_coset_progression_example():
    spec = GroupSpec.cyclic(10)
    M = coset_progression(spec, [2], [(1,)])
    assert M.realize(1).indices().tolist() == [0, 1, 2, 8, 9]


@given(bohr_instances(), st.sampled_from([Fraction(1, 4), Fraction(1, 2), Fraction(1), Fraction(2)]))
def test_bohr_membership_matches_rational_oracle(inst, rho):
    spec, freqs, delta = inst
    B = bohr_system(spec, freqs, delta)
    assert B.realize(rho).indices().tolist() == oracle_bohr(spec, freqs, rho * delta)


@given(bohr_instances(200))
def test_bohr_axioms_with_declared_budget(inst):
    spec, freqs, delta = inst
    report = verify_axioms(bohr_system(spec, freqs, delta))
    assert report.passed, report.violations


@given(bohr_instances(300))
def test_bohr_density_bound(inst):
    spec, freqs, delta = inst
    B = bohr_system(spec, freqs, delta)
    distinct = len(set(freqs))
    assert B.size(1) >= delta ** distinct * spec.order
    bohr_density_check(B)


@given(bohr_instances(300), st.integers(1, 8))
def test_dilation_density_and_composition(inst, k):
    spec, freqs, delta = inst
    B = bohr_system(spec, freqs, delta)
    lam = Fraction(k, 8)
    D = dilate_system(B, lam)
    assert D.realize(1) == B.realize(lam)
    assert D.size(1) >= (lam / 2) ** B.declared_dimension * B.size(1)
    assert dilate_system(dilate_system(B, lam), Fraction(1, 2)).realize(1) == dilate_system(B, lam / 2).realize(1)


def test_dilate_rejects_bad_factor():
    B = bohr_system(GroupSpec.cyclic(11), [(1,)], Fraction(1, 4))
    with pytest.raises(PreconditionError):
        dilate_system(B, 2)
    assert dilate_system(B, 1) is B


def test_intersection_of_subgroups():
    spec = GroupSpec.cyclic(12)
    H1 = subgroup_generated(spec, [(2,)])
    H2 = subgroup_generated(spec, [(3,)])
    S = intersect_systems([subgroup_system(H1), subgroup_system(H2)])
    assert S.realize(1) == (H1 & H2)
    assert verify_axioms(S).passed


def test_self_intersection_doubles_dimension():
    B = bohr_system(GroupSpec.cyclic(101), [(3,)], Fraction(1, 4))
    S = intersect_systems([B, B])
    assert S.realize(1) == B.realize(1)
    assert S.declared_dimension == 2 * (B.declared_dimension + B.declared_dimension)


@given(bohr_instances(250), st.integers(1, 5), st.integers(1, 40))
def test_intersection_density(inst, L, w):
    spec, freqs, delta = inst
    B = bohr_system(spec, freqs, delta)
    M = coset_progression(spec, [L], [(w % spec.order,)])
    S = intersect_systems([B, M])
    bound = Fraction(1, 4 ** (B.declared_dimension + M.declared_dimension)) * B.density(1) * M.density(1)
    assert S.density(1) >= bound
    assert verify_axioms(S).passed


def test_image_examples():
    spec = GroupSpec.cyclic(5)
    H = GroupSet.full(spec)
    assert image_system(subgroup_system(H), -2).realize(1) == H
    z64 = GroupSpec.cyclic(64)
    B = bohr_system(z64, [(5,)], Fraction(1, 4))
    img = image_system(B, 3)
    assert img.realize(1) == dilate_set(3, B.realize(1))
    assert verify_axioms(img).passed


def test_image_rejects_non_homomorphism():
    spec = GroupSpec((2, 3))
    B = subgroup_system(GroupSet.full(spec))
    with pytest.raises((PreconditionError, ValueError)):
        image_system(B, np.array([[0, 1], [1, 0]]))


def test_corrupted_family_flags_zero():
    spec = GroupSpec.cyclic(20)
    good = bohr_system(spec, [(1,)], Fraction(1, 4))
    table = {r: good.realize(r) for r in (Fraction(1, 2), Fraction(1), Fraction(2))}
    table[Fraction(1)] = table[Fraction(1)].difference(GroupSet.zero(spec))
    report = verify_axioms(TabulatedSystem(spec, table, 6), radii=(1,))
    assert not report.passed
    assert any(v["axiom"] == "zero" for v in report.violations)


def test_cprog_axioms_with_budget_3d():
    spec = GroupSpec.parse("Z3^3xZ4")
    H = subgroup_generated(spec, [(1, 0, 0, 0)])
    M = coset_progression(spec, [1, 1], [(0, 1, 0, 0), (0, 0, 0, 1)], H)
    assert M.declared_dimension == 6
    assert verify_axioms(M, budget_d=6).passed


def test_system_json_round_trip():
    spec = GroupSpec.cyclic(97)
    B = intersect_systems([dilate_system(bohr_system(spec, [(3,)], Fraction(1, 4)), Fraction(1, 2)),
                           image_system(coset_progression(spec, [4], [(2,)]), 2)])
    again = system_from_dict(spec, B.to_dict())
    for r in (Fraction(1, 2), 1, 2):
        assert again.realize(r) == B.realize(r)


def test_regularity_subgroup_and_interval():
    spec = GroupSpec.cyclic(1000)
    assert is_regular(subgroup_system(GroupSet.full(spec)), 1)
    res = regularity_scan(coset_progression(spec, [100], [(1,)]), d=1)
    assert Fraction(1, 2) <= res.lam <= 1


def test_regularity_with_tiny_constant_fails():
    spec = GroupSpec.cyclic(1009)
    B = bohr_system(spec, [(17,), (401,)], Fraction(3, 8))
    with pytest.raises(SearchExhausted):
        regularity_scan(B, d=2, constants=DEFAULT_CONSTANTS.override(C0=1))


@given(bohr_instances(1009))
def test_averaging_point_mass_and_ball(inst):
    spec, freqs, delta = inst
    B = bohr_system(spec, freqs, delta)
    d = len(freqs)
    try:
        reg = regularity_scan(B, d=d)
    except SearchExhausted:
        return
    rho = Fraction(1, 64 * d)
    assert averaging_check(reg.system, GroupSet.zero(spec), rho, d=d) == 0
    averaging_check(reg.system, reg.system.realize(rho), rho, d=d)


def test_averaging_rejects_support_outside():
    spec = GroupSpec.cyclic(1009)
    B = regularity_scan(bohr_system(spec, [(1,)], Fraction(1, 4)), d=1).system
    with pytest.raises(PreconditionError):
        averaging_check(B, GroupSet.from_indices(spec, [500]), Fraction(1, 64), d=1)


def test_snap_and_bad_radius():
    assert snap(0.25) == Fraction(1, 4)
    with pytest.raises(PreconditionError):
        bohr_system(GroupSpec.cyclic(7), [(1,)], Fraction(1, 4)).realize(0)


def test_dilate_density_violation_detected():
    spec = GroupSpec.cyclic(16)
    fake = TabulatedSystem(spec, {Fraction(1): GroupSet.full(spec), Fraction(1, 8): GroupSet.zero(spec)}, 0)
    with pytest.raises(BoundViolation):
        dilate_system(fake, Fraction(1, 8)).realize(1)
