import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bourgainlab.certificates import verify_threeap
from bourgainlab.errors import PreconditionError
from bourgainlab.generators import gen_set, greedy_apfree
from bourgainlab.group import GroupSet, GroupSpec
from bourgainlab.roth import (
    RothConfig,
    count_threeaps,
    density_increment_driver,
    eq_chain_identity,
    find_threeap,
    l2_increment_step,
    max_translate_density,
    order2_scan,
    restricted_sumset,
    two_scale_select,
)
from bourgainlab.suites import increment_instances
from bourgainlab.systems import subgroup_system

from strategies import group_and_set


def triple_loop(A):
    spec = A.spec
    els = list(A)
    S = set(els)
    return sum(spec.sub(spec.scale(2, y), x) in S for x, y in itertools.product(els, els))


@given(group_and_set(max_order=120))
def test_counts_match_triple_loop(gs):
    spec, A = gs
    want = triple_loop(A)
    assert count_threeaps(A, "brute").total == want
    assert count_threeaps(A, "fourier").total == want


def test_z5_and_apfree():
    assert count_threeaps(GroupSet.full(GroupSpec.cyclic(5))).total == 25
    free = greedy_apfree(GroupSpec.cyclic(101), 101)
    assert count_threeaps(free, "fourier").total == free.size
    assert find_threeap(free) is None


def test_unknown_mode():
    with pytest.raises(ValueError):
        count_threeaps(GroupSet.full(GroupSpec.cyclic(3)), "magic")


@given(group_and_set(max_order=80))
def test_find_threeap_is_valid(gs):
    spec, A = gs
    cert = find_threeap(A)
    if count_threeaps(A).nontrivial:
        assert cert is not None and verify_threeap(spec, A, cert)
    else:
        assert cert is None


def test_order2_degenerate_progression():
    spec = GroupSpec.cyclic(8)
    A = GroupSet.from_indices(spec, [1, 5])
    assert order2_scan(A) == (4,)
    res = density_increment_driver(A, subgroup_system(GroupSet.full(spec)))
    assert res.status == "certificate" and verify_threeap(spec, A, res.certificate)


def test_restricted_sumset():
    spec = GroupSpec.cyclic(10)
    A = GroupSet.from_indices(spec, [0, 1, 5])
    assert restricted_sumset(A).indices().tolist() == [1, 5, 6]


@settings(max_examples=25)
@given(st.sampled_from(["Z101", "Z3^4", "Z5xZ7", "Z8"]), st.integers(0, 10**6), st.data())
def test_eq_chain_identity(group, seed, data):
    spec = GroupSpec.parse(group)
    A = gen_set(spec, "random(0.3)", seed)
    x = spec.decode(data.draw(st.integers(0, spec.order - 1)))
    lhs, rhs = eq_chain_identity(A, x)
    assert abs(lhs - rhs) <= 1e-9


def test_max_translate_density_exact():
    spec = GroupSpec.cyclic(12)
    A = GroupSet.from_indices(spec, [0, 1, 2, 7])
    T = GroupSet.from_indices(spec, [0, 1])
    x, v = max_translate_density(A, T)
    assert v == 1 and {(x - t) % 12 for t in (0, 1)} <= {0, 1, 2, 7}


def test_increment_conclusion_when_fired():
    fired = 0
    for name, A, system, Delta, T, kappa, rho, d in increment_instances(0, 8):
        w = l2_increment_step(A, system, Delta, T, kappa, rho, d=d)
        if w is not None:
            fired += 1
            assert w.value >= (1 + Fraction(kappa) / 8) * w.alpha
            assert w.energy >= w.threshold
    assert fired > 0


def test_increment_rejects_large_rho():
    spec = GroupSpec.cyclic(9)
    G = GroupSet.full(spec)
    with pytest.raises(PreconditionError):
        l2_increment_step(GroupSet.zero(spec), subgroup_system(G), [0], G, Fraction(1, 4), Fraction(1, 2))


def test_two_scale_branches():
    spec = GroupSpec.cyclic(20)
    A = GroupSet.from_indices(spec, range(10))
    B1 = GroupSet.from_indices(spec, [19, 0, 1])
    res = two_scale_select(A, B1, GroupSet.zero(spec), Fraction(1, 2), Fraction(1, 2))
    assert res.branch == "increment" and res.value >= Fraction(3, 4) * Fraction(1, 2)
    full = GroupSet.full(spec)
    res = two_scale_select(A, full, full, Fraction(1, 2), Fraction(1, 4))
    assert res.branch == "centers" and min(res.values) >= Fraction(3, 8)


@pytest.mark.parametrize("seed", range(5))
def test_driver_certificates_z101(seed):
    spec = GroupSpec.cyclic(101)
    A = gen_set(spec, "random(0.4)", seed)
    res = density_increment_driver(A, subgroup_system(GroupSet.full(spec)), RothConfig(seed=seed))
    assert res.status == "certificate"
    assert verify_threeap(spec, A, res.certificate)
    assert res.certificate.kind == "proper"


def test_driver_exhausts_on_apfree():
    spec = GroupSpec.cyclic(101)
    free = greedy_apfree(spec, 101)
    res = density_increment_driver(free, subgroup_system(GroupSet.full(spec)))
    assert res.status == "exhausted" and res.certificate is None
    assert np.all([e["count"]["total"] == e["size_A"] for e in res.trace])
