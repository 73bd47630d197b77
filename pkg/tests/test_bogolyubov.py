from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings

from bourgainlab.errors import PreconditionError
from bourgainlab.generators import gen_set
from bourgainlab.group import GroupSet, GroupSpec, iterated_sumset, subgroup_generated
from bourgainlab.bogolyubov import (
    best_containment,
    bogolyubov_containment,
    correlation_locate,
    holder_young_chain,
    pluennecke_chain_check,
    two_a_minus_two_a,
)
from bourgainlab.harmonic import measure

from strategies import group_and_set


def brute_2a_2a(A):
    spec = A.spec
    els = list(A)
    out = set()
    for a in els:
        for b in els:
            s = spec.add(a, b)
            for c in els:
                for d in els:
                    out.add(spec.sub(spec.sub(s, c), d))
    return out


@settings(max_examples=20)
@given(group_and_set(max_order=40))
def test_two_a_minus_two_a_oracle(gs):
    spec, A = gs
    assert set(two_a_minus_two_a(A)) == brute_2a_2a(A)


@settings(max_examples=30)
@given(group_and_set(max_order=300))
def test_containment_and_dimension(gs):
    spec, A = gs
    if A.density() < Fraction(1, 8):
        return
    res = bogolyubov_containment(A)
    D = two_a_minus_two_a(A)
    assert res.M <= D and res.verified and res.surrogate
    assert res.gamma_size <= 4 / float(A.density()) ** 2


@settings(max_examples=20)
@given(group_and_set(max_order=200))
def test_best_containment_dominates(gs):
    spec, A = gs
    best = best_containment(A)
    assert best.M <= two_a_minus_two_a(A)
    assert best.M.size >= bogolyubov_containment(A).M.size


def test_subgroup_containment_is_subgroup():
    spec = GroupSpec.parse("Z3^4")
    H = subgroup_generated(spec, [(1, 0, 0, 0), (0, 1, 0, 0)])
    res = bogolyubov_containment(H)
    assert res.M == H


def test_correlation_on_interval():
    spec = GroupSpec.cyclic(101)
    A = gen_set(spec, "interval(40)")
    res = correlation_locate(A)
    assert res.ok and res.value >= Fraction(1, 2) / (Fraction(sum(1 for _ in iterated_sumset(A, 2, 0)), A.size))


@settings(max_examples=30)
@given(group_and_set(max_order=150))
def test_pluennecke_on_random_sets(gs):
    spec, A = gs
    rep = pluennecke_chain_check(A)
    assert rep["ok"] and rep["size_3A_2A"] <= rep["bound"]


def test_holder_young_chain():
    spec = GroupSpec.parse("Z3^3")
    A = gen_set(spec, "random(0.4)", 3)
    V = subgroup_generated(spec, [(1, 0, 0)])
    rep = holder_young_chain(A, V, measure(V))
    assert rep["holder_ok"] and rep["young_ok"]
    with pytest.raises(PreconditionError):
        holder_young_chain(A, GroupSet.from_indices(spec, [0, 1]), measure(V))


def test_empty_set_rejected():
    spec = GroupSpec.cyclic(7)
    with pytest.raises(PreconditionError):
        bogolyubov_containment(GroupSet(spec, np.zeros(7, dtype=bool)))
    with pytest.raises(PreconditionError):
        pluennecke_chain_check(GroupSet(spec, np.zeros(7, dtype=bool)))
