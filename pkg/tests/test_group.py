import itertools
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from bourgainlab.group import (
    GroupSet,
    GroupSpec,
    cyclic_subgroup,
    difference_set,
    doubling_constant,
    element_order,
    is_subgroup,
    iterated_sumset,
    negate_set,
    ruzsa_cover,
    scalar_action,
    set_arith,
    subgroup_generated,
    sum_counts,
    sumset,
)
from strategies import elements, group_and_set, groups, subsets


def brute_sumset(spec, A, B):
    return {spec.add(a, b) for a in A for b in B}


def test_parse_and_render():
    spec = GroupSpec.parse("Z3^4xZ2")
    assert spec.moduli == (3, 3, 3, 3, 2)
    assert spec.order == 162
    assert spec.exponent == 6
    assert GroupSpec.parse(str(spec)) == spec
    assert GroupSpec.parse("Z1009").moduli == (1009,)


@pytest.mark.parametrize("text", ["", "Zx", "Q5", "Z0"])
def test_parse_rejects(text):
    with pytest.raises(ValueError):
        GroupSpec.parse(text)


def test_enumeration_is_little_endian():
    spec = GroupSpec((3, 4))
    assert spec.decode(1) == (1, 0)
    assert spec.decode(3) == (0, 1)
    assert [spec.index(spec.decode(i)) for i in range(12)] == list(range(12))


def test_scalar_action_negative():
    spec = GroupSpec((3, 4))
    assert scalar_action(spec, -2, (1, 2)) == (1, 0)


def test_small_sumset():
    spec = GroupSpec.cyclic(5)
    A = GroupSet.from_indices(spec, [0, 1])
    assert sumset(A, A).indices().tolist() == [0, 1, 2]


def test_interval_doubling():
    spec = GroupSpec.cyclic(100)
    A = GroupSet.from_indices(spec, range(10))
    assert doubling_constant(A) == Fraction(19, 10)
    assert iterated_sumset(A, 3, 2).size == 46


def test_subgroups():
    assert cyclic_subgroup(GroupSpec.cyclic(8), (2,)).indices().tolist() == [0, 2, 4, 6]
    spec = GroupSpec((4, 4))
    H = subgroup_generated(spec, [(1, 0), (0, 2)])
    assert H.size == 8 and is_subgroup(H)
    assert not is_subgroup(GroupSet.from_indices(spec, [0, 1]))


def test_ruzsa_cover_of_cyclic_group():
    spec = GroupSpec.cyclic(10)
    X = ruzsa_cover(GroupSet.full(spec), GroupSet.from_indices(spec, range(5)))
    assert X.size == 2


@given(group_and_set(64), st.data())
def test_sumset_matches_brute(gs, data):
    spec, A = gs
    B = data.draw(subsets(spec))
    assert set(sumset(A, B)) == brute_sumset(spec, A, B)
    counts = sum_counts(A, B)
    for x in range(spec.order):
        brute = sum(1 for a in A for b in B if spec.add(a, b) == spec.decode(x))
        assert counts[x] == brute


@given(group_and_set(128), st.data())
def test_set_arith_ops(gs, data):
    spec, A = gs
    B = data.draw(subsets(spec))
    assert set_arith(A, B, "sum") == sumset(A, B)
    assert set_arith(A, B, "difference") == difference_set(A, B)
    assert difference_set(A, B) == sumset(A, negate_set(B))
    assert negate_set(negate_set(A)) == A


@given(groups(128), st.data())
def test_group_axioms(spec, data):
    x, y, z = (data.draw(elements(spec)) for _ in range(3))
    assert spec.add(spec.add(x, y), z) == spec.add(x, spec.add(y, z))
    assert spec.add(x, y) == spec.add(y, x)
    assert spec.add(x, spec.neg(x)) == spec.zero
    k = data.draw(st.integers(-20, 20))
    assert spec.scale(k, x) == scalar_action(spec, k, x)
    assert spec.scale(element_order(spec, x), x) == spec.zero


@given(group_and_set(64))
def test_subgroup_generated_is_closed(gs):
    spec, A = gs
    gens = list(itertools.islice(A, 3))
    H = subgroup_generated(spec, gens)
    assert is_subgroup(H)
    assert all(g in H for g in gens)


@given(group_and_set(128))
def test_ruzsa_cover_covers(gs):
    spec, A = gs
    S = sumset(A, A)
    X = ruzsa_cover(S, A)
    assert S <= sumset(X, difference_set(A, A))


@given(group_and_set(128))
def test_doubling_at_least_one(gs):
    _, A = gs
    assert doubling_constant(A) >= 1
