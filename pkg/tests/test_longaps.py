from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings

from bourgainlab.certificates import verify_in_sumset
from bourgainlab.errors import PreconditionError, SearchExhausted
from bourgainlab.generators import gen_set
from bourgainlab.group import GroupSet, GroupSpec, is_subgroup, subgroup_generated, sumset
from bourgainlab.harmonic import DenseFunction, lp_norm, translate
from bourgainlab.longaps import (
    almost_period_margins,
    choose_p,
    croot_sisask_search,
    extract_ap_or_subgroup,
    find_long_structure,
    longest_ap_in,
    lp_chain_check,
    packing_translate,
    period_subgroup,
    smoothing_error,
    verify_almost_periods,
)
from bourgainlab.systems import bohr_system, subgroup_system

from strategies import group_and_set


def self_conv(A):
    spec = A.spec
    r = np.zeros(spec.order)
    for a in A:
        for b in A:
            r[spec.index(spec.add(a, b))] += 1
    return r / A.size


@settings(max_examples=30)
@given(group_and_set(max_order=150))
def test_lp_chain_exact(gs):
    spec, A = gs
    for p in (2, 4, 6):
        rep = lp_chain_check(A, p)
        assert rep["first_ok"] and rep["second_ok"]


def test_lp_chain_rejects_odd_p():
    A = GroupSet.full(GroupSpec.cyclic(5))
    with pytest.raises(PreconditionError):
        lp_chain_check(A, 3)


def test_almost_period_margins_match_float_norms():
    spec = GroupSpec.cyclic(60)
    A = gen_set(spec, "interval(12)")
    f = DenseFunction(spec, self_conv(A))
    R = GroupSet.from_indices(spec, [0, 1, 2, 5])
    for x, (lhs, rhs) in almost_period_margins(A, R, 4).items():
        g = f - translate(spec.decode(x), f)
        want = 2**4 * lp_norm(g, 4) ** 4 / lp_norm(f, 4) ** 4
        assert lhs / rhs == pytest.approx(want, rel=1e-9)


def test_verify_almost_periods_flags_far_shift():
    spec = GroupSpec.cyclic(60)
    A = gen_set(spec, "interval(12)")
    ok, bad = verify_almost_periods(A, GroupSet.from_indices(spec, [0, 1, 30]), 4)
    assert not ok and bad == [30]


def test_smoothing_subgroup_exact():
    z = GroupSpec.parse("Z3^4xZ2")
    H = subgroup_generated(z, [(1, 0, 0, 0, 0), (0, 0, 0, 0, 1)])
    err, _ = smoothing_error(H, H, H, 4, 2)
    assert err <= 1e-12


@pytest.mark.parametrize("seed", range(4))
def test_croot_sisask_reverifies(seed):
    spec = GroupSpec.cyclic(503)
    A = gen_set(spec, "interval(20)")
    K = sumset(A, A).size / A.size
    w = croot_sisask_search(A, A, GroupSet.full(spec), 4, 2, K**-0.5, seed=seed)
    err, scale = smoothing_error(A, A, w.X, 4, 2)
    assert err <= w.theta * scale and w.X.size >= 2


def test_croot_sisask_exhausts_and_checks_theta():
    spec = GroupSpec.cyclic(503)
    A = gen_set(spec, "interval(20)")
    G = GroupSet.full(spec)
    with pytest.raises(SearchExhausted):
        croot_sisask_search(A, A, G, 4, 2, 1e-6)
    with pytest.raises(PreconditionError):
        croot_sisask_search(A, A, G, 4, 2, 1.0)


def test_packing_translate():
    spec = GroupSpec.cyclic(100)
    A = gen_set(spec, "interval(20)")
    f = DenseFunction(spec, self_conv(A))
    T = GroupSet.from_indices(spec, [98, 99, 0, 1, 2])
    x = packing_translate(f, T, 8)
    S = sumset(A, A)
    assert all(spec.add(x, t) in S for t in T)
    with pytest.raises(PreconditionError):
        packing_translate(f, GroupSet.from_indices(spec, range(4)), 2)
    with pytest.raises(PreconditionError):
        packing_translate(f, GroupSet.from_indices(spec, [0, 50]), 8)


def test_extraction_windows():
    sub = extract_ap_or_subgroup(subgroup_system(GroupSet.full(GroupSpec.parse("Z2^12"))), 1)
    assert sub.kind == "subgroup" and is_subgroup(sub.T)
    ap = extract_ap_or_subgroup(bohr_system(GroupSpec.cyclic(2003), [(1,)], Fraction(1, 4), declared_dimension=1), 1)
    assert ap.kind == "proper_ap" and ap.T.size == ap.N
    for e in (sub, ap):
        lo, hi = e.window
        assert lo <= e.T.size <= hi


def test_extraction_preconditions():
    with pytest.raises(PreconditionError):
        extract_ap_or_subgroup(subgroup_system(GroupSet.full(GroupSpec.cyclic(30))), 1)


def test_longest_ap_in():
    spec = GroupSpec.cyclic(50)
    R = GroupSet.from_indices(spec, [3, 4, 5, 6, 20, 30])
    assert longest_ap_in(R, 10) == ((3,), (1,), 4)
    assert longest_ap_in(R, 2)[2] == 2
    assert longest_ap_in(GroupSet.full(GroupSpec.cyclic(7)), 20)[2] == 7


def test_period_subgroup():
    spec = GroupSpec.cyclic(12)
    A = GroupSet.from_indices(spec, [1, 4, 7, 10])
    assert period_subgroup(A).indices().tolist() == [0, 3, 6, 9]
    assert period_subgroup(gen_set(GroupSpec.cyclic(101), "interval(10)")).size == 1


def test_choose_p():
    assert choose_p(50, 99 / 50) == 4
    assert choose_p(1, 3.0) == 2
    assert choose_p(10**6, 1.0) % 2 == 0


def test_interval_end_to_end():
    spec = GroupSpec.cyclic(10007)
    A = gen_set(spec, "interval(50)")
    res = find_long_structure(A)
    cert = res.certificate
    assert cert.kind == "proper_ap" and cert.length >= 8
    assert verify_in_sumset(spec, A, cert)
    assert len(set(cert.elements(spec))) == cert.length


def test_coset_end_to_end():
    z = GroupSpec.parse("Z3^4xZ2")
    C = gen_set(z, "coset([1,0,0,0,0] [0,0,0,0,1];[0,0,1,2,0])")
    res = find_long_structure(C)
    assert res.certificate.kind == "coset" and res.trace["route"] == "coset"
    assert set(res.certificate.elements(z)) == set(sumset(C, C))
