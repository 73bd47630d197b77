import cmath
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bourgainlab.errors import PreconditionError
from bourgainlab.group import GroupSet, GroupSpec
from bourgainlab.harmonic import (
    DenseFunction,
    convolve,
    fourier,
    fourier_naive,
    inner,
    inverse,
    iterate,
    large_spectrum,
    lp_norm,
    measure,
    support,
    translate,
)
from strategies import elements, groups


def char_value(spec, gamma, x):
    return cmath.exp(2j * math.pi * sum(g * v / m for g, v, m in zip(gamma, x, spec.moduli)))


def oracle_fourier(f):
    spec = f.spec
    pts = [spec.decode(i) for i in range(spec.order)]
    return np.array([
        sum(f.values[i] * char_value(spec, gamma, x).conjugate() for i, x in enumerate(pts)) / spec.order
        for gamma in pts
    ])


def oracle_convolve(f, g):
    spec = f.spec
    out = np.zeros(spec.order, dtype=complex)
    for x in range(spec.order):
        for y in range(spec.order):
            out[x] += f.values[y] * g.values[spec.index(spec.sub(spec.decode(x), spec.decode(y)))]
    return out / spec.order


@st.composite
def functions(draw, spec):
    rng = np.random.default_rng(draw(st.integers(0, 2**32 - 1)))
    return DenseFunction(spec, rng.standard_normal(spec.order) + 1j * rng.standard_normal(spec.order))


@given(groups(48), st.data())
def test_fourier_matches_character_sum(spec, data):
    f = data.draw(functions(spec))
    assert np.allclose(fourier(f).values, oracle_fourier(f), atol=1e-10)
    assert np.allclose(fourier_naive(f).values, oracle_fourier(f), atol=1e-10)


@given(groups(48), st.data())
def test_convolution_matches_double_sum(spec, data):
    f, g = data.draw(functions(spec)), data.draw(functions(spec))
    ref = oracle_convolve(f, g)
    assert np.allclose(convolve(f, g).values, ref, atol=1e-10)
    assert np.allclose(convolve(f, g, "naive").values, ref, atol=1e-10)


@given(groups(512), st.data())
def test_parseval_inversion_convolution_theorem(spec, data):
    f, g = data.draw(functions(spec)), data.draw(functions(spec))
    F, G = fourier(f), fourier(g)
    assert abs(lp_norm(f, 2) ** 2 - np.sum(np.abs(F.values) ** 2)) < 1e-9
    assert np.max(np.abs(inverse(F).values - f.values)) < 1e-9
    assert np.max(np.abs(fourier(convolve(f, g)).values - F.values * G.values)) < 1e-9
    assert abs(inner(f, g) - F.inner(G)) < 1e-9


@given(groups(128), st.data())
def test_translation_and_iteration(spec, data):
    f = data.draw(functions(spec))
    x = data.draw(elements(spec))
    t = translate(x, f)
    for u in range(0, spec.order, max(1, spec.order // 7)):
        assert t.values[u] == f.values[spec.add_idx(spec.index(x), u)]
    assert np.allclose(iterate(f, 3).values, convolve(convolve(f, f), f).values, atol=1e-9)


def test_measure_and_point_mass():
    spec = GroupSpec.cyclic(12)
    A = GroupSet.from_indices(spec, [0, 5, 7])
    mu = measure(A)
    assert mu.is_measure()
    assert abs(mu.expectation() - 1) < 1e-12
    delta = DenseFunction.point_mass(spec)
    f = DenseFunction(spec, np.arange(12.0))
    assert np.allclose(convolve(f, delta).values, f.values)


def test_large_spectrum_of_subgroup():
    spec = GroupSpec.cyclic(12)
    H = GroupSet.from_indices(spec, [0, 4, 8])
    # 1_H^ is 1/4 on the annihilator {0,3,6,9} and 0 elsewhere
    assert large_spectrum(DenseFunction.indicator(H), 1.0).tolist() == [0, 3, 6, 9]
    with pytest.raises(PreconditionError):
        large_spectrum(DenseFunction(spec, np.zeros(12)), 0.5)


def test_support_and_json_round_trip():
    spec = GroupSpec.parse("Z3xZ2")
    f = DenseFunction(spec, [0, 1 + 2j, 0, -3, 0, 0.5])
    assert support(f).indices().tolist() == [1, 3, 5]
    assert np.array_equal(DenseFunction.from_json(spec, f.to_json()).values, f.values)
