import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given

from bourgainlab import _kernels_py, kernels
from bourgainlab.group import GroupSet

from strategies import group_and_set

try:
    from bourgainlab import _kernels as compiled
except ImportError:
    compiled = None


def brute_pairs(A, B):
    spec = A.spec
    out = np.zeros(spec.order, dtype=np.int64)
    for a in A:
        for b in B:
            out[spec.index(spec.add(a, b))] += 1
    return out


@given(group_and_set(max_order=100), group_and_set(max_order=100))
def test_pair_counts_oracle(gs, _):
    spec, A = gs
    B = GroupSet(spec, np.roll(A.mask, 1))
    args = (A.digits(), B.digits(), spec.mod_array, spec.strides, spec.order)
    want = brute_pairs(A, B)
    assert np.array_equal(_kernels_py.pair_counts(*args), want)
    assert np.array_equal(kernels.pair_counts(*args), want)


@given(group_and_set(max_order=100))
def test_convolve_backends_agree(gs):
    spec, _ = gs
    rng = np.random.default_rng(spec.order)
    f = rng.standard_normal(spec.order) + 0j
    g = rng.standard_normal(spec.order) + 0j
    args = (f, g, spec.digits, spec.mod_array, spec.strides)
    n = spec.order
    want = np.array([sum(f[y] * g[spec.sub_idx(x, y)] for y in range(n)) / n for x in range(n)])
    assert np.allclose(_kernels_py.convolve_naive(*args), want, atol=1e-12)
    assert np.allclose(kernels.convolve_naive(*args), want, atol=1e-12)


@pytest.mark.skipif(compiled is None, reason="extension not built")
def test_compiled_backend_selected():
    assert kernels.BACKEND == "cython"


def test_pure_env_forces_fallback():
    env = dict(os.environ, BOURGAINLAB_PURE="1")
    out = subprocess.run([sys.executable, "-c", "from bourgainlab import kernels; print(kernels.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
