"""Compare the compiled kernels with the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5]
"""

import timeit

import click
import numpy as np

from bourgainlab import _kernels_py
from bourgainlab.group import GroupSpec

try:
    from bourgainlab import _kernels as _compiled
except ImportError:
    _compiled = None


def _case_pairs(spec, density, rng):
    a = spec.digits[rng.random(spec.order) < density]
    b = spec.digits[rng.random(spec.order) < density]
    return (a, b, spec.mod_array, spec.strides, spec.order)


def _case_conv(spec, rng):
    f = rng.standard_normal(spec.order) + 1j * rng.standard_normal(spec.order)
    g = rng.standard_normal(spec.order) + 1j * rng.standard_normal(spec.order)
    return (f, g, spec.digits, spec.mod_array, spec.strides)


@click.command()
@click.option("--repeat", default=5, show_default=True)
@click.option("--seed", default=0, show_default=True)
def main(repeat, seed):
    rng = np.random.default_rng(seed)
    cases = [
        ("pair_counts", "Z1009", _case_pairs(GroupSpec.parse("Z1009"), 0.3, rng)),
        ("pair_counts", "Z3^6xZ2", _case_pairs(GroupSpec.parse("Z3^6xZ2"), 0.3, rng)),
        ("pair_counts", "Z4001", _case_pairs(GroupSpec.parse("Z4001"), 0.3, rng)),
        ("convolve_naive", "Z256", _case_conv(GroupSpec.parse("Z256"), rng)),
        ("convolve_naive", "Z4^4", _case_conv(GroupSpec.parse("Z4^4"), rng)),
        ("convolve_naive", "Z1009", _case_conv(GroupSpec.parse("Z1009"), rng)),
    ]
    click.echo(f"{'kernel':16s}{'group':10s}{'python ms':>12s}{'cython ms':>12s}{'speedup':>10s}")
    for name, group, args in cases:
        py = min(timeit.repeat(lambda: getattr(_kernels_py, name)(*args), number=1, repeat=repeat)) * 1e3
        if _compiled is None:
            click.echo(f"{name:16s}{group:10s}{py:12.2f}{'n/a':>12s}{'':>10s}")
            continue
        a = getattr(_kernels_py, name)(*args)
        b = getattr(_compiled, name)(*args)
        if not np.allclose(a, b, atol=1e-9):
            raise SystemExit(f"{name} on {group}: backends disagree")
        cy = min(timeit.repeat(lambda: getattr(_compiled, name)(*args), number=1, repeat=repeat)) * 1e3
        click.echo(f"{name:16s}{group:10s}{py:12.2f}{cy:12.2f}{py / cy:9.1f}x")


if __name__ == "__main__":
    main()
