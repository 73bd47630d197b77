"""Expectation-normalized function spaces on a finite abelian group.

Conventions: ``E_G f = |G|^-1 sum_x f(x)``, ``||f||_p = (E_G |f|^p)^(1/p)``,
``<f, g> = E_G f conj(g)``, ``f * g(x) = E_y f(y) g(x - y)`` and
``f^(gamma) = E_G f conj(gamma)`` so that ``f = sum_gamma f^(gamma) gamma``.
A measure is a nonnegative function with ``E_G mu = 1``; the uniform
measure on a set ``A`` is ``mu_A = (|G|/|A|) 1_A``.
"""

from __future__ import annotations

import json
from typing import Sequence

import numpy as np

from bourgainlab import kernels
from bourgainlab.errors import PreconditionError
from bourgainlab.group import ElementLike, GroupSet, GroupSpec, sum_counts

ZERO_THRESHOLD = 1e-12
# relative slack for threshold comparisons made on float transforms
SPECTRUM_RTOL = 1e-12


class DenseFunction:
    """A complex-valued function on ``spec`` indexed by element enumeration."""

    __slots__ = ("spec", "values")

    def __init__(self, spec: GroupSpec, values):
        values = np.array(values, dtype=np.complex128)
        if values.shape != (spec.order,):
            raise ValueError(f"expected {spec.order} values, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("function values must be finite")
        values.setflags(write=False)
        self.spec = spec
        self.values = values

    @classmethod
    def constant(cls, spec: GroupSpec, c: complex = 1.0) -> "DenseFunction":
        return cls(spec, np.full(spec.order, c, dtype=np.complex128))

    @classmethod
    def indicator(cls, A: GroupSet) -> "DenseFunction":
        return cls(A.spec, A.mask.astype(np.complex128))

    @classmethod
    def point_mass(cls, spec: GroupSpec, x: ElementLike = None) -> "DenseFunction":
        """The measure ``|G| 1_{x}`` (defaults to x = 0)."""
        v = np.zeros(spec.order, dtype=np.complex128)
        v[0 if x is None else spec.index(x)] = spec.order
        return cls(spec, v)

    def _check(self, other: "DenseFunction") -> None:
        if not isinstance(other, DenseFunction):
            raise TypeError(f"expected DenseFunction, got {type(other).__name__}")
        if other.spec != self.spec:
            raise ValueError(f"functions live on different groups: {self.spec} vs {other.spec}")

    def __add__(self, other: "DenseFunction") -> "DenseFunction":
        self._check(other)
        return DenseFunction(self.spec, self.values + other.values)

    def __sub__(self, other: "DenseFunction") -> "DenseFunction":
        self._check(other)
        return DenseFunction(self.spec, self.values - other.values)

    def __mul__(self, other) -> "DenseFunction":
        if isinstance(other, DenseFunction):
            self._check(other)
            return DenseFunction(self.spec, self.values * other.values)
        return DenseFunction(self.spec, self.values * complex(other))

    __rmul__ = __mul__

    def __neg__(self) -> "DenseFunction":
        return DenseFunction(self.spec, -self.values)

    def conj(self) -> "DenseFunction":
        return DenseFunction(self.spec, np.conj(self.values))

    def reflect(self) -> "DenseFunction":
        """``x -> f(-x)``."""
        return DenseFunction(self.spec, self.values[self.spec.neg_idx(np.arange(self.spec.order))])

    def __call__(self, x: ElementLike) -> complex:
        return complex(self.values[self.spec.index(x)])

    def expectation(self) -> complex:
        return complex(self.values.mean())

    def norm(self, p: float = 2.0) -> float:
        return lp_norm(self, p)

    def sup(self) -> float:
        return float(np.abs(self.values).max())

    def is_measure(self, tol: float = 1e-12) -> bool:
        v = self.values
        return (
            bool(np.all(np.abs(v.imag) <= tol))
            and float(v.real.min()) >= -tol
            and abs(float(v.real.mean()) - 1.0) <= tol
        )

    def to_json(self) -> str:
        return json.dumps([[float(z.real), float(z.imag)] for z in self.values])

    @classmethod
    def from_json(cls, spec: GroupSpec, text: str) -> "DenseFunction":
        pairs = json.loads(text)
        return cls(spec, [complex(re, im) for re, im in pairs])

    def __repr__(self) -> str:
        return f"DenseFunction({self.spec}, sup={self.sup():.4g})"


class DualFunction:
    """A complex-valued function on the dual group, indexed like elements."""

    __slots__ = ("spec", "values")

    def __init__(self, spec: GroupSpec, values):
        values = np.array(values, dtype=np.complex128)
        if values.shape != (spec.order,):
            raise ValueError(f"expected {spec.order} values, got shape {values.shape}")
        values.setflags(write=False)
        self.spec = spec
        self.values = values

    def __mul__(self, other: "DualFunction") -> "DualFunction":
        return DualFunction(self.spec, self.values * other.values)

    def __abs__(self) -> np.ndarray:
        return np.abs(self.values)

    def inner(self, other: "DualFunction") -> complex:
        """``sum_gamma F(gamma) conj(G(gamma))`` (counting measure on the dual)."""
        return complex(np.vdot(other.values, self.values))

    def __call__(self, gamma: ElementLike) -> complex:
        return complex(self.values[self.spec.index(gamma)])


def measure(A: GroupSet) -> DenseFunction:
    """The uniform probability measure ``mu_A``."""
    if not A:
        raise PreconditionError("mu_A needs A nonempty")
    return DenseFunction(A.spec, A.mask * (A.spec.order / A.size))


def lp_norm(f: DenseFunction, p: float) -> float:
    if p < 1:
        raise PreconditionError(f"L^p norm needs p >= 1, got {p}")
    a = np.abs(f.values)
    if np.isinf(p):
        return float(a.max())
    return float(np.mean(a**p) ** (1.0 / p))


def inner(f: DenseFunction, g: DenseFunction) -> complex:
    f._check(g)
    return complex(np.vdot(g.values, f.values) / f.spec.order)


def lp_structure(f: DenseFunction, g: DenseFunction, p: float) -> tuple[float, complex]:
    """``(||f||_p, <f, g>)``."""
    return lp_norm(f, p), inner(f, g)


def _grid(spec: GroupSpec, v: np.ndarray) -> np.ndarray:
    return v.reshape(spec.moduli, order="F")


def fourier(f: DenseFunction) -> DualFunction:
    spec = f.spec
    out = np.fft.fftn(_grid(spec, f.values)).ravel(order="F") / spec.order
    return DualFunction(spec, out)


def inverse(F: DualFunction) -> DenseFunction:
    spec = F.spec
    out = np.fft.ifftn(_grid(spec, F.values)).ravel(order="F") * spec.order
    return DenseFunction(spec, out)


def fourier_naive(f: DenseFunction, chunk: int = 256) -> DualFunction:
    """Direct O(|G|^2) evaluation of ``E_x f(x) conj(gamma(x))``."""
    spec = f.spec
    n = spec.order
    out = np.empty(n, dtype=np.complex128)
    elems = np.arange(n)
    for lo in range(0, n, chunk):
        chars = np.arange(lo, min(n, lo + chunk))
        out[chars] = np.conj(spec.character_values(chars, elems)) @ f.values
    return DualFunction(spec, out / n)


def convolve(f: DenseFunction, g: DenseFunction, mode: str = "fast") -> DenseFunction:
    f._check(g)
    spec = f.spec
    if mode == "fast":
        return inverse(fourier(f) * fourier(g))
    if mode == "naive":
        vals = kernels.convolve_naive(
            np.ascontiguousarray(f.values),
            np.ascontiguousarray(g.values),
            spec.digits,
            spec.mod_array,
            spec.strides,
        )
        return DenseFunction(spec, vals)
    raise ValueError(f"unknown convolution mode {mode!r}")


def iterate(f: DenseFunction, ell: int) -> DenseFunction:
    """The ``ell``-fold convolution power ``f^(ell)``."""
    if ell < 1:
        raise PreconditionError(f"iterated convolution needs ell >= 1, got {ell}")
    F = fourier(f)
    return inverse(DualFunction(f.spec, F.values**ell))


def translate(x: ElementLike, f: DenseFunction) -> DenseFunction:
    """``tau_x f(u) = f(x + u)``."""
    spec = f.spec
    idx = spec.add_idx(spec.index(x), np.arange(spec.order))
    return DenseFunction(spec, f.values[idx])


def large_spectrum(f: DenseFunction, eta: float) -> np.ndarray:
    """Character indices with ``|f^(gamma)| >= eta ||f||_1``, sorted."""
    l1 = lp_norm(f, 1)
    if l1 == 0:
        raise PreconditionError("large spectrum of the zero function is undefined")
    if not 0 < eta <= 1:
        raise PreconditionError(f"eta must lie in (0, 1], got {eta}")
    mags = np.abs(fourier(f).values)
    return np.flatnonzero(mags >= eta * l1 * (1 - SPECTRUM_RTOL))


def support(f: DenseFunction) -> GroupSet:
    return GroupSet(f.spec, np.abs(f.values) > ZERO_THRESHOLD)


# -- exact integer convolutions of indicators -------------------------------


def set_conv_counts(A: GroupSet, B: GroupSet) -> np.ndarray:
    """``|G| * (1_A * 1_B)`` as exact integers."""
    return sum_counts(A, B)


def indicator_conv_measure(A: GroupSet, T: GroupSet) -> tuple[np.ndarray, int]:
    """``1_A * mu_T`` as (integer numerators, denominator |T|)."""
    if not T:
        raise PreconditionError("mu_T needs T nonempty")
    return set_conv_counts(A, T), T.size


def character_indices(spec: GroupSpec, chars: Sequence[ElementLike]) -> np.ndarray:
    return np.array([spec.index(c) for c in chars], dtype=np.int64)
