"""Finite abelian groups Z/m_1 x ... x Z/m_k, their characters and subsets.

Elements are coordinate tuples.  Internally every element is identified
with its little-endian mixed-radix index (first coordinate varies fastest),
and subsets are boolean masks over that enumeration.  Characters use the
same coordinates: the character with coefficients ``a`` sends ``x`` to
``exp(2 pi i sum_j a_j x_j / m_j)`` and has the same index as the element
``a``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, reduce
from typing import Iterable, Iterator, Sequence, Union

import numpy as np

from bourgainlab import kernels

Element = tuple[int, ...]
ElementLike = Union[int, Sequence[int]]

_FACTOR_RE = re.compile(r"^Z(\d+)(?:\^(\d+))?$")


@dataclass(frozen=True)
class GroupSpec:
    """The group Z/m_1 x ... x Z/m_k."""

    moduli: tuple[int, ...]

    def __post_init__(self):
        mods = tuple(int(m) for m in self.moduli)
        if not mods:
            raise ValueError("a group needs at least one cyclic factor")
        if any(m < 1 for m in mods):
            raise ValueError(f"moduli must be positive, got {mods}")
        object.__setattr__(self, "moduli", mods)

    @classmethod
    def parse(cls, text: str) -> "GroupSpec":
        """Parse ``"Z7"``, ``"Z3^4"``, ``"Z4xZ8"`` or combinations thereof."""
        mods: list[int] = []
        for part in text.replace(" ", "").split("x"):
            match = _FACTOR_RE.match(part)
            if match is None:
                raise ValueError(f"cannot parse group factor {part!r} in {text!r}")
            m = int(match.group(1))
            mods.extend([m] * int(match.group(2) or 1))
        return cls(tuple(mods))

    @classmethod
    def cyclic(cls, n: int) -> "GroupSpec":
        return cls((n,))

    def __str__(self) -> str:
        parts: list[str] = []
        i = 0
        while i < len(self.moduli):
            j = i
            while j < len(self.moduli) and self.moduli[j] == self.moduli[i]:
                j += 1
            run = j - i
            parts.append(f"Z{self.moduli[i]}" + (f"^{run}" if run > 1 else ""))
            i = j
        return "x".join(parts)

    @property
    def rank(self) -> int:
        return len(self.moduli)

    @cached_property
    def order(self) -> int:
        return math.prod(self.moduli)

    @cached_property
    def exponent(self) -> int:
        """lcm of the moduli; every character takes values in the exponent-th roots of unity."""
        return reduce(math.lcm, self.moduli, 1)

    @cached_property
    def is_cyclic_factor(self) -> bool:
        return self.rank == 1

    @cached_property
    def mod_array(self) -> np.ndarray:
        return np.array(self.moduli, dtype=np.int64)

    @cached_property
    def strides(self) -> np.ndarray:
        out = np.ones(self.rank, dtype=np.int64)
        for i in range(1, self.rank):
            out[i] = out[i - 1] * self.moduli[i - 1]
        return out

    @cached_property
    def digits(self) -> np.ndarray:
        """Coordinates of every element, row ``i`` being element ``i``."""
        idx = np.arange(self.order, dtype=np.int64)
        out = (idx[:, None] // self.strides[None, :]) % self.mod_array[None, :]
        out.setflags(write=False)
        return np.ascontiguousarray(out)

    @cached_property
    def _phase_weights(self) -> np.ndarray:
        return self.exponent // self.mod_array

    # -- single elements -------------------------------------------------

    @property
    def zero(self) -> Element:
        return (0,) * self.rank

    def element(self, x: ElementLike) -> Element:
        """Normalize an int (cyclic groups) or a coordinate sequence."""
        if isinstance(x, (int, np.integer)):
            if self.rank != 1:
                raise ValueError(f"integer element {x} given for non-cyclic group {self}")
            return (int(x) % self.moduli[0],)
        coords = tuple(int(c) for c in x)
        if len(coords) != self.rank:
            raise ValueError(f"element {coords} has wrong length for {self}")
        return tuple(c % m for c, m in zip(coords, self.moduli))

    def index(self, x: ElementLike) -> int:
        return int(sum(c * int(s) for c, s in zip(self.element(x), self.strides)))

    def decode(self, i: int) -> Element:
        return tuple(int(v) for v in self.digits[int(i)])

    def add(self, x: ElementLike, y: ElementLike) -> Element:
        return self.element([a + b for a, b in zip(self.element(x), self.element(y))])

    def neg(self, x: ElementLike) -> Element:
        return self.element([-a for a in self.element(x)])

    def sub(self, x: ElementLike, y: ElementLike) -> Element:
        return self.add(x, self.neg(y))

    def scale(self, k: int, x: ElementLike) -> Element:
        return self.element([k * a for a in self.element(x)])

    def render(self, x: ElementLike) -> str:
        return "(" + ",".join(str(c) for c in self.element(x)) + ")"

    # -- vectorized index arithmetic --------------------------------------

    def encode_digits(self, digits: np.ndarray) -> np.ndarray:
        return (np.asarray(digits, dtype=np.int64) % self.mod_array) @ self.strides

    def add_idx(self, i, j) -> np.ndarray:
        i = np.asarray(i, dtype=np.int64)
        j = np.asarray(j, dtype=np.int64)
        if self.rank == 1:
            return (i + j) % self.order
        return self.encode_digits(self.digits[i] + self.digits[j])

    def sub_idx(self, i, j) -> np.ndarray:
        i = np.asarray(i, dtype=np.int64)
        j = np.asarray(j, dtype=np.int64)
        if self.rank == 1:
            return (i - j) % self.order
        return self.encode_digits(self.digits[i] - self.digits[j])

    def neg_idx(self, i) -> np.ndarray:
        i = np.asarray(i, dtype=np.int64)
        if self.rank == 1:
            return (-i) % self.order
        return self.encode_digits(-self.digits[i])

    def scale_idx(self, k: int, i) -> np.ndarray:
        i = np.asarray(i, dtype=np.int64)
        if self.rank == 1:
            return (int(k) % self.order * i) % self.order
        return self.encode_digits((int(k) % self.mod_array) * self.digits[i])

    def apply_matrix_idx(self, matrix: np.ndarray, i) -> np.ndarray:
        """Image of indices under the coordinate map x -> M x (rows reduced mod m_r)."""
        i = np.asarray(i, dtype=np.int64)
        return self.encode_digits(self.digits[i] @ np.asarray(matrix, dtype=np.int64).T)

    # -- characters -------------------------------------------------------

    def phases(self, char_idx, elem_idx) -> np.ndarray:
        """Integer phases r with gamma(x) = exp(2 pi i r / exponent).

        Returns an array of shape ``(len(char_idx), len(elem_idx))``.
        """
        chars = self.digits[np.asarray(char_idx, dtype=np.int64)] * self._phase_weights
        elems = self.digits[np.asarray(elem_idx, dtype=np.int64)]
        return (chars @ elems.T) % self.exponent

    def circle_distance(self, char_idx, elem_idx) -> np.ndarray:
        """exponent * ||gamma(x)||_T as exact integers (distance to nearest integer)."""
        r = self.phases(char_idx, elem_idx)
        return np.minimum(r, self.exponent - r)

    def character_values(self, char_idx, elem_idx) -> np.ndarray:
        return np.exp(2j * np.pi * self.phases(char_idx, elem_idx) / self.exponent)


@dataclass(frozen=True)
class Character:
    """A character of ``spec`` given by its coefficient vector."""

    spec: GroupSpec
    coeffs: Element

    def __post_init__(self):
        object.__setattr__(self, "coeffs", self.spec.element(self.coeffs))

    @property
    def index(self) -> int:
        return self.spec.index(self.coeffs)

    def __call__(self, x: ElementLike) -> complex:
        i = self.spec.index(x)
        return complex(self.spec.character_values([self.index], [i])[0, 0])

    def __mul__(self, other: "Character") -> "Character":
        return Character(self.spec, self.spec.add(self.coeffs, other.coeffs))


class GroupSet:
    """A subset of a finite abelian group stored as a mask over its enumeration."""

    __slots__ = ("spec", "mask", "_size")

    def __init__(self, spec: GroupSpec, mask):
        mask = np.array(mask, dtype=bool)
        if mask.shape != (spec.order,):
            raise ValueError(f"mask of shape {mask.shape} does not match |G| = {spec.order}")
        mask.setflags(write=False)
        self.spec = spec
        self.mask = mask
        self._size = int(np.count_nonzero(mask))

    @classmethod
    def from_indices(cls, spec: GroupSpec, indices: Iterable[int]) -> "GroupSet":
        mask = np.zeros(spec.order, dtype=bool)
        idx = np.fromiter((int(i) for i in indices), dtype=np.int64)
        mask[idx % spec.order] = True
        return cls(spec, mask)

    @classmethod
    def from_elements(cls, spec: GroupSpec, elements: Iterable[ElementLike]) -> "GroupSet":
        return cls.from_indices(spec, (spec.index(x) for x in elements))

    @classmethod
    def empty(cls, spec: GroupSpec) -> "GroupSet":
        return cls(spec, np.zeros(spec.order, dtype=bool))

    @classmethod
    def full(cls, spec: GroupSpec) -> "GroupSet":
        return cls(spec, np.ones(spec.order, dtype=bool))

    @classmethod
    def zero(cls, spec: GroupSpec) -> "GroupSet":
        return cls.from_indices(spec, [0])

    @property
    def size(self) -> int:
        return self._size

    def __len__(self) -> int:
        return self._size

    def __bool__(self) -> bool:
        return self._size > 0

    def indices(self) -> np.ndarray:
        return np.flatnonzero(self.mask)

    def digits(self) -> np.ndarray:
        return np.ascontiguousarray(self.spec.digits[self.indices()])

    def __iter__(self) -> Iterator[Element]:
        for i in self.indices():
            yield self.spec.decode(i)

    def elements(self) -> list[Element]:
        return list(self)

    def __contains__(self, x: ElementLike) -> bool:
        return bool(self.mask[self.spec.index(x)])

    def _check(self, other: "GroupSet") -> None:
        if not isinstance(other, GroupSet):
            raise TypeError(f"expected GroupSet, got {type(other).__name__}")
        if other.spec != self.spec:
            raise ValueError(f"sets live in different groups: {self.spec} vs {other.spec}")

    def __eq__(self, other) -> bool:
        if not isinstance(other, GroupSet):
            return NotImplemented
        return self.spec == other.spec and bool(np.array_equal(self.mask, other.mask))

    def __hash__(self) -> int:
        return hash((self.spec, self.mask.tobytes()))

    def __le__(self, other: "GroupSet") -> bool:
        self._check(other)
        return not bool(np.any(self.mask & ~other.mask))

    def __ge__(self, other: "GroupSet") -> bool:
        return other <= self

    def __and__(self, other: "GroupSet") -> "GroupSet":
        self._check(other)
        return GroupSet(self.spec, self.mask & other.mask)

    def __or__(self, other: "GroupSet") -> "GroupSet":
        self._check(other)
        return GroupSet(self.spec, self.mask | other.mask)

    def difference(self, other: "GroupSet") -> "GroupSet":
        """Set-theoretic difference (not the group difference set)."""
        self._check(other)
        return GroupSet(self.spec, self.mask & ~other.mask)

    def translate(self, x: ElementLike) -> "GroupSet":
        """The translate ``x + self``."""
        out = np.zeros(self.spec.order, dtype=bool)
        out[self.spec.add_idx(self.spec.index(x), self.indices())] = True
        return GroupSet(self.spec, out)

    def density(self) -> Fraction:
        return Fraction(self._size, self.spec.order)

    def render(self) -> str:
        return "{" + ", ".join(self.spec.render(x) for x in self) + "}"

    def __repr__(self) -> str:
        if self._size <= 12:
            return f"GroupSet({self.spec}, {self.render()})"
        return f"GroupSet({self.spec}, size={self._size})"


# -- operations ---------------------------------------------------------------


def scalar_action(spec: GroupSpec, k: int, x: ElementLike) -> Element:
    """``k . x``, reduced coordinatewise."""
    return spec.scale(k, x)


def sum_counts(A: GroupSet, B: GroupSet) -> np.ndarray:
    """Integer array ``c`` with ``c[s] = #{(a, b) in A x B : a + b = s}``."""
    A._check(B)
    spec = A.spec
    return kernels.pair_counts(A.digits(), B.digits(), spec.mod_array, spec.strides, spec.order)


def negate_set(A: GroupSet) -> GroupSet:
    out = np.zeros(A.spec.order, dtype=bool)
    out[A.spec.neg_idx(A.indices())] = True
    return GroupSet(A.spec, out)


def dilate_set(k: int, A: GroupSet) -> GroupSet:
    out = np.zeros(A.spec.order, dtype=bool)
    out[A.spec.scale_idx(k, A.indices())] = True
    return GroupSet(A.spec, out)


def sumset(A: GroupSet, B: GroupSet) -> GroupSet:
    A._check(B)
    if not A or not B:
        return GroupSet.empty(A.spec)
    return GroupSet(A.spec, sum_counts(A, B) > 0)


def difference_set(A: GroupSet, B: GroupSet) -> GroupSet:
    return sumset(A, negate_set(B))


def set_arith(A: GroupSet, B: GroupSet | None, op: str | tuple) -> GroupSet:
    """Sumset, difference set, dilate ``("dilate", k)`` or negation of ``A``."""
    if isinstance(op, tuple):
        name, k = op
        if name != "dilate":
            raise ValueError(f"unknown set operation {op!r}")
        return dilate_set(int(k), A)
    if op == "negate":
        return negate_set(A)
    if B is None:
        raise ValueError(f"operation {op!r} needs a second set")
    if op == "sum":
        return sumset(A, B)
    if op == "difference":
        return difference_set(A, B)
    raise ValueError(f"unknown set operation {op!r}")


def iterated_sumset(A: GroupSet, plus: int, minus: int = 0) -> GroupSet:
    """``plus*A - minus*A`` (with the convention 0A = {0})."""
    out = GroupSet.zero(A.spec)
    for _ in range(plus):
        out = sumset(out, A)
    neg = negate_set(A)
    for _ in range(minus):
        out = sumset(out, neg)
    return out


def element_order(spec: GroupSpec, x: ElementLike) -> int:
    return reduce(
        math.lcm,
        (m // math.gcd(m, c) for c, m in zip(spec.element(x), spec.moduli)),
        1,
    )


def order_two_mask(spec: GroupSpec) -> np.ndarray:
    """Mask of the elements x != 0 with 2x = 0."""
    mask = spec.scale_idx(2, np.arange(spec.order)) == 0
    mask[0] = False
    return mask


def cyclic_subgroup(spec: GroupSpec, x: ElementLike) -> GroupSet:
    x = spec.element(x)
    n = element_order(spec, x)
    xi = spec.index(x)
    return GroupSet.from_indices(spec, (spec.scale_idx(j, xi) for j in range(n)))


def subgroup_generated(spec: GroupSpec, xs: Iterable[ElementLike]) -> GroupSet:
    """The smallest subgroup containing ``xs``."""
    out = GroupSet.zero(spec)
    for x in xs:
        if spec.element(x) in out:
            continue
        out = sumset(out, cyclic_subgroup(spec, x))
    return out


def is_subgroup(H: GroupSet) -> bool:
    return bool(H.mask[0]) and sumset(H, negate_set(H)) == H


def ruzsa_cover(S: GroupSet, B: GroupSet) -> GroupSet:
    """Greedy Ruzsa covering: a set X with ``S <= X + B - B``.

    Elements of ``S`` are scanned in enumeration order and kept whenever their
    translate of ``B`` is disjoint from the translates already kept, so
    ``|X| <= |S + B| / |B|``.
    """
    S._check(B)
    if not B:
        raise ValueError("ruzsa_cover needs a nonempty B")
    spec = S.spec
    diffs = difference_set(B, B).indices()
    blocked = np.zeros(spec.order, dtype=bool)
    chosen: list[int] = []
    for x in S.indices():
        if blocked[x]:
            continue
        chosen.append(int(x))
        blocked[spec.add_idx(x, diffs)] = True
    return GroupSet.from_indices(spec, chosen)


def doubling_constant(A: GroupSet) -> Fraction:
    """``|A + A| / |A|`` as an exact rational."""
    if not A:
        raise ValueError("doubling constant of the empty set is undefined")
    return Fraction(sumset(A, A).size, A.size)
