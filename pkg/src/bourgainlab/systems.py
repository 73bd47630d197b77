"""Bourgain systems: Bohr sets, coset progressions and their calculus.

A system is a family ``rho -> B_rho`` of subsets realized lazily and
memoized on exact rational radii.  Each system carries a *declared*
dimension ``d`` which is the covering budget ``|X_rho| <= 2^d`` that
``verify_axioms`` checks against; it is never inferred.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from bourgainlab.errors import BoundViolation, PreconditionError, SearchExhausted
from bourgainlab.group import (
    ElementLike,
    GroupSet,
    GroupSpec,
    element_order,
    is_subgroup,
    negate_set,
    ruzsa_cover,
    sum_counts,
    sumset,
)
from bourgainlab.harmonic import convolve, measure, support

RADIUS_DENOMINATOR = 2**32


@dataclass(frozen=True)
class Constants:
    """Absolute constants and desk-scale tunables.

    ``C0`` and ``C1`` are the regularity and averaging constants.  The
    remaining fields are small constants the theory leaves unspecified.
    """

    C0: int = 32
    C1: int = 64
    c_ann: Fraction = Fraction(1, 8)
    c_step: Fraction = Fraction(1, 64)
    chang: int = 16
    control: int = 4
    regularity_points: int = 41
    dilate_points: int = 64

    def override(self, **kwargs) -> "Constants":
        return replace(self, **kwargs)

    def to_dict(self) -> dict:
        return {
            "C0": self.C0,
            "C1": self.C1,
            "c_ann": str(self.c_ann),
            "c_step": str(self.c_step),
            "chang": self.chang,
            "control": self.control,
            "regularity_points": self.regularity_points,
            "dilate_points": self.dilate_points,
        }


DEFAULT_CONSTANTS = Constants()


def ell(x: float) -> float:
    """``log(e/x)``, the logarithmic scale used for density losses."""
    return 1.0 - math.log(x)


def snap(r) -> Fraction:
    """Exact rational radius; floats are snapped to denominator <= 2^32."""
    if isinstance(r, Fraction):
        return r
    if isinstance(r, (int, np.integer)):
        return Fraction(int(r))
    if isinstance(r, str):
        return Fraction(r)
    return Fraction(float(r)).limit_denominator(RADIUS_DENOMINATOR)


def _floor(q: Fraction) -> int:
    return q.numerator // q.denominator


class BourgainSystem:
    """Base class.  Subclasses implement ``_realize(rho)`` and ``to_dict``."""

    kind = "abstract"

    def __init__(self, spec: GroupSpec, declared_dimension: int):
        if declared_dimension < 0:
            raise ValueError(f"dimension must be nonnegative, got {declared_dimension}")
        self.spec = spec
        self.declared_dimension = int(declared_dimension)
        self._cache: dict[Fraction, GroupSet] = {}
        self._lock = threading.Lock()

    def realize(self, rho=1) -> GroupSet:
        rho = snap(rho)
        if rho <= 0:
            raise PreconditionError(f"radius must be positive, got {rho}")
        hit = self._cache.get(rho)
        if hit is not None:
            return hit
        out = self._realize(rho)
        with self._lock:
            return self._cache.setdefault(rho, out)

    def _realize(self, rho: Fraction) -> GroupSet:
        raise NotImplementedError

    def cached_radii(self) -> list[Fraction]:
        return sorted(self._cache)

    def size(self, rho=1) -> int:
        return self.realize(rho).size

    def density(self, rho=1) -> Fraction:
        return self.realize(rho).density()

    def to_dict(self) -> dict:
        raise NotImplementedError

    def __repr__(self) -> str:
        return f"<{type(self).__name__} on {self.spec}, d={self.declared_dimension}>"


class BohrSystem(BourgainSystem):
    """``B_rho = {x : ||gamma(x)||_T <= rho * delta for gamma in Gamma}``."""

    kind = "bohr"

    def __init__(self, spec: GroupSpec, freqs: Iterable[ElementLike], delta, declared_dimension=None):
        idx = sorted({spec.index(g) for g in freqs})
        delta = snap(delta)
        if delta <= 0:
            raise PreconditionError(f"Bohr radius must be positive, got {delta}")
        if declared_dimension is None:
            declared_dimension = 6 * len(idx)
        super().__init__(spec, declared_dimension)
        self.freqs = np.array(idx, dtype=np.int64)
        self.delta = delta
        self._maxdist = None

    @property
    def rank(self) -> int:
        return len(self.freqs)

    def max_distance(self) -> np.ndarray:
        """``exponent * max_gamma ||gamma(x)||_T`` for every x, as integers."""
        if self._maxdist is None:
            spec = self.spec
            out = np.zeros(spec.order, dtype=np.int64)
            elems = np.arange(spec.order)
            for lo in range(0, len(self.freqs), 64):
                block = spec.circle_distance(self.freqs[lo:lo + 64], elems)
                np.maximum(out, block.max(axis=0), out=out)
            self._maxdist = out
        return self._maxdist

    def _realize(self, rho):
        bound = _floor(rho * self.delta * self.spec.exponent)
        return GroupSet(self.spec, self.max_distance() <= bound)

    def to_dict(self):
        return {
            "kind": "bohr",
            "freqs": [list(self.spec.decode(i)) for i in self.freqs],
            "delta": str(self.delta),
            "dimension": self.declared_dimension,
        }


class CosetProgressionSystem(BourgainSystem):
    """``M_rho = [-rho L_1, rho L_1] w_1 + ... + [-rho L_d, rho L_d] w_d + H``."""

    kind = "cprog"

    def __init__(self, spec: GroupSpec, lengths: Sequence, generators: Sequence[ElementLike],
                 subgroup: GroupSet | None = None, declared_dimension=None):
        if len(lengths) != len(generators):
            raise ValueError("lengths and generators must have the same length")
        lengths = tuple(snap(L) for L in lengths)
        if any(L < 0 for L in lengths):
            raise ValueError("progression lengths must be nonnegative")
        if subgroup is None:
            subgroup = GroupSet.zero(spec)
        if subgroup.spec != spec or not is_subgroup(subgroup):
            raise PreconditionError("coset progression needs a subgroup H of the same group")
        rank = sum(1 for L in lengths if L > 0)
        if declared_dimension is None:
            declared_dimension = 3 * rank
        super().__init__(spec, declared_dimension)
        self.lengths = lengths
        self.generators = tuple(spec.element(w) for w in generators)
        self.subgroup = subgroup

    def _realize(self, rho):
        out = self.subgroup
        for L, w in zip(self.lengths, self.generators):
            k = _floor(rho * L)
            if k == 0:
                continue
            k = min(k, element_order(self.spec, w))
            wi = self.spec.index(w)
            steps = np.arange(-k, k + 1)
            prog = GroupSet.from_indices(self.spec, (self.spec.scale_idx(int(j), wi) for j in steps))
            out = sumset(out, prog)
        return out

    def to_dict(self):
        gens = sorted({self.spec.index(x) for x in _subgroup_generators(self.subgroup)})
        return {
            "kind": "cprog",
            "lengths": [str(L) for L in self.lengths],
            "generators": [list(w) for w in self.generators],
            "subgroup": [list(self.spec.decode(i)) for i in gens],
            "dimension": self.declared_dimension,
        }


def _subgroup_generators(H: GroupSet) -> list:
    from bourgainlab.group import subgroup_generated

    gens: list = []
    cur = GroupSet.zero(H.spec)
    for x in H:
        if x not in cur:
            gens.append(x)
            cur = subgroup_generated(H.spec, gens)
    return gens


class DilateSystem(BourgainSystem):
    """``(B_lambda)_rho = B_{lambda rho}``; checks ``|B_lambda| >= (lambda/2)^d |B|``."""

    kind = "dilate"

    def __init__(self, child: BourgainSystem, lam):
        lam = snap(lam)
        if not 0 < lam <= 1:
            raise PreconditionError(f"dilation factor must lie in (0, 1], got {lam}")
        super().__init__(child.spec, child.declared_dimension)
        self.child = child
        self.lam = lam

    def _realize(self, rho):
        out = self.child.realize(self.lam * rho)
        base = self.child.realize(rho)
        d = self.child.declared_dimension
        if Fraction(out.size) < (self.lam / 2) ** d * base.size:
            raise BoundViolation(
                "dilation density bound failed",
                {"rho": str(rho), "lambda": str(self.lam), "size": out.size, "base": base.size, "d": d},
            )
        return out

    def to_dict(self):
        return {"kind": "dilate", "lambda": str(self.lam), "child": self.child.to_dict()}


class IntersectSystem(BourgainSystem):
    """``rho -> B^1_rho & ... & B^k_rho`` with declared dimension ``2 sum d_i``."""

    kind = "intersect"

    def __init__(self, children: Sequence[BourgainSystem], declared_dimension=None):
        children = list(children)
        if len(children) < 2:
            raise PreconditionError("intersection needs at least two systems")
        spec = children[0].spec
        for c in children[1:]:
            if c.spec != spec:
                raise ValueError(f"systems live in different groups: {spec} vs {c.spec}")
        self.dsum = sum(c.declared_dimension for c in children)
        if declared_dimension is None:
            declared_dimension = 2 * self.dsum
        super().__init__(spec, declared_dimension)
        self.children = children

    def _realize(self, rho):
        parts = [c.realize(rho) for c in self.children]
        mask = parts[0].mask.copy()
        for p in parts[1:]:
            mask &= p.mask
        out = GroupSet(self.spec, mask)
        n = self.spec.order
        bound = Fraction(1, 4**self.dsum)
        for p in parts:
            bound *= Fraction(p.size, n)
        if Fraction(out.size, n) < bound:
            raise BoundViolation(
                "intersection density bound failed",
                {"rho": str(rho), "size": out.size, "sizes": [p.size for p in parts]},
            )
        return out

    def to_dict(self):
        return {
            "kind": "intersect",
            "children": [c.to_dict() for c in self.children],
            "dimension": self.declared_dimension,
        }


class ImageSystem(BourgainSystem):
    """``rho -> phi(B_rho)`` for an endomorphism given by a scalar or an integer matrix."""

    kind = "image"

    def __init__(self, child: BourgainSystem, phi):
        super().__init__(child.spec, child.declared_dimension)
        spec = child.spec
        if isinstance(phi, (int, np.integer)):
            self.scalar = int(phi)
            self.matrix = None
        else:
            M = np.array(phi, dtype=np.int64)
            if M.shape != (spec.rank, spec.rank):
                raise PreconditionError(f"matrix of shape {M.shape} does not act on {spec}")
            mods = spec.moduli
            for i in range(spec.rank):
                for j in range(spec.rank):
                    if (int(M[i, j]) * mods[j]) % mods[i]:
                        raise PreconditionError(
                            f"matrix entry ({i},{j}) = {M[i, j]} does not give a homomorphism "
                            f"Z/{mods[j]} -> Z/{mods[i]}"
                        )
            self.scalar = None
            self.matrix = M
        self.child = child

    def apply_idx(self, idx) -> np.ndarray:
        if self.matrix is None:
            return self.spec.scale_idx(self.scalar, idx)
        return self.spec.apply_matrix_idx(self.matrix, idx)

    def _realize(self, rho):
        src = self.child.realize(rho)
        mask = np.zeros(self.spec.order, dtype=bool)
        mask[self.apply_idx(src.indices())] = True
        return GroupSet(self.spec, mask)

    def to_dict(self):
        phi = self.scalar if self.matrix is None else self.matrix.tolist()
        return {"kind": "image", "map": phi, "child": self.child.to_dict()}


class TabulatedSystem(BourgainSystem):
    """A family given explicitly on finitely many radii (for testing the checker)."""

    kind = "table"

    def __init__(self, spec: GroupSpec, table: dict, declared_dimension: int):
        super().__init__(spec, declared_dimension)
        self.table = {snap(r): s for r, s in table.items()}

    def _realize(self, rho):
        if rho not in self.table:
            raise PreconditionError(f"radius {rho} not tabulated")
        return self.table[rho]

    def to_dict(self):
        return {
            "kind": "table",
            "table": {str(r): [list(x) for x in s] for r, s in sorted(self.table.items())},
            "dimension": self.declared_dimension,
        }


# -- constructors ----------------------------------------------------------------


def bohr_system(spec, freqs, delta, declared_dimension=None) -> BohrSystem:
    return BohrSystem(spec, freqs, delta, declared_dimension)


def coset_progression(spec, lengths, generators, subgroup=None, declared_dimension=None):
    return CosetProgressionSystem(spec, lengths, generators, subgroup, declared_dimension)


def subgroup_system(H: GroupSet) -> CosetProgressionSystem:
    """The constant family ``B_rho = H`` (dimension 0)."""
    return CosetProgressionSystem(H.spec, [], [], H, declared_dimension=0)


def dilate_system(system: BourgainSystem, lam) -> BourgainSystem:
    lam = snap(lam)
    if not 0 < lam <= 1:
        raise PreconditionError(f"dilation factor must lie in (0, 1], got {lam}")
    if lam == 1:
        return system
    if isinstance(system, DilateSystem):
        return DilateSystem(system.child, system.lam * lam)
    return DilateSystem(system, lam)


def intersect_systems(systems: Sequence[BourgainSystem], declared_dimension=None) -> IntersectSystem:
    return IntersectSystem(systems, declared_dimension)


def image_system(system: BourgainSystem, phi) -> ImageSystem:
    return ImageSystem(system, phi)


def system_from_dict(spec: GroupSpec, data: dict) -> BourgainSystem:
    kind = data["kind"]
    if kind == "bohr":
        return BohrSystem(spec, [tuple(f) for f in data["freqs"]], Fraction(data["delta"]), data.get("dimension"))
    if kind == "cprog":
        from bourgainlab.group import subgroup_generated

        H = subgroup_generated(spec, [tuple(x) for x in data.get("subgroup", [])])
        return CosetProgressionSystem(
            spec,
            [Fraction(L) for L in data["lengths"]],
            [tuple(w) for w in data["generators"]],
            H,
            data.get("dimension"),
        )
    if kind == "dilate":
        return DilateSystem(system_from_dict(spec, data["child"]), Fraction(data["lambda"]))
    if kind == "intersect":
        return IntersectSystem([system_from_dict(spec, c) for c in data["children"]], data.get("dimension"))
    if kind == "image":
        return ImageSystem(system_from_dict(spec, data["child"]), data["map"])
    raise ValueError(f"unknown system kind {kind!r}")


# -- axioms ------------------------------------------------------------------------


@dataclass
class AxiomReport:
    passed: bool
    budget: int
    violations: list = field(default_factory=list)
    cover_sizes: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "budget": self.budget,
            "violations": self.violations,
            "cover_sizes": {str(k): v for k, v in self.cover_sizes.items()},
        }


def greedy_cover(S: GroupSet, B: GroupSet) -> GroupSet:
    """Translates ``X`` with ``S <= X + B``: repeatedly cover the first uncovered point.

    The translate is centered so that the uncovered point sits at an
    extreme of ``B`` when possible, which matters for interval-like ``B``.
    """
    spec = S.spec
    uncovered = S.mask.copy()
    b_idx = B.indices()
    neg_b = spec.neg_idx(b_idx)
    chosen: list[int] = []
    while uncovered.any():
        s = int(np.flatnonzero(uncovered)[0])
        # candidate centers x with s in x + B, i.e. x in s - B; take the one covering most
        cands = spec.add_idx(s, neg_b)
        if len(cands) > 64:
            cands = cands[np.linspace(0, len(cands) - 1, 64).astype(np.int64)]
        best, best_gain = None, -1
        for x in cands:
            gain = int(np.count_nonzero(uncovered[spec.add_idx(int(x), b_idx)]))
            if gain > best_gain:
                best, best_gain = int(x), gain
        chosen.append(best)
        uncovered[spec.add_idx(best, b_idx)] = False
    return GroupSet.from_indices(spec, chosen)


def covering_witness(system: BourgainSystem, rho) -> GroupSet:
    """A set X with ``B_{2rho} <= X + B_rho``, the smaller of two greedy constructions."""
    rho = snap(rho)
    big = system.realize(2 * rho)
    small = system.realize(rho)
    half = system.realize(rho / 2)
    options = []
    if half:
        X = ruzsa_cover(big, half)
        if big <= sumset(X, small):
            options.append(X)
    options.append(greedy_cover(big, small))
    return min(options, key=len)


def verify_axioms(system: BourgainSystem, radii=(Fraction(1, 4), Fraction(1, 2), 1, 2, 4),
                  budget_d: int | None = None) -> AxiomReport:
    """Check the five Bourgain-system axioms on a grid of radii."""
    budget = system.declared_dimension if budget_d is None else int(budget_d)
    radii = sorted({snap(r) for r in radii})
    if any(r <= 0 for r in radii):
        raise PreconditionError("radii must be positive")
    spec = system.spec
    violations: list[dict] = []
    cover_sizes: dict = {}
    sets = {r: system.realize(r) for r in radii}

    for r, B in sets.items():
        if not B.mask[0]:
            violations.append({"axiom": "zero", "rho": str(r)})
        neg = negate_set(B)
        if neg != B:
            bad = neg.difference(B).indices()
            violations.append({"axiom": "symmetry", "rho": str(r), "witness": spec.render(spec.decode(bad[0]))})
    for i, r in enumerate(radii):
        for r2 in radii[i + 1:]:
            if not sets[r] <= sets[r2]:
                bad = sets[r].difference(sets[r2]).indices()
                violations.append(
                    {"axiom": "nesting", "rho": str(r), "rho2": str(r2), "witness": spec.render(spec.decode(bad[0]))}
                )
    for i, r in enumerate(radii):
        for r2 in radii[i:]:
            total = system.realize(r + r2)
            s = sumset(sets[r], sets[r2])
            if not s <= total:
                bad = s.difference(total).indices()
                violations.append(
                    {"axiom": "additive", "rho": str(r), "rho2": str(r2), "witness": spec.render(spec.decode(bad[0]))}
                )
    for r in radii:
        X = covering_witness(system, r)
        cover_sizes[r] = len(X)
        if not system.realize(2 * r) <= sumset(X, system.realize(r)):
            violations.append({"axiom": "covering", "rho": str(r), "reason": "witness does not cover"})
        elif len(X) > 2**budget:
            violations.append({"axiom": "covering", "rho": str(r), "size": len(X), "budget": 2**budget})
    return AxiomReport(not violations, budget, violations, cover_sizes)


def bohr_density_check(system: BohrSystem, rho=1) -> dict:
    """``|B(Gamma, delta)| >= delta^|Gamma| |G|`` (for radius ``rho * delta <= 1``)."""
    r = snap(rho) * system.delta
    if r > 1:
        raise PreconditionError("density bound is stated for radius at most 1")
    size = system.size(rho)
    bound = r ** system.rank * system.spec.order
    ok = Fraction(size) >= bound
    if not ok:
        raise BoundViolation("Bohr density bound failed", {"size": size, "bound": str(bound)})
    return {"size": size, "bound": float(bound), "ratio": float(Fraction(size) / bound) if bound else math.inf}


# -- regularity --------------------------------------------------------------------


@dataclass
class RegularityResult:
    is_regular: bool
    lam: Fraction
    system: BourgainSystem
    d: int
    worst: dict
    tried: int

    def to_dict(self) -> dict:
        return {
            "is_regular": self.is_regular,
            "lambda": str(self.lam),
            "lambda_float": float(self.lam),
            "d": self.d,
            "worst": self.worst,
            "tried": self.tried,
        }


def regularity_grid(d: int, constants: Constants = DEFAULT_CONSTANTS) -> list[Fraction]:
    half = (constants.regularity_points - 1) // 2
    return [Fraction(k, half * constants.C0 * d) for k in range(-half, half + 1)]


def regularity_violation(system: BourgainSystem, d: int, constants: Constants = DEFAULT_CONSTANTS) -> dict:
    """Worst violation of ``|1 - |B_{1+rho}|/|B|| <= C0 |rho| d`` on the grid (empty dict if none)."""
    base = system.size(1)
    worst: dict = {}
    worst_excess = Fraction(0)
    for rho in regularity_grid(d, constants):
        if rho == 0:
            continue
        r = 1 + rho
        if r <= 0:
            return {"rho": str(rho), "reason": "grid reaches a nonpositive radius", "excess": "inf"}
        ratio = Fraction(system.size(r), base)
        slack = constants.C0 * abs(rho) * d
        excess = max(1 - slack - ratio, ratio - 1 - slack)
        if excess > worst_excess:
            worst_excess = excess
            worst = {"rho": str(rho), "ratio": float(ratio), "slack": float(slack), "excess": float(excess)}
    return worst


def is_regular(system: BourgainSystem, d: int, constants: Constants = DEFAULT_CONSTANTS) -> bool:
    return not regularity_violation(system, d, constants)


def lambda_grid(constants: Constants = DEFAULT_CONSTANTS) -> list[Fraction]:
    n = constants.dilate_points
    return [snap(2.0 ** (-j / (n - 1))) for j in range(n)]


def regularity_scan(system: BourgainSystem, d: int | None = None,
                    constants: Constants = DEFAULT_CONSTANTS) -> RegularityResult:
    """Find ``lambda in [1/2, 1]`` on a geometric grid with ``B_lambda`` regular."""
    if d is None:
        d = max(1, system.declared_dimension)
    if d < 1:
        raise PreconditionError(f"regularity needs d >= 1, got {d}")
    worst_seen: dict = {}
    for tried, lam in enumerate(lambda_grid(constants), start=1):
        cand = dilate_system(system, lam)
        v = regularity_violation(cand, d, constants)
        if not v:
            return RegularityResult(lam == 1, lam, cand, d, {}, tried)
        v = dict(v, **{"lambda": str(lam)})
        if not worst_seen or _excess(v) > _excess(worst_seen):
            worst_seen = v
    raise SearchExhausted("no regular dilate on the lambda grid", {"worst": worst_seen, "d": d})


def _excess(v: dict) -> float:
    return float(v.get("excess", "inf"))


def regularize(system: BourgainSystem, d: int | None = None,
               constants: Constants = DEFAULT_CONSTANTS) -> BourgainSystem:
    return regularity_scan(system, d, constants).system


# -- averaging ---------------------------------------------------------------------


def averaging_check(system: BourgainSystem, mu, rho, d: int | None = None,
                    constants: Constants = DEFAULT_CONSTANTS) -> float | Fraction:
    """``||mu_B * mu - mu_B||_1``, asserted to be at most ``C1 rho d``.

    ``mu`` is either a set (its uniform measure, computed exactly) or a
    measure given as a DenseFunction.
    """
    rho = snap(rho)
    if d is None:
        d = max(1, system.declared_dimension)
    if rho > Fraction(1, constants.C1 * d):
        raise PreconditionError(f"averaging needs rho <= 1/(C1 d), got {rho}")
    if not is_regular(system, d, constants):
        raise PreconditionError("averaging needs a regular system")
    B = system.realize(1)
    Brho = system.realize(rho)
    bound = constants.C1 * rho * d
    if isinstance(mu, GroupSet):
        if not mu:
            raise PreconditionError("empty support")
        if not mu <= Brho:
            raise PreconditionError("measure is not supported in B_rho")
        counts = sum_counts(B, mu)
        dev = Fraction(int(np.abs(counts - mu.size * B.mask.astype(np.int64)).sum()), B.size * mu.size)
        ok = dev <= bound
    else:
        if not mu.is_measure(1e-9):
            raise PreconditionError("mu is not a probability measure")
        if not support(mu) <= Brho:
            raise PreconditionError("measure is not supported in B_rho")
        muB = measure(B)
        dev = float(np.abs((convolve(muB, mu) - muB).values).mean())
        ok = dev <= float(bound) * (1 + 1e-12)
    if not ok:
        raise BoundViolation("averaging bound failed", {"deviation": float(dev), "bound": float(bound)})
    return dev
