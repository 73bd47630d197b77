"""Three-term progressions: counting, density increments and a local iteration."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from bourgainlab.certificates import ThreeAPCertificate, verify_threeap
from bourgainlab.errors import BoundViolation, PreconditionError, SearchExhausted
from bourgainlab.group import (
    GroupSet,
    difference_set,
    dilate_set,
    order_two_mask,
    sum_counts,
)
from bourgainlab.harmonic import DenseFunction, convolve, fourier, inner
from bourgainlab.spectrum import annihilation_check, build_annihilator
from bourgainlab.systems import (
    DEFAULT_CONSTANTS,
    BourgainSystem,
    Constants,
    dilate_system,
    image_system,
    intersect_systems,
    is_regular,
    regularity_scan,
    snap,
)


@dataclass
class ThreeAPCount:
    total: int
    trivial: int
    normalized: float

    @property
    def nontrivial(self) -> int:
        return self.total - self.trivial

    def to_dict(self) -> dict:
        return {"total": self.total, "trivial": self.trivial, "normalized": self.normalized}


def _doubles(A: GroupSet) -> np.ndarray:
    """``c[s] = #{y in A : 2y = s}``."""
    spec = A.spec
    return np.bincount(spec.scale_idx(2, A.indices()), minlength=spec.order).astype(np.int64)


def count_threeaps(A: GroupSet, mode: str = "brute") -> ThreeAPCount:
    """Number of ``(x, y, z) in A^3`` with ``x + z = 2y``."""
    spec = A.spec
    n = spec.order
    if not A:
        return ThreeAPCount(0, 0, 0.0)
    doubles = _doubles(A)
    two_a = doubles > 0
    if mode == "brute":
        pairs = sum_counts(A, A)
        total = int(np.dot(pairs, doubles))
        normalized = float(Fraction(int(pairs[two_a].sum()), n * n))
    elif mode == "fourier":
        ind = DenseFunction.indicator(A)
        conv = convolve(ind, ind, "fast")
        normalized = inner(conv, DenseFunction(spec, two_a.astype(float))).real
        total = int(round(n * float(np.dot(conv.values.real, doubles))))
    else:
        raise ValueError(f"unknown counting mode {mode!r}")
    return ThreeAPCount(total, A.size, normalized)


def find_threeap(A: GroupSet, kind: str = "nontrivial") -> ThreeAPCertificate | None:
    """Lexicographically first ``(x, y, z)`` (by element index) of the requested kind."""
    spec = A.spec
    idx = A.indices()
    for x in idx:
        z = spec.sub_idx(spec.scale_idx(2, idx), x)
        ok = A.mask[z]
        if kind == "proper":
            ok &= (idx != x) & (z != x) & (z != idx)
        else:
            ok &= ~((idx == x) & (z == x))
        hit = np.flatnonzero(ok)
        if len(hit):
            y = int(idx[hit[0]])
            return ThreeAPCertificate(spec.decode(x), spec.decode(y), spec.decode(int(z[hit[0]])), kind)
    return None


def order2_scan(A: GroupSet):
    """Some ``d != 0`` in ``A - A`` with ``2d = 0``, or None."""
    hit = np.flatnonzero(difference_set(A, A).mask & order_two_mask(A.spec))
    if len(hit) == 0:
        return None
    return A.spec.decode(int(hit[0]))


def degenerate_certificate(A: GroupSet, d) -> ThreeAPCertificate:
    """The progression ``(x, x - d, x)`` for a 2-torsion difference ``d``."""
    spec = A.spec
    shifted = A.translate(d)
    x = int(np.flatnonzero((A & shifted).mask)[0])
    xe = spec.decode(x)
    return ThreeAPCertificate(xe, spec.sub(xe, d), xe, "nontrivial")


def restricted_sumset(A: GroupSet) -> GroupSet:
    """``{a + a' : a, a' in A, a != a'}``."""
    if not A:
        return A
    counts = sum_counts(A, A) - _doubles(A)
    return GroupSet(A.spec, counts > 0)


def eq_chain_identity(A: GroupSet, x) -> tuple[float, float]:
    """``<1_A * 1_A, 1_{2A}>`` and ``<1_{A-x} * 1_{2x-2A}, 1_{x-A}>`` via transforms."""
    spec = A.spec
    ind = DenseFunction.indicator
    two_a = dilate_set(2, A)
    lhs = inner(convolve(ind(A), ind(A)), ind(two_a)).real
    mx = spec.neg(x)
    a_mx = A.translate(mx)
    b = dilate_set(-2, A).translate(spec.scale(2, x))
    c = dilate_set(-1, A).translate(x)
    rhs = inner(convolve(ind(a_mx), ind(b)), ind(c)).real
    return lhs, rhs


# -- increments ----------------------------------------------------------------


@dataclass
class IncrementWitness:
    x: tuple
    value: Fraction
    alpha: Fraction
    energy: float
    threshold: float

    def to_dict(self) -> dict:
        return {
            "x": list(self.x),
            "value": float(self.value),
            "alpha": float(self.alpha),
            "energy": self.energy,
            "threshold": self.threshold,
        }


def relative_density(A: GroupSet, B: GroupSet) -> Fraction:
    if not A <= B:
        raise PreconditionError("A must lie inside B")
    return Fraction(A.size, B.size)


def max_translate_density(A: GroupSet, T: GroupSet) -> tuple[int, Fraction]:
    """``argmax_x 1_A * mu_T(x)`` and its exact value."""
    counts = sum_counts(A, T)
    x = int(np.argmax(counts))
    return x, Fraction(int(counts[x]), T.size)


def l2_increment_step(A: GroupSet, system: BourgainSystem, Delta, T: GroupSet, kappa, rho,
                      d: int | None = None, constants: Constants = DEFAULT_CONSTANTS) -> IncrementWitness | None:
    """Energy of the balanced function on ``Delta`` forces a denser translate of ``T``.

    If ``sum_Delta |f_A^|^2 >= kappa alpha^2 b`` with ``f_A = 1_A - alpha 1_B``,
    returns x with ``1_A * mu_T(x) >= (1 + kappa/8) alpha`` (checked exactly);
    returns None when the energy hypothesis does not hold.
    """
    spec = A.spec
    B = system.realize(1)
    alpha = relative_density(A, B)
    kappa = snap(kappa)
    rho = snap(rho)
    if d is None:
        d = max(1, system.declared_dimension)
    if alpha == 0:
        raise PreconditionError("A must be nonempty")
    if rho > constants.c_step * kappa * alpha / d:
        raise PreconditionError(f"rho = {rho} exceeds c_step kappa alpha / d")
    if not T or not T <= system.realize(rho):
        raise PreconditionError("T must be a nonempty subset of B_rho")
    Delta = np.asarray(list(Delta), dtype=np.int64)
    if not annihilation_check(spec, Delta, T, 0.5).ok:
        raise PreconditionError("T does not 1/2-annihilate Delta")
    b = B.size / spec.order
    fA = DenseFunction(spec, A.mask - float(alpha) * B.mask)
    energy = float(np.sum(np.abs(fourier(fA).values[Delta]) ** 2)) if len(Delta) else 0.0
    threshold = float(kappa) * float(alpha) ** 2 * b
    if energy < threshold:
        return None
    x, value = max_translate_density(A, T)
    target = (1 + kappa / 8) * alpha
    if value < target:
        raise BoundViolation(
            "increment conclusion failed",
            {"value": float(value), "target": float(target), "energy": energy, "threshold": threshold},
        )
    return IncrementWitness(spec.decode(x), value, alpha, energy, threshold)


@dataclass
class TwoScaleResult:
    branch: str  # "increment" or "centers"
    which: str | None
    x: tuple
    value: Fraction
    values: tuple = ()

    def to_dict(self) -> dict:
        return {
            "branch": self.branch,
            "which": self.which,
            "x": list(self.x),
            "value": float(self.value),
            "values": [float(v) for v in self.values],
        }


def two_scale_select(A: GroupSet, B1: GroupSet, B2: GroupSet, alpha, theta) -> TwoScaleResult:
    """Either a translate of ``B1`` or ``B2`` with density ``>= (1 + theta/2) alpha``,
    or a common center where both densities are ``>= (1 - theta) alpha``."""
    spec = A.spec
    alpha = snap(alpha)
    theta = snap(theta)
    c1 = sum_counts(A, B1)
    c2 = sum_counts(A, B2)
    up = (1 + theta / 2) * alpha
    for name, c, S in (("B'", c1, B1), ("B''", c2, B2)):
        x = int(np.argmax(c))
        v = Fraction(int(c[x]), S.size)
        if v >= up:
            return TwoScaleResult("increment", name, spec.decode(x), v)
    low = (1 - theta) * alpha
    # exact: c1[x] >= low |B1|  <=>  c1[x] * den >= num * |B1|
    ok = (c1 * low.denominator >= low.numerator * B1.size) & (c2 * low.denominator >= low.numerator * B2.size)
    hit = np.flatnonzero(ok)
    if len(hit) == 0:
        raise BoundViolation("neither two-scale branch holds", {"alpha": float(alpha), "theta": float(theta)})
    x = int(hit[0])
    v1, v2 = Fraction(int(c1[x]), B1.size), Fraction(int(c2[x]), B2.size)
    return TwoScaleResult("centers", None, spec.decode(x), min(v1, v2), (v1, v2))


# -- driver --------------------------------------------------------------------


@dataclass
class RothConfig:
    kappa: Fraction = Fraction(1, 4)
    theta: Fraction = Fraction(1, 2**15)
    nu: Fraction = Fraction(1, 2)
    c_scale: Fraction = Fraction(1, 4)
    step_cap: int = 64
    min_growth: Fraction = Fraction(1, 2**16)
    seed: int = 0
    constants: Constants = DEFAULT_CONSTANTS

    def to_dict(self) -> dict:
        return {
            "kappa": str(self.kappa),
            "theta": str(self.theta),
            "nu": str(self.nu),
            "c_scale": str(self.c_scale),
            "step_cap": self.step_cap,
            "min_growth": str(self.min_growth),
            "seed": self.seed,
        }


@dataclass
class DriverResult:
    status: str  # "certificate" or "exhausted"
    certificate: ThreeAPCertificate | None
    count: ThreeAPCount | None
    trace: list = field(default_factory=list)
    reason: str = ""

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "certificate": self.certificate.to_dict() if self.certificate else None,
            "count": self.count.to_dict() if self.count else None,
            "reason": self.reason,
            "trace": self.trace,
        }


def _try_regularize(system: BourgainSystem, constants: Constants) -> tuple[BourgainSystem, bool]:
    try:
        return regularity_scan(system, constants=constants).system, True
    except SearchExhausted:
        return system, False


def density_increment_driver(A: GroupSet, system: BourgainSystem, config: RothConfig = RothConfig()) -> DriverResult:
    """Iterate density increments on translate-intersections of ``A`` until a
    nontrivial 3AP appears or no increment can be certified."""
    spec = A.spec
    B = system.realize(1)
    if not A <= B:
        raise PreconditionError("A must lie inside B_1")
    d2 = order2_scan(A)
    if d2 is not None:
        cert = degenerate_certificate(A, d2)
        return DriverResult("certificate", cert, count_threeaps(A), [{"step": 0, "branch": "order2"}])

    constants = config.constants
    cur_A, cur_sys, shift = A, system, spec.zero
    trace: list[dict] = []
    alpha = relative_density(cur_A, cur_sys.realize(1))
    for step in range(config.step_cap):
        count = count_threeaps(cur_A, "brute")
        entry = {
            "step": step,
            "alpha": float(alpha),
            "size_A": cur_A.size,
            "size_B": cur_sys.size(1),
            "count": count.to_dict(),
        }
        trace.append(entry)
        if count.nontrivial > 0:
            kind = "proper" if spec.order % 2 else "nontrivial"
            cert = find_threeap(cur_A, kind) or find_threeap(cur_A, "nontrivial")
            cert = cert.shifted(spec, shift)
            if not verify_threeap(spec, A, cert):
                raise BoundViolation("emitted certificate failed verification", cert.to_dict())
            entry["branch"] = "certificate"
            return DriverResult("certificate", cert, count_threeaps(A), trace)

        d = max(1, cur_sys.declared_dimension)
        scale = config.c_scale * config.theta * alpha / d
        B1_sys, _ = _try_regularize(dilate_system(cur_sys, scale), constants)
        B2_sys, _ = _try_regularize(dilate_system(B1_sys, scale), constants)
        B1, B2 = B1_sys.realize(1), B2_sys.realize(1)
        sel = two_scale_select(cur_A, B1, B2, alpha, config.theta)
        entry["two_scale"] = sel.to_dict()
        if sel.branch == "increment":
            x = sel.x
            new_sys = B1_sys if sel.which == "B'" else B2_sys
        else:
            x = sel.x
            A1 = cur_A.translate(spec.neg(x)) & B1
            if not A1:
                entry["branch"] = "exhausted"
                return DriverResult("exhausted", None, count, trace, "empty localized set")
            alpha1 = Fraction(A1.size, B1.size)
            A2 = cur_A.translate(spec.neg(x)) & B2
            eta = math.sqrt(float(alpha1)) / 2
            ann = build_annihilator(B1_sys, A1, eta, float(config.nu), constants=constants, seed=config.seed + step)
            systems = [ann.system]
            Delta = set(int(g) for g in ann.Delta)
            if A2:
                img = image_system(B2_sys, -2)
                X2 = dilate_set(-2, A2)
                ann2 = build_annihilator(img, X2, eta, float(config.nu), constants=constants,
                                         seed=config.seed + 1000 + step)
                systems.append(ann2.system)
                Delta |= set(int(g) for g in ann2.Delta)
            d1 = max(1, B1_sys.declared_dimension)
            rho = constants.c_step * config.kappa * alpha1 / d1
            systems.append(dilate_system(B1_sys, rho))
            T_sys = intersect_systems(systems)
            T = T_sys.realize(1)
            entry["annihilator"] = {"m": ann.m, "delta": len(Delta), "size_T": T.size}
            inc = l2_increment_step(A1, B1_sys, sorted(Delta), T, config.kappa, rho, constants=constants)
            if inc is None:
                entry["branch"] = "exhausted"
                return DriverResult("exhausted", None, count, trace, "energy hypothesis not met")
            entry["increment"] = inc.to_dict()
            cur_A, shift = A1, spec.add(shift, x)
            x = inc.x
            new_sys = T_sys
        regular = is_regular(new_sys, max(1, new_sys.declared_dimension), constants)
        new_B = new_sys.realize(1)
        new_A = cur_A.translate(spec.neg(x)) & new_B
        shift = spec.add(shift, x)
        new_alpha = Fraction(new_A.size, new_B.size)
        entry.update({"branch": sel.branch, "new_alpha": float(new_alpha), "regular": regular})
        if new_alpha < (1 + config.min_growth) * alpha:
            raise BoundViolation("density did not grow", {"alpha": float(alpha), "new_alpha": float(new_alpha)})
        cur_A, cur_sys, alpha = new_A, new_sys, new_alpha
    return DriverResult("exhausted", None, None, trace, "step cap reached")
