"""Dense-case Bogolyubov containment, correlation with structure, and sumset chains.

The containment routine uses the classical argument: with
``Gamma = Spec_{sqrt(alpha)/2}(1_A)`` the Bohr set ``B(Gamma, 1/4)`` lies in
``2A - 2A``.  Its dimension bound is ``4/alpha^2`` rather than
polylogarithmic in the doubling; every report carries ``surrogate: true``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from bourgainlab.errors import BoundViolation, PreconditionError
from bourgainlab.group import (
    GroupSet,
    doubling_constant,
    is_subgroup,
    iterated_sumset,
    negate_set,
    sum_counts,
    sumset,
)
from bourgainlab.harmonic import (
    DenseFunction,
    convolve,
    fourier,
    inner,
    large_spectrum,
    lp_norm,
    measure,
)
from bourgainlab.systems import BohrSystem


@dataclass
class ContainmentResult:
    system: BohrSystem
    verified: bool
    threshold: float
    radius: Fraction
    gamma_size: int
    dimension_bound: float
    margin: float
    M: GroupSet
    surrogate: bool = True

    def to_dict(self) -> dict:
        return {
            "surrogate": self.surrogate,
            "verified": self.verified,
            "threshold": self.threshold,
            "radius": str(self.radius),
            "gamma_size": self.gamma_size,
            "dimension_bound": self.dimension_bound,
            "margin": self.margin,
            "size_M": self.M.size,
        }


def two_a_minus_two_a(A: GroupSet) -> GroupSet:
    S = sumset(A, A)
    return sumset(S, negate_set(S))


def bogolyubov_containment(A: GroupSet, D: GroupSet | None = None) -> ContainmentResult:
    """``B(Spec_{sqrt(alpha)/2}(1_A), 1/4) <= 2A - 2A``, verified exhaustively."""
    if not A:
        raise PreconditionError("A must be nonempty")
    spec = A.spec
    alpha = A.density()
    eta = math.sqrt(float(alpha)) / 2
    gamma = large_spectrum(DenseFunction.indicator(A), eta)
    if len(gamma) * alpha**2 > 4:
        raise BoundViolation("spectrum larger than 4/alpha^2", {"size": len(gamma), "alpha": float(alpha)})
    radius = Fraction(1, 4)
    system = BohrSystem(spec, [spec.decode(g) for g in gamma], radius)
    M = system.realize(1)
    if D is None:
        D = two_a_minus_two_a(A)
    if not M <= D:
        raise BoundViolation("Bohr set not contained in 2A - 2A", {"gamma_size": len(gamma)})
    return ContainmentResult(
        system, True, eta, radius, len(gamma), 4 / float(alpha) ** 2, 0.75 * float(alpha) ** 4, M
    )


def best_containment(A: GroupSet, max_chars: int | None = None) -> ContainmentResult:
    """Largest verified Bohr set inside ``2A - 2A`` over a family of spectra and radii.

    Candidates: the characters of largest ``|1_A^|`` (top 1, 2, 4, ...),
    plus the dense-case spectrum.  For each frequency set the largest
    admissible radius is read off exactly from the integer phase distances.
    The result is at least as large as ``bogolyubov_containment``.
    """
    spec = A.spec
    D = two_a_minus_two_a(A)
    base = bogolyubov_containment(A, D)
    best = base
    mags = np.abs(fourier(DenseFunction.indicator(A)).values)
    mags[0] = -1  # the trivial character never constrains
    order = np.argsort(-mags, kind="stable")
    limit = max_chars or min(64, spec.order - 1)
    L = spec.exponent
    k = 1
    cands = []
    while k <= limit:
        cands.append(order[:k])
        k *= 2
    cands.append(base.system.freqs)
    for freqs in cands:
        freqs = np.asarray(freqs, dtype=np.int64)
        if len(freqs) == 0:
            continue
        probe = BohrSystem(spec, [spec.decode(g) for g in freqs], Fraction(1, 2))
        dist = probe.max_distance()
        outside = dist[~D.mask]
        if len(outside) == 0:
            r = L // 2
        else:
            r = int(outside.min()) - 1
        if r < 0:
            continue
        radius = Fraction(r, L) if r > 0 else Fraction(1, 2 * L)
        system = BohrSystem(spec, [spec.decode(g) for g in freqs], radius)
        M = system.realize(1)
        if not M <= D:
            continue
        if M.size > best.M.size or (M.size == best.M.size and len(freqs) < best.gamma_size):
            best = ContainmentResult(system, True, float("nan"), radius, len(freqs),
                                     base.dimension_bound, base.margin, M)
    return best


@dataclass
class CorrelationResult:
    M: GroupSet
    x: tuple
    value: Fraction
    target: Fraction
    containment: ContainmentResult

    @property
    def ok(self) -> bool:
        return self.value >= self.target

    def to_dict(self) -> dict:
        return {
            "surrogate": True,
            "x": list(self.x),
            "value": float(self.value),
            "target": float(self.target),
            "ok": self.ok,
            "size_M": self.M.size,
        }


def correlation_locate(A: GroupSet, K=None) -> CorrelationResult:
    """``max_x 1_A * mu_M(x)`` over all translates, ``M`` the containment set."""
    if K is None:
        K = doubling_constant(A)
    K = Fraction(K)
    cont = bogolyubov_containment(A)
    M = cont.M
    counts = sum_counts(A, M)
    x = int(np.argmax(counts))
    value = Fraction(int(counts[x]), M.size)
    return CorrelationResult(M, A.spec.decode(x), value, 1 / (2 * K), cont)


def pluennecke_chain_check(A: GroupSet) -> dict:
    """``|3A - 2A| <= K^5 |A|`` with ``K = |A + A|/|A|``, exactly."""
    if not A:
        raise PreconditionError("A must be nonempty")
    K = doubling_constant(A)
    s32 = iterated_sumset(A, 3, 2).size
    bound = K**5 * A.size
    report = {
        "size_A": A.size,
        "size_2A": sumset(A, A).size,
        "K": str(K),
        "size_3A_2A": s32,
        "bound": float(bound),
        "ok": s32 <= bound,
    }
    if not report["ok"]:
        raise BoundViolation("Pluennecke chain failed", report)
    return report


def holder_young_chain(A: GroupSet, V: GroupSet, mu: DenseFunction, tol: float = 1e-9) -> dict:
    """``<1_A*mu_V*mu_{A+A}*mu, mu_A> <= ||1_A*mu_V*mu_{A+A}*mu||_inf ||mu_A||_1 <= ||1_A*mu_V||_inf``."""
    if not is_subgroup(V):
        raise PreconditionError("V must be a subgroup")
    ind = DenseFunction.indicator(A)
    av = convolve(ind, measure(V))
    F = convolve(convolve(av, measure(sumset(A, A))), mu)
    muA = measure(A)
    v0 = inner(F, muA).real
    v1 = lp_norm(F, math.inf) * lp_norm(muA, 1)
    v2 = lp_norm(av, math.inf)
    K = float(doubling_constant(A))
    report = {
        "pairing": v0,
        "holder": v1,
        "young": v2,
        "target": 1 / (2 * K),
        "holder_ok": v0 <= v1 + tol,
        "young_ok": v1 <= v2 + tol,
    }
    if not (report["holder_ok"] and report["young_ok"]):
        raise BoundViolation("Hoelder/Young chain failed", report)
    return report
