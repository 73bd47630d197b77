"""Annihilation of character sets, dissociation probing and annihilating systems."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from bourgainlab.errors import PreconditionError, SearchExhausted
from bourgainlab.group import GroupSet, GroupSpec
from bourgainlab.harmonic import fourier, large_spectrum, measure
from bourgainlab.systems import (
    DEFAULT_CONSTANTS,
    BohrSystem,
    BourgainSystem,
    Constants,
    dilate_system,
    ell,
    intersect_systems,
    snap,
)

CERTIFY_RTOL = 1e-12


@dataclass
class AnnihilationResult:
    ok: bool
    max_value: float
    nu: float
    witness: tuple | None = None

    @property
    def margin(self) -> float:
        return self.nu - self.max_value

    def __bool__(self) -> bool:
        return self.ok


def annihilation_check(spec: GroupSpec, delta, T: GroupSet, nu: float) -> AnnihilationResult:
    """Is ``|1 - gamma(t)| <= nu`` for every gamma in ``delta`` and t in ``T``?

    The maximum is located on exact integer phases; only the final
    ``2 sin(pi r / L)`` evaluation is in floating point.
    """
    delta = np.asarray(list(delta), dtype=np.int64)
    if len(delta) == 0 or not T:
        return AnnihilationResult(True, 0.0, float(nu))
    t_idx = T.indices()
    L = spec.exponent
    best_r, best = -1, None
    step = max(1, (1 << 22) // max(len(t_idx), 1))
    for lo in range(0, len(delta), step):
        block = delta[lo:lo + step]
        dist = spec.circle_distance(block, t_idx)
        flat = int(np.argmax(dist))
        r = int(dist.flat[flat])
        if r > best_r:
            i, j = divmod(flat, dist.shape[1])
            best_r, best = r, (int(block[i]), int(t_idx[j]))
    value = 2.0 * math.sin(math.pi * best_r / L)
    ok = value <= nu
    witness = None
    if best is not None:
        witness = (spec.decode(best[0]), spec.decode(best[1]))
    return AnnihilationResult(ok, value, float(nu), witness)


# -- dissociation ------------------------------------------------------------------


@dataclass
class ProbeResult:
    certified_not_dissociated: bool
    value: float
    bound: float
    omega: np.ndarray | None = None

    def to_dict(self) -> dict:
        return {
            "certified_not_dissociated": self.certified_not_dissociated,
            "value": self.value,
            "bound": self.bound,
        }


def _weights(mu) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(mu, GroupSet):
        idx = mu.indices()
        return idx, np.full(len(idx), 1.0 / len(idx))
    v = mu.values.real
    idx = np.flatnonzero(np.abs(mu.values) > 0)
    return idx, v[idx] / mu.spec.order


def _integral(chars: np.ndarray, w: np.ndarray, omega: np.ndarray) -> float:
    factors = 1.0 + (omega[:, None] * chars).real
    return float(np.dot(w, np.prod(factors, axis=0)))


def dissociation_probe(spec: GroupSpec, Lambda: Sequence[int], mu, theta: float = 1.0, q: int = 16,
                       restarts: int = 8, sweeps: int = 4, seed: int = 0) -> ProbeResult:
    """Search for unit-modulus ``omega`` with ``int prod(1 + Re omega(l) l) dmu > e^theta``.

    One-sided: a positive answer is a certificate (the returned omega is
    re-evaluated), a negative answer only reports the largest value found.
    ``mu`` is a set (uniform measure) or a measure as a DenseFunction.
    """
    Lambda = np.asarray(list(Lambda), dtype=np.int64)
    if len(Lambda) == 0:
        raise PreconditionError("dissociation probe needs a nonempty character set")
    if q < 8:
        raise PreconditionError(f"phase grid needs q >= 8, got {q}")
    bound = math.exp(theta)
    idx, w = _weights(mu)
    chars = spec.character_values(Lambda, idx)
    k = len(Lambda)
    rng = np.random.default_rng(seed)
    best_val, best_omega = -1.0, None
    for r in range(restarts):
        if r == 0:
            omega = np.ones(k, dtype=np.complex128)
        else:
            omega = np.exp(2j * np.pi * rng.integers(0, q, size=k) / q)
        factors = 1.0 + (omega[:, None] * chars).real
        keep = np.ones(k, dtype=bool)
        for _ in range(sweeps):
            for j in range(k):
                keep[j] = False
                others = factors[keep].prod(axis=0)
                keep[j] = True
                c1 = np.dot(w * others, chars[j])
                if abs(c1) > 0:
                    omega[j] = np.conj(c1) / abs(c1)
                    factors[j] = 1.0 + (omega[j] * chars[j]).real
        val = _integral(chars, w, omega)
        if val > best_val:
            best_val, best_omega = val, omega.copy()
        if best_val > bound * (1 + CERTIFY_RTOL):
            break
    # independent re-evaluation before certifying
    check = _integral(spec.character_values(Lambda, idx), w, best_omega)
    certified = check > bound * (1 + CERTIFY_RTOL)
    return ProbeResult(certified, check, bound, best_omega if certified else None)


def greedy_dissociated(spec: GroupSpec, delta, mu, theta: float = 1.0, seed: int = 0,
                       **probe_kw) -> tuple[list[int], int]:
    """Grow ``Lambda`` inside ``delta`` while the probe cannot refute dissociation.

    Candidates are taken in the given order except that the trivial
    character (index 0), which is annihilated by everything, goes last.
    """
    order = [int(g) for g in delta if int(g) != 0] + [0] * any(int(g) == 0 for g in delta)
    Lambda: list[int] = []
    for n, gamma in enumerate(order):
        cand = Lambda + [int(gamma)]
        res = dissociation_probe(spec, cand, mu, theta, seed=seed + n, **probe_kw)
        if not res.certified_not_dissociated:
            Lambda = cand
    return Lambda, max(len(Lambda), 1)


@dataclass
class ChangReport:
    ok: bool
    m: int
    eta: float
    tau: float
    ratio: float
    budget: float

    def to_dict(self) -> dict:
        return {"ok": self.ok, "m": self.m, "eta": self.eta, "tau": self.tau,
                "ratio": self.ratio, "budget": self.budget}


def chang_report(eta: float, tau: float, m: int, C: float = DEFAULT_CONSTANTS.chang) -> ChangReport:
    """Compare ``m`` with the budget ``C eta^-2 ell(tau)``; the ratio ``m eta^2 / ell(tau)`` is kept."""
    if not 0 < eta <= 1 or not 0 < tau <= 1:
        raise PreconditionError("eta and tau must lie in (0, 1]")
    budget = C * ell(tau) / eta**2
    ratio = m * eta**2 / ell(tau)
    return ChangReport(m <= budget, int(m), float(eta), float(tau), float(ratio), float(budget))


# -- annihilating systems ---------------------------------------------------------


@dataclass
class ControlledSystem:
    """A system of declared dimension at most ``m`` and density >= exp(-C m log(e m))."""

    system: BourgainSystem
    m: int
    C: float

    def density_floor(self) -> float:
        return math.exp(-self.C * self.m * math.log(math.e * self.m))

    def check(self) -> bool:
        if self.system.declared_dimension > self.m:
            return False
        return float(self.system.density(1)) >= self.density_floor()


@dataclass
class AnnihilatorResult:
    system: BourgainSystem
    controlled: ControlledSystem
    m: int
    Lambda: list
    Delta: np.ndarray
    check: AnnihilationResult
    trace: dict = field(default_factory=dict)


def build_annihilator(base: BourgainSystem, X: GroupSet, eta: float, nu: float, d: int | None = None,
                      constants: Constants = DEFAULT_CONSTANTS, theta: float = 1.0, seed: int = 0,
                      max_halvings: int = 20) -> AnnihilatorResult:
    """A system whose level-1 set ``nu``-annihilates ``Spec_eta(mu_X)``.

    The candidate is ``B_{c nu/(d^2 m)} & Bt_nu`` with ``Bt`` the Bohr system
    on a greedily dissociated ``Lambda`` at radius ``c/m``.  The result is
    checked directly and ``c`` is halved until the check passes.
    """
    spec = base.spec
    B = base.realize(1)
    if not X:
        raise PreconditionError("X must be nonempty")
    if not X <= B:
        raise PreconditionError("X must lie inside B_1")
    if not 0 < nu:
        raise PreconditionError(f"nu must be positive, got {nu}")
    if d is None:
        d = max(1, base.declared_dimension)
    muX = measure(X)
    Delta = large_spectrum(muX, eta)
    mags = np.abs(fourier(muX).values[Delta])
    Delta = Delta[np.argsort(-mags, kind="stable")]
    Lambda, m = greedy_dissociated(spec, Delta, B, theta, seed=seed)
    tau = X.size / B.size
    nu_eff = snap(min(float(nu), 1.0))
    c = snap(constants.c_ann)
    tilde = BohrSystem(spec, [spec.decode(g) for g in Lambda], c / m)
    controlled = ControlledSystem(tilde, 6 * m, constants.control)
    trace = {
        "delta_size": int(len(Delta)),
        "m": m,
        "lambda_size": len(Lambda),
        "tau": tau,
        "chang_ratio": m * eta**2 / ell(tau),
    }
    if nu >= 2:
        system = dilate_system(base, c * nu_eff / (d * d * m))
        res = annihilation_check(spec, Delta, system.realize(1), nu)
        trace.update({"retries": 0, "c_ann": str(c), "margin": res.margin, "trivial": True})
        return AnnihilatorResult(system, controlled, m, Lambda, Delta, res, trace)
    for retry in range(max_halvings + 1):
        tilde = BohrSystem(spec, [spec.decode(g) for g in Lambda], c / m)
        system = intersect_systems([dilate_system(base, c * nu_eff / (d * d * m)), dilate_system(tilde, nu_eff)])
        res = annihilation_check(spec, Delta, system.realize(1), nu)
        if res.ok:
            controlled = ControlledSystem(tilde, 6 * m, constants.control)
            trace.update({
                "retries": retry,
                "c_ann": str(c),
                "margin": res.margin,
                "size": system.size(1),
                "controlled": controlled.check(),
            })
            return AnnihilatorResult(system, controlled, m, Lambda, Delta, res, trace)
        c /= 2
    raise SearchExhausted("annihilator post-check failed after all halvings", dict(trace, worst=res.max_value))
