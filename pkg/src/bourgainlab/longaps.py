"""Long arithmetic progressions and subgroup cosets inside sumsets.

Pipeline: a Bohr system inside ``2A - 2A``, a regular dilate of it, a
verified set ``R`` of L^p almost-periods of ``1_A * mu_A``, a progression
or subgroup ``T`` inside ``R`` with ``|T| < 2^p``, and finally a translate
``x + T`` inside ``A + A`` found by the packing argument.  Every stage is
re-checked on exact data before the next one runs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from bourgainlab.bogolyubov import best_containment, pluennecke_chain_check, two_a_minus_two_a
from bourgainlab.certificates import StructureCertificate, verify_structure
from bourgainlab.errors import BoundViolation, PreconditionError, SearchExhausted
from bourgainlab.group import (
    GroupSet,
    difference_set,
    doubling_constant,
    element_order,
    is_subgroup,
    subgroup_generated,
    sum_counts,
    sumset,
)
from bourgainlab.harmonic import DenseFunction, DualFunction, fourier, inverse, lp_norm, support, translate
from bourgainlab.spectrum import build_annihilator
from bourgainlab.systems import (
    DEFAULT_CONSTANTS,
    BourgainSystem,
    Constants,
    dilate_system,
    regularity_scan,
    snap,
)

VERIFY_RTOL = 1e-9


def _self_counts(A: GroupSet) -> np.ndarray:
    """``r(x) = #{(a, a') in A^2 : a + a' = x}``, so ``1_A * mu_A = r/|A|``."""
    return sum_counts(A, A)


def _power_mean(r: np.ndarray, q: int) -> int:
    """``sum r(x)^q`` over Python integers."""
    return sum(int(v) ** q for v in r[r != 0])


# -- L^p chain -------------------------------------------------------------------


def lp_chain_check(A: GroupSet, p: int) -> dict:
    """Both inequalities of the L^p chain for ``f = 1_A * mu_A``, compared exactly.

    ``mu(A+A)^(1/p) <= K^(1/2) ||f||_{p/2}^(1/2)`` and
    ``||f||_{p/2}^(1/2) <= K^(1/2) ||f||_p``; for even p both become
    identities between rationals after raising to a suitable power.
    """
    if not A:
        raise PreconditionError("A must be nonempty")
    if p < 2 or p % 2:
        raise PreconditionError(f"p must be an even integer >= 2, got {p}")
    spec = A.spec
    n = spec.order
    a = A.size
    K = doubling_constant(A)
    r = _self_counts(A)
    q = p // 2
    e_half = Fraction(_power_mean(r, q), n * a**q)  # E f^(p/2)
    e_full = Fraction(_power_mean(r, p), n * a**p)  # E f^p
    dens = Fraction(int(np.count_nonzero(r)), n)
    first = dens**2 <= K**p * e_half**2
    second = e_half**2 <= K**p * e_full**2
    lhs1 = float(dens) ** (1 / p)
    mid = float(e_half) ** (1 / p)
    rhs2 = float(e_full) ** (1 / p)
    report = {
        "p": p,
        "K": str(K),
        "density_term": lhs1,
        "half_norm_root": mid,
        "norm_p": rhs2,
        "first_bound": math.sqrt(float(K)) * mid,
        "second_bound": math.sqrt(float(K)) * rhs2,
        "first_ok": first,
        "second_ok": second,
    }
    if not (first and second):
        raise BoundViolation("L^p chain failed", report)
    return report


# -- Croot-Sisask ----------------------------------------------------------------


@dataclass
class SmoothingWitness:
    X: GroupSet
    ell: int
    p: int
    theta: float
    error: float
    bound: float
    tau: float
    k: int
    density_floor_log: float

    def to_dict(self) -> dict:
        return {
            "size_X": self.X.size,
            "ell": self.ell,
            "p": self.p,
            "theta": self.theta,
            "error": self.error,
            "bound": self.bound,
            "tau": self.tau,
            "samples": self.k,
            "log_density_floor": self.density_floor_log,
        }


def smoothing_error(A: GroupSet, S: GroupSet, X: GroupSet, p: int, ell: int) -> tuple[float, float]:
    """``||f - f * lambda_X^(ell)||_p`` and ``||f||_{p/2}^(1/2)`` for ``f = 1_A * mu_S``."""
    spec = A.spec
    f = DenseFunction(spec, sum_counts(A, S) / S.size)
    F = fourier(f)
    muX = fourier(DenseFunction(spec, X.mask * (spec.order / X.size)))
    lam = np.abs(muX.values) ** (2 * ell)
    smooth = inverse(DualFunction(spec, F.values * lam))
    err = lp_norm(f - smooth, p)
    scale = math.sqrt(lp_norm(f, p / 2)) if p >= 2 else math.sqrt(lp_norm(f, 1))
    return err, scale


def croot_sisask_search(A: GroupSet, S: GroupSet, T: GroupSet, p: int, ell: int, theta: float,
                        seed: int = 0, rounds: int = 16) -> SmoothingWitness:
    """Find ``X <= T`` with ``||f - f * lambda_X^(ell)||_p <= theta ||f||_{p/2}^(1/2)``.

    Follows the sampling idea: sketch each translate ``tau_t f`` at k random
    points, bucket the sketches on a grid, and take the largest bucket as X.
    k doubles every round.  The inequality is evaluated on the returned X.
    """
    if p < 2 or p % 2:
        raise PreconditionError(f"p must be an even integer >= 2, got {p}")
    if ell < 1:
        raise PreconditionError("ell must be >= 1")
    if not A or not S or not T:
        raise PreconditionError("A, S, T must be nonempty")
    spec = A.spec
    K = Fraction(sumset(A, S).size, A.size)
    L = Fraction(sumset(S, T).size, S.size)
    if not 0 < theta <= float(K) ** -0.5 * (1 + 1e-12):
        raise PreconditionError(f"theta must lie in (0, K^-1/2], got {theta} with K = {K}")
    f = sum_counts(A, S) / S.size
    supp = np.flatnonzero(f)
    scale = math.sqrt(lp_norm(DenseFunction(spec, f), p / 2))
    target = theta * scale
    width = target / ell
    rng = np.random.default_rng(seed)
    t_idx = T.indices()
    # sample points u where tau_t f(u) = f(u + t) can be nonzero for some t in T
    pool = np.unique(spec.sub_idx(supp[:, None], t_idx[None, :]).ravel()) if len(supp) * len(t_idx) <= 1 << 24 \
        else np.arange(spec.order)
    need = min(2, T.size)
    best_err = math.inf
    k = 1
    for _ in range(rounds):
        u = rng.choice(pool, size=min(k, len(pool)), replace=False)
        sketch = f[spec.add_idx(u[None, :], t_idx[:, None])]
        keys = np.floor(sketch / width).astype(np.int64)
        _, inv, counts = np.unique(keys, axis=0, return_inverse=True, return_counts=True)
        inv = np.asarray(inv).ravel()
        for label in np.argsort(-counts, kind="stable")[:4]:
            if counts[label] < need:
                break
            X = GroupSet.from_indices(spec, t_idx[inv == label])
            err, sc = smoothing_error(A, S, X, p, ell)
            best_err = min(best_err, err)
            if err <= theta * sc * (1 - VERIFY_RTOL):
                log_floor = -p * ell**2 / theta**2 * math.log(2 * float(L))
                return SmoothingWitness(X, ell, p, theta, err, theta * sc, X.size / T.size, len(u), log_floor)
        k *= 2
    raise SearchExhausted("no smoothing set found", {"best_error": best_err, "target": target})


# -- almost periods ---------------------------------------------------------------


def almost_period_margins(A: GroupSet, R: GroupSet, p: int) -> dict:
    """For each x in R: ``2^p ||f - tau_x f||_p^p`` vs ``||f||_p^p`` (scaled integers)."""
    spec = A.spec
    r = _self_counts(A)
    total = _power_mean(r, p)
    supp = np.flatnonzero(r)
    out = {}
    for x in R.indices():
        x = int(x)
        pts = np.union1d(supp, spec.sub_idx(supp, x))
        diff = r[pts] - r[spec.add_idx(pts, x)]
        out[x] = (sum(int(v) ** p for v in diff[diff != 0]) * 2**p, total)
    return out


def verify_almost_periods(A: GroupSet, R: GroupSet, p: int) -> tuple[bool, list]:
    margins = almost_period_margins(A, R, p)
    bad = [x for x, (lhs, rhs) in margins.items() if lhs > rhs]
    return not bad, bad


@dataclass
class AlmostPeriodResult:
    system: BourgainSystem
    R: GroupSet
    source: str
    report: dict = field(default_factory=dict)


def _verified_dilate(A: GroupSet, system: BourgainSystem, p: int, max_halvings: int = 10):
    sys = system
    for halving in range(max_halvings + 1):
        R = sys.realize(1)
        ok, _ = verify_almost_periods(A, R, p)
        if ok:
            return sys, R, halving
        sys = dilate_system(sys, Fraction(1, 2))
    return None, None, max_halvings


def almost_period_system(A: GroupSet, system: BourgainSystem, p: int, K=None, seed: int = 0,
                         constants: Constants = DEFAULT_CONSTANTS) -> AlmostPeriodResult:
    """A system whose level-1 set consists of verified ``1/2``-almost-periods of ``1_A * mu_A``.

    Two candidates are built and each is shrunk by halving until every
    element passes: the intersection ``B_{c/(K d^2 m)} & Bt_{c/K}`` from the
    smoothing set and annihilator, and the plain dilates of ``B``.  The
    larger verified set is returned.
    """
    if p < 2 or p % 2:
        raise PreconditionError(f"p must be an even integer >= 2, got {p}")
    B = system.realize(1)
    if not B <= two_a_minus_two_a(A):
        raise PreconditionError("B_1 must lie in 2A - 2A")
    if K is None:
        K = doubling_constant(A)
    Kf = max(float(K), 1.0)
    Kc = max(Kf, 2.0)
    theta = Kf**-0.5 / 8
    nu = 1 / (16 * Kf)
    ell = max(1, math.ceil(math.log2(Kc))) + 1
    plun = pluennecke_chain_check(A)
    report: dict = {"K": Kf, "theta": theta, "nu": nu, "ell": ell, "pluennecke": plun}
    candidates = []
    try:
        wit = croot_sisask_search(A, A, B, p, ell, theta, seed=seed)
        report["smoothing"] = wit.to_dict()
        ann = build_annihilator(system, wit.X, 0.5, nu, constants=constants, seed=seed)
        report["annihilator"] = ann.trace
        sys1, R1, h1 = _verified_dilate(A, ann.system, p)
        if sys1 is not None:
            candidates.append(("annihilator", sys1, R1, h1))
    except SearchExhausted as exc:
        report["smoothing"] = {"failed": str(exc), **exc.details}
    sys2, R2, h2 = _verified_dilate(A, system, p)
    if sys2 is not None:
        candidates.append(("dilate", sys2, R2, h2))
    if not candidates:
        raise SearchExhausted("no verified almost-period system", report)
    source, sys, R, halvings = max(candidates, key=lambda c: c[2].size)
    margins = almost_period_margins(A, R, p)
    ratios = sorted(lhs / rhs if rhs else 0.0 for lhs, rhs in margins.values())
    report.update({
        "source": source,
        "halvings": halvings,
        "size_R": R.size,
        "candidates": {c[0]: c[2].size for c in candidates},
        "margin_histogram": np.histogram(ratios, bins=[0, 0.25, 0.5, 0.75, 1.0 + 1e-12])[0].tolist(),
    })
    return AlmostPeriodResult(sys, R, source, report)


# -- packing ---------------------------------------------------------------------


def packing_translate(f: DenseFunction, T: GroupSet, p: int, check: bool = True):
    """First x (enumeration order) with ``x + T <= Supp(f)``."""
    if T.size >= 2**p:
        raise PreconditionError(f"|T| = {T.size} must be < 2^p = {2**p}")
    spec = f.spec
    if check:
        base = lp_norm(f, p)
        for t in T:
            if lp_norm(f - translate(t, f), p) > 0.5 * base * (1 + 1e-12):
                raise PreconditionError(f"{spec.render(t)} is not a 1/2-almost-period")
    supp = support(f).mask
    ok = np.ones(spec.order, dtype=bool)
    allx = np.arange(spec.order)
    for t in T.indices():
        ok &= supp[spec.add_idx(allx, int(t))]
    hit = np.flatnonzero(ok)
    if len(hit) == 0:
        raise BoundViolation("no translate of T fits in the support", {"size_T": T.size, "p": p})
    return spec.decode(int(hit[0]))


# -- progressions and subgroups inside a system ------------------------------------


@dataclass
class Extraction:
    kind: str  # "proper_ap" or "subgroup"
    T: GroupSet
    step: tuple | None
    generators: list
    eta: Fraction
    N: int
    window: tuple

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "size_T": self.T.size,
            "step": list(self.step) if self.step else None,
            "generators": [list(g) for g in self.generators],
            "eta": float(self.eta),
            "N": self.N,
            "window": list(self.window),
        }


def extract_ap_or_subgroup(system: BourgainSystem, h: int) -> Extraction:
    """A proper progression or a subgroup of ``B_1`` of size in ``[|B|^(1/4h)/4, |B|^(1/2h)]``."""
    spec = system.spec
    B = system.realize(1)
    nB = B.size
    if h < system.declared_dimension:
        raise PreconditionError(f"h = {h} must be at least the dimension {system.declared_dimension}")
    if h < 1 or nB < 2 ** (6 * h):
        raise PreconditionError(f"|B| = {nB} must be at least 2^(6h) = {2 ** (6 * h)}")
    eta_f = 2 * nB ** (-1 / (2 * h))
    eta = snap(eta_f)
    N = math.floor(eta_f**-0.5)
    Beta = system.realize(eta)
    if Beta.size ** 2 < nB:
        raise BoundViolation("|B_eta| < |B|^(1/2)", {"size": Beta.size, "B": nB})
    lo, hi = 0.25 * nB ** (1 / (4 * h)), nB ** (1 / (2 * h))
    idx = Beta.indices()
    orders = [element_order(spec, spec.decode(int(i))) for i in idx]
    big = [int(i) for i, o in zip(idx, orders) if o >= N]
    if big:
        x = spec.decode(big[0])
        T = GroupSet.from_indices(spec, (spec.scale_idx(j, big[0]) for j in range(N)))
        if T.size != N:
            raise BoundViolation("progression is not proper", {"N": N, "size": T.size})
        out = Extraction("proper_ap", T, x, [], eta, N, (lo, hi))
    else:
        gens: list = []
        T = GroupSet.zero(spec)
        for i in idx:
            if T.size >= N or len(gens) >= N - 1:
                break
            if i == 0 or bool(T.mask[i]):
                continue
            gens.append(spec.decode(int(i)))
            T = subgroup_generated(spec, gens)
        out = Extraction("subgroup", T, None, gens, eta, N, (lo, hi))
    if not out.T <= B:
        raise BoundViolation("extracted structure escapes B", out.to_dict())
    if not lo <= out.T.size <= hi:
        raise BoundViolation("size window failed", out.to_dict())
    return out


def longest_ap_in(R: GroupSet, cap: int) -> tuple[tuple, tuple, int]:
    """Longest proper progression ``x0 + [0, n) s`` inside R with ``n <= cap``.

    Steps range over ``R - R``; ties go to the smaller step index.
    Returns (x0, s, n).
    """
    spec = R.spec
    best = (spec.decode(int(R.indices()[0])), spec.zero, 1)
    if cap <= 1:
        return best
    steps = difference_set(R, R).indices()
    mask = R.mask
    for s in steps[1:]:
        s = int(s)
        order = element_order(spec, spec.decode(s))
        limit = min(cap, order)
        if limit <= best[2]:
            continue
        prev = spec.sub_idx(R.indices(), s)
        starts = R.indices()[~mask[prev]] if order > 1 else R.indices()[:1]
        if len(starts) == 0:
            # R contains the whole cyclic subgroup generated by s
            starts = R.indices()[:1]
        for x0 in starts:
            n = 1
            cur = int(x0)
            while n < limit:
                cur = int(spec.add_idx(cur, s))
                if not mask[cur]:
                    break
                n += 1
            if n > best[2]:
                best = (spec.decode(int(x0)), spec.decode(s), n)
                if n == limit == cap:
                    return best
    return best


def period_subgroup(A: GroupSet) -> GroupSet:
    """``{x : A + A + x = A + A}`` (the stabilizer of the sumset)."""
    S = sumset(A, A)
    # x stabilizes S iff #{(s, s') : s - s' = x} = |S|
    counts = sum_counts(S, GroupSet(A.spec, S.mask[A.spec.neg_idx(np.arange(A.spec.order))]))
    return GroupSet(A.spec, counts == S.size)


@dataclass
class LongStructureResult:
    certificate: StructureCertificate
    verified: bool
    trace: dict

    def to_dict(self) -> dict:
        return {"certificate": self.certificate.to_dict(), "verified": self.verified, "trace": self.trace}


def choose_p(size_A: int, K: float) -> int:
    Kc = max(K, 2.0)
    raw = math.sqrt(math.log(size_A) / (Kc * math.log(Kc) ** 3)) if size_A > 1 else 0.0
    p = max(2, math.ceil(raw))
    return p + (p % 2)


def find_long_structure(A: GroupSet, seed: int = 0, constants: Constants = DEFAULT_CONSTANTS) -> LongStructureResult:
    """A proper progression or a subgroup coset inside ``A + A``, certified."""
    if not A:
        raise PreconditionError("A must be nonempty")
    spec = A.spec
    K = doubling_constant(A)
    Kf = float(K)
    trace: dict = {"K": str(K), "size_A": A.size}

    def stage(name, fn):
        try:
            return fn()
        except Exception as exc:  # tag and re-raise
            exc.args = (f"[{name}] {exc.args[0] if exc.args else exc}",) + exc.args[1:]
            raise

    cont = stage("containment", lambda: best_containment(A))
    trace["containment"] = cont.to_dict()
    try:
        reg = regularity_scan(cont.system, constants=constants)
        base = reg.system
        trace["regularity"] = reg.to_dict()
    except SearchExhausted as exc:
        base = cont.system
        trace["regularity"] = {"failed": True, **exc.details}
    p = choose_p(A.size, Kf)
    trace["p"] = p
    aps = stage("almost_periods", lambda: almost_period_system(A, base, p, K, seed=seed, constants=constants))
    R = aps.R
    trace["almost_periods"] = aps.report

    # h from the |T| < 2^p target, subject to h >= dimension
    d_R = aps.system.declared_dimension
    h = max(d_R, 1, math.ceil(math.log(max(R.size, 2)) / (2 * p * math.log(2))))
    lemma_ok = R.size >= 2 ** (6 * h)
    trace["extraction"] = {"h": h, "dimension": d_R, "size_R": R.size, "preconditions": lemma_ok}
    cap = 2**p - 1
    T = None
    step = None
    if lemma_ok:
        ext = stage("extraction", lambda: extract_ap_or_subgroup(aps.system, h))
        trace["extraction"].update(ext.to_dict())
        if ext.kind == "proper_ap":
            n = min(ext.N, cap)
            step = ext.step
            T = GroupSet.from_indices(spec, (spec.scale_idx(j, spec.index(step)) for j in range(n)))
        elif ext.T.size <= cap:
            T = ext.T
    f = DenseFunction(spec, _self_counts(A) / A.size)
    S = sumset(A, A)
    # coset route: periods of A + A that are also verified almost-periods
    H = period_subgroup(A) & R
    if not is_subgroup(H):
        H = GroupSet.zero(spec)
    x0, s, n = longest_ap_in(R, cap)
    trace["direct"] = {"start": list(x0), "step": list(s), "length": n, "period_subgroup": H.size}
    if H.size > 1 and H.size >= max(n, T.size if T is not None else 0):
        base_pt = spec.decode(int(S.indices()[0]))
        gens = _generators(H)
        cert = StructureCertificate("coset", base_pt, None, 0, tuple(gens))
        route = "coset"
    else:
        if T is None or n > T.size:
            step = s
            T = GroupSet.from_indices(spec, (spec.index(spec.add(x0, spec.scale(j, s))) for j in range(n)))
            start = x0
            route = "direct"
        else:
            start = spec.zero
            route = "lemma"
        x = stage("packing", lambda: packing_translate(f, T, p))
        length = T.size
        cert = StructureCertificate("proper_ap", spec.add(x, start), step, length)
        trace["packing"] = {"x": list(x), "size_T": length}
    trace["route"] = route
    verdict = verify_structure(spec, S, cert)
    if not verdict:
        raise BoundViolation(f"certificate failed verification: {verdict.reason}", cert.to_dict())
    target = math.exp(math.sqrt(math.log(A.size) / (max(Kf, 2) * math.log(max(Kf, 2)) ** 3))) if A.size > 1 else 1
    size = cert.length if cert.kind == "proper_ap" else len(cert.elements(spec))
    trace["length_ratio"] = size / target
    Kc = max(Kf, 2.0)
    trace["condition_chain_c1"] = p * Kc * math.log(p * Kc) * math.log(Kc) ** 3 <= math.log(A.size) if A.size > 1 else False
    return LongStructureResult(cert, True, trace)


def _generators(H: GroupSet) -> list:
    spec = H.spec
    gens: list = []
    cur = GroupSet.zero(spec)
    for x in H:
        if x not in cur:
            gens.append(x)
            cur = subgroup_generated(spec, gens)
            if cur == H:
                break
    return gens
