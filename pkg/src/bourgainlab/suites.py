"""Verification batteries run by ``bourgain-lab verify``.

Each battery records pass/fail checks and logged metrics into a Report.
Instances are generated from ``numpy`` generators seeded by
``(config seed, instance number)`` and evaluated in a thread pool; results
are assembled in instance order, so reports are reproducible.
"""

from __future__ import annotations

import math
import os
import time
import traceback
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields
from fractions import Fraction

import numpy as np

from bourgainlab.bogolyubov import pluennecke_chain_check
from bourgainlab.certificates import verify_in_sumset, verify_threeap
from bourgainlab.errors import BourgainLabError, ConfigError, PreconditionError, SearchExhausted
from bourgainlab.generators import gen_set
from bourgainlab.group import GroupSet, GroupSpec, subgroup_generated, sumset
from bourgainlab.harmonic import (
    DenseFunction,
    convolve,
    fourier,
    fourier_naive,
    inverse,
    large_spectrum,
)
from bourgainlab.longaps import (
    croot_sisask_search,
    extract_ap_or_subgroup,
    find_long_structure,
    lp_chain_check,
    packing_translate,
    smoothing_error,
)
from bourgainlab.roth import (
    RothConfig,
    count_threeaps,
    density_increment_driver,
    eq_chain_identity,
    l2_increment_step,
)
from bourgainlab.spectrum import annihilation_check, build_annihilator, dissociation_probe
from bourgainlab.systems import (
    DEFAULT_CONSTANTS,
    BohrSystem,
    Constants,
    averaging_check,
    bohr_density_check,
    bohr_system,
    coset_progression,
    dilate_system,
    image_system,
    intersect_systems,
    regularity_scan,
    subgroup_system,
    verify_axioms,
)

SUITES = ("harmonic", "systems", "spectrum", "roth", "longaps")
TOL = 1e-9


@dataclass
class ExperimentConfig:
    group: str = "Z256"
    seed: int = 0
    instances: int = 20
    overrides: dict = field(default_factory=dict)

    def __post_init__(self):
        try:
            self.spec = GroupSpec.parse(self.group)
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"bad group {self.group!r}: {exc}") from exc
        if self.instances < 1:
            raise ConfigError("instances must be positive")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        self.constants = parse_overrides(self.overrides)

    def rng(self, *key) -> np.random.Generator:
        return np.random.default_rng([self.seed, *[int(k) for k in key]])

    def to_dict(self) -> dict:
        return {
            "group": self.group,
            "seed": self.seed,
            "instances": self.instances,
            "constants": self.constants.to_dict(),
        }


def parse_overrides(overrides: dict) -> Constants:
    kinds = {f.name: f.type for f in fields(Constants)}
    kw = {}
    for key, raw in overrides.items():
        if key not in kinds:
            raise ConfigError(f"unknown constant {key!r}")
        try:
            value = Fraction(str(raw)) if "Fraction" in str(kinds[key]) else int(raw)
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigError(f"bad value for {key}: {raw!r}") from exc
        if value <= 0:
            raise ConfigError(f"{key} must be positive")
        kw[key] = value
    return DEFAULT_CONSTANTS.override(**kw)


def workers() -> int:
    raw = os.environ.get("BOURGAINLAB_THREADS")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError as exc:
            raise ConfigError(f"BOURGAINLAB_THREADS must be an integer, got {raw!r}") from exc
    return min(8, os.cpu_count() or 1)


def pmap(fn, items) -> list:
    items = list(items)
    n = min(workers(), len(items))
    if n <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


class Battery:
    """Collects the checks of one suite into the shared report."""

    def __init__(self, report, suite: str):
        self.report = report
        self.suite = suite

    def check(self, name: str, fn) -> bool:
        try:
            out = fn() or {}
        except (AssertionError, BourgainLabError) as exc:
            details = dict(getattr(exc, "details", None) or {})
            details.update(error=type(exc).__name__, message=str(exc))
            self.report.record(self.suite, name, "fail", **details)
            return False
        except Exception as exc:  # a crash is a failure, not a usage error
            self.report.record(self.suite, name, "fail", error=type(exc).__name__, message=str(exc),
                               where=traceback.format_exc(limit=2).splitlines()[-1])
            return False
        for metric, instance, value in out.pop("_ledger", []):
            self.report.log(self.suite, metric, instance, value)
        self.report.record(self.suite, name, "pass", **out)
        return True

    def note(self, name: str, **details) -> None:
        self.report.record(self.suite, name, "logged", **details)


def _require(cond, message: str, **details) -> None:
    if not cond:
        err = AssertionError(message)
        err.details = details
        raise err


# -- shared instance builders ---------------------------------------------------------


def random_function(spec: GroupSpec, rng: np.random.Generator) -> DenseFunction:
    return DenseFunction(spec, rng.standard_normal(spec.order) + 1j * rng.standard_normal(spec.order))


def random_bohr(spec: GroupSpec, rng: np.random.Generator, max_rank: int = 2) -> BohrSystem:
    rank = int(rng.integers(1, max_rank + 1))
    freqs = [spec.decode(int(g)) for g in rng.integers(1, spec.order, size=rank)]
    delta = Fraction(int(rng.integers(8, 33)), 64)
    return bohr_system(spec, freqs, delta)


def standard_systems(seed: int = 0) -> list:
    """A fixed family covering every constructor and operation."""
    rng = np.random.default_rng(seed)
    z211 = GroupSpec.cyclic(211)
    z101 = GroupSpec.cyclic(101)
    prod = GroupSpec.parse("Z3^3xZ4")
    mixed = GroupSpec.parse("Z3^4xZ2")
    b1 = bohr_system(z211, [(5,), (17,)], Fraction(1, 4))
    b2 = bohr_system(z211, [(33,)], Fraction(1, 3))
    H = subgroup_generated(prod, [(1, 0, 0, 0), (0, 0, 0, 2)])
    out = [
        ("bohr_z211", b1),
        ("bohr_mixed", bohr_system(mixed, [(1, 0, 2, 0, 1), (0, 1, 1, 1, 0)], Fraction(1, 3))),
        ("coset_progression_z101", coset_progression(z101, [3], [(1,)])),
        ("coset_progression_prod", coset_progression(prod, [1], [(0, 1, 0, 0)], H)),
        ("subgroup_prod", subgroup_system(H)),
        ("dilate_bohr", dilate_system(b1, Fraction(1, 2))),
        ("intersect_bohr", intersect_systems([b1, b2])),
        ("image_bohr", image_system(b2, 2)),
        ("random_bohr_z211", random_bohr(z211, rng)),
    ]
    return out


def standard_corpus(cfg: ExperimentConfig) -> list:
    """(name, set) pairs used by the spectrum and long-AP batteries."""
    out = [
        ("interval10_z100", gen_set(GroupSpec.cyclic(100), "interval(10)")),
        ("random_z128", gen_set(GroupSpec.cyclic(128), "random(0.3)", cfg.seed)),
        ("random_z101", gen_set(GroupSpec.cyclic(101), "random(0.4)", cfg.seed)),
        ("union_z1009", gen_set(GroupSpec.cyclic(1009), "union_intervals(3,20)", cfg.seed)),
        ("coset_mixed", gen_set(GroupSpec.parse("Z3^4xZ2"), "coset([1,0,0,0,0] [0,0,0,0,1];[0,0,1,2,0])")),
        ("behrend_z2003", gen_set(GroupSpec.cyclic(2003), "behrend_like(7,3)")),
        ("apfree_z101", gen_set(GroupSpec.cyclic(101), "greedy_apfree(101)")),
    ]
    spec = cfg.spec
    m = max(1, spec.order // 10)
    out += [
        (f"interval_{cfg.group}", gen_set(spec, f"interval({m})")),
        (f"random_{cfg.group}", gen_set(spec, "random(0.25)", cfg.seed)),
    ]
    return out


def annihilator_characters(spec: GroupSpec, H: GroupSet) -> np.ndarray:
    """Indices of the characters trivial on H."""
    ph = spec.phases(np.arange(spec.order), H.indices())
    return np.flatnonzero((ph == 0).all(axis=1))


def increment_instances(seed: int, n: int) -> list:
    """Synthetic inputs for ``l2_increment_step`` on which the energy hypothesis holds.

    Half are subgroup-correlated sets (T = H, Delta = characters trivial on
    H, coset densities drawn from {0.1, 0.8}); the rest are unions of
    translates of a small Bohr set in Z/1009 with Delta the part of the
    large spectrum that T annihilates.
    """
    groups = [("Z3^4", 2), ("Z5^3", 1), ("Z225", None), ("Z4^3", 1)]
    out = []
    for i in range(n):
        rng = np.random.default_rng([seed, 7, i])
        if i % 2 == 0:
            text, k = groups[(i // 2) % len(groups)]
            spec = GroupSpec.parse(text)
            if k is None:
                H = subgroup_generated(spec, [(15,)])
            else:
                H = subgroup_generated(spec, [tuple(int(j == c) for j in range(spec.rank)) for c in range(k)])
            G = GroupSet.full(spec)
            system = subgroup_system(G)
            cos = np.zeros(spec.order, dtype=np.int64)
            reps = []
            for x in range(spec.order):
                if cos[x] == 0:
                    reps.append(x)
                    cos[spec.add_idx(H.indices(), x)] = len(reps)
            dens = rng.choice([0.1, 0.8], size=len(reps))
            dens[0], dens[-1] = 0.1, 0.8
            mask = rng.random(spec.order) < dens[cos - 1]
            mask[reps[-1]] = True
            A = GroupSet(spec, mask)
            Delta = annihilator_characters(spec, H)
            out.append((f"subgroup_{text}_{i}", A, system, Delta, H, Fraction(1, 4), Fraction(1, 2**20), 1))
        else:
            spec = GroupSpec.cyclic(1009)
            step = int(rng.integers(1, 1009))
            system = bohr_system(spec, [(step,)], Fraction(1, 2), declared_dimension=1)
            B = system.realize(1)
            kappa = Fraction(1, 4)
            rho = Fraction(1, 2**12)
            T = system.realize(rho)
            centers = rng.choice(B.indices(), size=int(rng.integers(3, 9)), replace=False)
            blob = system.realize(Fraction(1, 16))
            mask = np.zeros(spec.order, dtype=bool)
            for c in centers:
                mask[spec.add_idx(blob.indices(), int(c))] = True
            A = GroupSet(spec, mask & B.mask)
            if not A:
                A = GroupSet.zero(spec)
            fA = DenseFunction(spec, A.mask.astype(float))
            spec_chars = large_spectrum(fA, 0.05)
            Delta = np.asarray([g for g in spec_chars
                                if annihilation_check(spec, [g], T, 0.5).ok], dtype=np.int64)
            out.append((f"bohr_z1009_{i}", A, system, Delta, T, kappa, rho, 1))
    return out


# -- batteries -------------------------------------------------------------------------


def harmonic_battery(cfg: ExperimentConfig, bat: Battery, n: int | None = None) -> None:
    spec = cfg.spec
    n = n or cfg.instances

    def one(i):
        rng = cfg.rng(1, i)
        f, g = random_function(spec, rng), random_function(spec, rng)
        F, Gh = fourier(f), fourier(g)
        parseval = abs(float(np.mean(np.abs(f.values) ** 2)) - float(np.sum(np.abs(F.values) ** 2)))
        inversion = float(np.max(np.abs(inverse(F).values - f.values)))
        conv = float(np.max(np.abs(fourier(convolve(f, g)).values - F.values * Gh.values)))
        naive = float("nan")
        if spec.order <= 1024:
            naive = float(np.max(np.abs(convolve(f, g).values - convolve(f, g, "naive").values)))
            naive = max(naive, float(np.max(np.abs(fourier_naive(f).values - F.values))))
        return parseval, inversion, conv, naive

    rows = pmap(one, range(n))
    arr = np.array(rows)

    def summary(col, name):
        vals = arr[:, col]
        vals = vals[~np.isnan(vals)]
        worst = float(vals.max()) if len(vals) else 0.0
        _require(worst <= TOL, f"{name} error above tolerance", worst=worst)
        return {"worst": worst, "instances": n, "_ledger": [(f"{name}_margin", cfg.group, worst)]}

    bat.check("parseval", lambda: summary(0, "parseval"))
    bat.check("inversion", lambda: summary(1, "inversion"))
    bat.check("convolution_theorem", lambda: summary(2, "convolution"))
    if spec.order <= 1024:
        bat.check("fast_vs_naive", lambda: summary(3, "naive"))
    else:
        bat.note("fast_vs_naive", skipped=f"order {spec.order} > 1024")


def systems_battery(cfg: ExperimentConfig, bat: Battery, n: int | None = None) -> None:
    n = n or cfg.instances
    constants = cfg.constants

    def axioms():
        rows = pmap(lambda item: (item[0], verify_axioms(item[1])), standard_systems(cfg.seed))
        bad = {name: r.to_dict() for name, r in rows if not r.passed}
        _require(not bad, "axiom violations", violations=bad)
        return {"systems": [name for name, _ in rows]}

    bat.check("axioms", axioms)

    def densities():
        z1009 = GroupSpec.cyclic(1009)

        def one(i):
            rng = cfg.rng(2, i)
            b = random_bohr(z1009, rng, 3)
            ratio = bohr_density_check(b)["ratio"]
            lam = Fraction(int(rng.integers(1, 9)), 8)
            dilate_system(b, lam).realize(1)  # checks (lam/2)^d inside realize
            b2 = random_bohr(z1009, rng, 2)
            intersect_systems([b, b2]).realize(1)  # checks 4^-sum(d) prod(b_i)
            return ratio

        ratios = pmap(one, range(n))
        return {"instances": n, "_ledger": [("bohr_density_ratio_min", "Z1009", min(ratios))]}

    bat.check("density_lemmas", densities)

    def regularity():
        worst_lam = Fraction(1)
        failures = []
        specs = [GroupSpec.cyclic(1009), GroupSpec.cyclic(2003)]

        def one(i):
            rng = cfg.rng(3, i)
            spec = specs[i % 2]
            b = random_bohr(spec, rng)
            d = b.rank
            try:
                res = regularity_scan(b, d=d, constants=constants)
            except SearchExhausted as exc:
                return ("fail", i, exc.details)
            rho = Fraction(1, constants.C1 * d)
            Brho = res.system.realize(rho)
            idx = Brho.indices()
            pick = idx[rng.random(len(idx)) < 0.5]
            mu = GroupSet.from_indices(spec, pick if len(pick) else idx[:1])
            dev = averaging_check(res.system, mu, rho, d=d, constants=constants)
            return ("ok", res.lam, float(dev))

        rows = pmap(one, range(n))
        for row in rows:
            if row[0] == "fail":
                failures.append({"instance": row[1], **row[2]})
            else:
                worst_lam = min(worst_lam, row[1])
        _require(not failures, "regularity scan found no regular dilate", failures=failures[:5],
                 failed=len(failures), C0=constants.C0)
        _require(worst_lam >= Fraction(1, 2), "lambda below 1/2", lam=str(worst_lam))
        devs = [r[2] for r in rows]
        return {"instances": n, "min_lambda": float(worst_lam),
                "_ledger": [("regularity_lambda_min", "Z1009/Z2003", float(worst_lam)),
                            ("averaging_deviation_max", "Z1009/Z2003", max(devs))]}

    bat.check("regularity_and_averaging", regularity)


def spectrum_battery(cfg: ExperimentConfig, bat: Battery, n: int | None = None) -> None:
    n = n or cfg.instances
    constants = cfg.constants

    def z8():
        spec = GroupSpec.cyclic(8)
        T = GroupSet.from_indices(spec, [0, 1])
        hi = annihilation_check(spec, [1], T, 0.8)
        lo = annihilation_check(spec, [1], T, 0.7)
        _require(hi.ok and not lo.ok, "Z8 annihilation example")
        _require(abs(hi.max_value - 2 * math.sin(math.pi / 8)) < 1e-12, "Z8 maximum")
        return {"max": hi.max_value}

    bat.check("annihilation_z8", z8)

    def probes():
        z16 = GroupSpec.cyclic(16)
        H = subgroup_generated(z16, [(4,)])
        cert = dissociation_probe(z16, [4, 8], H)
        single = dissociation_probe(z16, [3], GroupSet.full(z16))
        _require(cert.certified_not_dissociated and abs(cert.value - 4) < 1e-9, "subgroup probe", value=cert.value)
        _require(not single.certified_not_dissociated, "single character certified")
        return {"subgroup_value": cert.value, "single_value": single.value}

    bat.check("dissociation_probe", probes)

    def annihilators():
        z211 = GroupSpec.cyclic(211)
        z1009 = GroupSpec.cyclic(1009)

        def one(i):
            rng = cfg.rng(4, i)
            spec = z211 if i % 2 == 0 else z1009
            base = random_bohr(spec, rng)
            try:
                base = regularity_scan(base, d=base.rank, constants=constants).system
            except SearchExhausted:
                pass
            B = base.realize(1)
            idx = B.indices()
            X = GroupSet.from_indices(spec, idx[rng.random(len(idx)) < 0.5]) | GroupSet.zero(spec)
            nu = [0.25, 0.5, 1.0][i % 3]
            res = build_annihilator(base, X, 0.5, nu, constants=constants, seed=cfg.seed + i)
            post = annihilation_check(spec, res.Delta, res.system.realize(1), nu)
            return post.ok, res.trace["chang_ratio"], res.trace

        rows = pmap(one, range(n))
        bad = [i for i, r in enumerate(rows) if not r[0]]
        ratios = [r[1] for r in rows]
        _require(not bad, "annihilation post-check failed", instances=bad)
        _require(max(ratios) <= constants.chang, "Chang ratio above budget", worst=max(ratios))
        return {"instances": n, "worst_chang_ratio": max(ratios),
                "_ledger": [("chang_ratio_max", "Z211/Z1009", max(ratios)),
                            ("annihilator_retries_max", "Z211/Z1009", max(r[2].get("retries", 0) for r in rows))]}

    bat.check("annihilator_corpus", annihilators)

    def trivial_cases():
        spec = GroupSpec.parse("Z3^3xZ4")
        H = subgroup_generated(spec, [(1, 0, 0, 0), (0, 0, 0, 1)])
        res = build_annihilator(subgroup_system(H), H, 0.5, 0.25)
        _require(res.check.ok and H <= res.system.realize(1), "subgroup annihilator")
        b = bohr_system(GroupSpec.cyclic(211), [(5,)], Fraction(1, 4))
        two = build_annihilator(b, b.realize(Fraction(1, 2)), 0.5, 2)
        _require(two.check.ok, "nu = 2 annihilator")
        return {}

    bat.check("annihilator_trivial_cases", trivial_cases)


def roth_battery(cfg: ExperimentConfig, bat: Battery, n: int | None = None) -> None:
    n = n or cfg.instances
    odd = [GroupSpec.cyclic(101), GroupSpec.parse("Z3^4"), GroupSpec.parse("Z5xZ7"), GroupSpec.cyclic(625)]

    def counts():
        def one(i):
            rng = cfg.rng(5, i)
            spec = odd[i % len(odd)]
            A = gen_set(spec, ["random(0.2)", "random(0.5)", "union_intervals(2,5)", "interval(7)"][i % 4],
                        int(rng.integers(2**32)))
            return count_threeaps(A, "brute").total == count_threeaps(A, "fourier").total

        ok = pmap(one, range(n))
        _require(all(ok), "fourier and brute counts differ", instances=[i for i, v in enumerate(ok) if not v])
        z5 = count_threeaps(GroupSet.full(GroupSpec.cyclic(5)))
        _require(z5.total == 25, "Z5 count", total=z5.total)
        free = gen_set(GroupSpec.cyclic(101), "greedy_apfree(101)")
        c = count_threeaps(free, "fourier")
        _require(c.total == free.size, "AP-free count", total=c.total, size=free.size)
        return {"instances": n}

    bat.check("count_oracle", counts)

    def driver():
        spec = GroupSpec.cyclic(101)
        system = subgroup_system(GroupSet.full(spec))

        def one(i):
            A = gen_set(spec, "random(0.4)", cfg.seed * 1000 + i)
            res = density_increment_driver(A, system, RothConfig(seed=i, constants=cfg.constants))
            return res.status == "certificate" and bool(verify_threeap(spec, A, res.certificate))

        ok = pmap(one, range(n))
        _require(all(ok), "driver missed a certificate", instances=[i for i, v in enumerate(ok) if not v])
        free = gen_set(spec, "greedy_apfree(101)")
        res = density_increment_driver(free, system, RothConfig(constants=cfg.constants))
        _require(res.status == "exhausted", "AP-free input produced a certificate")
        return {"instances": n, "apfree_status": res.status, "apfree_steps": len(res.trace)}

    bat.check("density_increment_driver", driver)

    def identity():
        def one(i):
            rng = cfg.rng(6, i)
            spec = odd[i % len(odd)]
            A = gen_set(spec, "random(0.3)", int(rng.integers(2**32)))
            x = spec.decode(int(rng.integers(spec.order)))
            lhs, rhs = eq_chain_identity(A, x)
            return abs(lhs - rhs)

        worst = max(pmap(one, range(n)))
        _require(worst <= TOL, "identity error", worst=worst)
        return {"worst": worst}

    bat.check("eq_chain_identity", identity)

    def increments():
        fired = 0
        for name, A, system, Delta, T, kappa, rho, d in increment_instances(cfg.seed, max(n, 20)):
            w = l2_increment_step(A, system, Delta, T, kappa, rho, d=d, constants=cfg.constants)
            fired += w is not None
        _require(fired > 0, "increment hypothesis never fired")
        return {"fired": fired}

    bat.check("l2_increment_step", increments)


def longaps_battery(cfg: ExperimentConfig, bat: Battery, n: int | None = None) -> None:
    corpus = standard_corpus(cfg)

    def chains():
        def one(item):
            name, A = item
            for p in (2, 4, 8):
                lp_chain_check(A, p)
            pl = pluennecke_chain_check(A)
            return name, pl["size_3A_2A"] / pl["bound"]

        rows = pmap(one, corpus)
        return {"sets": [r[0] for r in rows],
                "_ledger": [("pluennecke_ratio", name, v) for name, v in rows]}

    bat.check("lp_and_pluennecke_chains", chains)

    def smoothing():
        spec = GroupSpec.cyclic(503)
        A = gen_set(spec, "interval(20)")
        G = GroupSet.full(spec)
        K = sumset(A, A).size / A.size
        w = croot_sisask_search(A, A, G, 4, 2, K**-0.5, seed=cfg.seed)
        err, scale = smoothing_error(A, A, w.X, 4, 2)
        _require(err <= w.theta * scale, "smoothing witness does not re-verify", error=err)
        z = GroupSpec.parse("Z3^4xZ2")
        H = subgroup_generated(z, [(1, 0, 0, 0, 0), (0, 0, 0, 0, 1)])
        exact, _ = smoothing_error(H, H, H, 4, 2)
        _require(exact <= 1e-12, "X = H does not fix 1_H * mu_H", error=exact)
        wh = croot_sisask_search(H, H, GroupSet.full(z), 4, 2, 1.0, seed=cfg.seed)
        _require(wh.error <= wh.bound, "subgroup smoothing witness", error=wh.error)
        try:
            croot_sisask_search(A, A, G, 4, 2, 1e-6, seed=cfg.seed)
            raise AssertionError("tiny theta unexpectedly succeeded")
        except SearchExhausted:
            pass
        return {"error": err, "bound": w.theta * scale,
                "_ledger": [("cs_density", "interval20_z503", w.tau)]}

    bat.check("croot_sisask", smoothing)

    def packing():
        spec = GroupSpec.cyclic(100)
        A = gen_set(spec, "interval(20)")
        f = DenseFunction(spec, np.asarray(convolve(DenseFunction.indicator(A),
                                                    DenseFunction.indicator(A)).values.real) * spec.order / A.size)
        T = GroupSet.from_indices(spec, [98, 99, 0, 1, 2])
        x = packing_translate(f, T, 8)
        _require(all(spec.add(x, t) in sumset(A, A) for t in T), "packing translate escapes A+A")
        try:
            packing_translate(f, GroupSet.from_indices(spec, range(4)), 2)
            raise AssertionError("|T| >= 2^p accepted")
        except PreconditionError:
            pass
        return {"x": list(x)}

    bat.check("packing", packing)

    def extraction():
        z2 = GroupSpec.parse("Z2^12")
        sub = extract_ap_or_subgroup(subgroup_system(GroupSet.full(z2)), 1)
        _require(sub.kind == "subgroup", "expected a subgroup")
        z2003 = GroupSpec.cyclic(2003)
        ap = extract_ap_or_subgroup(bohr_system(z2003, [(1,)], Fraction(1, 4), declared_dimension=1), 1)
        _require(ap.kind == "proper_ap", "expected a progression")
        for e in (sub, ap):
            lo, hi = e.window
            _require(lo <= e.T.size <= hi, "size window", **e.to_dict())
        return {"subgroup": sub.to_dict(), "progression": ap.to_dict()}

    bat.check("extraction", extraction)

    def end_to_end():
        spec = GroupSpec.cyclic(10007)
        A = gen_set(spec, "interval(50)")
        res = find_long_structure(A, seed=cfg.seed, constants=cfg.constants)
        cert = res.certificate
        _require(cert.kind == "proper_ap" and cert.length >= 8, "progression too short", **cert.to_dict())
        _require(bool(verify_in_sumset(spec, A, cert)), "certificate does not verify")
        z = GroupSpec.parse("Z3^4xZ2")
        C = gen_set(z, "coset([1,0,0,0,0] [0,0,0,0,1];[0,0,1,2,0])")
        cres = find_long_structure(C, seed=cfg.seed, constants=cfg.constants)
        _require(cres.certificate.kind == "coset", "expected a coset certificate")
        _require(bool(verify_in_sumset(z, C, cres.certificate)), "coset certificate does not verify")
        _require(set(cres.certificate.elements(z)) == set(sumset(C, C)), "coset does not cover A+A")
        return {"progression": cert.to_dict(), "coset": cres.certificate.to_dict(),
                "_ledger": [("ap_length_ratio", "interval50_z10007", res.trace["length_ratio"]),
                            ("certificate_length", "interval50_z10007", cert.length)]}

    bat.check("find_long_structure", end_to_end)


BATTERIES = {
    "harmonic": harmonic_battery,
    "systems": systems_battery,
    "spectrum": spectrum_battery,
    "roth": roth_battery,
    "longaps": longaps_battery,
}


def run_suite(name: str, cfg: ExperimentConfig):
    """Run a battery (or all of them); returns ``(report, exit_code)``."""
    from bourgainlab.report import Report

    if name != "all" and name not in BATTERIES:
        raise ConfigError(f"unknown suite {name!r}")
    report = Report(config=dict(cfg.to_dict(), suite=name))
    start = time.perf_counter()
    for suite in (SUITES if name == "all" else (name,)):
        BATTERIES[suite](cfg, Battery(report, suite))
    report.wall_time = round(time.perf_counter() - start, 3)
    return report, 0 if report.passed else 1
