"""Test-set generators addressed by short strings such as ``interval(10)``."""

from __future__ import annotations

import re

import numpy as np

from bourgainlab.errors import ConfigError
from bourgainlab.group import GroupSet, GroupSpec, subgroup_generated

_CALL = re.compile(r"^\s*([a-z_]+)\s*\((.*)\)\s*$")
_ELEM = re.compile(r"\[[^\]]*\]|-?\d+")


def interval(spec: GroupSpec, m: int) -> GroupSet:
    """The first m elements in enumeration order; ``{0..m-1}`` in a cyclic group."""
    if not 0 <= m <= spec.order:
        raise ConfigError(f"interval length {m} outside [0, {spec.order}]")
    return GroupSet.from_indices(spec, range(m))


def random_set(spec: GroupSpec, alpha: float, seed: int = 0) -> GroupSet:
    if not 0 <= alpha <= 1:
        raise ConfigError(f"density {alpha} outside [0, 1]")
    rng = np.random.default_rng(seed)
    mask = rng.random(spec.order) < alpha
    if not mask.any():
        mask[rng.integers(spec.order)] = True
    return GroupSet(spec, mask)


def union_intervals(spec: GroupSpec, k: int, m: int, seed: int = 0) -> GroupSet:
    """k translates of ``interval(m)`` at random positions."""
    rng = np.random.default_rng(seed)
    base = interval(spec, m).indices()
    mask = np.zeros(spec.order, dtype=bool)
    for s in rng.integers(0, spec.order, size=k):
        mask[spec.add_idx(base, int(s))] = True
    return GroupSet(spec, mask)


def coset(spec: GroupSpec, generators, shift) -> GroupSet:
    H = subgroup_generated(spec, [spec.element(g) for g in generators])
    return H.translate(spec.element(shift))


def behrend_like(spec: GroupSpec, base: int, digits: int) -> GroupSet:
    """Digit-restricted integers on the most populated sphere, placed in a cyclic group.

    Integers with ``digits`` base-``base`` digits below ``base/2`` add without
    carries; fixing the sum of squared digits makes the set 3AP-free over Z.
    The group order must exceed twice the largest element so no wrap-around
    occurs.
    """
    if spec.rank != 1:
        raise ConfigError("behrend_like needs a cyclic group")
    if base < 2 or digits < 1:
        raise ConfigError("behrend_like needs base >= 2 and digits >= 1")
    top = (base + 1) // 2
    grid = np.stack(np.meshgrid(*[np.arange(top)] * digits, indexing="ij"), -1).reshape(-1, digits)
    values = grid @ (base ** np.arange(digits))
    if 2 * int(values.max()) >= spec.order:
        raise ConfigError(f"group order {spec.order} too small for base {base} with {digits} digits")
    norms = (grid**2).sum(axis=1)
    popular = np.bincount(norms).argmax()
    return GroupSet.from_indices(spec, values[norms == popular])


def greedy_apfree(spec: GroupSpec, limit: int) -> GroupSet:
    """Scan in enumeration order, keeping x unless it closes a nontrivial 3AP."""
    mask = np.zeros(spec.order, dtype=bool)
    size = 0
    for x in range(spec.order):
        if size >= limit:
            break
        trial = mask.copy()
        trial[x] = True
        idx = np.flatnonzero(trial)
        # x as an end: z = 2y - x; x as the middle: c = 2x - a
        ends = spec.sub_idx(spec.scale_idx(2, idx), x)
        mids = spec.sub_idx(spec.scale_idx(2, x), idx)
        bad = trial[ends] & ~((idx == x) & (ends == x))
        bad |= trial[mids] & ~((idx == x) & (mids == x))
        if not bad.any():
            mask[x] = True
            size += 1
    from bourgainlab.roth import count_threeaps

    A = GroupSet(spec, mask)
    if A and count_threeaps(A, "brute").nontrivial != 0:
        raise AssertionError("greedy set contains a nontrivial 3AP")
    return A


def _ints(text: str) -> list[int]:
    return [int(t) for t in text.split(",") if t.strip()]


def _elements(text: str) -> list[list[int]]:
    out = []
    for tok in _ELEM.findall(text):
        out.append(_ints(tok.strip("[]")) if tok.startswith("[") else [int(tok)])
    return out


def gen_set(spec: GroupSpec, text: str, seed: int = 0) -> GroupSet:
    """Parse and run a generator string.

    ``interval(m)``, ``random(alpha)``, ``union_intervals(k,m)``,
    ``coset(g1 g2 ...;shift)`` with elements as ints or ``[a,b,..]``,
    ``behrend_like(base,digits)``, ``greedy_apfree(max)``.
    """
    match = _CALL.match(text)
    if not match:
        raise ConfigError(f"cannot parse generator {text!r}")
    name, args = match.groups()
    try:
        if name == "interval":
            return interval(spec, int(args))
        if name == "random":
            return random_set(spec, float(args), seed)
        if name == "union_intervals":
            k, m = _ints(args)
            return union_intervals(spec, k, m, seed)
        if name == "coset":
            gens, _, shift = args.partition(";")
            sh = _elements(shift) or [[0] * spec.rank]
            return coset(spec, [tuple(g) for g in _elements(gens)], tuple(sh[0]))
        if name == "behrend_like":
            b, d = _ints(args)
            return behrend_like(spec, b, d)
        if name == "greedy_apfree":
            return greedy_apfree(spec, int(args))
    except ConfigError:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"bad arguments in {text!r}: {exc}") from exc
    raise ConfigError(f"unknown generator {name!r}")
