"""Certificates and their standalone verification.

Everything here depends on ``bourgainlab.group`` only, so a certificate
can be re-checked without trusting any code that produced it.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from bourgainlab.group import (
    Element,
    GroupSet,
    GroupSpec,
    is_subgroup,
    subgroup_generated,
    sumset,
)


@dataclass(frozen=True)
class ThreeAPCertificate:
    x: Element
    y: Element
    z: Element
    kind: str  # "nontrivial" or "proper"

    def to_dict(self) -> dict:
        return {"type": "3ap", "x": list(self.x), "y": list(self.y), "z": list(self.z), "kind": self.kind}

    def shifted(self, spec: GroupSpec, s) -> "ThreeAPCertificate":
        return ThreeAPCertificate(spec.add(self.x, s), spec.add(self.y, s), spec.add(self.z, s), self.kind)


@dataclass(frozen=True)
class StructureCertificate:
    kind: str  # "proper_ap" or "coset"
    base: Element
    step: Element | None = None
    length: int = 0
    generators: tuple = field(default_factory=tuple)
    container: str = "A+A"

    def to_dict(self) -> dict:
        if self.kind == "proper_ap":
            return {"kind": "proper_ap", "base": list(self.base), "step": list(self.step), "length": self.length}
        return {"kind": "coset", "base": list(self.base), "generators": [list(g) for g in self.generators]}

    def elements(self, spec: GroupSpec) -> list[Element]:
        if self.kind == "proper_ap":
            return [spec.add(self.base, spec.scale(j, self.step)) for j in range(self.length)]
        H = subgroup_generated(spec, self.generators)
        return list(H.translate(self.base))


def certificate_from_dict(data: dict):
    if data.get("type") == "3ap":
        return ThreeAPCertificate(tuple(data["x"]), tuple(data["y"]), tuple(data["z"]), data["kind"])
    if data["kind"] == "proper_ap":
        return StructureCertificate("proper_ap", tuple(data["base"]), tuple(data["step"]), int(data["length"]))
    if data["kind"] == "coset":
        gens = tuple(tuple(g) for g in data["generators"])
        return StructureCertificate("coset", tuple(data["base"]), None, 0, gens)
    raise ValueError(f"unknown certificate kind {data.get('kind')!r}")


def dump_certificate(cert, path: str) -> None:
    with open(path, "w") as fh:
        json.dump(cert.to_dict(), fh, sort_keys=True, indent=2)
        fh.write("\n")


def load_certificate(path: str):
    with open(path) as fh:
        return certificate_from_dict(json.load(fh))


@dataclass
class Verdict:
    ok: bool
    reason: str = ""

    def __bool__(self) -> bool:
        return self.ok


def verify_threeap(spec: GroupSpec, A: GroupSet, cert: ThreeAPCertificate) -> Verdict:
    x, y, z = (spec.element(v) for v in (cert.x, cert.y, cert.z))
    if spec.add(x, z) != spec.scale(2, y):
        return Verdict(False, "x + z != 2y")
    for v in (x, y, z):
        if v not in A:
            return Verdict(False, f"{spec.render(v)} not in A")
    if x == y == z:
        return Verdict(False, "trivial progression")
    if cert.kind == "proper" and len({x, y, z}) < 3:
        return Verdict(False, "terms not pairwise distinct")
    if cert.kind not in ("proper", "nontrivial"):
        return Verdict(False, f"unknown kind {cert.kind!r}")
    return Verdict(True)


def verify_structure(spec: GroupSpec, container: GroupSet, cert: StructureCertificate) -> Verdict:
    """Check the certified AP or coset lies in ``container`` term by term."""
    if cert.kind == "proper_ap":
        if cert.length < 1:
            return Verdict(False, "empty progression")
        terms = cert.elements(spec)
        if len(set(terms)) != cert.length:
            return Verdict(False, "progression terms are not distinct")
        for t in terms:
            if t not in container:
                return Verdict(False, f"term {spec.render(t)} not in container")
        return Verdict(True)
    if cert.kind == "coset":
        H = subgroup_generated(spec, cert.generators)
        if not is_subgroup(H):
            return Verdict(False, "generated set is not a subgroup")
        coset = H.translate(cert.base)
        if not coset <= container:
            return Verdict(False, "coset not contained in container")
        return Verdict(True)
    return Verdict(False, f"unknown kind {cert.kind!r}")


def verify_in_sumset(spec: GroupSpec, A: GroupSet, cert: StructureCertificate) -> Verdict:
    return verify_structure(spec, sumset(A, A), cert)
