"""``bourgain-lab`` command line.

Exit codes: 0 pass, 1 assertion or verification failure, 2 usage or
configuration error.  Heavy modules are imported inside the commands so
that ``verify-cert`` only touches group arithmetic and the certificate
checker.
"""

from __future__ import annotations

import json
import sys

import click

from bourgainlab.errors import ConfigError


def _spec(group: str):
    from bourgainlab.group import GroupSpec

    try:
        return GroupSpec.parse(group)
    except (ValueError, TypeError) as exc:
        raise click.UsageError(f"bad group {group!r}: {exc}") from exc


def _set(spec, text: str, seed: int):
    from bourgainlab.generators import gen_set

    try:
        return gen_set(spec, text, seed)
    except ConfigError as exc:
        raise click.UsageError(str(exc)) from exc


def _overrides(pairs) -> dict:
    out = {}
    for item in pairs:
        key, sep, value = item.partition("=")
        if not sep:
            raise click.UsageError(f"constant override must look like NAME=VALUE, got {item!r}")
        out[key.strip()] = value.strip()
    return out


def _echo_json(obj) -> None:
    from bourgainlab.report import clean

    click.echo(json.dumps(clean(obj), indent=2, sort_keys=True))


def _write_json(path: str, obj) -> None:
    from bourgainlab.report import clean

    with open(path, "w") as fh:
        json.dump(clean(obj), fh, indent=2, sort_keys=True)
        fh.write("\n")


@click.group()
@click.version_option(package_name="artifact")
def main():
    """Executable checks for sumset structure, 3AP counting and long progressions."""


@main.command()
@click.option("--suite", type=click.Choice(["harmonic", "systems", "spectrum", "roth", "longaps", "all"]),
              default="all", show_default=True)
@click.option("--group", default="Z256", show_default=True, help="Group, e.g. Z1009 or Z3^4xZ2.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--instances", type=int, default=20, show_default=True, help="Random instances per check.")
@click.option("--constant", "constants", multiple=True, metavar="NAME=VALUE", help="Override a constant (C0=1).")
@click.option("--out", type=click.Path(dir_okay=False), help="Write the JSON report here.")
@click.option("--ledger", type=click.Path(dir_okay=False), help="Write the empirical-constant ledger as CSV.")
def verify(suite, group, seed, instances, constants, out, ledger):
    """Run a verification battery and report pass/fail per check."""
    from bourgainlab.report import emit_report
    from bourgainlab.suites import ExperimentConfig, run_suite

    try:
        cfg = ExperimentConfig(group=group, seed=seed, instances=instances, overrides=_overrides(constants))
        report, code = run_suite(suite, cfg)
    except ConfigError as exc:
        raise click.UsageError(str(exc)) from exc
    for row in report.results:
        click.echo(f"{row['status']:6s} {row['suite']}/{row['name']}")
    click.echo(f"{len(report.results) - len(report.failures)}/{len(report.results)} checks passed "
               f"in {report.wall_time:.1f}s")
    if out:
        emit_report(report, out, "json")
    if ledger:
        emit_report(report, ledger, "csv")
    sys.exit(code)


@main.command()
@click.option("--set", "set_text", required=True, help="Generator, e.g. interval(10).")
@click.option("--group", required=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--driver/--no-driver", default=False, help="Also run the density-increment driver.")
@click.option("--cert", type=click.Path(dir_okay=False), help="Write a 3AP certificate here if one is found.")
def threeaps(set_text, group, seed, driver, cert):
    """Count 3APs both ways and look for a nontrivial one."""
    from bourgainlab.certificates import dump_certificate
    from bourgainlab.roth import RothConfig, count_threeaps, density_increment_driver, find_threeap
    from bourgainlab.systems import subgroup_system
    from bourgainlab.group import GroupSet

    spec = _spec(group)
    A = _set(spec, set_text, seed)
    brute = count_threeaps(A, "brute")
    fast = count_threeaps(A, "fourier")
    out = {"size": A.size, "brute": brute.to_dict(), "fourier": fast.to_dict(), "agree": brute.total == fast.total}
    found = find_threeap(A) if brute.nontrivial else None
    if driver:
        res = density_increment_driver(A, subgroup_system(GroupSet.full(spec)), RothConfig(seed=seed))
        out["driver"] = res.to_dict()
        found = found or res.certificate
    out["certificate"] = found.to_dict() if found else None
    _echo_json(out)
    if cert and found:
        dump_certificate(found, cert)
    sys.exit(0 if out["agree"] else 1)


@main.command()
@click.option("--set", "set_text", required=True)
@click.option("--group", required=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--cert", type=click.Path(dir_okay=False), help="Write the structure certificate here.")
@click.option("--trace", type=click.Path(dir_okay=False), help="Write the per-stage trace here.")
def longaps(set_text, group, seed, cert, trace):
    """Find a long progression or a coset inside A + A."""
    from bourgainlab.certificates import dump_certificate, verify_in_sumset
    from bourgainlab.errors import BourgainLabError
    from bourgainlab.longaps import find_long_structure

    spec = _spec(group)
    A = _set(spec, set_text, seed)
    try:
        res = find_long_structure(A, seed=seed)
    except (BourgainLabError, AssertionError) as exc:
        click.echo(f"failed: {exc}", err=True)
        sys.exit(1)
    ok = bool(verify_in_sumset(spec, A, res.certificate))
    _echo_json({"certificate": res.certificate.to_dict(), "verified": ok, "route": res.trace.get("route")})
    if cert:
        dump_certificate(res.certificate, cert)
    if trace:
        _write_json(trace, res.trace)
    sys.exit(0 if ok else 1)


@main.command()
@click.option("--set", "set_text", required=True)
@click.option("--group", default="Z1009", show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--eta", type=float, default=0.5, show_default=True)
@click.option("--nu", type=float, default=0.25, show_default=True)
def spectrum(set_text, group, seed, eta, nu):
    """Large spectrum of mu_A and a system annihilating it."""
    from bourgainlab.group import GroupSet
    from bourgainlab.spectrum import build_annihilator
    from bourgainlab.systems import subgroup_system

    if not 0 < eta <= 1 or not 0 < nu:
        raise click.UsageError("need 0 < eta <= 1 and nu > 0")
    spec = _spec(group)
    A = _set(spec, set_text, seed)
    res = build_annihilator(subgroup_system(GroupSet.full(spec)), A, eta, nu, seed=seed)
    _echo_json({
        "size": A.size,
        "spectrum_size": int(len(res.Delta)),
        "m": res.m,
        "lambda": [list(spec.decode(g)) for g in res.Lambda],
        "annihilated": res.check.ok,
        "max_value": res.check.max_value,
        "annihilator_size": res.system.size(1),
        "trace": res.trace,
    })
    sys.exit(0 if res.check.ok else 1)


@main.command("verify-cert")
@click.argument("path", type=click.Path(exists=True, dir_okay=False))
@click.option("--group", required=True)
@click.option("--set", "set_text", required=True, help="The set A the certificate refers to.")
@click.option("--seed", type=int, default=0, show_default=True)
def verify_cert(path, group, set_text, seed):
    """Re-check a certificate using group arithmetic only."""
    from bourgainlab.certificates import ThreeAPCertificate, load_certificate, verify_in_sumset, verify_threeap

    spec = _spec(group)
    A = _set(spec, set_text, seed)
    try:
        cert = load_certificate(path)
    except (ValueError, KeyError, TypeError) as exc:
        raise click.UsageError(f"cannot read certificate {path}: {exc}") from exc
    if isinstance(cert, ThreeAPCertificate):
        verdict = verify_threeap(spec, A, cert)
    else:
        verdict = verify_in_sumset(spec, A, cert)
    click.echo("valid" if verdict.ok else f"invalid: {verdict.reason}")
    sys.exit(0 if verdict.ok else 1)


if __name__ == "__main__":
    main()
