import json
import math
from fractions import Fraction

import numpy as np
import pytest

from bourgainlab.errors import ConfigError
from bourgainlab.report import Report, clean, emit_report, ledger_csv, load_report, report_json
from bourgainlab.suites import ExperimentConfig, parse_overrides, pmap, run_suite


def test_clean_types():
    out = clean({"a": Fraction(1, 3), "b": np.int64(3), "c": [np.float64(0.5), math.nan], "d": np.bool_(True)})
    assert out == {"a": "1/3", "b": 3, "c": [0.5, "nan"], "d": True}
    json.dumps(out, allow_nan=False)


def test_report_round_trip(tmp_path):
    rep = Report(config={"seed": 1})
    rep.record("s", "one", "pass", value=Fraction(1, 2))
    rep.record("s", "two", "fail", error="boom")
    rep.log("s", "ratio", "inst", 0.25)
    path = tmp_path / "r.json"
    emit_report(rep, str(path))
    again = load_report(str(path))
    assert again.results == rep.results and not again.passed
    assert ledger_csv(rep).splitlines() == ["suite,metric,instance,value", "s,ratio,inst,0.25"]
    with pytest.raises(ValueError):
        rep.record("s", "x", "maybe")


def test_emit_report_bad_path(tmp_path):
    with pytest.raises(OSError, match="cannot write report"):
        emit_report(Report(), str(tmp_path / "missing" / "r.json"))


def test_overrides():
    c = parse_overrides({"C0": "1", "c_ann": "1/16"})
    assert c.C0 == 1 and c.c_ann == Fraction(1, 16)
    for bad in ({"nope": "1"}, {"C0": "x"}, {"C0": "-1"}):
        with pytest.raises(ConfigError):
            parse_overrides(bad)


def test_pmap_keeps_order():
    assert pmap(lambda x: x * x, range(30)) == [x * x for x in range(30)]


def test_suite_determinism():
    cfg = ExperimentConfig(group="Z101", seed=3, instances=4)
    a, code_a = run_suite("systems", cfg)
    b, code_b = run_suite("systems", cfg)
    a.wall_time = b.wall_time = 0
    assert code_a == code_b == 0
    assert report_json(a) == report_json(b)


def test_forced_failure():
    cfg = ExperimentConfig(group="Z101", seed=0, instances=4, overrides={"C0": "1"})
    rep, code = run_suite("systems", cfg)
    assert code == 1
    assert [r["name"] for r in rep.failures] == ["regularity_and_averaging"]


def test_unknown_suite():
    with pytest.raises(ConfigError):
        run_suite("nope", ExperimentConfig())
