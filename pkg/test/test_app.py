#!/usr/bin/env python3
"""
Test the run configuration, the verification suite and the analysis report
"""

import json
import os
import re
import sys

import pytest
from pydantic import ValidationError

# Add the parent directory to Python path
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from app import CHECK_GROUPS, REPORT_SCHEMA, SAMPLE_SEED, RunConfig, build_report, run_verification
from errors import ParameterError, WieferichError
from quotients import Params

SCHEMA_PATH = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "schemas", f"{REPORT_SCHEMA}.json")

with open(SCHEMA_PATH, encoding="utf-8") as f:
    SCHEMA = json.load(f)

JSON_TYPES = {
    "object": dict,
    "array": list,
    "string": str,
    "boolean": bool,
    "integer": int,
    "number": (int, float),
}


def _violations(value, node, path="$"):
    """Schema keywords used by the shipped schema: $ref, type, const, enum, required, properties, items, minimum, pattern."""
    if "$ref" in node:
        node = SCHEMA["$defs"][node["$ref"].rsplit("/", 1)[-1]]
    found = []
    expected = node.get("type")
    if expected:
        ok = isinstance(value, JSON_TYPES[expected])
        if expected in ("integer", "number") and isinstance(value, bool):
            ok = False
        if not ok:
            return [f"{path}: expected {expected}, got {type(value).__name__}"]
    if "const" in node and value != node["const"]:
        found.append(f"{path}: expected {node['const']!r}")
    if "enum" in node and value not in node["enum"]:
        found.append(f"{path}: {value!r} not in {node['enum']}")
    if "minimum" in node and value < node["minimum"]:
        found.append(f"{path}: {value} below {node['minimum']}")
    if "pattern" in node and not re.search(node["pattern"], value):
        found.append(f"{path}: {value!r} does not match {node['pattern']}")
    for key in node.get("required", []):
        if key not in value:
            found.append(f"{path}: missing {key}")
    for key, child in node.get("properties", {}).items():
        if key in value:
            found += _violations(value[key], child, f"{path}.{key}")
    if "items" in node:
        for i, item in enumerate(value):
            found += _violations(item, node["items"], f"{path}[{i}]")
    return found


def test_schema_rejects_malformed_documents():
    assert _violations({"kind": "verify"}, {"$ref": "#/$defs/verify"})
    bad_params = {"p": 3, "r_frak": 0}
    assert _violations(bad_params, {"$ref": "#/$defs/params"}) == ["$.r_frak: 0 below 1"]
    assert _violations({"p": True, "r_frak": 1}, {"$ref": "#/$defs/params"})


def test_run_config_validation():
    with pytest.raises(ValidationError, match="p must be an odd prime"):
        RunConfig(command="generate", p=9, r_frak=1)
    with pytest.raises(ValidationError, match="r must be >= 1"):
        RunConfig(command="generate", p=3, r_frak=0)
    with pytest.raises(ValidationError, match="count exceeds ceiling"):
        RunConfig(command="generate", p=3, r_frak=1, count=11, max_count=10)


@pytest.mark.parametrize("p, r_frak", [(9, 1), (2, 1), (3, 0)])
def test_run_config_and_params_share_messages(p, r_frak):
    with pytest.raises(ValidationError) as config_error:
        RunConfig(command="verify", p=p, r_frak=r_frak)
    with pytest.raises(ValidationError) as params_error:
        Params(p=p, r_frak=r_frak)
    assert config_error.value.errors()[0]["msg"] == params_error.value.errors()[0]["msg"]


def test_run_config_defaults(monkeypatch):
    monkeypatch.setenv("EULERSEQ_MAX_DEGREE", "64")
    config = RunConfig(command="verify", p=3, r_frak=2)
    assert config.max_degree == 64
    assert config.groups == CHECK_GROUPS
    assert RunConfig(command="verify", p=3, r_frak=2, trace=True, lincomp=True).groups == ("trace", "lincomp")


def test_verify_all_groups_3_2():
    report = run_verification(RunConfig(command="verify", p=3, r_frak=2, timing=False))
    assert report.passed
    assert report.schema_version == REPORT_SCHEMA
    assert report.sample_seed == SAMPLE_SEED
    assert report.degree == 18
    assert report.resources is None
    assert {result.group for result in report.checks} == set(CHECK_GROUPS)
    assert all(result.status == "passed" for result in report.checks)
    assert all(result.elapsed_ms == 0 for result in report.checks)
    document = report.model_dump(mode="json", exclude_none=True)
    assert _violations(document, {"$ref": "#/$defs/verify"}) == []


def test_verify_lincomp_detail():
    report = run_verification(RunConfig(command="verify", p=3, r_frak=2, lincomp=True))
    triple = next(result for result in report.checks if result.check == "triple_agreement")
    assert triple.passed
    assert triple.detail == "bm=24 closed_form=24 weight=24"
    assert report.resources is not None
    assert _violations(report.model_dump(mode="json", exclude_none=True), {"$ref": "#/$defs/verify"}) == []


def test_verify_r1_trace_needs_extended():
    report = run_verification(RunConfig(command="verify", p=3, r_frak=1, trace=True))
    assert report.passed
    assert all(result.status == "skipped: r=1 needs --extended" for result in report.checks)
    assert any("--extended" in warning for warning in report.warnings)
    extended = run_verification(RunConfig(command="verify", p=3, r_frak=1, trace=True, extended=True))
    assert all(result.status == "passed" for result in extended.checks)


def test_verify_wieferich_trace_skipped():
    report = run_verification(RunConfig(command="verify", p=1093, r_frak=1, trace=True))
    assert report.passed
    assert report.degree == 364
    assert report.checks
    assert all(result.status == "skipped: wieferich" for result in report.checks)
    assert any("Wieferich" in warning for warning in report.warnings)


def test_verify_degree_ceiling():
    with pytest.raises(ParameterError):
        run_verification(RunConfig(command="verify", p=5, r_frak=2, max_degree=50))


def test_verify_wieferich_degree_ceiling():
    # 2 has order 364 * 1093 modulo 1093^3
    with pytest.raises(ParameterError, match="exceeds the ceiling"):
        run_verification(RunConfig(command="verify", p=1093, r_frak=2, lemmas=True))


def test_verify_is_deterministic_without_timing():
    config = RunConfig(command="verify", p=5, r_frak=1, timing=False)
    first = run_verification(config).model_dump_json()
    assert run_verification(config).model_dump_json() == first


def test_report_3_1():
    report = build_report(RunConfig(command="report", p=3, r_frak=1, timing=False))
    assert report.lam == 2
    assert report.degree == 6
    assert report.linear_complexity.closed_form_value == 8
    assert report.elapsed_ms == 0
    assert _violations(report.model_dump(mode="json", exclude_none=True), {"$ref": "#/$defs/report"}) == []


def test_report_5_2():
    report = build_report(RunConfig(command="report", p=5, r_frak=2))
    assert report.linear_complexity.closed_form_value == 120
    assert report.linear_complexity.agree
    assert report.eta_entries == 30
    assert len(report.eta_digest) == 64


def test_report_wieferich_refused():
    with pytest.raises(WieferichError):
        build_report(RunConfig(command="report", p=1093, r_frak=1))
