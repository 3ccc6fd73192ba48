#!/usr/bin/env python3
"""
Test the command-line front end: output files, exit codes and status lines
"""

import json
import os
import sys

import pytest

# Add the parent directory to Python path
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import utilities as util
from cli import EXIT_INVALID, EXIT_IO, EXIT_OK, main
from quotients import Params, build_partition


def test_generate_ascii(tmp_path, capsys):
    out = tmp_path / "e.txt"
    assert main(["generate", "-p", "3", "-r", "2", "-n", "54", "--format", "ascii", "--out", str(out)]) == EXIT_OK
    lines = out.read_text().splitlines()
    assert lines[0] == "ESEQ1 p=3 r=2 n=54"
    assert len(lines) == 55
    assert "✅" in capsys.readouterr().err


def test_generate_rejects_composite_p(capsys):
    assert main(["generate", "-p", "4", "-r", "1"]) == EXIT_INVALID
    assert "p must be an odd prime" in capsys.readouterr().err


def test_generate_count_ceiling(capsys, monkeypatch):
    monkeypatch.setenv("EULERSEQ_MAX_COUNT", "100")
    assert main(["generate", "-p", "3", "-r", "2", "-n", "101"]) == EXIT_INVALID
    assert "count exceeds ceiling" in capsys.readouterr().err


def test_generate_worked_example(tmp_path):
    out = tmp_path / "e.bin"
    assert main(["generate", "-p", "5", "-r", "3", "-n", "625", "--format", "bin", "--out", str(out)]) == EXIT_OK
    bits = util.read_sequence(str(out)).bits
    partition = build_partition(Params(p=5, r_frak=3), 3)
    assert all(bits[u] == 0 for u in partition.members(17))
    assert all(bits[u] == 1 for u in partition.members(85))


def test_generate_is_byte_identical(tmp_path):
    first, second = tmp_path / "a.txt", tmp_path / "b.txt"
    for out in (first, second):
        assert main(["generate", "-p", "7", "-r", "1", "--out", str(out)]) == EXIT_OK
    assert first.read_bytes() == second.read_bytes()


def test_generate_to_stdout(capsys):
    assert main(["generate", "-p", "3", "-r", "1", "--format", "json"]) == EXIT_OK
    document = json.loads(capsys.readouterr().out)
    assert document["n"] == 9


def test_verify_all(tmp_path, capsys):
    out = tmp_path / "verify.json"
    assert main(["verify", "-p", "3", "-r", "2", "--all", "--no-timing", "--out", str(out)]) == EXIT_OK
    document = json.loads(out.read_text())
    assert document["passed"] is True
    assert document["schema_version"] == "eulerseq-report-v1"
    assert "resources" not in document
    assert "passed" in capsys.readouterr().err


def test_verify_is_byte_identical_without_timing(tmp_path):
    first, second = tmp_path / "a.json", tmp_path / "b.json"
    for out in (first, second):
        assert main(["verify", "-p", "3", "-r", "2", "--lemmas", "--no-timing", "--out", str(out)]) == EXIT_OK
    assert first.read_bytes() == second.read_bytes()


def test_verify_wieferich(tmp_path, capsys):
    out = tmp_path / "w.json"
    assert main(["verify", "-p", "1093", "-r", "1", "--trace", "--out", str(out)]) == EXIT_OK
    document = json.loads(out.read_text())
    assert {check["status"] for check in document["checks"]} == {"skipped: wieferich"}
    assert "⚠️" in capsys.readouterr().err


def test_verify_lincomp(tmp_path):
    out = tmp_path / "lc.json"
    assert main(["verify", "-p", "3", "-r", "2", "--lincomp", "--out", str(out)]) == EXIT_OK
    checks = {check["check"]: check for check in json.loads(out.read_text())["checks"]}
    assert checks["triple_agreement"]["detail"] == "bm=24 closed_form=24 weight=24"


def test_verify_degree_ceiling(capsys, monkeypatch):
    monkeypatch.setenv("EULERSEQ_MAX_DEGREE", "10")
    assert main(["verify", "-p", "3", "-r", "2"]) == EXIT_INVALID
    assert "exceeds the ceiling" in capsys.readouterr().err
    monkeypatch.delenv("EULERSEQ_MAX_DEGREE")
    assert main(["report", "-p", "3", "-r", "2", "--max-degree", "10"]) == EXIT_INVALID


def test_report(tmp_path):
    out = tmp_path / "report.json"
    assert main(["report", "-p", "5", "-r", "2", "--out", str(out)]) == EXIT_OK
    document = json.loads(out.read_text())
    assert document["kind"] == "report"
    assert document["linear_complexity"]["closed_form_value"] == 120
    assert "resources" in document


def test_report_wieferich_is_invalid(capsys):
    assert main(["report", "-p", "1093", "-r", "1"]) == EXIT_INVALID
    assert "Wieferich" in capsys.readouterr().err


def test_verify_wieferich_above_ceiling(capsys):
    assert main(["verify", "-p", "1093", "-r", "2", "--lemmas"]) == EXIT_INVALID
    assert "exceeds the ceiling" in capsys.readouterr().err


def test_io_failure(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert main(["generate", "-p", "3", "-r", "1", "--out", str(blocker / "e.txt")]) == EXIT_IO


def test_missing_subcommand():
    with pytest.raises(SystemExit):
        main([])
