from __future__ import annotations

import json
from pathlib import Path

import pytest
from click.testing import CliRunner

from tests.conftest import tpt1_text
from tptensor import __version__
from tptensor.cli import GENERAL_NOTICE, main
from tptensor.formats import parse_trace


@pytest.fixture
def run():
    runner = CliRunner()

    def invoke(*args: str):
        return runner.invoke(main, list(args), catch_exceptions=False)

    return invoke


def write(tmp_path: Path, name: str, text: str) -> str:
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return str(path)


def test_version(run):
    result = run("--version")
    assert result.exit_code == 0
    assert __version__ in result.output


def test_classify_equal_ab(run):
    result = run("classify", "--m", "3", "--a", "0.5")
    assert result.exit_code == 0
    assert "EqualAB" in result.output


def test_classify_json_for_p1(run):
    result = run("classify", "--m", "4", "--a", "1", "--json")
    assert result.exit_code == 0
    data = json.loads(result.output)
    assert [p["x"] for p in data["stationary_set"]] == [0.0, 0.5, 1.0]
    assert len(data["discrepancy_flags"]) == 1


def test_classify_needs_a_source(run):
    assert run("classify").exit_code == 2


@pytest.mark.parametrize("a", ["1.5", "-0.1"])
def test_classify_rejects_a_outside_unit_interval(run, a):
    result = run("classify", "--m", "3", "--a", a)
    assert result.exit_code == 2
    assert "error:" in result.output


def test_classify_rejects_non_decimal(run):
    result = run("classify", "--m", "3", "--a", "0x1")
    assert result.exit_code == 2
    assert "offending token" in result.output


def test_classify_file_matches_parameters(run, tmp_path):
    target = str(tmp_path / "p.tpt")
    assert run("materialize", "--m", "5", "--a", "0.3", "--out", target).exit_code == 0
    from_file = run("classify", "--file", target, "--json")
    from_params = run("classify", "--m", "5", "--a", "0.3", "--json")
    assert from_file.exit_code == 0
    assert from_file.output == from_params.output


def test_classify_sym2_file(run, tmp_path):
    path = write(tmp_path, "f.sym2", "# family\nSYM2 m=6 a=0.25\n")
    result = run("classify", "--file", path, "--json")
    assert json.loads(result.output)["m"] == 6


def test_classify_general_tensor_prints_notice(run, tmp_path):
    path = write(tmp_path, "u.tpt", tpt1_text(3, 3, [1 / 3] * 27))
    result = run("classify", "--file", path)
    assert result.exit_code == 0
    assert GENERAL_NOTICE in result.output
    data = json.loads(run("classify", "--file", path, "--json").output)
    assert data["dim"] == 3
    assert data["notice"] == GENERAL_NOTICE


def test_validate_ok(run, tmp_path):
    path = write(tmp_path, "ok.tpt", tpt1_text(3, 2, [0.5] * 8))
    result = run("validate", path)
    assert result.exit_code == 0
    assert result.output.endswith(": ok\n")


def test_validate_reports_overfull_column(run, tmp_path):
    path = write(tmp_path, "bad.tpt", tpt1_text(3, 2, [0.7, 0.5, 0.5, 0.5, 0.7, 0.5, 0.5, 0.5]))
    result = run("validate", path)
    assert result.exit_code == 1
    assert "(1, 1)" in result.output


def test_validate_malformed_file(run, tmp_path):
    path = write(tmp_path, "broken.tpt", "TPT1\norder x\n")
    result = run("validate", path)
    assert result.exit_code == 2
    assert "line 2" in result.output


def test_validate_wrong_entry_count(run, tmp_path):
    path = write(tmp_path, "short.tpt", tpt1_text(3, 2, [0.5] * 7))
    assert run("validate", path).exit_code == 2


def test_roots(run):
    result = run("roots", "--m", "4", "--a", "1", "--grid", "1001")
    assert result.exit_code == 0
    assert result.output.splitlines()[0].endswith(": 3")


def test_roots_rejects_small_grid(run):
    assert run("roots", "--m", "4", "--a", "1", "--grid", "10").exit_code == 2


def test_solve_family(run):
    result = run("solve", "--m", "4", "--a", "0.6", "--x0", "0.9,0.1")
    assert result.exit_code == 0
    assert "notice" not in result.output
    assert "iterations" in result.output
    assert "not converged" not in result.output


def test_solve_reports_non_convergence(run):
    result = run("solve", "--m", "4", "--a", "0.6", "--x0", "0.9,0.1", "--max-iter", "1")
    assert result.exit_code == 0
    assert "(not converged)" in result.output


def test_solve_general_tensor(run, tmp_path):
    path = write(tmp_path, "u.tpt", tpt1_text(3, 3, [1 / 3] * 27))
    result = run("solve", "--file", path)
    assert result.exit_code == 0
    assert GENERAL_NOTICE in result.output


def test_solve_rejects_off_simplex_start(run):
    assert run("solve", "--m", "4", "--a", "0.6", "--x0", "0.9,0.3").exit_code == 2


def test_simulate_cycle(run):
    result = run(
        "simulate", "--m", "3", "--a", "1", "--steps", "9", "--seed", "0", "--burn-in", "0", "--window", "2,2"
    )
    assert result.exit_code == 0
    assert "1/3, 2/3" in result.output


def test_simulate_rejects_burn_in_past_steps(run):
    assert run("simulate", "--m", "3", "--a", "0.5", "--steps", "9", "--seed", "0", "--burn-in", "9").exit_code == 2


def test_report_json_is_reproducible(run):
    args = ("report", "--m", "4", "--a", "0.6", "--steps", "2000", "--seed", "3", "--json")
    first = run(*args)
    assert first.exit_code == 0
    assert run(*args).output == first.output
    assert run("--workers", "3", *args).output == first.output
    data = json.loads(first.output)
    assert data["classification"]["case_label"] == "AGreater_lt1"
    assert len(data["deviations"]) == 6


def test_report_text(run):
    result = run("report", "--m", "3", "--a", "0.5", "--steps", "1000")
    assert result.exit_code == 0
    assert "comparison  steps=1000 seed=0 burn_in=100" in result.output
    assert "deviations" in result.output


def test_sweep_json(run):
    result = run("sweep", "--m-min", "3", "--m-max", "4", "--a-step", "0.5", "--json")
    assert result.exit_code == 0
    rows = json.loads(result.output)
    assert [(r["m"], r["a"]) for r in rows] == [(3, 0.0), (3, 0.5), (3, 1.0), (4, 0.0), (4, 0.5), (4, 1.0)]


def test_sweep_rejects_uneven_step(run):
    assert run("sweep", "--m-min", "3", "--m-max", "4", "--a-step", "0.3").exit_code == 2


def test_export_trace_to_file(run, tmp_path):
    target = tmp_path / "t.txt"
    result = run("export-trace", "--m", "3", "--a", "1", "--steps", "5", "--seed", "0", "--out", str(target))
    assert result.exit_code == 0
    header, states = parse_trace(target.read_text(encoding="utf-8"))
    assert header == {"seed": "0", "m": "3", "a": "1.0"}
    assert states == [1] * 7


def test_export_trace_default_location(run, isolated_settings):
    result = run("export-trace", "--m", "3", "--a", "0.5", "--steps", "20", "--seed", "4")
    assert result.exit_code == 0
    path = Path(result.output.strip())
    assert path.parent == Path(isolated_settings.DATA_DIR) / "traces"
    assert path.name == "trace_m=3_a=0.5_seed=4.txt"
    assert len(parse_trace(path.read_text(encoding="utf-8"))[1]) == 22


def test_materialize_to_stdout(run):
    result = run("materialize", "--m", "3", "--a", "0.25")
    assert result.exit_code == 0
    lines = result.output.splitlines()
    assert lines[:2] == ["TPT1", "# SYM2 m=3 a=0.25"]
    assert lines[-1] == "end"
    assert len(lines) == 2 + 3 + 8 + 1


def test_journal_off_by_default(run):
    result = run("journal")
    assert result.exit_code == 0
    assert result.output.startswith("no journal at")


def test_journal_records_runs(run, isolated_settings):
    isolated_settings.JOURNAL = True
    assert run("classify", "--m", "3", "--a", "0.5").exit_code == 0
    assert run("classify", "--m", "3", "--a", "2").exit_code == 2
    result = run("journal")
    assert result.exit_code == 0
    assert "runs 2, failures 1" in result.output
    assert "case EqualAB" in result.output
    assert "cli.error" in result.output
    assert "classify.done" in result.output


@pytest.mark.parametrize("command", [("validate",), ("classify", "--file")])
def test_undecodable_file_exits_2(run, tmp_path, command):
    path = tmp_path / "bad.tpt"
    path.write_bytes(b"TPT1\norder 3\ndim 2\nentries\n0.5\xff\n")
    result = run(*command, str(path))
    assert result.exit_code == 2
    assert "not valid UTF-8" in result.output
    assert "Traceback" not in result.output


def test_very_large_order(run):
    result = run("classify", "--m", "2000", "--a", "0.3")
    assert result.exit_code == 0
    assert "BGreater_even" in result.output
    assert run("solve", "--m", "1100", "--a", "0.3").exit_code == 0


def test_roots_past_binomial_table(run):
    result = run("roots", "--m", "100", "--a", "0.3", "--grid", "1001")
    assert result.exit_code == 0
    assert result.output.splitlines()[0].endswith(": 1")


def test_report_json_p1_is_reproducible(run):
    first = run("report", "--m", "4", "--a", "1", "--json")
    assert first.exit_code == 0
    assert run("report", "--m", "4", "--a", "1", "--json").output == first.output
    assert run("--workers", "4", "report", "--m", "4", "--a", "1", "--json").output == first.output
    data = json.loads(first.output)
    assert [p["x"] for p in data["classification"]["stationary_set"]] == [0.0, 0.5, 1.0]


def test_journal_counts_usage_errors(run, isolated_settings):
    isolated_settings.JOURNAL = True
    assert run("classify").exit_code == 2
    result = run("journal")
    assert "runs 1, failures 1" in result.output
    assert "cli.usage" in result.output
