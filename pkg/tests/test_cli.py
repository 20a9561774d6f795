"""Command-line interface tests: exit codes, formats, and output
encodings (machine output must match the RPC result encoding)."""

import json

import pytest

from inq.gateway.cli import main
from inq.session import EventLog, make_event

INFINITE = (
    'response = input("Please enter (y)es or (n)o")\n'
    "while response != 'y' or response != 'n':\n"
    '    response = input("Please enter (y)es or (n)o")\n'
)


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return str(path)


# -- analyze -----------------------------------------------------------------


def test_analyze_clean_file_exits_zero(tmp_path, capsys):
    path = write(tmp_path, "clean.nvl", 'print("hello")\n')
    assert main(["analyze", path]) == 0
    assert capsys.readouterr().out.strip() == "no findings"


def test_analyze_infinite_loop_exits_three(tmp_path, capsys):
    path = write(tmp_path, "infinite.nvl", INFINITE)
    assert main(["analyze", path]) == 3
    out = capsys.readouterr().out
    assert "line 2: [S01]" in out
    assert "1 question-worthy finding(s)" in out


def test_analyze_json_format_matches_rpc_encoding(tmp_path, capsys):
    path = write(tmp_path, "infinite.nvl", INFINITE)
    assert main(["analyze", path, "--format", "json"]) == 3
    payload = json.loads(capsys.readouterr().out)
    diag = payload["diagnostics"][0]
    assert diag["rule_id"] == "S01"
    assert diag["span"]["start_line"] == 2
    assert diag["span"]["start_col"] == 1
    assert payload["annotations"][0]["question_id"]


def test_analyze_info_only_findings_exit_zero(tmp_path, capsys):
    path = write(tmp_path, "notes.nvl", "x = 5\nx == 5\n")
    assert main(["analyze", path]) == 0
    out = capsys.readouterr().out
    assert "[S08]" in out and "(note)" in out


def test_analyze_parse_failure_exits_one_with_location(tmp_path, capsys):
    path = write(tmp_path, "broken.nvl", "while :\n    x = 1\n")
    assert main(["analyze", path]) == 1
    err = capsys.readouterr().err
    assert "1:" in err  # line:col position


def test_analyze_missing_file_exits_two(tmp_path, capsys):
    with pytest.raises(SystemExit) as info:
        main(["analyze", str(tmp_path / "absent.nvl")])
    assert info.value.code == 2
    assert "cannot read" in capsys.readouterr().err


def test_usage_error_exits_two(capsys):
    with pytest.raises(SystemExit) as info:
        main(["analyze"])
    assert info.value.code == 2


def test_unknown_command_exits_two():
    with pytest.raises(SystemExit) as info:
        main(["explode"])
    assert info.value.code == 2


# -- run ---------------------------------------------------------------------


def test_run_pipes_inputs_and_prints_stdout(tmp_path, capsys):
    path = write(tmp_path, "greet.nvl",
                 "name = input()\nprint(name)\nprint(input())\n")
    assert main(["run", path, "--input", "ada", "--input", "bob"]) == 0
    captured = capsys.readouterr()
    assert captured.out == "ada\nbob\n"
    assert captured.err == ""


def test_run_reports_budget_exhaustion_on_stderr(tmp_path, capsys):
    path = write(tmp_path, "spin.nvl", "while True:\n    pass\n")
    assert main(["run", path, "--budget", "60"]) == 0
    captured = capsys.readouterr()
    assert "BudgetExhausted" in captured.err
    assert "60 steps" in captured.err


def test_run_parse_failure_exits_one(tmp_path, capsys):
    path = write(tmp_path, "broken.nvl", "if\n")
    assert main(["run", path]) == 1
    assert "1:" in capsys.readouterr().err


def test_run_bad_budget_exits_two(tmp_path, capsys):
    path = write(tmp_path, "ok.nvl", "x = 1\n")
    assert main(["run", path, "--budget", "0"]) == 2
    assert "budget" in capsys.readouterr().err


# -- report ------------------------------------------------------------------


def seed_log(log_dir):
    log = EventLog(log_dir / "events.ndjson")
    sid_a, sid_b = "a" * 32, "b" * 32
    lhash = "c" * 16
    for verdict, category, rule in (("Incorrect", "loops", "S01"),
                                    ("Incorrect", "loops", "S04"),
                                    ("TooLoose", "types", "S06"),
                                    ("Correct", "loops", "S01")):
        log.log_event(make_event(sid_a, lhash, "question-answered", {
            "verdict": verdict, "category": category, "rule_id": rule,
            "question_kind": "NumericRange"}, ts=50))
    log.log_event(make_event(sid_b, lhash, "analyze",
                             {"diagnostics": 1}, ts=60))


def test_report_csv(tmp_path, capsys):
    seed_log(tmp_path)
    assert main(["report", str(tmp_path), "--csv"]) == 0
    assert capsys.readouterr().out == \
        "category,count\nloops,2\ntypes,1\n"


def test_report_json(tmp_path, capsys):
    seed_log(tmp_path)
    assert main(["report", str(tmp_path)]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["per_category"] == {"loops": 2, "types": 1}
    assert payload["per_rule"] == {"S01": 1, "S04": 1, "S06": 1}
    assert payload["sessions"] == 2
    assert payload["correctness_rate"] == {"NumericRange": 0.25}


def test_report_missing_directory_exits_two(tmp_path, capsys):
    assert main(["report", str(tmp_path / "nowhere")]) == 2
    assert "no such log path" in capsys.readouterr().err


# -- version -----------------------------------------------------------------


def test_version_prints_name_and_number(capsys):
    assert main(["version"]) == 0
    out = capsys.readouterr().out.strip()
    assert out.startswith("inq ")
    assert out.split()[1][0].isdigit()
