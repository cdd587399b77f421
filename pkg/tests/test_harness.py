import csv
import io
import json
from fractions import Fraction

import pytest

from cubiclines._limits import WorkLimitExceeded
from cubiclines.counting import count_pv_direct
from cubiclines.harness import (
    Check,
    JobError,
    JobSpec,
    Report,
    acceptance_suite,
    canonical,
    dumps,
    parse_grid,
    run,
    run_group,
)
from cubiclines.harness.cli import main


def _lines(text):
    return [json.loads(line) for line in text.splitlines() if line]


def test_run_examples():
    rep = run(JobSpec("count-lines", {"c": "1,-1", "X": 2}))
    assert rep.results[0]["count"] == 25
    rep = run(JobSpec("pv-count", {"s": 2, "X": 4}))
    assert rep.results[0]["count"] == 496
    rep = run(JobSpec("local-identity", {"p": 2, "h": 1, "c": "1"}))
    assert rep.results[0]["lhs"] == rep.results[0]["rhs"] == 4.0
    assert rep.passed and rep.checks[0].anchor


def test_identical_specs_give_identical_bytes():
    spec = JobSpec("singular-integral-mc", {"c": "1,1,1,1", "sigma": 0.1, "n": 70000}, seed=3)
    a = run(spec).to_jsonl()
    b = run(spec).to_jsonl()
    c = run(JobSpec("singular-integral-mc", {"c": "1,1,1,1", "sigma": 0.1, "n": 70000}, seed=3, workers=3)).to_jsonl()
    assert a == b == c


def test_timing_stays_out_of_reports():
    rep = run(JobSpec("count-hua", {"X": 20}))
    assert "wall_time" in rep.timing
    assert "wall_time" not in rep.to_jsonl()
    assert "wall_time" in rep.serialize("jsonl", timing=True)


def test_grid_sweep_and_fit():
    rep = run(JobSpec("count-lines", {"c": "1,-1", "X": "1,2,3"}))
    assert [r["count"] for r in rep.results] == [9, 25, 49]
    rep = run(JobSpec("fit-exponent", {"target": "pv", "s": 1, "X": "4:32:2"}))
    assert abs(rep.results[-1]["slope"] - 2) < 1e-9


def test_parse_grid():
    assert parse_grid(5) == [5]
    assert parse_grid("3,1,2") == [3, 1, 2]
    assert parse_grid("25:200:2") == [25, 50, 100, 200]
    assert parse_grid([4, 8]) == [4, 8]
    with pytest.raises(JobError):
        parse_grid("1:x")


def test_validation_errors():
    with pytest.raises(JobError):
        run(JobSpec("no-such-command", {}))
    with pytest.raises(JobError):
        run(JobSpec("count-lines", {"X": 2}))
    with pytest.raises(JobError):
        run(JobSpec("count-lines", {"c": "1,0", "X": 2}))
    with pytest.raises(JobError):
        run(JobSpec("count-lines", {"c": "1", "X": 2, "bogus": 1}))


def test_budget_refused_before_running():
    with pytest.raises(WorkLimitExceeded):
        run(JobSpec("count-lines", {"c": "1,1,1,1,1,1", "X": 100, "method": "bruteforce"}, work_limit=1e6))


def test_dry_run_reports_estimate():
    rep = run(JobSpec("count-hua", {"X": 10**6}), dry_run=True)
    row = rep.results[0]
    assert row["work_estimate"] > 0 and row["within_budget"] == (row["work_estimate"] <= row["work_limit"])


def test_canonical_values():
    assert canonical(Fraction(1, 3)) == "1/3"
    assert canonical(1 / 3) == float("0.333333333333")
    assert canonical(complex(1, -2)) == {"re": 1.0, "im": -2.0}
    assert dumps({"b": 1, "a": [1.5]}) == '{"b":1,"a":[1.5]}'


def test_check_modes():
    assert Check("x", "a", 1.0, 1.0 + 1e-9, 1e-8, "relative").passed
    assert not Check("x", "a", 1.0, 2.0, 1e-8, "relative").passed
    assert Check("x", "a", 5, 5, 0, "exact").passed
    assert Check("x", "a", 0.5, [0, 1], 0, "range").passed
    assert not Check("x", "a", 2e-3, None, 1e-3, "less").passed
    assert Check("x", "a", 1.0, 2.0, 1e-8, "relative").with_tolerance(1.0).passed


def test_report_formats():
    rep = Report({"command": "demo"}, [{"n": 1, "v": [1, 2]}, {"n": 2, "w": 0.5}],
                 [Check("c", "a", 1, 1, 0, "exact")])
    lines = _lines(rep.to_jsonl())
    assert [l["kind"] for l in lines] == ["job", "result", "result", "check", "summary"]
    rows = list(csv.DictReader(io.StringIO(rep.to_csv())))
    assert rows[0]["v"] == "[1,2]" and rows[1]["w"] == "0.5"
    assert json.loads(rep.to_json())["passed"] is True


def test_cli_outputs(tmp_path, capsys):
    assert main(["count-lines", "--c", "1,-1", "--X", "2"]) == 0
    out = _lines(capsys.readouterr().out)
    assert out[1]["count"] == 25
    target = tmp_path / "pv.csv"
    assert main(["pv-count", "--s", "2", "--X", "1:4:2", "--format", "csv", "-o", str(target)]) == 0
    rows = list(csv.DictReader(open(target)))
    assert [int(r["count"]) for r in rows] == [count_pv_direct(2, X).count for X in (1, 2, 4)]


def test_cli_exit_codes(capsys):
    assert main(["count-lines", "--c", "1,1,1,1,1,1,1,1", "--X", "1000"]) == 3
    assert "refused" in capsys.readouterr().err
    assert main(["count-lines", "--c", "1,0", "--X", "2"]) == 2
    assert main(["complete-sum", "--q", "0", "--a", "1,1,1,1"]) == 2
    assert main(["count-hua", "--X", "1000000", "--dry-run"]) == 0


def test_cli_config_file(tmp_path, capsys):
    cfg = tmp_path / "job.json"
    cfg.write_text(json.dumps({"workers": 2, "params": {"c": "1,-1", "X": 3}}))
    assert main(["count-lines", "--config", str(cfg)]) == 0
    assert _lines(capsys.readouterr().out)[1]["count"] == 49
    # explicit flags win over the file
    assert main(["count-lines", "--config", str(cfg), "--X", "1"]) == 0
    assert _lines(capsys.readouterr().out)[1]["count"] == 9


def test_acceptance_group_runs_and_is_deterministic():
    a = run_group("closed-form", "quick", 0, 1)
    b = run_group("closed-form", "quick", 0, 3)
    assert a.passed and dumps(a.to_dict()) == dumps(b.to_dict())


def test_acceptance_suite_quick():
    rep = acceptance_suite("quick", groups=["closed-form", "orthogonality", "complete-sum", "pv"])
    assert rep.passed, [c.name for c in rep.failures]
    assert any(c.name.startswith("determinism") for c in rep.checks)


def test_tampered_tolerance_is_reported(capsys):
    # float laws hold only to rounding, so a zero tolerance must fail
    rep = acceptance_suite("quick", groups=["complete-sum"], tolerances={"complete-sum": 0.0},
                           determinism=False)
    assert not rep.passed
    assert {c.name for c in rep.failures} >= {"complete-sum: multiplicativity"}
    code = main(["acceptance", "--group", "complete-sum", "--tolerance", "complete-sum: multiplicativity=0",
                 "--no-determinism"])
    assert code == 1
    assert "FAILED complete-sum: multiplicativity" in capsys.readouterr().err
