import csv
import io
import json
import math

import numpy as np
import pytest

from resq import campaigns, cli, discrimination, fileio, qmath, states
from resq.errors import ParseError
from resq.report import CSV_COLUMNS, CaseRecord, ScenarioReport, atomic_write, emit_table

PLUS = np.full((2, 2), 0.5, dtype=complex)


# -- reports ------------------------------------------------------------------------


def test_empty_report_csv_is_header_only():
    data = emit_table(ScenarioReport("x"), "csv").decode()
    assert data == ",".join(CSV_COLUMNS) + "\n"


def test_one_case_csv_has_two_lines():
    rep = ScenarioReport("x")
    rep.add(CaseRecord(0, 2, 1.0, 1.0 + 1e-9, 1e-9, True, alpha=0.2))
    lines = emit_table(rep, "csv").decode().splitlines()
    assert len(lines) == 2
    row = dict(zip(lines[0].split(","), lines[1].split(",")))
    assert row["pass"] == "true" and float(row["alpha"]) == 0.2


def test_json_encodes_infinity_and_complex():
    rep = ScenarioReport("x")
    rep.add(CaseRecord(0, 2, math.inf, 0.5, 0.0, True, extra={"m": np.eye(2) * 1j}))
    obj = json.loads(rep.to_json())
    case = obj["cases"][0]
    assert case["value_closed_form"] == "inf"
    assert case["extra"]["m"]["im"] == [[1.0, 0.0], [0.0, 1.0]]
    assert obj["summary"] == {"cases": 1, "passed": 1, "failed": 0, "max_residual": 0.0,
                              "wall_time": None}


def test_summary_and_by_check():
    rep = ScenarioReport("x")
    rep.add(CaseRecord(0, 2, 0, 0, 0.0, True, extra={"check": "a"}))
    rep.add(CaseRecord(1, 2, 0, 1, 1.0, False, extra={"check": "b"}))
    assert not rep.passed
    assert rep.by_check() == {"a": {"cases": 1, "failed": 0}, "b": {"cases": 1, "failed": 1}}
    assert rep.summary_line() == "x: 1/2 passed, max residual 1.000e+00"


def test_atomic_write_replaces(tmp_path):
    p = tmp_path / "sub" / "out.txt"
    atomic_write(p, b"one")
    atomic_write(p, b"two")
    assert p.read_bytes() == b"two"
    assert [x.name for x in p.parent.iterdir()] == ["out.txt"]


def test_maxmin_campaign_columns_carry_both_sides():
    rep = campaigns.verify_maxmin("coherence", 2, 3, seed=0)
    rows = list(csv.DictReader(io.StringIO(rep.to_csv().decode())))
    assert len(rows) == 3
    for row, case in zip(rows, rep.cases):
        assert float(row["value_closed_form"]) == case.value_closed_form  # 1 - D_g
        assert float(row["value_direct"]) == case.value_direct  # max-min success


# -- file formats -------------------------------------------------------------------


def test_state_round_trip(tmp_path, rng):
    for dims in (None, (2, 2)):
        rho = states.random_density(4, 3, rng)
        fileio.write_state(tmp_path / "s.json", rho, dims)
        back, back_dims = fileio.read_state(tmp_path / "s.json")
        assert np.max(np.abs(back - rho)) <= 1e-12
        assert back_dims == dims


def test_parse_error_reports_line(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{\n  "dim": 2,\n  "re": [[1, 0], [0, 0]]\n  "im": []\n}\n')
    with pytest.raises(ParseError) as err:
        fileio.read_state(p)
    assert err.value.line == 4
    assert str(p) in str(err.value)


@pytest.mark.parametrize("obj", [
    {"re": [[1]]},
    {"dim": 2, "re": [[1, 0], [0, 0]], "im": [[0, 0]]},
    {"dim": 3, "re": [[1, 0], [0, 0]]},
    {"dim": 4, "re": np.eye(4).tolist(), "dims": [2, 3]},
])
def test_structural_parse_errors(obj):
    with pytest.raises(ParseError):
        fileio.state_from_json(obj, validate=False)


def test_strategy_round_trip(tmp_path, rng):
    strat = discrimination.random_strategy(3, 3, rng)
    fileio.write_strategy(tmp_path / "st.json", strat)
    back = fileio.read_strategy(tmp_path / "st.json")
    rho = states.random_density(3, 2, rng)
    assert discrimination.succ_probability(back, rho).p_succ == pytest.approx(
        discrimination.succ_probability(strat, rho).p_succ, abs=1e-14)


# -- command line -------------------------------------------------------------------


@pytest.fixture
def plus_file(tmp_path):
    path = tmp_path / "plus.json"
    fileio.write_state(path, PLUS)
    return path


def run_json(capsys, argv):
    code = cli.run(argv)
    out = capsys.readouterr().out
    return code, json.loads(out) if out.strip().startswith("{") else out


def test_measure_plus_state(capsys, plus_file):
    code, obj = run_json(capsys, ["measure", "--state", str(plus_file), "--measure", "robustness"])
    assert code == 0
    assert obj["cases"][0]["value_direct"] == pytest.approx(1.0, abs=1e-7)


def test_measure_relative_infinite(capsys, tmp_path):
    fileio.write_state(tmp_path / "a.json", np.diag([1.0, 0.0]))
    fileio.write_state(tmp_path / "b.json", np.diag([0.0, 1.0]))
    code, obj = run_json(capsys, ["measure", "--measure", "relative_robustness",
                                  "--state", str(tmp_path / "a.json"), "--sigma", str(tmp_path / "b.json")])
    assert code == 0 and obj["cases"][0]["value_direct"] == "inf"


def test_alpha_campaign_summary(capsys):
    code = cli.run(["verify-theorem2", "--d", "2", "--trials", "100", "--alpha", "0.3",
                    "--format", "csv"])
    err = capsys.readouterr().err
    assert code == 0
    assert "100/100 passed" in err


def test_axioms_command(capsys):
    code, obj = run_json(capsys, ["axioms", "--measure", "coherence_deficiency", "--trials", "200"])
    assert code == 0
    assert obj["summary"]["failed"] == 0


def test_ratio_command_and_threads(capsys, monkeypatch):
    argv = ["verify-lemma3", "--d", "2", "--trials", "3", "--samples", "40", "--format", "csv"]
    assert cli.run(argv) == 0
    serial = capsys.readouterr().out
    monkeypatch.setenv("RESQ_THREADS", "3")
    assert cli.run(argv) == 0
    assert capsys.readouterr().out == serial


def test_maxmin_command(capsys):
    code, obj = run_json(capsys, ["verify-theorem7", "--theory", "entanglement", "--trials", "2"])
    assert code == 0 and obj["summary"]["cases"] == 2


def test_discriminate_command(capsys, tmp_path, rng):
    fileio.write_state(tmp_path / "r.json", states.random_density(2, 1, rng))
    fileio.write_state(tmp_path / "s.json", states.random_density(2, 2, rng))
    out = tmp_path / "strategy.json"
    code, obj = run_json(capsys, ["discriminate", "--state", str(tmp_path / "r.json"),
                                  "--sigma", str(tmp_path / "s.json"), "--write-strategy", str(out)])
    assert code == 0
    case = obj["cases"][0]
    assert case["value_direct"] == pytest.approx(case["value_closed_form"], abs=1e-5)
    code, obj = run_json(capsys, ["discriminate", "--state", str(tmp_path / "r.json"),
                                  "--sigma", str(tmp_path / "s.json"), "--strategy", str(out)])
    assert code == 0 and obj["cases"][0]["residual"] <= 1e-5


def test_csv_is_byte_identical_across_runs(capsys, tmp_path):
    argv = ["measure", "--measure", "coherence_deficiency", "--d", "3", "--trials", "5",
            "--seed", "4", "--format", "csv"]
    paths = []
    for name in ("a.csv", "b.csv"):
        assert cli.run(argv + ["--out", str(tmp_path / name)]) == 0
        paths.append(tmp_path / name)
    capsys.readouterr()
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_tolerance_override(capsys):
    argv = ["verify-theorem2", "--trials", "3", "--alpha", "0.0"]
    code, obj = run_json(capsys, argv + ["--tol", "1e-30"])
    assert code == 1 and obj["params"]["tol"] == 1e-30
    code, _ = run_json(capsys, argv + ["--tol", "1e-3"])
    assert code == 0


def test_figure_output(capsys, tmp_path):
    fig = tmp_path / "fig.png"
    assert cli.run(["verify-theorem2", "--trials", "3", "--figure", str(fig)]) == 0
    capsys.readouterr()
    assert fig.stat().st_size > 1000


def test_exit_code_parse_error(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert cli.run(["measure", "--state", str(bad)]) == cli.EXIT_PARSE
    assert "bad.json:1" in capsys.readouterr().err


def test_exit_code_invalid_state(capsys, tmp_path):
    path = tmp_path / "trace.json"
    path.write_text(json.dumps(fileio.state_to_json(np.diag([0.7, 0.4]))))
    assert cli.run(["measure", "--state", str(path)]) == cli.EXIT_INVALID
    assert "NotUnitTrace" in capsys.readouterr().err


def test_exit_code_invalid_strategy(capsys, tmp_path, plus_file):
    path = tmp_path / "st.json"
    path.write_text(json.dumps({"subchannels": [[fileio.encode_matrix(np.eye(2))]],
                                "povm": [fileio.encode_matrix(np.diag([1.0, 0.5]))]}))
    code = cli.run(["discriminate", "--state", str(plus_file), "--sigma", str(plus_file),
                    "--strategy", str(path)])
    assert code == cli.EXIT_INVALID
    assert "InvalidStrategy" in capsys.readouterr().err


def test_written_state_reparses(tmp_path, rng):
    rho = qmath.hermitian_part(states.random_density(3, 2, rng))
    fileio.write_state(tmp_path / "x.json", rho)
    text = (tmp_path / "x.json").read_text()
    assert '"re"' in text and '"im"' in text
    assert np.max(np.abs(fileio.read_state(tmp_path / "x.json")[0] - rho)) <= 1e-12
