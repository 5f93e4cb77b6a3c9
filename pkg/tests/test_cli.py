import json
import random

import pytest

from bistream.audit import audit_run
from bistream.cli import main
from bistream.config import load_config
from bistream.matrix import from_dense, parse_dense_text

CONFIG = """
[run]
seed = 11

[attribute income]
setting = iii

[attribute region]
kind = categorical
labels = north, south
matrix = 0.7 0.3; 0.3 0.7
expand_target = north
"""


def _records(n, seed=0, region=True):
    rnd = random.Random(seed)
    out = []
    for i in range(n):
        attrs = {"income": round(rnd.uniform(0, 1000), 2)}
        if region:
            attrs["region"] = "east" if i == n // 2 else rnd.choice(["north", "south"])
        out.append(json.dumps({"id": f"u{i}", "attrs": attrs}) + "\n")
    return out


@pytest.fixture
def run_files(tmp_path):
    (tmp_path / "run.ini").write_text(CONFIG)
    (tmp_path / "in.jsonl").write_text("".join(_records(40)))
    return tmp_path


def _run(d, out="ev.jsonl"):
    return main(["run", "--config", str(d / "run.ini"), "--input", str(d / "in.jsonl"), "--output", str(d / out)])


def _audit(d, log="ev.jsonl"):
    return main(["audit", "--config", str(d / "run.ini"), "--input", str(d / "in.jsonl"), "--log", str(d / log)])


def test_run_and_audit(run_files, capsys):
    assert _run(run_files) == 0
    stats = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert stats["arrivals"] == 40 and set(stats["final_beta"]) == {"income", "region"}
    assert stats["matrix_nnz"] > 0 and stats["matrix_bytes"] > 0
    lines = (run_files / "ev.jsonl").read_text().splitlines()
    assert stats["events"] == len(lines)
    assert _audit(run_files) == 0
    assert capsys.readouterr().out.startswith("PASS")


def test_rerun_bitwise_identical(run_files):
    _run(run_files, "a.jsonl")
    _run(run_files, "b.jsonl")
    assert (run_files / "a.jsonl").read_bytes() == (run_files / "b.jsonl").read_bytes()


def test_audit_flags_value_tamper(run_files, capsys):
    _run(run_files)
    log = run_files / "ev.jsonl"
    lines = log.read_text().splitlines(keepends=True)
    lines[30] = lines[30].replace('"value":', '"value":1', 1)
    log.write_text("".join(lines))
    assert _audit(run_files) == 3
    out = capsys.readouterr().out
    assert out.startswith("FAIL") and "log line 31" in out


def test_audit_beta_rederivation(run_files):
    _run(run_files)
    cfg = load_config(CONFIG)
    inputs = (run_files / "in.jsonl").read_text().splitlines(keepends=True)
    lines = (run_files / "ev.jsonl").read_bytes().splitlines(keepends=True)
    obj = json.loads(lines[12])
    obj["beta"] = round(obj["beta"] + 0.01, 6)
    lines[12] = json.dumps(obj, separators=(",", ":")).encode() + b"\n"
    result = audit_run(cfg.specs(11), 11, inputs, lines)
    assert not result.passed and result.dense_checked
    assert any("re-derived" in f for f in result.failures)
    assert any("log line 13" in f for f in result.failures)


def test_audit_missing_input(run_files, capsys):
    assert main(["audit", "--config", str(run_files / "run.ini"), "--input", str(run_files / "nope.jsonl"),
                 "--log", str(run_files / "nope2.jsonl")]) == 2
    assert "audit-input-error" in capsys.readouterr().err


def test_duplicate_id_aborts(tmp_path, capsys):
    recs = _records(5, region=False)
    recs.append(recs[2])
    (tmp_path / "in.jsonl").write_text("".join(recs))
    rc = main(["run", "--seed", "1", "--attr", "income", "--input", str(tmp_path / "in.jsonl"),
               "--output", str(tmp_path / "ev.jsonl")])
    assert rc == 2
    err = capsys.readouterr().err
    assert "duplicate-id" in err and "line 6" in err


def test_only_seed(tmp_path, capsys):
    (tmp_path / "in.jsonl").write_text("".join(_records(2, region=False)))
    assert main(["run", "--seed", "1", "--attr", "income", "--input", str(tmp_path / "in.jsonl"),
                 "--output", str(tmp_path / "ev.jsonl")]) == 0
    events = [json.loads(x) for x in (tmp_path / "ev.jsonl").read_text().splitlines()]
    assert [e["event"] for e in events] == ["release", "release"]


def test_usage_error(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["run", "--setting", "iv"])
    assert exc.value.code == 1


def test_gen_matrix_cli(tmp_path, capsys):
    out = tmp_path / "m.txt"
    assert main(["gen-matrix", "--size", "2", "--target-beta", "0.7219", "--seed", "3", "--output", str(out)]) == 0
    m = from_dense(parse_dense_text(out.read_text()))
    assert 0.7209 <= m.entropy_report().beta <= 0.7229
    assert "achieved beta" in capsys.readouterr().err
    assert main(["gen-matrix", "--size", "3", "--target-beta", "0", "--seed", "3"]) == 2
    assert main(["gen-matrix", "--size", "3", "--target-beta", "0", "--seed", "3", "--allow-zero"]) == 0


def test_table1_and_stats_cli(tmp_path, capsys):
    assert main(["table1", "--setting", "ii", "--seeds", "2", "--output", str(tmp_path / "t.csv")]) == 0
    assert (tmp_path / "t.csv").read_text().startswith("seed,setting,checkpoint,beta\n")
    recs = _records(10, region=False)
    (tmp_path / "in.jsonl").write_text("".join(recs))
    main(["run", "--seed", "2", "--attr", "income", "--input", str(tmp_path / "in.jsonl"),
          "--output", str(tmp_path / "ev.jsonl")])
    capsys.readouterr()
    assert main(["stats", "--input", str(tmp_path / "ev.jsonl")]) == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["releases"] == 10 and summary["last_t"] == 10
