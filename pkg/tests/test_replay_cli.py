import csv
import io
import json
import subprocess
import sys
from importlib import resources

import pytest

from geodesic_index.cli import run_captured
from geodesic_index.replay import cutoff_modulus, replay
from geodesic_index.scenario import bundled_scenario, loads_scenario

DATA = resources.files("geodesic_index").joinpath("data")
REPLAY = str(DATA.joinpath("replay_s3.json"))
IDENTITY = str(DATA.joinpath("identity_s3.json"))


def single_record(decomposition, i1, n=3):
    base = {"p_minus": 0, "p_zero": 0, "p_plus": 0, "q_minus": 0, "q_zero": 0, "q_plus": 0,
            "rotations": [], "nontrivial_n2": [], "trivial_n2": [], "residual_order": 0}
    base.update(decomposition)
    return {"schema_version": 1, "n": n, "geodesics": [
        {"name": "c", "lifts": 1, "initial_index": i1, "initial_nullity": 0, "decomposition": base}]}


ROOT2_MINUS_1 = {"kind": "quadratic", "a_num": -1, "a_den": 1, "b_num": 1, "b_den": 1, "d": 2}


@pytest.fixture(scope="module")
def report():
    return replay(bundled_scenario("replay_s3"))


def test_replay_reaches_contradiction_at_twice_n(report):
    big_n = report.big_n
    assert big_n % cutoff_modulus(3) == 0
    hits = [f for f in report.violations if f.check == "morse_rank" and f.message.startswith(
        f"degree {2 * big_n} (= 2N)")]
    assert len(hits) == 1
    assert hits[0].message.endswith("M = 1 < b = 2")
    assert report.table.morse[2 * big_n] == 1 and report.table.betti[2 * big_n] == 2


def test_replay_classifies_the_candidate(report):
    assert report.candidates == ["c2"]
    classified = [f for f in report.findings if f.check == "classified"]
    assert classified and classified[0].record == "c2" and classified[0].severity == "info"
    assert not report.errors


def test_replay_json(report):
    out = report.to_json()
    assert out["N"] == report.big_n and out["jump"]["passed"]
    assert len(out["morse"]["M"]) == 2 * report.big_n + 2


def test_rotation_times_hyperbolic_cannot_appear():
    s = loads_scenario(json.dumps(single_record({"rotations": [ROOT2_MINUS_1], "residual_order": 2}, 3)))
    rep = replay(s, t_bound=20000)
    flagged = [f for f in rep.findings if f.check == "rotation_hyperbolic"]
    assert flagged and "cannot appear" in flagged[0].message


def test_replay_without_return_time_is_partial():
    s = loads_scenario(json.dumps(single_record({"rotations": [ROOT2_MINUS_1], "residual_order": 2}, 3)))
    rep = replay(s, epsilon=1e-6, t_bound=50)
    assert rep.errors and rep.errors[0].check == "return_time" and rep.table is None


def test_cutoff_modulus():
    assert [cutoff_modulus(n) for n in (3, 4, 5, 6, 7)] == [1, 3, 2, 5, 3]


# command line


def test_replay_command_exits_one():
    code, text = run_captured(["replay", "--scenario", REPLAY, "--out", "json"])
    assert code == 1
    out = json.loads(text)
    big_n = out["N"]
    assert any(f["message"] == f"degree {2 * big_n} (= 2N): M = 1 < b = 2" for f in out["findings"])


def test_iterate_csv_columns(tmp_path):
    path = tmp_path / "s.json"
    path.write_text(json.dumps(single_record({"rotations": [{"kind": "rational", "num": 2, "den": 3},
                                                            ROOT2_MINUS_1]}, 2)))
    code, text = run_captured(["iterate", "--scenario", str(path), "--m", "1..100", "--out", "csv"])
    assert code == 0
    rows = list(csv.reader(io.StringIO(text)))
    assert rows[0] == ["m", "index", "nullity", "mean_index_times_m", "gap_lower_slack", "gap_upper_slack"]
    assert len(rows) == 101 and rows[1][:3] == ["1", "2", "0"]


def test_iterate_selects_a_record():
    code, text = run_captured(["iterate", "--scenario", IDENTITY, "--m", "1..3", "--out", "csv"])
    assert code == 0 and text.splitlines()[0].startswith("record,m")
    code, text = run_captured(["iterate", "--scenario", IDENTITY, "--record", "short", "--m", "2",
                               "--out", "csv"])
    assert code == 0 and text.splitlines()[1] == "2,2,0,3,4,0"


def test_betti_command():
    code, text = run_captured(["betti", "--n", "4", "--q-max", "40", "--out", "json"])
    assert code == 0
    values = [row["b_q"] for row in json.loads(text)]
    assert len(values) == 41 and [values[q] for q in (3, 5, 7, 9)] == [1, 1, 1, 2]


def test_identity_command():
    code, text = run_captured(["identity", "--scenario", IDENTITY, "--out", "json"])
    row = json.loads(text)[0]
    assert code == 0 and row["residual"] == 0 and row["exact"]
    for n, want in ((3, 1), (4, "-2/3")):
        code, text = run_captured(["identity", "--n", str(n), "--out", "json"])
        assert code == 0 and json.loads(text)[0]["constant"] == want


def test_jump_command():
    code, text = run_captured(["jump", "--scenario", IDENTITY, "--epsilon", "1e-3", "--t-bound", "1000000",
                               "--out", "json"])
    assert code == 0
    assert json.loads(text)["passed"]
    code, text = run_captured(["jump", "--scenario", IDENTITY, "--out", "csv"])
    assert code == 0 and text.splitlines()[0] == "record,m,check,passed"


def test_decompose_and_splitting_commands():
    code, text = run_captured(["decompose", "--matrix", '[["0", "-1"], ["1", "0"]]', "--out", "json"])
    assert code == 0 and json.loads(text)["rotations"] == [{"kind": "rational", "num": 1, "den": 2}]
    code, text = run_captured(["splitting", "--angle", "1/2", "--matrix", '[[0, -1], [1, 0]]',
                               "--out", "json"])
    row = json.loads(text)[0]
    assert code == 0 and (row["s_plus"], row["s_minus"]) == (0, 1)


def test_validate_command():
    code, _ = run_captured(["validate", "--scenario", IDENTITY])
    assert code == 0
    code, _ = run_captured(["validate", "--scenario", REPLAY])
    assert code == 0


def test_validate_flags_unwaived(tmp_path):
    path = tmp_path / "low.json"
    path.write_text(json.dumps(single_record({"rotations": [ROOT2_MINUS_1], "residual_order": 2}, 1)))
    code, text = run_captured(["validate", "--scenario", str(path)])
    assert code == 1 and "index_lower_bound" in text


def test_errors_exit_two(tmp_path):
    assert run_captured(["iterate", "--scenario", str(tmp_path / "missing.json")])[0] == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    assert run_captured(["morse", "--scenario", str(bad)])[0] == 2
    assert run_captured(["betti", "--n", "3", "--bogus"])[0] == 2
    assert run_captured(["decompose", "--matrix", "[[2, 0], [0, 1]]"])[0] == 2


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "geodesic_index", "betti", "--n", "3", "--q-max", "4",
                           "--out", "csv"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.splitlines() == ["q,b_q", "0,0", "1,0", "2,1", "3,0", "4,2"]
