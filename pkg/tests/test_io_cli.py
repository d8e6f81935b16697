import json

import numpy as np
import pytest

from qudit_reservoir.cli import main
from qudit_reservoir.errors import ParseError, ValidationError
from qudit_reservoir.gates import embed_target, gate_x
from qudit_reservoir.inference import TrainRun
from qudit_reservoir.io import content_digest, load_run, make_manifest, now, save_run
from qudit_reservoir.linalg import RandomSource, haar_unitary, matrix_to_json
from qudit_reservoir.rnn import OdeConfig, RnnProblem, solve


@pytest.fixture
def solved():
    u = haar_unitary(5, RandomSource(1))
    emb = embed_target(gate_x(3), 5, "unitary", RandomSource(2))
    return u, emb, solve(RnnProblem(u, emb), OdeConfig())


def test_solve_result_round_trip(tmp_path, solved):
    u, emb, res = solved
    path = tmp_path / "r.json"
    save_run(path, "solve-rnn", res, u, emb, make_manifest("solve-rnn", {}, 1, now()))
    back = load_run(path)
    assert back["result"].solution.tobytes() == res.solution.tobytes()
    assert back["reservoir"].tobytes() == u.tobytes()
    assert back["embedding"].target.tobytes() == emb.target.tobytes()
    assert back["result"].error_history == res.error_history


def test_train_run_round_trip(tmp_path, solved):
    u, emb, _ = solved
    run = TrainRun(np.exp(1j * np.arange(25.0)).reshape(5, 5) / 3, 4, [0.1, 1 / 3], [0.2, 2 / 7], False)
    path = tmp_path / "t.json"
    save_run(path, "train", run, u, emb, make_manifest("train", {}, 0, now()))
    back = load_run(path)["result"]
    assert back.weights.tobytes() == run.weights.tobytes()
    assert back.train_history == run.train_history and back.valid_history == run.valid_history


def test_truncated_json_is_parse_error(tmp_path, solved):
    u, emb, res = solved
    path = tmp_path / "r.json"
    save_run(path, "solve-rnn", res, u, emb, {})
    path.write_text(path.read_text()[:200])
    with pytest.raises(ParseError):
        load_run(path)


def test_missing_field_named(tmp_path, solved):
    u, emb, res = solved
    path = tmp_path / "r.json"
    doc = save_run(path, "solve-rnn", res, u, emb, {})
    del doc["result"]["solution"]
    path.write_text(json.dumps(doc))
    with pytest.raises(ParseError) as info:
        load_run(path)
    assert info.value.field == "result.solution"


def test_non_unitary_reservoir_rejected(tmp_path, solved):
    u, emb, res = solved
    path = tmp_path / "r.json"
    doc = save_run(path, "solve-rnn", res, u, emb, {})
    doc["reservoir"] = matrix_to_json(np.diag([1, 1, 1, 1, 0.5]))
    path.write_text(json.dumps(doc))
    with pytest.raises(ValidationError, match="reservoir") as info:
        load_run(path)
    assert info.value.field == "reservoir"


def test_content_digest_ignores_timestamps():
    a = {"manifest": {"started_at": "x", "finished_at": "y", "seed": 1}, "v": [1.5]}
    b = {"manifest": {"started_at": "z", "finished_at": "w", "seed": 1}, "v": [1.5]}
    assert content_digest(a) == content_digest(b)
    assert content_digest(a) != content_digest({**b, "v": [1.25]})


def test_cli_gate(capsys):
    assert main(["gate", "--name", "x", "--dim", "3"]) == 0
    assert capsys.readouterr().out == "0 0 1\n1 0 0\n0 1 0\n"
    assert main(["gate", "--name", "x", "--dim", "2", "--json"]) == 0
    obj = json.loads(capsys.readouterr().out)
    assert obj == {"rows": 2, "cols": 2, "re": [0.0, 1.0, 1.0, 0.0], "im": [0.0, 0.0, 0.0, 0.0]}


def test_cli_usage_errors(tmp_path, capsys):
    out = tmp_path / "o.json"
    assert main(["solve-rnn", "--dim", "3", "--out", str(out)]) == 2
    assert not out.exists()
    assert "--embed" in capsys.readouterr().err
    assert main(["frobnicate"]) == 2
    assert main(["train", "--embed", "5", "--bogus"]) == 2
    assert main(["gate", "--name", "x", "--dim", "1"]) == 2


def test_cli_solve_verify_and_determinism(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    args = ["solve-rnn", "--dim", "3", "--embed", "5", "--mode", "unitary", "--seed", "4", "--tol", "1e-10"]
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b)]) == 0
    da, db = json.loads(a.read_text()), json.loads(b.read_text())
    da["manifest"]["outputs"] = db["manifest"]["outputs"] = []
    assert content_digest(da) == content_digest(db)
    assert da["result"]["converged"] is True
    capsys.readouterr()
    assert main(["verify", "--run", str(a)]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["gate_distance"] <= 1e-4 and report["unitarity_defect"] <= 1e-4


def test_cli_train_strict_exit(tmp_path):
    out = tmp_path / "t.json"
    assert main(["train", "--embed", "5", "--max-epochs", "2", "--strict", "--out", str(out)]) == 1
    assert main(["train", "--embed", "5", "--max-epochs", "2", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["manifest"]["config"]["max_epochs"] == 2
    assert doc["constraint"] == {"kind": "unconstrained", "bits": None}


def test_cli_train_with_constraint(tmp_path):
    out = tmp_path / "t.json"
    assert main(["train", "--embed", "12", "--constraint", "amp", "--bits", "1", "--max-epochs", "20", "--out", str(out)]) == 0
    w = load_run(out)["result"].weights
    assert set(np.unique(w.real)) <= {-1.0, 0.0, 1.0}


def test_cli_verify_rejects_bad_reservoir(tmp_path, capsys):
    run = tmp_path / "r.json"
    bad = tmp_path / "u.json"
    assert main(["solve-rnn", "--embed", "5", "--out", str(run)]) == 0
    bad.write_text(json.dumps(matrix_to_json(np.eye(5) * 2)))
    assert main(["verify", "--run", str(run), "--reservoir", str(bad)]) == 2
    assert "reservoir" in capsys.readouterr().err
    trunc = tmp_path / "trunc.json"
    trunc.write_text(run.read_text()[:100])
    assert main(["verify", "--run", str(trunc)]) == 2


def test_cli_custom_gate_file(tmp_path):
    g = tmp_path / "h.json"
    h = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
    g.write_text(json.dumps(matrix_to_json(h)))
    out = tmp_path / "o.json"
    assert main(["solve-rnn", "--gate-file", str(g), "--embed", "4", "--out", str(out)]) == 0
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(matrix_to_json(np.array([[1, 1], [0, 1]]))))
    assert main(["solve-rnn", "--gate-file", str(bad), "--embed", "4", "--out", str(out)]) == 2


def test_cli_scan_outputs_are_deterministic(tmp_path):
    paths = []
    for tag, workers in (("a", "1"), ("b", "2")):
        csv, js = tmp_path / f"{tag}.csv", tmp_path / f"{tag}.json"
        argv = ["scan", "--m-values", "3,4", "--seeds", "0,1", "--budget", "100", "--no-timing",
                "--workers", workers, "--out-csv", str(csv), "--out-json", str(js)]
        assert main(argv) == 0
        paths.append((csv, js))
    (ca, ja), (cb, jb) = paths
    assert ca.read_bytes() == cb.read_bytes()
    assert ca.read_text().splitlines()[0] == "m,seed,metric,converged,wall_time_s"
    sa, sb = json.loads(ja.read_text()), json.loads(jb.read_text())
    sa["manifest"]["outputs"] = sb["manifest"]["outputs"] = []
    assert content_digest(sa) == content_digest(sb)
    assert [row["m"] for row in sa["summary"]] == [3, 4]


def test_cli_scan_preset_flags(tmp_path):
    csv = tmp_path / "s.csv"
    assert main(["scan", "--preset", "fig4b", "--bits", "1", "--m-values", "6", "--seeds", "0", "--budget", "20",
                 "--out-csv", str(csv)]) == 0
    assert len(csv.read_text().splitlines()) == 2
