import json

import numpy as np
import pytest

from l0relax import cli, core
from helpers import rand_instance


@pytest.fixture()
def inst_file(tmp_path):
    rng = np.random.default_rng(80)
    inst = rand_instance(rng, 25, 6, lam=0.08, mu=0.25)
    path = tmp_path / "inst.json"
    core.save_instance(inst, path)
    return str(path)


def _read(tmp_path, name):
    with open(tmp_path / name) as fh:
        return json.load(fh)


def test_usage_errors_exit_1(tmp_path, inst_file):
    with pytest.raises(SystemExit) as exc:
        cli.main([])
    assert exc.value.code == 1
    with pytest.raises(SystemExit) as exc:
        cli.main(["no-such-command"])
    assert exc.value.code == 1
    assert cli.main(["relax", "--instance", str(tmp_path / "missing.json")]) == 1
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert cli.main(["relax", "--instance", str(bad)]) == 1
    assert cli.main(["relax", "--instance", inst_file, "--lambda", "-0.5"]) == 1


def test_relax_artifact_and_consistency(tmp_path, inst_file):
    out = str(tmp_path / "art")
    assert cli.main(["relax", "--instance", inst_file, "--out", out]) == 0
    doc = _read(tmp_path / "art", "relax.json")
    for key in ("zeta_sdp", "dual_value", "b", "z", "delta_star",
                "certificate", "rank1", "converged"):
        assert key in doc
    assert doc["converged"] is True
    assert doc["dual_value"] <= doc["zeta_sdp"] + 1e-6 * (
        1 + abs(doc["zeta_sdp"]))

    assert cli.main(["exact", "--instance", inst_file, "--out", out]) == 0
    ex = _read(tmp_path / "art", "exact.json")
    assert doc["zeta_sdp"] <= ex["objective"] + 1e-6 * (
        1 + abs(ex["objective"]))


def test_relax_stdout_and_lambda_override(tmp_path, inst_file, capsys):
    assert cli.main(["relax", "--instance", inst_file, "--lambda", "0.2"]) == 0
    text = capsys.readouterr().out
    doc = json.loads(text[text.index("{"):])
    assert doc["lambda"] == 0.2
    assert doc["command"] == "relax"


def test_pr_delta_modes(tmp_path, inst_file):
    out = str(tmp_path / "art")
    for mode in ("uniform", "pwg", "sdp-optimal"):
        assert cli.main(["pr", "--instance", inst_file, "--delta", mode,
                         "--out", out]) == 0
        doc = _read(tmp_path / "art", "pr.json")
        assert doc["delta_mode"] == mode
        assert doc["converged"] is True
        assert len(doc["delta"]) == 6

    dfile = tmp_path / "delta.json"
    dfile.write_text(json.dumps([0.01] * 6))
    assert cli.main(["pr", "--instance", inst_file, "--delta", "file",
                     "--delta-file", str(dfile), "--out", out]) == 0

    dfile.write_text(json.dumps([0.01] * 4))
    assert cli.main(["pr", "--instance", inst_file, "--delta", "file",
                     "--delta-file", str(dfile)]) == 1

    dfile.write_text(json.dumps([1e4] * 6))
    assert cli.main(["pr", "--instance", inst_file, "--delta", "file",
                     "--delta-file", str(dfile)]) == 1


def test_round_artifacts_and_rerun_bytes(tmp_path, inst_file):
    out = tmp_path / "art"
    argv = ["round", "--instance", inst_file, "--samples", "80", "--seed", "11",
            "--out", str(out)]
    assert cli.main(argv) == 0
    first_json = (out / "round.json").read_bytes()
    first_csv = (out / "round_trace.csv").read_bytes()
    assert cli.main(argv) == 0
    assert (out / "round.json").read_bytes() == first_json
    assert (out / "round_trace.csv").read_bytes() == first_csv

    doc = json.loads(first_json)
    assert doc["nu"] >= doc["zeta_sdp"] - 1e-6 * (1 + abs(doc["zeta_sdp"]))
    rows = first_csv.decode().strip().splitlines()
    assert rows[0] == "sample,support_mask,nu"
    assert len(rows) == 81


def test_exact_methods_agree(tmp_path, inst_file):
    out = tmp_path / "art"
    assert cli.main(["exact", "--instance", inst_file, "--method", "brute",
                     "--out", str(out)]) == 0
    brute = _read(out, "exact.json")
    assert cli.main(["exact", "--instance", inst_file, "--method", "bnb",
                     "--out", str(out)]) == 0
    bnb = _read(out, "exact.json")
    assert bnb["objective"] == pytest.approx(
        brute["objective"], abs=1e-8 * (1 + abs(brute["objective"])))
    assert (out / "exact_trace.csv").exists()
    head = (out / "exact_trace.csv").read_text().split("\n")[0]
    assert head == "time,lower_bound,upper_bound,nodes"


def test_exact_budget_exhaustion_exits_2(tmp_path):
    rng = np.random.default_rng(81)
    inst = rand_instance(rng, 60, 24, lam=0.02, mu=0.05)
    path = tmp_path / "hard.json"
    core.save_instance(inst, path)
    code = cli.main(["exact", "--instance", str(path), "--method", "bnb",
                     "--budget-nodes", "2"])
    assert code == 2


def test_lambda_max_output(tmp_path, inst_file, capsys):
    assert cli.main(["lambda-max", "--instance", inst_file]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert float(lines[0]) > 0

    rng = np.random.default_rng(82)
    X = rng.standard_normal((15, 4)) / np.sqrt(15)
    zero = core.ProblemInstance(X=X, y=np.zeros(15), lam=0.1, mu=0.3)
    zpath = tmp_path / "zero.json"
    core.save_instance(zero, zpath)
    assert cli.main(["lambda-max", "--instance", str(zpath)]) == 0
    assert capsys.readouterr().out.strip().splitlines()[0] == "0"


def test_path_artifacts_and_empty_sweep(tmp_path, inst_file, capsys):
    out = tmp_path / "art"
    assert cli.main(["path", "--instance", inst_file, "--grid-size", "5",
                     "--samples", "40", "--out", str(out)]) == 0
    doc = _read(out, "path.json")
    assert len(doc["entries"]) == 5
    assert (out / "path.csv").exists()

    rng = np.random.default_rng(83)
    X = rng.standard_normal((15, 4)) / np.sqrt(15)
    zero = core.ProblemInstance(X=X, y=np.zeros(15), lam=0.1, mu=0.3)
    zpath = tmp_path / "zero.json"
    core.save_instance(zero, zpath)
    assert cli.main(["path", "--instance", str(zpath)]) == 0
    assert "empty" in capsys.readouterr().out.lower()


def test_bench_requires_out_and_writes_tables(tmp_path):
    assert cli.main(["bench", "--n", "25", "--p", "6", "--k", "2",
                     "--count", "2", "--lambda-grid", "0.1",
                     "--mu-grid", "0.2", "--budget-nodes", "100",
                     "--samples", "50"]) == 1

    out = tmp_path / "bench"
    argv = ["bench", "--n", "25", "--p", "6", "--k", "2", "--count", "2",
            "--lambda-grid", "0.1", "--mu-grid", "0.2",
            "--budget-nodes", "100", "--samples", "50", "--out", str(out)]
    assert cli.main(argv) == 0
    assert (out / "gaps.csv").exists()
    assert (out / "manifest.json").exists()
    first = (out / "gaps.csv").read_bytes()
    assert cli.main(argv) == 0
    assert (out / "gaps.csv").read_bytes() == first

    argv_round = ["bench", "--table", "rounding", "--n", "25", "--p", "6",
                  "--k", "2", "--count", "2", "--lambda-grid", "0.1",
                  "--mu-grid", "0.2", "--samples", "50", "--out", str(out)]
    assert cli.main(argv_round) == 0
    assert (out / "rounding.csv").exists()

    # the rounding table needs the exhaustive baseline, so p > 20 is a
    # usage error rather than a traceback
    assert cli.main(["bench", "--table", "rounding", "--n", "30", "--p",
                     "25", "--k", "3", "--count", "2", "--out",
                     str(tmp_path / "big")]) == 1
