import json

import numpy as np
import pytest

from l0relax import core, numerics


def _tiny():
    X = np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
    y = np.array([1.0, 2.0, 3.0])
    return core.ProblemInstance(X=X, y=y, lam=0.25, mu=0.5)


def test_instance_properties_and_freezing():
    inst = _tiny()
    assert inst.n == 3 and inst.p == 2
    assert inst.X.flags.writeable is False
    assert inst.y.flags.writeable is False


def test_instance_validation():
    X = np.eye(3)
    y = np.ones(3)
    with pytest.raises(ValueError):
        core.ProblemInstance(X=X, y=np.ones(2), lam=0.1, mu=0.1)
    with pytest.raises(ValueError):
        core.ProblemInstance(X=X, y=y, lam=-0.1, mu=0.1)
    with pytest.raises(ValueError):
        core.ProblemInstance(X=X, y=y, lam=0.1, mu=-1.0)
    bad = X.copy()
    bad[0, 0] = np.nan
    with pytest.raises(ValueError):
        core.ProblemInstance(X=bad, y=y, lam=0.1, mu=0.1)


def test_build_gram_values():
    inst = _tiny()
    gram = core.build_gram(inst)
    assert np.allclose(gram.G, inst.X.T @ inst.X + 0.5 * np.eye(2))
    assert np.allclose(gram.c, inst.X.T @ inst.y)
    assert gram.yty == pytest.approx(14.0)
    assert gram.lambda_min_G == pytest.approx(
        float(np.linalg.eigvalsh(gram.G)[0]))


def test_build_gram_requires_positive_definite():
    X = np.ones((4, 2))   # rank 1, mu = 0
    inst = core.ProblemInstance(X=X, y=np.ones(4), lam=0.1, mu=0.0)
    with pytest.raises(numerics.NotPDError):
        core.build_gram(inst)


def test_objective_l0_counts_exact_zeros():
    inst = _tiny()
    b = np.array([1.0, 0.0])
    r = inst.X @ b - inst.y
    expect = 0.5 * r @ r + 0.5 * 0.5 * 1.0 + 0.25 * 1
    assert core.objective_l0(inst, b) == pytest.approx(float(expect))
    assert core.objective_l0(inst, np.zeros(2)) == pytest.approx(7.0)


def test_make_fit_result():
    inst = _tiny()
    fit = core.make_fit_result(inst, np.array([0.0, 2.0]), method="test")
    assert fit.support == (1,)
    assert fit.method == "test"
    assert fit.objective == pytest.approx(
        core.objective_l0(inst, np.array([0.0, 2.0])))


def test_json_roundtrip_is_exact(tmp_path):
    rng = np.random.default_rng(7)
    X = rng.standard_normal((6, 4))
    y = rng.standard_normal(6)
    inst = core.ProblemInstance(X=X, y=y, lam=1 / 3, mu=np.pi / 10)
    path = tmp_path / "inst.json"
    core.save_instance(inst, path)
    back = core.load_instance(path)
    assert np.array_equal(back.X, inst.X)
    assert np.array_equal(back.y, inst.y)
    assert back.lam == inst.lam and back.mu == inst.mu


def test_csv_roundtrip_with_sidecar(tmp_path):
    rng = np.random.default_rng(8)
    X = rng.standard_normal((5, 3))
    y = rng.standard_normal(5)
    inst = core.ProblemInstance(X=X, y=y, lam=0.7, mu=0.2)
    path = tmp_path / "inst.csv"
    core.save_instance(inst, path)
    assert (tmp_path / "inst.csv.json").exists()
    back = core.load_instance(path)
    assert np.array_equal(back.X, inst.X)
    assert np.array_equal(back.y, inst.y)
    assert back.lam == 0.7 and back.mu == 0.2


def test_csv_without_sidecar_fails(tmp_path):
    path = tmp_path / "lonely.csv"
    path.write_text("y,x1\n1.0,2.0\n")
    with pytest.raises((OSError, ValueError)):
        core.load_instance(path)


def test_load_rejects_ragged_and_missing_keys(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({
        "lambda": 0.1, "mu": 0.1,
        "X": [[1.0, 2.0], [3.0]], "y": [1.0, 2.0],
    }))
    with pytest.raises(ValueError):
        core.load_instance(path)
    path2 = tmp_path / "missing.json"
    path2.write_text(json.dumps({"mu": 0.1, "X": [[1.0]], "y": [1.0]}))
    with pytest.raises((KeyError, ValueError)):
        core.load_instance(path2)


def test_format_override(tmp_path):
    inst = _tiny()
    path = tmp_path / "inst.data"
    core.save_instance(inst, path, format="json")
    back = core.load_instance(path, format="json")
    assert np.array_equal(back.X, inst.X)
    with pytest.raises(ValueError):
        core.save_instance(inst, tmp_path / "x.unknown")
