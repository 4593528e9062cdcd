import numpy as np
import pytest

from l0relax import core, penalties, perspective
from helpers import perspective_value_cvxpy, rand_instance


def test_params_validation():
    perspective.PerspectiveParams(delta=np.zeros(3))
    with pytest.raises(ValueError):
        perspective.PerspectiveParams(delta=np.array([0.1, -0.2]))
    with pytest.raises(ValueError):
        perspective.PerspectiveParams(delta=np.array([np.inf]))


def test_delta_uniform_is_admissible():
    rng = np.random.default_rng(10)
    inst = rand_instance(rng, 20, 6)
    gram = core.build_gram(inst)
    params = perspective.delta_uniform(gram)
    assert perspective.check_admissible(gram, params.delta)
    assert np.all(params.delta >= 0)


def test_delta_pwg_and_mu_zero_guard():
    rng = np.random.default_rng(11)
    inst = rand_instance(rng, 20, 6, mu=0.3)
    gram = core.build_gram(inst)
    params = perspective.delta_pwg(inst)
    assert np.allclose(params.delta, 0.3)
    assert perspective.check_admissible(gram, params.delta)

    X = rng.standard_normal((20, 4))
    inst0 = core.ProblemInstance(X=X, y=rng.standard_normal(20),
                                 lam=0.1, mu=0.0)
    with pytest.raises(perspective.MuZeroError):
        perspective.delta_pwg(inst0)


def test_check_admissible_rejects_oversized_delta():
    rng = np.random.default_rng(12)
    inst = rand_instance(rng, 20, 5)
    gram = core.build_gram(inst)
    too_big = np.full(5, 10.0 * float(np.linalg.eigvalsh(gram.G)[-1]))
    assert not perspective.check_admissible(gram, too_big)


def test_solve_pr_rejects_inadmissible():
    rng = np.random.default_rng(13)
    inst = rand_instance(rng, 20, 5)
    bad = perspective.PerspectiveParams(delta=np.full(5, 1e3))
    with pytest.raises(perspective.NotAdmissibleError):
        perspective.solve_pr(inst, bad)


def test_solve_pr_delta_zero_is_ridge():
    rng = np.random.default_rng(14)
    inst = rand_instance(rng, 25, 6, lam=0.2, mu=0.4)
    gram = core.build_gram(inst)
    sol = perspective.solve_pr(
        inst, perspective.PerspectiveParams(delta=np.zeros(6)), gram=gram)
    b_ridge = np.linalg.solve(gram.G, gram.c)
    val_ridge = 0.5 * gram.yty - 0.5 * float(gram.c @ b_ridge)
    assert sol.converged
    assert sol.value == pytest.approx(val_ridge, abs=1e-8)
    assert np.allclose(sol.b, b_ridge, atol=1e-6)


def test_solve_pr_matches_lifted_cone_program():
    rng = np.random.default_rng(15)
    for trial in range(6):
        inst = rand_instance(rng, 18, 5,
                             lam=float(rng.uniform(0.02, 0.4)),
                             mu=float(rng.uniform(0.05, 0.6)))
        gram = core.build_gram(inst)
        choices = [perspective.delta_uniform(gram),
                   perspective.delta_pwg(inst)]
        params = choices[trial % 2]
        mine = perspective.solve_pr(inst, params, gram=gram)
        assert mine.converged
        orc = perspective_value_cvxpy(inst, params.delta)
        assert mine.value == pytest.approx(orc, abs=2e-6 * (1 + abs(orc)))


def test_solve_pr_warm_start_agrees():
    rng = np.random.default_rng(16)
    inst = rand_instance(rng, 30, 8)
    gram = core.build_gram(inst)
    params = perspective.delta_uniform(gram)
    cold = perspective.solve_pr(inst, params, gram=gram)
    warm = perspective.solve_pr(inst, params, gram=gram, b0=cold.b)
    assert warm.value == pytest.approx(cold.value, abs=1e-9)
    assert warm.iterations <= cold.iterations


def test_solve_pr_value_recomputed_from_data():
    """The reported value must be the true objective of the returned b."""
    rng = np.random.default_rng(17)
    inst = rand_instance(rng, 22, 6, lam=0.15, mu=0.25)
    gram = core.build_gram(inst)
    params = perspective.delta_uniform(gram)
    sol = perspective.solve_pr(inst, params, gram=gram)
    r = inst.X @ sol.b - inst.y
    direct = (0.5 * float(r @ r) + 0.5 * inst.mu * float(sol.b @ sol.b)
              + penalties.mcp_value_vec(sol.b, params.delta, inst.lam))
    assert sol.value == pytest.approx(direct, abs=1e-8 * (1 + abs(direct)))


def test_max_iter_cap_reports_not_converged():
    rng = np.random.default_rng(18)
    inst = rand_instance(rng, 30, 10)
    gram = core.build_gram(inst)
    params = perspective.delta_uniform(gram)
    sol = perspective.solve_pr(
        inst, params, perspective.PrConfig(max_iter=2), gram=gram)
    assert not sol.converged
    assert sol.iterations <= 2


def test_lasso_equivalence_value_matches_direct():
    """Weighted-L1 value agrees with a direct subgradient-checked solve."""
    rng = np.random.default_rng(19)
    inst = rand_instance(rng, 20, 5, lam=0.3, mu=0.2)
    M = 2.0
    val = perspective.lasso_equivalence_value(inst, M)
    import cvxpy as cp
    b = cp.Variable(5)
    obj = (0.5 * cp.sum_squares(inst.X @ b - inst.y)
           + 0.5 * inst.mu * cp.sum_squares(b)
           + (inst.lam / M) * cp.norm1(b))
    prob = cp.Problem(cp.Minimize(obj))
    prob.solve(solver=cp.CLARABEL)
    assert val == pytest.approx(float(prob.value), abs=1e-6 * (1 + abs(val)))
