"""Shared test fixtures and independent oracles.

The oracles deliberately avoid the library's code paths: the prox
oracle minimizes over a dense grid, the relaxation oracles hand the
lifted convex programs to cvxpy, and the subset-selection oracle
enumerates supports with itertools and plain numpy solves.
"""

import itertools

import numpy as np

from l0relax import core


def rand_instance(rng, n, p, k=None, lam=0.1, mu=0.1, noise=0.1):
    X = rng.standard_normal((n, p)) / np.sqrt(n)
    if k is None:
        k = max(1, p // 3)
    b = np.zeros(p)
    b[:k] = rng.uniform(0.5, 1.0, k) * rng.choice([-1.0, 1.0], k)
    y = X @ b + noise * rng.standard_normal(n)
    return core.ProblemInstance(X=X, y=y, lam=lam, mu=mu)


def grid_prox_oracle(v, step, delta, lam, halfwidth=None, points=100001):
    """argmin over a dense grid of 0.5*(x-v)^2/step + rho_delta(x; lam)."""
    from l0relax import penalties

    if halfwidth is None:
        halfwidth = abs(v) + 1.0
    xs = np.linspace(-halfwidth, halfwidth, points)
    vals = 0.5 * (xs - v) ** 2 / step \
        + np.array([penalties.mcp_value(x, delta, lam) for x in xs])
    return xs[int(np.argmin(vals))]


def perspective_value_cvxpy(instance, delta):
    """Lifted perspective relaxation solved as a cone program.

    min 0.5 b'(G - D)b + 0.5*sum d_i s_i - c'b + lam*sum z + 0.5 y'y
    over s_i z_i >= b_i^2, 0 <= z <= 1.  Coordinates with d_i = 0 get
    s_i = 0 and contribute no perspective term.
    """
    import cvxpy as cp

    gram = core.build_gram(instance)
    d = np.asarray(delta, dtype=float)
    p = instance.p
    Gd = gram.G - np.diag(d)
    # symmetrize and nudge for the cvxpy PSD check
    Gd = 0.5 * (Gd + Gd.T) + 1e-10 * np.eye(p)
    b = cp.Variable(p)
    z = cp.Variable(p)
    s = cp.Variable(p)
    cons = [z >= 0, z <= 1, s >= 0]
    for i in range(p):
        if d[i] > 0:
            cons.append(cp.quad_over_lin(b[i], z[i]) <= s[i])
    obj = (0.5 * cp.quad_form(b, cp.psd_wrap(Gd))
           + 0.5 * cp.sum(cp.multiply(d, s))
           - gram.c @ b + instance.lam * cp.sum(z) + 0.5 * gram.yty)
    prob = cp.Problem(cp.Minimize(obj), cons)
    prob.solve(solver=cp.CLARABEL)
    assert prob.status == cp.OPTIMAL, prob.status
    return float(prob.value)


def sdp_value_cvxpy(problem_json):
    """Solve the exported block SDP with cvxpy, decoding only the JSON."""
    import cvxpy as cp

    blocks = [cp.Variable((o, o), symmetric=True)
              for o in problem_json["blocks"]]
    cons = [V >> 0 for V in blocks]
    for eq in problem_json["constraints"]:
        expr = 0
        for blk, i, j, coef in eq["entries"]:
            if i == j:
                expr = expr + coef * blocks[blk][i, j]
            else:
                # off-diagonal triplets stand for the symmetric pair
                expr = expr + 2.0 * coef * blocks[blk][i, j]
        cons.append(expr == eq["rhs"])
    obj = problem_json["constant"]
    for blk, triplets in enumerate(problem_json["objective"]):
        for i, j, v in triplets:
            if i == j:
                obj = obj + v * blocks[blk][i, j]
            else:
                obj = obj + 2.0 * v * blocks[blk][i, j]
    prob = cp.Problem(cp.Minimize(obj), cons)
    prob.solve(solver=cp.CLARABEL)
    assert prob.status == cp.OPTIMAL, prob.status
    return float(prob.value)


def brute_force_py(instance):
    """Exhaustive best-subset search, independent of the library solver."""
    X, y = instance.X, instance.y
    lam, mu = instance.lam, instance.mu
    p = X.shape[1]
    assert p <= 12
    best_val = 0.5 * float(y @ y)
    best_sup = ()
    best_b = np.zeros(p)
    for size in range(1, p + 1):
        for sup in itertools.combinations(range(p), size):
            Xs = X[:, sup]
            A = Xs.T @ Xs + mu * np.eye(size)
            bs = np.linalg.solve(A, Xs.T @ y)
            r = Xs @ bs - y
            val = 0.5 * float(r @ r) + 0.5 * mu * float(bs @ bs) + lam * size
            if val < best_val - 1e-12:
                best_val = val
                best_sup = sup
                best_b = np.zeros(p)
                best_b[list(sup)] = bs
    return best_val, best_sup, best_b
