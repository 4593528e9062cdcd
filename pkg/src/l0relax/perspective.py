"""Perspective relaxation of the L0 problem, in penalized form.

For an admissible vector delta (meaning G - diag(delta) is PSD, where
G = X'X + mu*I), the relaxation

    zeta_PR(delta) = min_b 0.5*|Xb - y|^2 + 0.5*mu*|b|^2 + sum_i rho(b_i; delta_i, lam)

is convex: split the quadratic as b'(G - diag(delta))b + sum_i delta_i b_i^2
and note rho(b; delta, lam) + 0.5*delta*b^2 is convex in b.  We minimize it
by proximal gradient with fixed step 1/lambda_max(G) and optional FISTA
momentum, restarting the momentum whenever the objective increases.  Any
fixed point of the prox-gradient map is a global minimizer.

delta = mu*ones recovers the reverse-Huber (PWG) relaxation; delta = 0 is
ridge.  The same engine, fed a weighted soft-threshold prox, solves the
lasso-form big-M relaxation used by the exact solvers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import core, numerics, penalties


class NotAdmissibleError(ValueError):
    """delta has a negative entry or G - diag(delta) is not PSD."""


class MuZeroError(ValueError):
    """The PWG choice delta = mu requires mu > 0."""


@dataclass(frozen=True)
class PerspectiveParams:
    """Per-coordinate delta vector; admissibility is checked against G."""

    delta: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.delta, dtype=float).ravel()
        if d.size < 1 or not np.all(np.isfinite(d)):
            raise ValueError("delta must be a nonempty finite vector")
        if np.any(d < 0):
            raise ValueError("delta must be nonnegative")
        object.__setattr__(self, "delta", core._frozen_array(d))


@dataclass(frozen=True)
class PrConfig:
    tol: float = 1e-8
    obj_tol: float = 1e-10
    max_iter: int = 50000


@dataclass(frozen=True)
class PrSolution:
    b: np.ndarray
    value: float
    iterations: int
    converged: bool

    def __post_init__(self):
        object.__setattr__(self, "b", core._frozen_array(self.b))


def delta_uniform(gram):
    """delta_i = lambda_min(G)*(1 - 1e-8); admissible by construction."""
    val = gram.lambda_min_G * (1.0 - 1e-8)
    return PerspectiveParams(delta=np.full(gram.G.shape[0], max(val, 0.0)))


def delta_pwg(instance):
    """delta = mu*ones, admissible because X'X is PSD.  Needs mu > 0."""
    if instance.mu == 0:
        raise MuZeroError("delta = mu requires mu > 0")
    return PerspectiveParams(delta=np.full(instance.p, instance.mu))


def check_admissible(gram, delta):
    """True iff delta >= 0 and lambda_min(G - diag(delta)) >= -1e-8*(1+|G|)."""
    d = np.asarray(delta, dtype=float).ravel()
    if d.shape[0] != gram.G.shape[0]:
        raise ValueError("delta length does not match G")
    if np.any(d < 0):
        return False
    shifted = gram.G - np.diag(d)
    norm_G = float(np.max(np.abs(np.linalg.eigvalsh(gram.G))))
    return numerics.min_eigenvalue(shifted) >= -1e-8 * (1.0 + norm_G)


def _step_size(G, delta_max):
    """Fixed step 1/lambda_max(G), shrunk so step*max(delta) < 1 strictly."""
    lam_max = float(np.linalg.eigvalsh(G)[-1])
    step = 1.0 / lam_max
    if delta_max > 0:
        step = min(step, (1.0 - 1e-9) / delta_max)
    return step


def _prox_gradient(G, c, step, prox, pen_value, tol_resid, obj_tol, max_iter,
                   b0=None):
    """Minimize 0.5*b'Gb - c'b + pen(b) by monotone accelerated prox-gradient.

    prox(v, step) must return argmin_x 0.5*|x-v|^2/step + pen(x).  Returns
    (b, objective, iterations, converged).  Convergence requires both an
    objective stall (<= obj_tol relative) and a prox-gradient residual
    |b - prox(b - step*(Gb-c))|/step <= tol_resid.
    """
    p = G.shape[0]
    b = np.zeros(p) if b0 is None else np.array(b0, dtype=float)

    def total(x):
        return 0.5 * float(x @ (G @ x)) - float(c @ x) + pen_value(x)

    fb = total(b)
    v = b.copy()
    t = 1.0
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        bn = prox(v - step * (G @ v - c), step)
        fn = total(bn)
        if fn > fb:
            # momentum overshot; restart from the last accepted iterate
            bn = prox(b - step * (G @ b - c), step)
            fn = total(bn)
            t = 1.0
        if abs(fb - fn) <= obj_tol * (1.0 + abs(fn)):
            pn = prox(bn - step * (G @ bn - c), step)
            resid = float(np.linalg.norm(bn - pn)) / step
            if resid <= tol_resid:
                b, fb = bn, fn
                converged = True
                break
        tn = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
        v = bn + ((t - 1.0) / tn) * (bn - b)
        b, fb, t = bn, fn, tn
    return b, fb, it, converged


def solve_pr(instance, params, config=None, gram=None, b0=None):
    """Globally minimize the penalized perspective relaxation for this delta.

    Raises NotAdmissibleError when params fails check_admissible.  On
    hitting the iteration cap the best iterate is returned with
    converged=False.
    """
    if config is None:
        config = PrConfig()
    if gram is None:
        gram = core.build_gram(instance)
    delta = params.delta
    if not check_admissible(gram, delta):
        raise NotAdmissibleError(
            "G - diag(delta) is not PSD; this delta is outside the "
            "admissible set"
        )
    lam = instance.lam
    step = _step_size(gram.G, float(np.max(delta)) if delta.size else 0.0)

    def prox(v, s):
        return penalties.mcp_prox_vec(v, s, delta, lam)

    def pen_value(x):
        return penalties.mcp_value_vec(x, delta, lam)

    b, _, iters, converged = _prox_gradient(
        gram.G, gram.c, step, prox, pen_value,
        tol_resid=config.tol * (1.0 + float(np.linalg.norm(gram.c))),
        obj_tol=config.obj_tol, max_iter=config.max_iter, b0=b0,
    )
    r = instance.X @ b - instance.y
    value = (0.5 * float(r @ r) + 0.5 * instance.mu * float(b @ b)
             + pen_value(b))
    return PrSolution(b=b, value=value, iterations=iters, converged=converged)


def lasso_equivalence_value(instance, M, config=None, gram=None):
    """Optimum of the big-M interval relaxation, which is a lasso.

    Relaxing z in {0,1}, |b_i| <= M*z_i to z_i >= 0 collapses to
    min 0.5*|Xb-y|^2 + 0.5*mu*|b|^2 + (lam/M)*|b|_1; returns that optimum.
    """
    if M <= 0:
        raise ValueError("M must be positive")
    if config is None:
        config = PrConfig()
    if gram is None:
        gram = core.build_gram(instance)
    weight = instance.lam / M
    step = _step_size(gram.G, 0.0)

    def prox(v, s):
        return np.sign(v) * np.maximum(np.abs(v) - s * weight, 0.0)

    def pen_value(x):
        return weight * float(np.sum(np.abs(x)))

    b, _, _, _ = _prox_gradient(
        gram.G, gram.c, step, prox, pen_value,
        tol_resid=config.tol * (1.0 + float(np.linalg.norm(gram.c))),
        obj_tol=config.obj_tol, max_iter=config.max_iter,
    )
    r = instance.X @ b - instance.y
    return (0.5 * float(r @ r) + 0.5 * instance.mu * float(b @ b)
            + pen_value(b))
