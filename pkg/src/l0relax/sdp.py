"""Optimal-perspective semidefinite relaxation and its dual.

The relaxation lifts b to (b, B, z) with

    minimize  0.5*<G, B> - c'b + lam*sum_i z_i + 0.5*y'y
    s.t.      [[1, b'], [b, B]] PSD          (encodes B >= bb')
              [[z_i, b_i], [b_i, B_ii]] PSD  (encodes z_i B_ii >= b_i^2)

over one order-(p+1) block and p order-2 blocks tied by 2p+1 equalities.
Its value dominates every perspective relaxation, and the dual variables
(eps, alpha, delta, t) deliver the optimizing delta* (read off as delta)
plus a certificate: dual value = 0.5*y'y - 0.5*eps.

Also here: the small SDP computing lambda_max (the smallest lam at which
the all-zero model is optimal), rank-1 exactness certificates, and the
projection of a near-optimal dual delta back into the admissible set.

Block problems are solved by the interior-point engine in ipm.py.  A
documented JSON export (block orders, objective triplets, constraint
triplets) supports cross-checking against independent conic solvers; see
SdpProblem.to_json.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve
from scipy.optimize import brentq

from . import core, ipm, numerics
from .core import GramCache
from .ipm import NumericalFailureError  # noqa: F401  (re-exported)
from .perspective import PerspectiveParams

RANK_TOL = 1e-6


@dataclass(frozen=True)
class SdpConfig:
    gap_tol: float = 1e-7
    feas_tol: float = 1e-9
    max_iter: int = 100


@dataclass(frozen=True)
class SdpProblem:
    """Block-structured relaxation data for one problem instance."""

    p: int
    lam: float
    gram: GramCache

    @property
    def block_orders(self):
        return (self.p + 1,) + (2,) * self.p

    @property
    def num_constraints(self):
        return 2 * self.p + 1

    def to_json(self):
        """Generic conic form: blocks, objective, equality triplets.

        Entry convention: a triplet [block, i, j, v] with i <= j states
        that the symmetric coefficient matrix has (i, j) and (j, i)
        entries both equal to v, so off-diagonal triplets contribute
        2*v*X[i, j] to an inner product.  Block 0 is the big block.
        """
        G, c = self.gram.G, self.gram.c
        obj_big = []
        for j in range(self.p):
            if c[j] != 0.0:
                obj_big.append([0, j + 1, -0.5 * float(c[j])])
        for i in range(self.p):
            for j in range(i, self.p):
                if G[i, j] != 0.0:
                    obj_big.append([i + 1, j + 1, 0.5 * float(G[i, j])])
        objective = [obj_big]
        for _ in range(self.p):
            objective.append([[0, 0, float(self.lam)]])
        constraints = [{"rhs": 1.0, "entries": [[0, 0, 0, 1.0]]}]
        for i in range(1, self.p + 1):
            constraints.append(
                {"rhs": 0.0, "entries": [[0, 0, i, 0.5], [i, 0, 1, -0.5]]}
            )
        for i in range(1, self.p + 1):
            constraints.append(
                {"rhs": 0.0, "entries": [[0, i, i, 1.0], [i, 1, 1, -1.0]]}
            )
        return {
            "blocks": list(self.block_orders),
            "constant": 0.5 * float(self.gram.yty),
            "objective": objective,
            "constraints": constraints,
        }


def sdp_problem_from_json(data):
    """Rebuild an SdpProblem from its to_json export."""
    blocks = data["blocks"]
    p = len(blocks) - 1
    if blocks != [p + 1] + [2] * p:
        raise ValueError("unrecognized block layout")
    lam = float(data["objective"][1][0][2]) if p >= 1 else 0.0
    G = np.zeros((p, p))
    c = np.zeros(p)
    for i, j, v in data["objective"][0]:
        if i == 0:
            c[j - 1] = -2.0 * v
        else:
            G[i - 1, j - 1] = 2.0 * v
            G[j - 1, i - 1] = 2.0 * v
    yty = 2.0 * float(data["constant"])
    lam_min = numerics.min_eigenvalue(G)
    if lam_min <= core.PD_TOL:
        raise numerics.NotPDError("imported Gram block is not positive definite")
    gram = GramCache(G=G, c=c, yty=yty, lambda_min_G=lam_min)
    return SdpProblem(p=p, lam=lam, gram=gram)


@dataclass(frozen=True)
class SdpPrimal:
    b: np.ndarray
    z: np.ndarray
    B: np.ndarray
    value: float
    lift_rank: int

    def __post_init__(self):
        object.__setattr__(self, "b", core._frozen_array(self.b))
        object.__setattr__(self, "z", core._frozen_array(self.z))
        object.__setattr__(self, "B", core._frozen_array(self.B))


@dataclass(frozen=True)
class DualCertificate:
    epsilon: float
    alpha: np.ndarray
    delta: np.ndarray
    t: np.ndarray
    value: float

    def __post_init__(self):
        object.__setattr__(self, "alpha", core._frozen_array(self.alpha))
        object.__setattr__(self, "delta", core._frozen_array(self.delta))
        object.__setattr__(self, "t", core._frozen_array(self.t))


@dataclass(frozen=True)
class SolveStats:
    iterations: int
    primal_infeas: float
    dual_infeas: float
    gap: float
    wall_time: float
    converged: bool


@dataclass(frozen=True)
class ExactSolution:
    """Rank-1 outcome: b solves the L0 problem itself, z is its support."""

    b: np.ndarray
    z: np.ndarray
    statement: str = "lifted solution is rank 1: b is globally optimal"

    def __post_init__(self):
        object.__setattr__(self, "b", core._frozen_array(self.b))
        object.__setattr__(self, "z", core._frozen_array(np.asarray(self.z), dtype=float))


def build_sdp(instance):
    """Assemble the block relaxation; raises NotPDError when G is not PD."""
    gram = core.build_gram(instance)
    return SdpProblem(p=instance.p, lam=instance.lam, gram=gram)


class _RegressionCone:
    """Engine adapter for the lifted regression relaxation.

    Dual-variable order: y[0] ties Y[0,0]=1, y[1:p+1] tie b entries
    across blocks, y[p+1:] tie the diagonal of B.  The certificate map
    is t = y[1:p+1], delta = 2*y[p+1:], eps = -2*y[0], alpha = -c - t.
    """

    def __init__(self, problem):
        gram = problem.gram
        p = problem.p
        self.p = p
        self.lam = float(problem.lam)
        self.G = gram.G
        self.c = gram.c
        self.lambda_min_G = gram.lambda_min_G
        self.big_order = p + 1
        self.n_small = p
        self.m = 2 * p + 1
        rhs = np.zeros(self.m)
        rhs[0] = 1.0
        self.rhs = rhs
        C = np.zeros((p + 1, p + 1))
        C[0, 1:] = -0.5 * self.c
        C[1:, 0] = -0.5 * self.c
        C[1:, 1:] = 0.5 * self.G
        self.C_big = C
        Cs = np.zeros((p, 2, 2))
        Cs[:, 0, 0] = self.lam
        self.C_small = Cs
        self.offset = 0.5 * float(gram.yty)

    def apply_A(self, Xb, Xs):
        p = self.p
        out = np.empty(self.m)
        out[0] = Xb[0, 0]
        out[1:p + 1] = Xb[0, 1:] - Xs[:, 0, 1]
        out[p + 1:] = np.diagonal(Xb)[1:] - Xs[:, 1, 1]
        return out

    def apply_AT(self, y):
        p = self.p
        y0, yb, yd = y[0], y[1:p + 1], y[p + 1:]
        big = np.zeros((p + 1, p + 1))
        big[0, 0] = y0
        big[0, 1:] = 0.5 * yb
        big[1:, 0] = 0.5 * yb
        big[np.arange(1, p + 1), np.arange(1, p + 1)] = yd
        small = np.zeros((p, 2, 2))
        small[:, 0, 1] = -0.5 * yb
        small[:, 1, 0] = -0.5 * yb
        small[:, 1, 1] = -yd
        return big, small

    def schur(self, Wb, Ws):
        p = self.p
        W00 = Wb[0, 0]
        u = Wb[0, 1:]
        Wss = Wb[1:, 1:]
        w00, w01, w11 = Ws[:, 0, 0], Ws[:, 0, 1], Ws[:, 1, 1]
        M = np.empty((self.m, self.m))
        M[0, 0] = W00 * W00
        M[0, 1:p + 1] = W00 * u
        M[0, p + 1:] = u * u
        Mbb = 0.5 * (W00 * Wss + np.outer(u, u))
        Mbb[np.arange(p), np.arange(p)] += 0.5 * (w00 * w11 + w01 * w01)
        Mbd = Wss * u[None, :]
        Mbd[np.arange(p), np.arange(p)] += w01 * w11
        Mdd = Wss * Wss
        Mdd[np.arange(p), np.arange(p)] += w11 * w11
        M[1:p + 1, 1:p + 1] = Mbb
        M[1:p + 1, p + 1:] = Mbd
        M[p + 1:, 1:p + 1] = Mbd.T
        M[p + 1:, p + 1:] = Mdd
        M[1:, 0] = M[0, 1:]
        return M

    def init_primal(self):
        Xb = np.eye(self.p + 1)
        Xs = np.zeros((self.p, 2, 2))
        Xs[:, 0, 0] = 0.5
        Xs[:, 1, 1] = 1.0
        return Xb, Xs

    def init_dual(self):
        p = self.p
        yd = 0.25 * self.lambda_min_G
        shifted = 0.5 * self.G - yd * np.eye(p)
        x = cho_solve(cho_factor(shifted, lower=True), 0.5 * self.c)
        qform = float(0.5 * self.c @ x)
        y = np.zeros(self.m)
        y[0] = -(qform + 1.0)
        y[p + 1:] = yd
        return y


def _warm_triple(primal, cert):
    """Reconstruct raw iterates from a previous solution for warm starts."""
    p = primal.b.shape[0]
    Xb = np.empty((p + 1, p + 1))
    Xb[0, 0] = 1.0
    Xb[0, 1:] = primal.b
    Xb[1:, 0] = primal.b
    Xb[1:, 1:] = primal.B
    Xs = np.zeros((p, 2, 2))
    Xs[:, 0, 0] = primal.z
    Xs[:, 0, 1] = primal.b
    Xs[:, 1, 0] = primal.b
    Xs[:, 1, 1] = np.diagonal(primal.B)
    y = np.concatenate(
        [[-0.5 * cert.epsilon], cert.t, 0.5 * cert.delta]
    )
    return Xb, Xs, y


def _lift_rank(b, B, tol=RANK_TOL):
    p = b.shape[0]
    Y = np.empty((p + 1, p + 1))
    Y[0, 0] = 1.0
    Y[0, 1:] = b
    Y[1:, 0] = b
    Y[1:, 1:] = 0.5 * (B + B.T)
    vals = np.linalg.eigvalsh(Y)
    top = vals[-1]
    if top <= 0:
        return 0
    return int(np.sum(vals > tol * top))


def solve_sdp(problem, config=None, warm=None):
    """Solve the relaxation; returns (SdpPrimal, DualCertificate, SolveStats).

    warm may be a (primal, cert) pair from a related solve (for example a
    neighboring lambda on a path); it is pushed back into the cone
    interior before use.  lam = 0 short-circuits to the ridge solution,
    for which the relaxation is exact and closed-form.
    """
    if config is None:
        config = SdpConfig()
    t0 = time.perf_counter()
    gram = problem.gram
    G, c, yty, lam = gram.G, gram.c, gram.yty, problem.lam
    p = problem.p

    if lam == 0.0:
        b = cho_solve(cho_factor(G, lower=True), c)
        B = np.outer(b, b)
        z = np.where(b * b > 1e-12, 1.0, 0.0)
        value = float(0.5 * yty - 0.5 * (c @ b))
        primal = SdpPrimal(b=b, z=z, B=B, value=value,
                           lift_rank=_lift_rank(b, B))
        cert = DualCertificate(
            epsilon=float(c @ b), alpha=-c, delta=np.zeros(p),
            t=np.zeros(p), value=value,
        )
        stats = SolveStats(
            iterations=0, primal_infeas=0.0, dual_infeas=0.0, gap=0.0,
            wall_time=time.perf_counter() - t0, converged=True,
        )
        return primal, cert, stats

    cone = _RegressionCone(problem)
    ipm_cfg = ipm.IpmConfig(gap_tol=config.gap_tol, feas_tol=config.feas_tol,
                            max_iter=config.max_iter)
    warm_raw = _warm_triple(*warm) if warm is not None else None
    res = ipm.solve_block_sdp(cone, ipm_cfg, warm=warm_raw)

    b = res.X_big[0, 1:].copy()
    B = 0.5 * (res.X_big[1:, 1:] + res.X_big[1:, 1:].T)
    Bii = np.diagonal(B)
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(Bii > 1e-12, (b * b) / Bii, 0.0)
    value = float(0.5 * np.sum(G * B) - c @ b + lam * np.sum(z) + 0.5 * yty)

    t = res.y[1:p + 1].copy()
    delta = 2.0 * res.y[p + 1:]
    eps = -2.0 * res.y[0]
    dual_value = float(0.5 * yty - 0.5 * eps)

    primal = SdpPrimal(b=b, z=z, B=B, value=value, lift_rank=_lift_rank(b, B))
    cert = DualCertificate(epsilon=eps, alpha=-c - t, delta=delta, t=t,
                           value=dual_value)
    stats = SolveStats(
        iterations=res.iterations,
        primal_infeas=res.primal_infeas,
        dual_infeas=res.dual_infeas,
        gap=abs(value - dual_value) / (1.0 + abs(value)),
        wall_time=time.perf_counter() - t0,
        converged=res.converged,
    )
    return primal, cert, stats


def extract_delta_star(cert, gram):
    """Project the dual delta into the admissible set.

    Negative entries are clipped to zero; if G - diag(delta) still has a
    negative eigenvalue the whole vector is shrunk by the scalar s that
    restores lambda_min(G - s*diag(delta)) = 0.
    """
    d = np.maximum(np.asarray(cert.delta, dtype=float), 0.0)
    if not np.any(d > 0):
        return PerspectiveParams(delta=np.zeros_like(d))
    G = gram.G

    def lo(s):
        return numerics.min_eigenvalue(G - s * np.diag(d))

    if lo(1.0) >= 0.0:
        return PerspectiveParams(delta=d)
    s = brentq(lo, 0.0, 1.0, xtol=1e-14)
    return PerspectiveParams(delta=s * d)


def rank1_certificate(primal, tol=RANK_TOL):
    """Exactness check: second eigenvalue of the lift below tol * first.

    When it fires, the relaxation solved the L0 problem itself; returns
    the solution with a binary support vector.  Otherwise returns None.
    """
    p = primal.b.shape[0]
    Y = np.empty((p + 1, p + 1))
    Y[0, 0] = 1.0
    Y[0, 1:] = primal.b
    Y[1:, 0] = primal.b
    Y[1:, 1:] = primal.B
    vals = np.linalg.eigvalsh(Y)
    if vals[-2] > tol * vals[-1]:
        return None
    on = primal.z > 0.5
    b = np.where(on, primal.b, 0.0)
    return ExactSolution(b=b, z=on.astype(float))


class _LambdaMaxCone:
    """Engine adapter for the lambda_max SDP.

    Dual variables y = (lam, delta), maximizing -lam subject to
    G - diag(delta) PSD and [[delta_i, -c_i], [-c_i, 2*lam]] PSD, so the
    optimum of y[0] is the smallest workable lam.
    """

    def __init__(self, gram):
        G, c = gram.G, gram.c
        p = G.shape[0]
        self.p = p
        self.G = G
        self.c = c
        self.lambda_min_G = gram.lambda_min_G
        self.big_order = p
        self.n_small = p
        self.m = p + 1
        rhs = np.zeros(self.m)
        rhs[0] = -1.0
        self.rhs = rhs
        self.C_big = G.copy()
        Cs = np.zeros((p, 2, 2))
        Cs[:, 0, 1] = -c
        Cs[:, 1, 0] = -c
        self.C_small = Cs
        self.offset = 0.0

    def apply_A(self, Xb, Xs):
        out = np.empty(self.m)
        out[0] = -2.0 * float(np.sum(Xs[:, 1, 1]))
        out[1:] = np.diagonal(Xb) - Xs[:, 0, 0]
        return out

    def apply_AT(self, y):
        lam_y, dl = y[0], y[1:]
        big = np.diag(dl)
        small = np.zeros((self.p, 2, 2))
        small[:, 0, 0] = -dl
        small[:, 1, 1] = -2.0 * lam_y
        return big, small

    def schur(self, Wb, Ws):
        p = self.p
        w00, w01, w11 = Ws[:, 0, 0], Ws[:, 0, 1], Ws[:, 1, 1]
        M = np.empty((self.m, self.m))
        M[0, 0] = 4.0 * float(np.sum(w11 * w11))
        M[0, 1:] = 2.0 * w01 * w01
        M[1:, 0] = M[0, 1:]
        Mdd = Wb * Wb
        Mdd[np.arange(p), np.arange(p)] += w00 * w00
        M[1:, 1:] = Mdd
        return M

    def init_primal(self):
        Xb = np.eye(self.p)
        Xs = np.zeros((self.p, 2, 2))
        Xs[:, 0, 0] = 1.0
        Xs[:, 1, 1] = 0.5 / self.p
        return Xb, Xs

    def init_dual(self):
        dl = 0.5 * self.lambda_min_G
        lam0 = float(np.max(self.c ** 2)) / dl + 1.0
        y = np.empty(self.m)
        y[0] = lam0
        y[1:] = dl
        return y


def lambda_max(instance, config=None):
    """Smallest lam making the all-zero model optimal for the relaxation.

    Equivalently the least lam admitting delta with G - diag(delta) PSD
    and 2*lam*delta_i >= c_i^2.  c = 0 returns exactly 0.0.
    """
    gram = core.build_gram(instance)
    if not np.any(gram.c):
        return 0.0
    if config is None:
        config = SdpConfig(gap_tol=1e-9, feas_tol=1e-9)
    cone = _LambdaMaxCone(gram)
    cfg = ipm.IpmConfig(gap_tol=config.gap_tol, feas_tol=config.feas_tol,
                        max_iter=config.max_iter)
    res = ipm.solve_block_sdp(cone, cfg)
    return max(float(res.y[0]), 0.0)
