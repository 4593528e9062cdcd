"""Desk-scale exact solvers for the penalized L0 problem.

brute_force enumerates all 2^p supports with an incremental Cholesky
factor along a depth-first walk, so each support costs O(|S|^2) instead
of a fresh O(|S|^3) solve; a compiled kernel keeps p = 20 around a
second.  branch_and_bound solves the big-M mixed-integer formulation

    min 0.5*|Xb - y|^2 + 0.5*mu*|b|^2 + lam*sum z_i,  |b_i| <= M z_i,
    z binary

by best-first search on z fixings.  Node bounds come from the interval
relaxation of z, which collapses to a weighted lasso solved by the
shared proximal-gradient engine; a strong-convexity residual bound turns
the approximate node value into a rigorous lower bound.  The box
|b_i| <= M is dropped at nodes (valid relaxation) and M is validated
after the fact: incumbents must satisfy |b|_inf <= 0.99*M or the caller
doubles M and re-solves (branch_and_bound_auto_m does this loop).
"""

from __future__ import annotations

import heapq
import time
from dataclasses import dataclass

import numpy as np
from numba import njit

from . import core, numerics, perspective
from .core import FitResult

MAX_BRUTE_P = 20
MAX_BNB_P = 64

# inner lasso solves at branch-and-bound nodes
_NODE_TOL = 1e-9
_NODE_OBJ_TOL = 1e-12
_NODE_MAX_ITER = 20000


class TooLargeError(ValueError):
    """Problem dimension exceeds the hard cap of an exact solver."""


@dataclass(frozen=True)
class BnbConfig:
    tol: float = 1e-6
    max_nodes: int | None = None
    max_secs: float | None = None
    support_tol: float | None = None   # default 1e-6 * M


@dataclass(frozen=True)
class BnbResult:
    incumbent: FitResult
    lower_bound: float
    node_count: int
    wall_time: float
    optimal: bool
    trace: tuple


@njit(cache=True)
def _enumerate_supports(G, c, two_lam, p):
    """Best support by DFS over subsets in lexicographic order.

    Maximizes q(S) = c_S' G_SS^{-1} c_S - two_lam*|S| (so the L0 value is
    (y'y - q)/2), carrying Cholesky rows of G_SS down the tree.  Ties go
    to the smaller support, then to the first support visited.
    """
    R = np.zeros((p, p))
    w = np.zeros(p)
    qacc = np.zeros(p + 1)
    sel = np.zeros(p, dtype=np.int64)
    pmask = np.zeros(p + 1, dtype=np.int64)

    cap = p * p + p + 8
    st_i = np.zeros(cap, dtype=np.int64)
    st_s = np.zeros(cap, dtype=np.int64)
    top = 0
    for i in range(p - 1, -1, -1):
        st_i[top] = i
        st_s[top] = 0
        top += 1

    best_q = 0.0
    best_size = 0
    best_mask = np.int64(0)

    while top > 0:
        top -= 1
        i = st_i[top]
        s = st_s[top]
        # extend the Cholesky factor with row/column i at level s
        acc = 0.0
        for k in range(s):
            r = G[sel[k], i]
            for j in range(k):
                r -= R[k, j] * R[s, j]
            r /= R[k, k]
            R[s, k] = r
            acc += r * r
        dii = G[i, i] - acc
        R[s, s] = np.sqrt(dii)
        num = c[i]
        for j in range(s):
            num -= R[s, j] * w[j]
        w[s] = num / R[s, s]
        sel[s] = i
        qacc[s + 1] = qacc[s] + w[s] * w[s]
        pmask[s + 1] = pmask[s] | (np.int64(1) << i)
        q = qacc[s + 1] - two_lam * (s + 1)
        if q > best_q or (q == best_q and s + 1 < best_size):
            best_q = q
            best_size = s + 1
            best_mask = pmask[s + 1]
        for child in range(p - 1, i, -1):
            st_i[top] = child
            st_s[top] = s + 1
            top += 1
    return best_mask, best_size, best_q


def brute_force(instance):
    """Exhaustive global optimum; p <= 20 (2^p restricted solves)."""
    if instance.p > MAX_BRUTE_P:
        raise TooLargeError(
            f"brute_force handles p <= {MAX_BRUTE_P}, got p = {instance.p}"
        )
    gram = core.build_gram(instance)
    G = np.ascontiguousarray(gram.G)
    c = np.ascontiguousarray(gram.c)
    mask, _, _ = _enumerate_supports(G, c, 2.0 * instance.lam, instance.p)
    support = [j for j in range(instance.p) if (int(mask) >> j) & 1]
    b = numerics.restricted_ls(instance.X, instance.y, instance.mu, support)
    return core.make_fit_result(instance, b, method="brute_force")


def big_m(instance, safety=5.0):
    """Data-driven box bound for the mixed-integer formulation.

    M = safety * max(|b_ridge|_inf, max_i |c_i| / G_ii), floored at 1.
    Heuristic: callers validate incumbents against 0.99*M after solving.
    """
    if safety < 1.0:
        raise ValueError("safety factor must be >= 1")
    gram = core.build_gram(instance)
    b_ols = np.linalg.solve(gram.G, gram.c)
    per_coord = np.abs(gram.c) / np.diagonal(gram.G)
    scale = max(float(np.max(np.abs(b_ols))), float(np.max(per_coord)))
    return max(safety * scale, 1.0)


def _node_bound(gram, lam, keep, n_fixed1, weights, step, b0):
    """Lower bound and relaxation solution for one search node.

    Minimizes 0.5 b'G_kk b - c_k'b + sum weights_i |b_i| over the kept
    coordinates; the returned bound subtracts the strong-convexity
    suboptimality certificate 2*resid^2/sigma, making it valid despite
    the iterative solve.
    """
    Gk = gram.G[np.ix_(keep, keep)]
    ck = gram.c[keep]

    def prox(v, s):
        return np.sign(v) * np.maximum(np.abs(v) - s * weights, 0.0)

    def pen(x):
        return float(weights @ np.abs(x))

    b, fb, _, _ = perspective._prox_gradient(
        Gk, ck, step, prox, pen,
        tol_resid=_NODE_TOL * (1.0 + float(np.linalg.norm(ck))),
        obj_tol=_NODE_OBJ_TOL, max_iter=_NODE_MAX_ITER, b0=b0,
    )
    # one extra plain step gives the residual and a no-worse point
    pn = prox(b - step * (Gk @ b - ck), step)
    resid = float(np.linalg.norm(b - pn)) / step
    fpn = 0.5 * float(pn @ (Gk @ pn)) - float(ck @ pn) + pen(pn)
    if fpn <= fb:
        b, fb = pn, fpn
    sigma = gram.lambda_min_G
    margin = 2.0 * resid * resid / sigma + 1e-12 * (1.0 + abs(fb))
    lower = 0.5 * gram.yty + fb + lam * n_fixed1 - margin
    return lower, b


def _polish(instance, support):
    b = numerics.restricted_ls(instance.X, instance.y, instance.mu,
                               sorted(support))
    return core.make_fit_result(instance, b, method="branch_and_bound")


def branch_and_bound(instance, M, config=None):
    """Best-first big-M search; exact given enough budget, bounds always.

    Returns a BnbResult whose lower_bound is valid regardless of budget;
    optimal=True means the relative gap closed below config.tol.
    """
    if instance.p > MAX_BNB_P:
        raise TooLargeError(
            f"branch_and_bound handles p <= {MAX_BNB_P}, got p = {instance.p}"
        )
    if M <= 0:
        raise ValueError("M must be positive")
    if config is None:
        config = BnbConfig()
    support_tol = config.support_tol
    if support_tol is None:
        support_tol = 1e-6 * M
    t0 = time.perf_counter()
    gram = core.build_gram(instance)
    lam, p = instance.lam, instance.p
    step = 1.0 / float(np.linalg.eigvalsh(gram.G)[-1])
    lam_over_M = lam / M

    ub_fit = _polish(instance, range(p))
    empty_fit = _polish(instance, [])
    if empty_fit.objective < ub_fit.objective:
        ub_fit = empty_fit

    def incumbents_from(b_node, keep, fixed1_set):
        nonlocal ub_fit
        cands = []
        thr = {keep[j] for j in range(len(keep))
               if abs(b_node[j]) > support_tol} | fixed1_set
        cands.append(thr)
        cands.append(set(keep))
        for supp in cands:
            fit = _polish(instance, supp)
            if fit.objective < ub_fit.objective - 1e-15:
                ub_fit = fit

    def solve_node(mask0, mask1, b0):
        keep = [i for i in range(p) if not (mask0 >> i) & 1]
        n1 = 0
        weights = np.empty(len(keep))
        for j, i in enumerate(keep):
            if (mask1 >> i) & 1:
                weights[j] = 0.0
                n1 += 1
            else:
                weights[j] = lam_over_M
        lower, b_node = _node_bound(gram, lam, keep, n1, weights, step, b0)
        fixed1 = {i for i in range(p) if (mask1 >> i) & 1}
        incumbents_from(b_node, keep, fixed1)
        return lower, b_node, keep

    lb_root, b_root, keep_root = solve_node(0, 0, None)
    node_count = 1
    counter = 0
    heap = [(lb_root, counter, 0, 0, b_root, keep_root)]
    lb_global = lb_root
    trace = [(time.perf_counter() - t0, lb_global, ub_fit.objective,
              node_count)]
    optimal = False

    while heap:
        lb, _, mask0, mask1, b_node, keep = heapq.heappop(heap)
        lb_global = min(lb, ub_fit.objective)
        gap = (ub_fit.objective - lb_global) / max(1.0, abs(ub_fit.objective))
        trace.append((time.perf_counter() - t0, lb_global, ub_fit.objective,
                      node_count))
        if gap <= config.tol:
            optimal = True
            break
        if config.max_nodes is not None and node_count >= config.max_nodes:
            break
        if config.max_secs is not None \
                and time.perf_counter() - t0 > config.max_secs:
            break

        free = [i for i in keep if not (mask1 >> i) & 1]
        if not free:
            continue
        # branch on the most fractional |b_i|/M, ties to the larger |b_i|
        zfrac = {}
        for j, i in enumerate(keep):
            if not (mask1 >> i) & 1:
                zfrac[i] = min(abs(b_node[j]) / M, 1.0)
        branch_i = min(
            free,
            key=lambda i: (abs(zfrac[i] - 0.5), -zfrac[i], i),
        )
        jpos = keep.index(branch_i)
        cutoff = ub_fit.objective * (1.0 + 1e-12)

        b_warm0 = np.delete(b_node, jpos)
        lb0, bn0, keep0 = solve_node(mask0 | (1 << branch_i), mask1, b_warm0)
        lb0 = max(lb0, lb)
        node_count += 1
        if lb0 < cutoff - config.tol * max(1.0, abs(cutoff)):
            counter += 1
            heapq.heappush(heap, (lb0, counter, mask0 | (1 << branch_i),
                                  mask1, bn0, keep0))

        lb1, bn1, keep1 = solve_node(mask0, mask1 | (1 << branch_i), b_node)
        lb1 = max(lb1, lb)
        node_count += 1
        if lb1 < cutoff - config.tol * max(1.0, abs(cutoff)):
            counter += 1
            heapq.heappush(heap, (lb1, counter, mask0,
                                  mask1 | (1 << branch_i), bn1, keep1))

    if not heap and not optimal:
        # search space exhausted: the incumbent is proven optimal
        lb_global = ub_fit.objective
        optimal = True
    wall = time.perf_counter() - t0
    trace.append((wall, lb_global, ub_fit.objective, node_count))
    return BnbResult(
        incumbent=ub_fit,
        lower_bound=min(lb_global, ub_fit.objective),
        node_count=node_count,
        wall_time=wall,
        optimal=optimal,
        trace=tuple(trace),
    )


def branch_and_bound_auto_m(instance, config=None, safety=5.0):
    """big_m + solve, doubling M until the incumbent clears 0.99*M."""
    M = big_m(instance, safety=safety)
    for _ in range(60):
        result = branch_and_bound(instance, M, config=config)
        b_inf = float(np.max(np.abs(result.incumbent.b))) \
            if instance.p else 0.0
        if b_inf <= 0.99 * M:
            return result, M
        M *= 2.0
    raise RuntimeError("big-M validation loop failed to stabilize")
