"""Primal-dual interior-point engine for block-structured SDPs.

Solves standard-form conic pairs

    min <C, X>  s.t.  <A_k, X> = rhs_k,  X >= 0 (PSD)
    max rhs'y   s.t.  S = C - sum_k y_k A_k >= 0

where X decomposes into one dense "big" symmetric block plus a batch of
2x2 blocks, the shape shared by the relaxations in this package.  The
problem object supplies the data operators; this module only knows the
block layout:

    big_order, n_small, m, rhs, C_big, C_small, offset
    apply_A(X_big, X_small) -> (m,)
    apply_AT(y) -> (big, small)           adjoint, sum_k y_k A_k
    schur(W_big, W_small) -> (m, m)       M_kl = <A_k, W A_l W>
    init_primal() -> (X_big, X_small)     strictly PD
    init_dual() -> y with C - A'(y) strictly PD

The algorithm is the usual Nesterov-Todd scaled predictor-corrector:
factor X = L L' and S = R_s R_s', take the SVD R_s' L = U diag(sig) V',
then R = L V diag(sig)^(-1/2) maps both X and S to diag(sig) in the
scaled space and W = R R' satisfies W S W = X.  Each iteration assembles
the dense Schur complement M (size m, tiny here), solves it once for the
predictor and once for the Mehrotra corrector, and takes a 0.98
fraction-to-boundary step.  2x2 blocks go through numpy's batched
cholesky/svd so the per-iteration cost is a handful of dense matmuls.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve, solve_triangular


class NumericalFailureError(RuntimeError):
    """Factorization breakdown inside the interior-point loop."""


@dataclass(frozen=True)
class IpmConfig:
    gap_tol: float = 1e-7
    feas_tol: float = 1e-9
    max_iter: int = 100
    tau: float = 0.98   # fraction-to-boundary


@dataclass
class IpmResult:
    X_big: np.ndarray
    X_small: np.ndarray
    y: np.ndarray
    S_big: np.ndarray
    S_small: np.ndarray
    pobj: float
    dobj: float
    gap: float
    primal_infeas: float
    dual_infeas: float
    iterations: int
    converged: bool


def _sym(A):
    return 0.5 * (A + np.swapaxes(A, -1, -2))


def _inv_lower2(L):
    """Batched inverse of lower-triangular 2x2 factors."""
    out = np.zeros_like(L)
    l00, l10, l11 = L[:, 0, 0], L[:, 1, 0], L[:, 1, 1]
    out[:, 0, 0] = 1.0 / l00
    out[:, 1, 0] = -l10 / (l00 * l11)
    out[:, 1, 1] = 1.0 / l11
    return out


def _min_eig2(A):
    """Batched smallest eigenvalue of symmetric 2x2 matrices."""
    a, d = A[:, 0, 0], A[:, 1, 1]
    b = 0.5 * (A[:, 0, 1] + A[:, 1, 0])
    half_tr = 0.5 * (a + d)
    rad = np.sqrt(np.maximum(0.25 * (a - d) ** 2 + b * b, 0.0))
    return half_tr - rad


def _bT(A):
    return np.swapaxes(A, -1, -2)


class _Scaling:
    """NT factors for the whole block system."""

    def __init__(self, Xb, Xs, Sb, Ss):
        try:
            Lb = np.linalg.cholesky(Xb)
            Rb = np.linalg.cholesky(Sb)
        except np.linalg.LinAlgError as exc:
            raise NumericalFailureError(
                "iterate left the PSD cone (big block)"
            ) from exc
        _, sig, Vt = np.linalg.svd(Rb.T @ Lb)
        if np.any(sig <= 0):
            raise NumericalFailureError("singular NT scaling (big block)")
        sqs = np.sqrt(sig)
        self.R_big = Lb @ (Vt.T / sqs[None, :])
        Lb_inv = solve_triangular(Lb, np.eye(Lb.shape[0]), lower=True)
        self.Rinv_big = (sqs[:, None] * Vt) @ Lb_inv
        self.W_big = self.R_big @ self.R_big.T
        self.sig_big = sig
        self.L_big = Lb
        self.Ls_big = Rb

        try:
            Ls = np.linalg.cholesky(Xs)
            Rs = np.linalg.cholesky(Ss)
        except np.linalg.LinAlgError as exc:
            raise NumericalFailureError(
                "iterate left the PSD cone (2x2 block)"
            ) from exc
        _, sig2, Vt2 = np.linalg.svd(_bT(Rs) @ Ls)
        if np.any(sig2 <= 0):
            raise NumericalFailureError("singular NT scaling (2x2 block)")
        sqs2 = np.sqrt(sig2)
        self.R_small = Ls @ (np.swapaxes(Vt2, 1, 2) / sqs2[:, None, :])
        self.Rinv_small = (sqs2[:, :, None] * Vt2) @ _inv_lower2(Ls)
        self.W_small = self.R_small @ _bT(self.R_small)
        self.sig_small = sig2
        self.L_small = Ls
        self.Ls_small = Rs

    def mu(self, ntot):
        # <X, S> = sum of squared NT singular values
        return (float(np.sum(self.sig_big ** 2))
                + float(np.sum(self.sig_small ** 2))) / ntot

    def w_conj(self, Ub, Us):
        """W U W blockwise."""
        return self.W_big @ Ub @ self.W_big, self.W_small @ Us @ self.W_small

    def scale_x(self, Ub, Us):
        """Rinv U Rinv' blockwise (primal-side scaling)."""
        return (self.Rinv_big @ Ub @ self.Rinv_big.T,
                self.Rinv_small @ Us @ _bT(self.Rinv_small))

    def scale_s(self, Ub, Us):
        """R' U R blockwise (dual-side scaling)."""
        return (self.R_big.T @ Ub @ self.R_big,
                _bT(self.R_small) @ Us @ self.R_small)

    def unscale(self, Ub, Us):
        """R U R' blockwise (back to primal space)."""
        return (self.R_big @ Ub @ self.R_big.T,
                self.R_small @ Us @ _bT(self.R_small))

    def max_step_primal(self, dXb, dXs):
        return self._max_step(self.L_big, self.L_small, dXb, dXs)

    def max_step_dual(self, dSb, dSs):
        return self._max_step(self.Ls_big, self.Ls_small, dSb, dSs)

    @staticmethod
    def _max_step(Lb, Ls, Db, Ds):
        """Largest a with X + a*D still PSD, X = L L'."""
        Lb_inv = solve_triangular(Lb, np.eye(Lb.shape[0]), lower=True)
        lo = float(np.linalg.eigvalsh(Lb_inv @ Db @ Lb_inv.T)[0])
        Ls_inv = _inv_lower2(Ls)
        lo2 = _min_eig2(_sym(Ls_inv @ Ds @ _bT(Ls_inv)))
        lo = min(lo, float(np.min(lo2)) if lo2.size else lo)
        if lo >= -1e-13:
            return np.inf
        return -1.0 / lo


def _lyapunov(K, sig):
    """Solve (U diag(sig) + diag(sig) U)/2 = K elementwise."""
    denom = 0.5 * (sig[..., :, None] + sig[..., None, :])
    return K / denom


def _inner(Ab, As, Bb, Bs):
    return float(np.sum(Ab * Bb)) + float(np.sum(As * Bs))


def _solve_schur(M, rhs_list):
    jitter = 0.0
    scale = float(np.max(np.abs(np.diag(M)))) + 1.0
    for attempt in range(4):
        try:
            fac = cho_factor(M + jitter * np.eye(M.shape[0]), lower=True)
            return [cho_solve(fac, r) for r in rhs_list]
        except np.linalg.LinAlgError:
            jitter = scale * (1e-13 if attempt == 0 else jitter / scale * 100)
    raise NumericalFailureError("Schur complement factorization failed")


def solve_block_sdp(prob, config=None, warm=None):
    """Run the predictor-corrector loop; returns an IpmResult.

    warm, if given, is a (X_big, X_small, y) triple from a related solve;
    it is pushed back into the interior before use.  Factorization
    breakdown (possible when tolerances are pushed near machine noise)
    stops the loop early; like hitting max_iter, the last iterates are
    returned and converged reflects whether they meet the tolerances.
    """
    if config is None:
        config = IpmConfig()
    q = prob.big_order
    nb = prob.n_small
    ntot = q + 2 * nb
    rhs = np.asarray(prob.rhs, dtype=float)
    offset = float(getattr(prob, "offset", 0.0))

    Xb, Xs, y = None, None, None
    if warm is not None:
        Xb, Xs, y = _push_interior(prob, *warm)
    if Xb is None:
        Xb, Xs = prob.init_primal()
        y = prob.init_dual()
    ATb, ATs = prob.apply_AT(y)
    Sb = prob.C_big - ATb
    Ss = prob.C_small - ATs

    rhs_scale = 1.0 + float(np.linalg.norm(rhs))
    c_scale = 1.0 + np.sqrt(
        float(np.sum(prob.C_big ** 2)) + float(np.sum(prob.C_small ** 2))
    )

    pobj = dobj = gap = pinf = dinf = np.inf
    converged = False
    it = 0
    for it in range(1, config.max_iter + 1):
        ax = prob.apply_A(Xb, Xs)
        rp = rhs - ax
        ATb, ATs = prob.apply_AT(y)
        Rd_b = prob.C_big - Sb - ATb
        Rd_s = prob.C_small - Ss - ATs

        pobj = _inner(prob.C_big, prob.C_small, Xb, Xs) + offset
        dobj = float(rhs @ y) + offset
        gap = abs(pobj - dobj) / (1.0 + abs(pobj))
        pinf = float(np.linalg.norm(rp)) / rhs_scale
        dinf = np.sqrt(
            float(np.sum(Rd_b ** 2)) + float(np.sum(Rd_s ** 2))
        ) / c_scale
        if gap <= config.gap_tol and pinf <= config.feas_tol \
                and dinf <= config.feas_tol:
            converged = True
            break

        try:
            nt = _Scaling(Xb, Xs, Sb, Ss)
            mu = nt.mu(ntot)
            M = prob.schur(nt.W_big, nt.W_small)
        except NumericalFailureError:
            break

        WRd_b, WRd_s = nt.w_conj(Rd_b, Rd_s)
        a_wrd = prob.apply_A(WRd_b, WRd_s)

        # predictor: Rc = -X makes the rhs collapse to rhs + A(W Rd W)
        try:
            (dy_a,) = _solve_schur(M, [rhs + a_wrd])
        except NumericalFailureError:
            break
        dA_b, dA_s = prob.apply_AT(dy_a)
        dSb_a = Rd_b - dA_b
        dSs_a = Rd_s - dA_s
        WdS_b, WdS_s = nt.w_conj(dSb_a, dSs_a)
        dXb_a = -Xb - WdS_b
        dXs_a = -Xs - WdS_s

        ap = min(1.0, nt.max_step_primal(dXb_a, dXs_a))
        ad = min(1.0, nt.max_step_dual(dSb_a, dSs_a))
        mu_aff = _inner(Xb + ap * dXb_a, Xs + ap * dXs_a,
                        Sb + ad * dSb_a, Ss + ad * dSs_a) / ntot
        sigma = min(max(mu_aff / mu, 0.0), 1.0) ** 3

        # Mehrotra corrector in the scaled space, where both X and S are
        # diag(sig): solve the Lyapunov equation for U and map back.
        dXh_b, dXh_s = nt.scale_x(dXb_a, dXs_a)
        dSh_b, dSh_s = nt.scale_s(dSb_a, dSs_a)
        Kb = sigma * mu * np.eye(q) - np.diag(nt.sig_big ** 2) \
            - _sym(dXh_b @ dSh_b)
        Ks = sigma * mu * np.eye(2)[None, :, :] \
            - nt.sig_small[:, :, None] ** 2 * np.eye(2)[None, :, :] \
            - _sym(dXh_s @ dSh_s)
        Ub = _lyapunov(Kb, nt.sig_big)
        Us = _lyapunov(Ks, nt.sig_small)
        Rc_b, Rc_s = nt.unscale(Ub, Us)

        try:
            (dy,) = _solve_schur(M, [rp - prob.apply_A(Rc_b, Rc_s) + a_wrd])
        except NumericalFailureError:
            break
        dA_b, dA_s = prob.apply_AT(dy)
        dSb = Rd_b - dA_b
        dSs = Rd_s - dA_s
        WdS_b, WdS_s = nt.w_conj(dSb, dSs)
        dXb = Rc_b - WdS_b
        dXs = Rc_s - WdS_s

        ap = min(1.0, config.tau * nt.max_step_primal(dXb, dXs))
        ad = min(1.0, config.tau * nt.max_step_dual(dSb, dSs))
        if ap < 1e-12 and ad < 1e-12:
            break
        Xb = _sym(Xb + ap * dXb)
        Xs = _sym(Xs + ap * dXs)
        y = y + ad * dy
        Sb = _sym(Sb + ad * dSb)
        Ss = _sym(Ss + ad * dSs)

    if not converged:
        # refresh the report after the last update
        rp = rhs - prob.apply_A(Xb, Xs)
        ATb, ATs = prob.apply_AT(y)
        Rd_b = prob.C_big - Sb - ATb
        Rd_s = prob.C_small - Ss - ATs
        pobj = _inner(prob.C_big, prob.C_small, Xb, Xs) + offset
        dobj = float(rhs @ y) + offset
        gap = abs(pobj - dobj) / (1.0 + abs(pobj))
        pinf = float(np.linalg.norm(rp)) / rhs_scale
        dinf = np.sqrt(
            float(np.sum(Rd_b ** 2)) + float(np.sum(Rd_s ** 2))
        ) / c_scale
        if gap <= config.gap_tol and pinf <= config.feas_tol \
                and dinf <= config.feas_tol:
            converged = True

    return IpmResult(
        X_big=Xb, X_small=Xs, y=y, S_big=Sb, S_small=Ss,
        pobj=pobj, dobj=dobj, gap=gap,
        primal_infeas=pinf, dual_infeas=dinf,
        iterations=it, converged=converged,
    )


def _push_interior(prob, Xb, Xs, y):
    """Blend a warm-start point toward the cone center so it is usable.

    Returns (None, None, None) when the point cannot be salvaged, which
    sends the caller back to the cold start.
    """
    q = prob.big_order
    try:
        Xb = _sym(np.array(Xb, dtype=float))
        Xs = _sym(np.array(Xs, dtype=float))
        y = np.array(y, dtype=float)
        shift = max(1e-3, 1e-3 * float(np.trace(Xb)) / q)
        Xb = Xb + shift * np.eye(q)
        Xs = Xs + shift * np.eye(2)[None, :, :]
        ATb, ATs = prob.apply_AT(y)
        Sb = prob.C_big - ATb
        Ss = prob.C_small - ATs
        lo = min(float(np.linalg.eigvalsh(Sb)[0]),
                 float(np.min(_min_eig2(Ss))) if Ss.size else np.inf)
        if lo <= 0:
            # retreat along y toward zero until the dual block is PD
            for _ in range(30):
                y *= 0.5
                ATb, ATs = prob.apply_AT(y)
                Sb = prob.C_big - ATb
                Ss = prob.C_small - ATs
                lo = min(float(np.linalg.eigvalsh(Sb)[0]),
                         float(np.min(_min_eig2(Ss))) if Ss.size else np.inf)
                if lo > 0:
                    break
            else:
                return None, None, None
        np.linalg.cholesky(Xb)
        np.linalg.cholesky(Xs)
        return Xb, Xs, y
    except np.linalg.LinAlgError:
        return None, None, None
