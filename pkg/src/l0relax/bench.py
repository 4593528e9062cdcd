"""Benchmark harness: simulated instances, gap tables, lambda paths.

The generator draws X with i.i.d. standard normal rows scaled by
1/sqrt(n), a true coefficient vector whose first k entries are uniform
on [-1,-0.5] U [0.5,1], and Gaussian noise with a free standard
deviation.  A noise spec written "N(0,5)" is ambiguous between variance
5 and standard deviation 5; noise_sd_from_convention maps either
reading.  Note the relaxation gaps are extremely sensitive to this
level: with the 1/sqrt(n) design scaling, noise sd around 0.5 keeps the
planted support identifiable and the gap experiment informative, while
sd >= sqrt(5) drowns the signal and makes every relaxation nearly exact
(gaps below 0.3%).

gap_table reproduces the relative-gap experiment: per (lam, mu) cell it
solves the semidefinite relaxation (tau_SDP), the reverse-Huber
perspective relaxation (tau_PWG), runs budgeted branch-and-bound, and
rounds; tau_UB is the best feasible value found and gaps are
(tau_UB - tau)/tau_UB in percent.  rounding_quality_table measures the
rounding excess against exact brute-force optima (p <= 20).

Everything is deterministic given SimSpec.seed: instance index i draws
from substream (seed, i) so instances are paired across cells, and the
rounding seeds derive from labeled substreams.  Budgets are node counts,
not wall clock, so reports regenerate bit-identically; a time budget is
available but breaks byte-reproducibility.  Emitted CSV/JSON round
floats at 10 significant digits with sorted keys.
"""

from __future__ import annotations

import csv
import json
import math
import platform
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np
import scipy

from . import core, exact, perspective, rounding, sdp
from .core import ProblemInstance


@dataclass(frozen=True)
class SimSpec:
    n: int = 100
    p: int = 60
    k: int = 10
    noise_sd: float = math.sqrt(5.0)
    seed: int = 0
    count: int = 10

    def __post_init__(self):
        if self.n < 1 or self.p < 1:
            raise ValueError("n and p must be >= 1")
        if not 1 <= self.k <= self.p:
            raise ValueError("need 1 <= k <= p")
        if self.noise_sd < 0:
            raise ValueError("noise_sd must be >= 0")
        if self.count < 1:
            raise ValueError("count must be >= 1")


def noise_sd_from_convention(convention):
    """Map the printed noise spec to a standard deviation."""
    if convention == "variance":
        return math.sqrt(5.0)
    if convention == "sd":
        return 5.0
    raise ValueError(f"unknown noise convention {convention!r}")


@dataclass(frozen=True)
class BenchBudgets:
    """Per-instance work limits for gap_table.

    The default is a node budget (roughly ten seconds of search at
    p = 60) rather than a time budget so reports regenerate
    bit-identically; set bnb_secs for wall-clock control instead.
    """

    bnb_nodes: int | None = 4000
    bnb_secs: float | None = None
    gw_samples: int = 1000
    sdp_gap_tol: float = 1e-7


@dataclass(frozen=True)
class GapReport:
    cells: tuple
    records: tuple
    spec: SimSpec
    budgets: BenchBudgets


def generate_instance(spec, lam, mu, index, return_truth=False):
    """Simulated instance, deterministic in (spec.seed, index).

    The draw ignores (lam, mu), so instances with the same index are
    paired across penalty cells.
    """
    rng = np.random.default_rng(
        np.random.SeedSequence(entropy=spec.seed, spawn_key=(int(index),))
    )
    X = rng.standard_normal((spec.n, spec.p)) / np.sqrt(spec.n)
    mags = rng.uniform(0.5, 1.0, spec.k)
    signs = np.where(rng.integers(0, 2, spec.k) == 1, 1.0, -1.0)
    b_true = np.zeros(spec.p)
    b_true[:spec.k] = signs * mags
    eps = rng.normal(0.0, spec.noise_sd, spec.n) if spec.noise_sd > 0 \
        else np.zeros(spec.n)
    y = X @ b_true + eps
    inst = ProblemInstance(X=X, y=y, lam=lam, mu=mu)
    if return_truth:
        return inst, b_true
    return inst


def _sub_seed(seed, *key):
    ss = np.random.SeedSequence(entropy=int(seed),
                                spawn_key=tuple(int(k) for k in key))
    return int(ss.generate_state(1)[0])


def _gap_pct(tau_ub, tau):
    return 100.0 * (tau_ub - tau) / max(tau_ub, 1e-300)


def _gap_task(args):
    spec, lam, mu, cell_idx, index, budgets = args
    inst = generate_instance(spec, lam, mu, index)
    rec = {"cell": cell_idx, "index": index, "lam": lam, "mu": mu}
    try:
        problem = sdp.build_sdp(inst)
        primal, _, stats = sdp.solve_sdp(
            problem, sdp.SdpConfig(gap_tol=budgets.sdp_gap_tol)
        )
        pwg = perspective.solve_pr(inst, perspective.delta_pwg(inst),
                                   gram=problem.gram)
        cfg = exact.BnbConfig(max_nodes=budgets.bnb_nodes,
                              max_secs=budgets.bnb_secs)
        bnb, _ = exact.branch_and_bound_auto_m(inst, config=cfg)
        gw = rounding.gw_round(
            inst, primal, budgets.gw_samples,
            seed=_sub_seed(spec.seed, 7, cell_idx, index),
        )
        tau_ub = min(bnb.incumbent.objective, gw.nu)
        rec.update(
            ok=True,
            tau_sdp=primal.value, tau_pwg=pwg.value, tau_gw=gw.nu,
            tau_bnb_ub=bnb.incumbent.objective, bnb_lb=bnb.lower_bound,
            tau_ub=tau_ub, nodes=bnb.node_count,
            sdp_converged=stats.converged,
        )
    except Exception as exc:   # record the failure, keep the sweep going
        rec.update(ok=False, error=f"{type(exc).__name__}: {exc}")
    return rec


def _run_tasks(task_fn, tasks, workers):
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(task_fn, tasks))
    return [task_fn(t) for t in tasks]


def gap_table(spec, lambda_grid, mu_grid, budgets=None, workers=1):
    """Relative-gap sweep over the (lambda, mu) grid; returns GapReport."""
    if budgets is None:
        budgets = BenchBudgets()
    cells_def = [(li * len(mu_grid) + mi, lam, mu)
                 for li, lam in enumerate(lambda_grid)
                 for mi, mu in enumerate(mu_grid)]
    tasks = [(spec, lam, mu, ci, idx, budgets)
             for ci, lam, mu in cells_def
             for idx in range(spec.count)]
    records = _run_tasks(_gap_task, tasks, workers)

    cells = []
    for ci, lam, mu in cells_def:
        ok = [r for r in records
              if r["cell"] == ci and r.get("ok")]
        fails = spec.count - len(ok)
        if ok:
            cell = {
                "lam": lam,
                "mu": mu,
                "sdp_gap_pct": float(np.mean(
                    [_gap_pct(r["tau_ub"], r["tau_sdp"]) for r in ok])),
                "pwg_gap_pct": float(np.mean(
                    [_gap_pct(r["tau_ub"], r["tau_pwg"]) for r in ok])),
                "bnb_gap_pct": float(np.mean(
                    [_gap_pct(r["tau_ub"], r["bnb_lb"]) for r in ok])),
                "mean_nodes": float(np.mean([r["nodes"] for r in ok])),
                "instances": len(ok),
                "failures": fails,
            }
        else:
            cell = {"lam": lam, "mu": mu, "sdp_gap_pct": float("nan"),
                    "pwg_gap_pct": float("nan"), "bnb_gap_pct": float("nan"),
                    "mean_nodes": float("nan"), "instances": 0,
                    "failures": fails}
        cells.append(cell)
    return GapReport(cells=tuple(cells), records=tuple(records),
                     spec=spec, budgets=budgets)


def _rounding_task(args):
    spec, lam, mu, cell_idx, index, samples, gap_tol = args
    inst = generate_instance(spec, lam, mu, index)
    rec = {"cell": cell_idx, "index": index, "lam": lam, "mu": mu}
    try:
        best = exact.brute_force(inst)
        problem = sdp.build_sdp(inst)
        primal, _, _ = sdp.solve_sdp(problem, sdp.SdpConfig(gap_tol=gap_tol))
        gw = rounding.gw_round(
            inst, primal, samples,
            seed=_sub_seed(spec.seed, 11, cell_idx, index),
        )
        excess = 100.0 * (gw.nu - best.objective) / max(best.objective,
                                                        1e-300)
        rec.update(
            ok=True, tau_ub=best.objective, tau_gw=gw.nu,
            gw_gap_pct=max(0.0, excess),
            exact_match=bool(gw.nu <= best.objective * (1.0 + 1e-9)),
        )
    except Exception as exc:
        rec.update(ok=False, error=f"{type(exc).__name__}: {exc}")
    return rec


def rounding_quality_table(spec, lambda_grid, mu_grid, N, workers=1,
                           sdp_gap_tol=1e-7):
    """Rounding excess over exact optima; needs p <= 20 for brute force."""
    if spec.p > exact.MAX_BRUTE_P:
        raise exact.TooLargeError(
            "rounding_quality_table needs p <= 20 for the exact baseline"
        )
    cells_def = [(li * len(mu_grid) + mi, lam, mu)
                 for li, lam in enumerate(lambda_grid)
                 for mi, mu in enumerate(mu_grid)]
    tasks = [(spec, lam, mu, ci, idx, N, sdp_gap_tol)
             for ci, lam, mu in cells_def
             for idx in range(spec.count)]
    records = _run_tasks(_rounding_task, tasks, workers)
    cells = []
    for ci, lam, mu in cells_def:
        ok = [r for r in records if r["cell"] == ci and r.get("ok")]
        fails = spec.count - len(ok)
        if ok:
            cell = {
                "lam": lam, "mu": mu,
                "gw_gap_pct": float(np.mean([r["gw_gap_pct"] for r in ok])),
                "frac_exact": float(np.mean(
                    [1.0 if r["exact_match"] else 0.0 for r in ok])),
                "instances": len(ok),
                "failures": fails,
            }
        else:
            cell = {"lam": lam, "mu": mu, "gw_gap_pct": float("nan"),
                    "frac_exact": float("nan"), "instances": 0,
                    "failures": fails}
        cells.append(cell)
    return GapReport(cells=tuple(cells), records=tuple(records),
                     spec=spec, budgets=BenchBudgets(gw_samples=N))


def lambda_path(instance, grid_size=20, samples=200, seed=0,
                config=None):
    """Sweep a geometric lambda grid from 1e-3*lambda_max to lambda_max.

    Returns a tuple of dicts (lam, zeta_sdp, nu_gw, support); each solve
    warm-starts from its predecessor.  Returns () when lambda_max is 0
    (c = 0), where every lambda yields the zero model.
    """
    lmax = sdp.lambda_max(instance)
    if lmax <= 0.0:
        return ()
    gram = core.build_gram(instance)
    grid = np.geomspace(1e-3 * lmax, lmax, grid_size)
    warm = None
    out = []
    for j, lam in enumerate(grid):
        prob = sdp.SdpProblem(p=instance.p, lam=float(lam), gram=gram)
        primal, cert, _ = sdp.solve_sdp(prob, config, warm=warm)
        warm = (primal, cert)
        inst_l = ProblemInstance(X=instance.X, y=instance.y,
                                 lam=float(lam), mu=instance.mu)
        gw = rounding.gw_round(inst_l, primal, samples,
                               seed=_sub_seed(seed, 13, j))
        support = tuple(int(i) for i in np.flatnonzero(gw.z))
        out.append({"lam": float(lam), "zeta_sdp": primal.value,
                    "nu_gw": gw.nu, "support": support})
    return tuple(out)


# ---------------------------------------------------------------------------
# Emission

def _fmt10(x):
    return format(float(x), ".10g")


def write_gap_csv(report, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["lambda", "mu", "sdp_gap_pct", "pwg_gap_pct",
                    "bnb_gap_pct", "mean_nodes", "instances", "failures"])
        for cell in report.cells:
            w.writerow([
                _fmt10(cell["lam"]), _fmt10(cell["mu"]),
                _fmt10(cell["sdp_gap_pct"]), _fmt10(cell["pwg_gap_pct"]),
                _fmt10(cell["bnb_gap_pct"]), _fmt10(cell["mean_nodes"]),
                cell["instances"], cell["failures"],
            ])


def write_rounding_csv(report, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["lambda", "mu", "gw_gap_pct", "frac_exact",
                    "instances", "failures"])
        for cell in report.cells:
            w.writerow([
                _fmt10(cell["lam"]), _fmt10(cell["mu"]),
                _fmt10(cell["gw_gap_pct"]), _fmt10(cell["frac_exact"]),
                cell["instances"], cell["failures"],
            ])


def write_path_csv(entries, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["lambda", "zeta_sdp", "nu_gw", "support"])
        for e in entries:
            w.writerow([
                _fmt10(e["lam"]), _fmt10(e["zeta_sdp"]), _fmt10(e["nu_gw"]),
                ";".join(str(i) for i in e["support"]),
            ])


def write_manifest(path, spec, budgets, lambda_grid, mu_grid, extra=None):
    doc = {
        "spec": asdict(spec),
        "budgets": asdict(budgets),
        "lambda_grid": [float(v) for v in lambda_grid],
        "mu_grid": [float(v) for v in mu_grid],
        "versions": {
            "python": platform.python_version(),
            "numpy": np.__version__,
            "scipy": scipy.__version__,
        },
    }
    if extra:
        doc.update(extra)
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
