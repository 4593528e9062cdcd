"""A miniature run of both benchmark tables (seconds, not minutes).

The full desk-scale protocol (n=100, p=60, 10 instances per cell) lives
behind `python -m l0relax bench --preset paper-desk`; this script runs
the same machinery on a toy grid so the output shape is easy to read.
"""

import time

from l0relax import bench

spec = bench.SimSpec(n=40, p=12, k=4, noise_sd=0.5, seed=0, count=5)
budgets = bench.BenchBudgets(bnb_nodes=500, gw_samples=200)
grid = (0.1, 0.3)

t0 = time.perf_counter()
report = bench.gap_table(spec, grid, grid, budgets)
print(f"gap table ({time.perf_counter() - t0:.1f}s):")
print(f"{'lam':>5s} {'mu':>5s} {'SDPGap%':>9s} {'PWGGap%':>9s} "
      f"{'BnBGap%':>9s} {'nodes':>7s}")
for cell in report.cells:
    print(f"{cell['lam']:5.2f} {cell['mu']:5.2f} "
          f"{cell['sdp_gap_pct']:9.3f} {cell['pwg_gap_pct']:9.3f} "
          f"{cell['bnb_gap_pct']:9.3f} {cell['mean_nodes']:7.0f}")

# In every cell the semidefinite bound sits closer to the incumbent
# than the fixed delta = mu perspective bound.
assert all(c["sdp_gap_pct"] <= c["pwg_gap_pct"] for c in report.cells)

t0 = time.perf_counter()
quality = bench.rounding_quality_table(spec, grid, grid, N=300)
print(f"\nrounding quality vs exhaustive optima "
      f"({time.perf_counter() - t0:.1f}s):")
print(f"{'lam':>5s} {'mu':>5s} {'excess%':>9s} {'exact':>6s}")
for cell in quality.cells:
    print(f"{cell['lam']:5.2f} {cell['mu']:5.2f} "
          f"{cell['gw_gap_pct']:9.4f} {cell['frac_exact']:6.2f}")

print("\nsame tables, CSV form: python -m l0relax bench "
      "--n 40 --p 12 --k 4 --count 5 --lambda-grid 0.1,0.3 "
      "--mu-grid 0.1,0.3 --out /tmp/minibench")
