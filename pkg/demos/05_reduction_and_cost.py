"""Endpoint power-law reduction and the compute-cost comparison.

First: sample random law-parameter tuples, predict final losses across
totals of 5K..60K steps for cosine and WSD schedules, and fit the endpoint
power law ``L0 + A * d**-alpha`` to those finals; the near-perfect R^2
shows the law's endpoints collapse onto a plain power law.  Second: compare
the training steps needed to collect 100 power-law fitting points per
schedule family against fitting the full-curve law from one run.

Run:  python demos/05_reduction_and_cost.py   (~15 s for n=100)
"""

from anneal_law.analysis import cost_table, reduction_experiment

print("== endpoint power-law reduction (100 sampled tuples) ==")
report = reduction_experiment(100, seed=42)
for family, stats in report.per_lrs.items():
    print(
        f"  {family:<7} mean R^2 {stats.mean_r2:.4f} "
        f"(std {stats.std_r2:.4f}), mean Huber {stats.mean_huber:.2e}"
    )

print("\n== compute cost to collect 100 endpoint fitting points ==")
print(f"  {'method':<12} {'schedule':<10} {'steps':>8} {'relative':>9}")
for row in cost_table(100, [0.2, 0.1]):
    print(
        f"  {row.method:<12} {row.lrs:<10} {row.total_steps_k:>7g}K "
        f"{row.percent:>8.1f}%"
    )
print("  one moderate run suffices to fit the full-curve law.")
