"""The graph-free exploration process and its fluid limit.

The exploration pairs one active clone at a time and never builds the graph.
After j pairings on a random k-regular graph the sleeping fraction N(j)/n
concentrates on (1 - 2j/(kn))^(k/2).  This script shows the deviation shrinking
as n grows, then couples the exploration to adoption times.

Run:  python demos/exploration_fluid_limit.py
"""
import numpy as np

from diffuse.analytic import f_sleep
from diffuse.exploration import coupled_run, explore, fluid_deviation
from diffuse.graphs import DegreeSpec

K = 5

for n in (1_000, 10_000, 100_000, 1_000_000):
    devs = [fluid_deviation(n, K, seed, eps0=0.3) for seed in range(5)]
    print(f"n={n:>9,}  median sup |N/n - f| = {np.median(devs):.5f}")

n = 100_000
h = explore(n, DegreeSpec.regular(K), seed=3)
print(f"\none run with n={n}: {h.j[-1]} pairings")
for x in (0.0, 0.5, 1.0, 1.5, 2.0, 2.4):
    j = int(x * n)
    if j <= h.j[-1]:
        print(f"  j/n={x:.1f}   N/n={h.N[j] / n:.5f}   limit={f_sleep(x, K):.5f}")

trace = coupled_run(n, K, seed=3)
print(f"\ncoupled adoption run: delta(n/4, 3n/4) = {trace.delta(0.25, 0.75):.4f}")
