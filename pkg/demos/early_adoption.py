"""The first few adoptions on complete and random cubic graphs.

While only C log n nodes have adopted, the explored part of a random cubic
graph is a tree, so after i adoptions exactly i + 2 edges leave the adopted
set.  The mean time of the m-th adoption is then an exact finite sum.  Each
simulated mean should sit within its 95% interval of it, apart from the
occasional one-in-twenty miss.

Run:  python demos/early_adoption.py
"""
from diffuse.experiments import early_adoption_study

for seed, family in enumerate(("complete", "regular"), start=5):
    print(f"\n{family} graph")
    print("      n    m   simulated +- CI      exact")
    for row in early_adoption_study((1_000, 10_000, 100_000), C=3, family=family, k=3,
                                    replicas=400, seed=seed):
        print(f" {row['n']:>7} {row['m']:4d}   {row['mean']:7.4f} +- {row['ci']:.4f}"
              f"   {row['predicted']:7.4f}")
