"""
Type-2 bound versus r
=====================

A small version of the type-2 sweep. The full grid is produced by
``pairing-witness figure-data``. Plots if matplotlib is installed.
"""

from pairing_witness.separability import boson_type2_bound
from pairing_witness.spectral import lambda_max

N = 6
rows = []
for r in range(2, 9):
    res = boson_type2_bound(r, N, restarts=8)
    rows.append((r, N * N // 4, res.value, lambda_max("boson", r, N)))
    print(f"r={r}: type1={rows[-1][1]} type2={res.value:.6f} lambda={rows[-1][3]}")

try:
    import matplotlib.pyplot as plt
except ImportError:
    plt = None

if plt is not None:
    r, t1, t2, lam = zip(*rows)
    plt.plot(r, t1, "k--", label="type 1")
    plt.plot(r, t2, "o-", label="type 2")
    plt.plot(r, lam, "s:", label="lambda")
    plt.xlabel("r")
    plt.legend()
    plt.savefig("type2_curves.png", dpi=120)
