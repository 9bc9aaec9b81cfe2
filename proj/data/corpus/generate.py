"""Regenerates the cross-validation mini-corpus in this directory."""

import csv
from pathlib import Path

import numpy as np

HERE = Path(__file__).parent


def write(name, header, rows):
    with open(HERE / name, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def moderate_and_sparse():
    rng = np.random.default_rng(20081201)
    # draws of an earlier separable table; kept so the stream stays aligned
    n = 40
    rng.normal(size=n)
    rng.integers(0, 2, n)
    rng.choice(["a", "b", "c"], n)

    n = 150
    a = rng.normal(50, 10, n)
    b = rng.gamma(2, 3, n)
    c = rng.choice(["north", "south", "east", "west"], n, p=[0.4, 0.3, 0.2, 0.1])
    d = rng.integers(0, 2, n)
    eta = (-0.5 + 0.08 * (a - 50) - 0.15 * (b - 6)
           + np.select([c == "south", c == "east", c == "west"], [0.7, -0.4, 1.0], 0) + 0.6 * d)
    y = (rng.random(n) < 1 / (1 + np.exp(-eta))).astype(int)
    rows = []
    for i in range(n):
        ra = f"{a[i]:.1f}" if rng.random() > 0.08 else "NA"
        rb = f"{b[i]:.2f}" if rng.random() > 0.05 else ""
        rows.append([ra, rb, c[i], d[i], y[i]])
    write("moderate.csv", ["age", "load", "region", "flag", "y"], rows)

    n = 60
    X = (rng.random((n, 8)) < np.array([0.5, 0.3, 0.2, 0.1, 0.1, 0.05, 0.4, 0.15])).astype(int)
    eta = 0.2 + 2.5 * X[:, 0] - 3 * X[:, 3] + 4 * X[:, 5] - 1.0 * X[:, 1] + 0.8 * X[:, 6]
    y = (rng.random(n) < 1 / (1 + np.exp(-eta))).astype(int)
    write("sparse.csv", [f"f{j + 1}" for j in range(8)] + ["y"], [list(r) + [t] for r, t in zip(X, y)])


def separable():
    rng = np.random.default_rng(1964)
    n = 40
    x1, x2, x3 = rng.normal(size=n), rng.normal(size=n), rng.normal(size=n)
    x4 = rng.integers(0, 2, n)
    g = rng.choice(["a", "b", "c"], n)
    y = ((x1 + 0.5 * x2) > 0).astype(int)
    write("separable.csv", ["x1", "x2", "x3", "x4", "g", "y"],
          [[f"{r[0]:.3f}", f"{r[1]:.3f}", f"{r[2]:.3f}", r[3], r[4], r[5]] for r in zip(x1, x2, x3, x4, g, y)])


if __name__ == "__main__":
    moderate_and_sparse()
    separable()
