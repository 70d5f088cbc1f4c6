"""Independent reference implementations used as test oracles.

They share no code with the package: plain Python, exact rational arithmetic
where ties matter, and textbook formulas.
"""
from fractions import Fraction

import numpy as np


def normal_equations(X, y):
    """OLS with intercept through (A^T A) w = A^T y, solved by Cholesky."""
    A = np.column_stack([X, np.ones(len(X))])
    L = np.linalg.cholesky(A.T @ A)
    z = np.linalg.solve(L, A.T @ y)
    w = np.linalg.solve(L.T, z)
    return w[:-1], w[-1]


def brute_force_tree(X, y):
    """Exhaustive least-squares regression tree grown until no split strictly
    reduces the squared error.

    Every distinct-value cut of every feature is tried at every node, with the
    reduction in SSE computed exactly over rationals. Among exact ties the
    lower feature, then the lower cut, wins. Returns the leaves as a list of
    sorted row-index tuples and a predict function for training rows.
    """
    X = np.asarray(X, dtype=float)
    yq = [Fraction(float(v)) for v in y]
    n, p = X.shape
    leaves = []

    def sse_gain(left, right):
        sl = sum(yq[i] for i in left)
        sr = sum(yq[i] for i in right)
        total = sl + sr
        return sl * sl / len(left) + sr * sr / len(right) - total * total / (len(left) + len(right))

    def grow(rows):
        best = None
        for f in range(p):
            values = sorted(set(X[rows, f].tolist()))
            for cut in values[:-1]:
                left = [i for i in rows if X[i, f] <= cut]
                right = [i for i in rows if X[i, f] > cut]
                gain = sse_gain(left, right)
                if gain > 0 and (best is None or gain > best[0]):
                    best = (gain, left, right)
        if best is None:
            leaves.append(tuple(sorted(rows)))
            return
        grow(best[1])
        grow(best[2])

    grow(list(range(n)))
    pred = np.empty(n)
    for leaf in leaves:
        pred[list(leaf)] = float(sum(yq[i] for i in leaf) / len(leaf))
    return sorted(leaves), pred


def median_of(values):
    v = sorted(values)
    m = len(v) // 2
    return v[m] if len(v) % 2 else (v[m - 1] + v[m]) / 2
