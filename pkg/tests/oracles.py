"""Independent brute-force oracles the tests freeze expected values from.

Everything here is deliberately naive (explicit loops, fsum, Fractions,
np.linalg.matrix_power) and shares no code path with the package.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction

import numpy as np


def u_stat_enum(values, m, fn) -> float:
    """U-statistic by direct enumeration of index combinations."""
    n = len(values)
    total = math.fsum(fn(*combo) for combo in itertools.combinations(values, m))
    return total / math.comb(n, m)


def naive_projection(table: np.ndarray, pi: np.ndarray, c: int) -> np.ndarray | float:
    """pi_{c,m}h by literal expansion of (delta - pi) x ... x pi^{(m-c)}.

    For every subset T of the first c argument slots, fix those arguments
    and integrate all the others against pi with explicit loops.
    """
    m = table.ndim
    s = table.shape[0]

    def integrated(fixed: dict[int, int]) -> float:
        free = [axis for axis in range(m) if axis not in fixed]
        total = 0.0
        for z in itertools.product(range(s), repeat=len(free)):
            idx = [0] * m
            weight = 1.0
            for axis, val in fixed.items():
                idx[axis] = val
            for axis, val in zip(free, z):
                idx[axis] = val
                weight *= pi[val]
            total += weight * table[tuple(idx)]
        return total

    if c == 0:
        return integrated({})
    out = np.zeros((s,) * c)
    for y in itertools.product(range(s), repeat=c):
        acc = 0.0
        for size in range(c + 1):
            for positions in itertools.combinations(range(c), size):
                fixed = {p: y[p] for p in positions}
                acc += (-1.0) ** (c - size) * integrated(fixed)
        out[y] = acc
    return out


def naive_joint_law(mu: np.ndarray, p: np.ndarray, ks) -> np.ndarray:
    """Joint law tensor by elementwise products of matrix powers."""
    ks = list(ks)
    s = p.shape[0]
    powers = [np.linalg.matrix_power(p, ks[0])] + [
        np.linalg.matrix_power(p, b - a) for a, b in zip(ks, ks[1:])
    ]
    out = np.zeros((s,) * len(ks))
    for y in itertools.product(range(s), repeat=len(ks)):
        total = 0.0
        for y0 in range(s):
            prob = mu[y0] * powers[0][y0, y[0]]
            for i in range(1, len(ks)):
                prob *= powers[i][y[i - 1], y[i]]
            total += prob
        out[y] = total
    return out


def geometric_partial_sums(varrho: float, m: int, n: int) -> np.ndarray:
    """All partial sums sum_{k=0}^{j} (k+1)^m varrho^k for j = 0..n."""
    k = np.arange(n + 1, dtype=float)
    return np.cumsum((k + 1.0) ** m * varrho**k)


def c_nm_squared_rational(n: int, m: int, rho_fracs) -> Fraction:
    """C_{n,m}^2 with exact rational arithmetic (rho given as Fractions)."""
    mix = sum(Fraction(k + 1) ** m * rho_fracs[k] for k in range(n + 1))
    return (
        Fraction(2) ** (m + 2)
        * Fraction(math.factorial(2 * m))
        * mix
        * Fraction(n) ** (2 * m)
        / Fraction(math.comb(n, m)) ** 2
    )


def dirac_pair_rho(p: np.ndarray, v: np.ndarray, k: int) -> float:
    """max over Dirac pairs of TV(P^k(x,.), P^k(x',.)) / (V(x) + V(x'))."""
    pk = np.linalg.matrix_power(p, k)
    s = p.shape[0]
    best = 0.0
    for x in range(s):
        for y in range(x + 1, s):
            best = max(best, float(np.abs(pk[x] - pk[y]).sum()) / (v[x] + v[y]))
    return best
