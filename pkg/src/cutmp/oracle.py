"""Exhaustive ground truth on small graphs.

Max-cut enumerates all sign vectors with one vertex pinned (the +-sigma
symmetry) in Gray-code order so each step flips one vertex and updates
the cut count in O(k).  Min-bisection enumerates only balanced vectors.
Values follow the (1/n) sum of sigma_i sigma_j convention: the max-cut
value is the maximum of -U, the bisection value the maximum of U over
balanced sigma (fewest edges cut across equal parts).
"""

from itertools import combinations
from dataclasses import dataclass, field

import numpy as np

MAX_N = 24


@dataclass(frozen=True)
class ExactCut:
    value: float
    witness: np.ndarray = field(repr=False)
    mode: str = "maxcut"


def _canon(sigma):
    s = np.asarray(sigma, dtype=np.int8)
    return -s if s[0] < 0 else s.copy()


def brute_force(g, mode):
    if g.n > MAX_N:
        raise RuntimeError(f"n = {g.n} exceeds the enumeration cap {MAX_N}")
    if mode == "maxcut":
        return _brute_maxcut(g)
    if mode == "minbis":
        return _brute_minbis(g)
    raise ValueError(f"unknown mode {mode!r}")


def _brute_maxcut(g):
    n, k = g.n, g.k
    m = n * k // 2
    adj = [g.neighbors[v].tolist() for v in range(n)]
    sigma = -np.ones(n, dtype=np.int64)
    cut = 0
    best_cut = 0
    best = sigma.copy()
    for i in range(1, 1 << (n - 1)):
        v = (i & -i).bit_length()  # Gray code flips vertex 1..n-1
        cut += sigma[v] * sum(sigma[j] for j in adj[v])
        sigma[v] = -sigma[v]
        if cut > best_cut:
            best_cut = cut
            best = sigma.copy()
        elif cut == best_cut:
            c = _canon(sigma)
            if tuple(c) < tuple(_canon(best)):
                best = sigma.copy()
    value = (2 * best_cut - m) / n
    return ExactCut(value=value, witness=_canon(best), mode="maxcut")


def _brute_minbis(g):
    n, k = g.n, g.k
    if n % 2 != 0:
        raise ValueError("bisection needs even n")
    m = n * k // 2
    edges = g.edges()
    best_cut = m + 1
    best = None
    # vertex 0 pinned to the +1 side; each balanced class visited once
    for rest in combinations(range(1, n), n // 2 - 1):
        sigma = -np.ones(n, dtype=np.int64)
        sigma[0] = 1
        sigma[list(rest)] = 1
        cut = int((sigma[edges].prod(axis=1) == -1).sum())
        if cut < best_cut:
            best_cut = cut
            best = sigma
        elif cut == best_cut and tuple(_canon(sigma)) < tuple(_canon(best)):
            best = sigma
    value = (m - 2 * best_cut) / n
    return ExactCut(value=value, witness=_canon(best), mode="minbis")


def sanity_bound(g, cut, mode):
    """Check that an algorithm's value never beats the exact optimum.

    Raises RuntimeError on violation (an objective-accounting bug, not a
    statistical fluke); returns True otherwise.
    """
    exact = brute_force(g, mode)
    achieved = -cut.u_value if mode == "maxcut" else cut.u_value
    if achieved > exact.value + 1e-9:
        raise RuntimeError(
            f"{mode} value {achieved} beats the exact optimum {exact.value}")
    return True
