"""From real-valued outputs to feasible cuts.

The pipeline is clip -> randomized sign -> (optional) balance repair ->
exact objective evaluation.  The rounding noise is Uniform(-1, 1), the
unique choice for which sign(zhat - noise) has conditional mean exactly
zhat.  All edge accounting is integer until the final division.
"""

from dataclasses import dataclass, field

import numpy as np

from . import rng


@dataclass(frozen=True)
class CutResult:
    sigma: np.ndarray = field(repr=False)
    u_value: float
    edges_cut: int
    balance: int
    normalized: float
    provenance: dict = field(default_factory=dict)


def clip(z):
    return np.clip(np.asarray(z, dtype=float), -1.0, 1.0)


def randomized_round(zhat, seed):
    """sigma_i = sign(zhat_i - noise_i), noise ~ Uniform(-1,1); sign(0) = +1."""
    zhat = np.asarray(zhat, dtype=float)
    if np.any(np.abs(zhat) > 1.0):
        raise ValueError("zhat must lie in [-1, 1]; clip first")
    gen = rng.stream(seed, rng.TAG_ROUNDING)
    noise = gen.uniform(-1.0, 1.0, size=zhat.size)
    return np.where(zhat - noise >= 0, 1, -1).astype(np.int8)


def sign_round(z):
    """Deterministic sign(z) with sign(0) = +1; the wave baseline's rounding."""
    return np.where(np.asarray(z) >= 0, 1, -1).astype(np.int8)


def balance_repair(sigma, zhat):
    """Flip the excess/2 majority-sign vertices with smallest |zhat|.

    Ties break on vertex id.  Each flip touches at most k edges, so the
    objective moves by at most 2k/n per flip.
    """
    sigma = np.asarray(sigma)
    n = sigma.size
    if n % 2 != 0:
        raise ValueError("balance repair needs even n")
    excess = int(sigma.sum())
    if excess == 0:
        return sigma.copy()
    maj = 1 if excess > 0 else -1
    flips = abs(excess) // 2
    cand = np.flatnonzero(sigma == maj)
    order = np.lexsort((cand, np.abs(np.asarray(zhat))[cand]))
    out = sigma.copy()
    out[cand[order[:flips]]] = -maj
    return out


def evaluate(g, sigma, provenance=None):
    """Exact objective U(sigma) = (1/n) sum over edges of sigma_i sigma_j."""
    sigma = np.asarray(sigma)
    if sigma.size != g.n:
        raise ValueError(f"sigma has length {sigma.size}, graph has {g.n} vertices")
    s = sigma.astype(np.int64)
    agree = int((s[g.edges()].prod(axis=1) == 1).sum())
    m = g.n * g.k // 2
    cut = m - agree
    u = (agree - cut) / g.n
    return CutResult(sigma=sigma.copy(), u_value=u, edges_cut=cut,
                     balance=int(s.sum()),
                     normalized=u / np.sqrt(g.k - 1.0),
                     provenance=dict(provenance or {}))
