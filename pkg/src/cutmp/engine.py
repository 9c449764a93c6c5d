"""Round-synchronous message passing over directed edges.

The iteration, for a schedule supplying edge coefficients A and vertex
coefficients B:

    u[l+1, i->j] = (k-1)^{-1/2} sum_{v in N(i) minus j} A[l-1, v->i] u[l, v->i]
    u[l+1, i]    = k^{-1/2}     sum_{v in N(i)}         A[l-1, v->i] u[l, v->i]
    z[i]         = sqrt(delta) * sum_{l=1..L} B[l-1, i] u[l, i]

with A[-1] = 1 and u[0, i->j] = u[0, i] iid standard normal.  Schedules
keep a streaming per-entity state (a scalar per directed edge) instead of
full message histories; all schedule callbacks are vectorized over numpy
arrays of any shape so the same code drives graph runs, exact tree
sampling and population dynamics.
"""

from dataclasses import dataclass, field

import numpy as np

from . import rng


class Schedule:
    """Base class; subclasses define the nonlinearities.

    State arrays have the same shape as the entity arrays they summarize.
    ``coeff(state, l)`` returns the round-l edge coefficient A^l computed
    from the state after absorbing u^l; ``vertex_coeff`` the analogous
    B^l.  ``step(state, l, u_new)`` absorbs the round-l message u^l
    (l >= 1).
    """

    delta = 1.0
    L = 1
    K = 1.0                   # declared bound on |A|, |B|
    exact_normalization = False
    descriptor = "schedule"

    def init_state(self, u0):
        return None

    def step(self, state, ell, u_new):
        return state

    def coeff(self, state, ell):
        raise NotImplementedError

    def vertex_coeff(self, state, ell):
        raise NotImplementedError


@dataclass
class RunResult:
    z: np.ndarray
    u_vertex: np.ndarray          # u^L per vertex
    seed: int
    descriptor: str
    var_u1: float                 # empirical Var of the first-round messages


def run(g, sched, seed, center=True):
    """Run L rounds on a graph; bit-reproducible given (g, sched, seed).

    With center=True (default) the empirical mean of the message vector
    is subtracted after every round.  The all-ones vector is a Perron
    eigenvector of the non-backtracking update with eigenvalue k-1, so
    the O(n^{-1/2}) sample mean of u^0 would otherwise grow by a factor
    ~ E[A] sqrt(k-1) per round and dominate unless n >> (k-1)^L.  The
    uniform mode carries no information (the idealized tree process has
    mean zero), so removing it changes each message by o(1) in the
    regime the algorithm targets.
    """
    n, k = g.n, g.k
    if k < 3:
        raise ValueError("message passing requires k >= 3")
    if sched.L < 1:
        raise ValueError("need L >= 1")
    gen = rng.stream(seed, rng.TAG_U0)
    u0 = gen.standard_normal(n)

    u_e = np.repeat(u0, k)            # u^0 shared across the k out-edges
    u_v = u0.copy()
    st_e = sched.init_state(u_e)
    st_v = sched.init_state(u_v)
    A_lag = np.ones(n * k)            # A^{-1}
    A_cur = np.broadcast_to(np.asarray(sched.coeff(st_e, 0), dtype=float),
                            (n * k,)).copy()
    B_cur = np.broadcast_to(np.asarray(sched.vertex_coeff(st_v, 0), dtype=float),
                            (n,)).copy()
    z = np.zeros(n)
    sqk1 = np.sqrt(k - 1.0)
    sqk = np.sqrt(float(k))
    var_u1 = 0.0
    for ell in range(1, sched.L + 1):
        w = A_lag * u_e
        inc = w[g.rev].reshape(n, k)  # incoming weighted messages per vertex slot
        s = inc.sum(axis=1)
        u_e = ((s[:, None] - inc) / sqk1).ravel()
        u_v = s / sqk
        if center:
            u_e -= u_e.mean()
            u_v -= u_v.mean()
        if ell == 1:
            var_u1 = float(u_e.var())
        z += B_cur * u_v              # B_cur is B^{ell-1} here
        st_e = sched.step(st_e, ell, u_e)
        st_v = sched.step(st_v, ell, u_v)
        A_lag = A_cur
        A_cur = np.broadcast_to(np.asarray(sched.coeff(st_e, ell), dtype=float),
                                (n * k,)).copy()
        B_cur = np.broadcast_to(np.asarray(sched.vertex_coeff(st_v, ell), dtype=float),
                                (n,)).copy()
    z *= np.sqrt(sched.delta)
    return RunResult(z=z, u_vertex=u_v, seed=seed, descriptor=sched.descriptor,
                     var_u1=var_u1)


# --------------------------------------------------------------------------
# Exact sampling on the infinite k-regular tree.

TREE_BUDGET = 50_000_000  # max array elements materialized per chunk


def _edge_histories(sched, k, m, shape, gen):
    """Sample message histories u^{0..m} for edges with the given array shape,
    jointly with the lagged coefficients (index t holds A^{t-1}, A^{-1} = 1).

    Children are materialized recursively: the cost is of order (k-1)^m
    per history.
    """
    u = np.empty((m + 1,) + shape)
    u[0] = gen.standard_normal(shape)
    if m > 0:
        cu, cA = _edge_histories(sched, k, m - 1, shape + (k - 1,), gen)
        for t in range(m):
            u[t + 1] = (cA[t] * cu[t]).sum(axis=-1) / np.sqrt(k - 1.0)
    A = np.empty((m + 1,) + shape)
    A[0] = 1.0
    state = sched.init_state(u[0])
    for t in range(1, m + 1):
        A[t] = sched.coeff(state, t - 1)
        state = sched.step(state, t, u[t])
    return u, A


@dataclass
class TreeEdgeSample:
    """Joint samples of everything attached to one edge (o, v) of the tree."""
    z_o: np.ndarray
    z_v: np.ndarray
    u_o: np.ndarray    # (L+1, reps) vertex message histories
    u_v: np.ndarray
    B_o: np.ndarray    # (L, reps), B_o[l] = B^l
    B_v: np.ndarray
    u_vo: np.ndarray   # (L, reps) message history v->o, rounds 0..L-1
    u_ov: np.ndarray
    A_vo: np.ndarray   # (L, reps), A_vo[t] = A^{t-1} on v->o
    A_ov: np.ndarray


def _vertex_side(sched, k, L, cu, cA, u0, u_in, A_in):
    """Histories seen from one endpoint: its outgoing message and its
    vertex sequence, given the k-1 child histories and the message
    arriving over the root edge."""
    reps = u0.shape[0]
    sums = np.empty((L, reps))
    for t in range(L):
        sums[t] = (cA[t] * cu[t]).sum(axis=-1)
    # outgoing message history (rounds 0..L-1)
    u_out = np.empty((L, reps))
    u_out[0] = u0
    for t in range(L - 1):
        u_out[t + 1] = sums[t] / np.sqrt(k - 1.0)
    A_out = np.empty((L, reps))
    A_out[0] = 1.0
    st = sched.init_state(u_out[0])
    for t in range(1, L):
        A_out[t] = sched.coeff(st, t - 1)
        st = sched.step(st, t, u_out[t])
    # vertex history (rounds 0..L) and B coefficients (rounds 0..L-1)
    u_vert = np.empty((L + 1, reps))
    u_vert[0] = u0
    for t in range(L):
        u_vert[t + 1] = (sums[t] + A_in[t] * u_in[t]) / np.sqrt(float(k))
    B = np.empty((L, reps))
    st = sched.init_state(u_vert[0])
    B[0] = sched.vertex_coeff(st, 0)
    for t in range(1, L):
        st = sched.step(st, t, u_vert[t])
        B[t] = sched.vertex_coeff(st, t)
    return u_out, A_out, u_vert, B


def sample_tree_edge(k, sched, reps, seed):
    """Exact joint samples of (z_o, z_v) and intermediate quantities for a
    fixed edge of the infinite k-regular tree.  Memory-bounded by chunking."""
    if reps < 1:
        raise ValueError("need reps >= 1")
    L = sched.L
    per_rep = (L + 1) * 2 * max(1, (k - 1) ** max(0, L - 1)) * (k - 1)
    if per_rep > TREE_BUDGET:
        raise MemoryError(
            f"tree neighborhood needs ~{per_rep:.2e} elements per replicate; "
            "reduce k or L")
    chunk = max(1, min(reps, TREE_BUDGET // per_rep))
    parts = []
    for c0 in range(0, reps, chunk):
        c = min(chunk, reps - c0)
        gen = rng.stream(seed, rng.TAG_TREE_MC, sub=c0)
        u0_o = gen.standard_normal(c)
        u0_v = gen.standard_normal(c)
        cu_o, cA_o = _edge_histories(sched, k, L - 1, (c, k - 1), gen)
        cu_v, cA_v = _edge_histories(sched, k, L - 1, (c, k - 1), gen)
        # first pass: both outgoing messages need only the child sums
        u_ov, A_ov, _, _ = _vertex_side(sched, k, L, cu_o, cA_o, u0_o,
                                        np.zeros((L, c)), np.zeros((L, c)))
        u_vo, A_vo, _, _ = _vertex_side(sched, k, L, cu_v, cA_v, u0_v,
                                        np.zeros((L, c)), np.zeros((L, c)))
        # second pass: vertex histories including the root-edge message
        _, _, uo, B_o = _vertex_side(sched, k, L, cu_o, cA_o, u0_o, u_vo, A_vo)
        _, _, uv, B_v = _vertex_side(sched, k, L, cu_v, cA_v, u0_v, u_ov, A_ov)
        sd = np.sqrt(sched.delta)
        z_o = sd * sum(B_o[l - 1] * uo[l] for l in range(1, L + 1))
        z_v = sd * sum(B_v[l - 1] * uv[l] for l in range(1, L + 1))
        parts.append(TreeEdgeSample(z_o, z_v, uo, uv, B_o, B_v,
                                    u_vo, u_ov, A_vo, A_ov))
    if len(parts) == 1:
        return parts[0]
    return TreeEdgeSample(*[np.concatenate([getattr(p, f) for p in parts], axis=-1)
                            for f in ("z_o", "z_v", "u_o", "u_v", "B_o", "B_v",
                                      "u_vo", "u_ov", "A_vo", "A_ov")])


def tree_monte_carlo(k, sched, reps, seed):
    """Estimate E{z_o z_v} over an edge of the tree; returns (mean, se)."""
    if reps < 100:
        raise ValueError("need reps >= 100")
    s = sample_tree_edge(k, sched, reps, seed)
    prod = s.z_o * s.z_v
    return float(prod.mean()), float(prod.std(ddof=1) / np.sqrt(reps))


def prop26_rhs(k, sched, reps, seed):
    """Term-by-term Monte Carlo of the two-sum edge-correlation formula.

    Returns (total, se, term1, term2): term1 is the lagged-product sum
    scaled by 2 sqrt(k-1)/k, term2 the same-round correction built from
    the per-vertex round-to-round increments of B (with B before round 0
    taken as 0); for constant-coefficient schedules the increment factors
    are deterministic and term2 averages to zero because same-round
    vertex values across an edge are uncorrelated.
    """
    if reps < 100:
        raise ValueError("need reps >= 100")
    s = sample_tree_edge(k, sched, reps, seed)
    L = sched.L
    d = sched.delta
    per_rep = np.zeros_like(s.z_o)
    t1 = np.zeros_like(s.z_o)
    for l in range(2, L + 1):
        t1 += s.A_vo[l - 1] * s.u_vo[l - 1] ** 2 * s.B_o[l - 1] * s.B_v[l - 2]
    t1 *= 2 * np.sqrt(k - 1.0) / k * d
    t2 = np.zeros_like(s.z_o)
    for l in range(1, L + 1):
        dB_o = s.B_o[l - 1] - (s.B_o[l - 2] if l >= 2 else 0.0)
        dB_v = s.B_v[l - 1] - (s.B_v[l - 2] if l >= 2 else 0.0)
        t2 += s.u_o[l] * s.u_v[l] * dB_o * dB_v
    t2 *= d
    per_rep = t1 + t2
    return (float(per_rep.mean()), float(per_rep.std(ddof=1) / np.sqrt(reps)),
            float(t1.mean()), float(t2.mean()))


# --------------------------------------------------------------------------
# Population dynamics: message-history law at degrees where the exact
# (k-1)^L tree is out of reach.

def sample_message_population(k, sched, rounds, n_samples, seed,
                              xi_hook=None, chunk=2_000_000, pop_size=None):
    """Approximate i.i.d. samples of the message history (u^0, ..., u^rounds).

    Each generation recombines k-1 histories resampled from the previous
    population, which is exact on the tree up to the finite-population
    reuse bias.  Two corrections keep that bias harmless: the internal
    population is sized to at least 25k members (each parent consumes
    k-1 of them), and every recombined round is recentered, since the
    population mean is a shared component that the sum over k-1 children
    would otherwise amplify by sqrt(k-1) per generation exactly like the
    uniform mode on a finite graph.

    Returns (u, state) where u has shape (rounds+1, n_samples) and state
    is the schedule state after absorbing u^rounds (sized to the full
    internal population).

    ``xi_hook(ell, state)`` is called right before coefficients for round
    ell are first needed, so self-normalizing schedules can calibrate
    themselves from the population on the fly.
    """
    gen = rng.stream(seed, rng.TAG_POPULATION)
    n = max(n_samples, 25 * k) if pop_size is None else max(n_samples, pop_size)
    u = np.empty((rounds + 1, n))
    u[0] = gen.standard_normal(n)
    state = sched.init_state(u[0])
    if xi_hook is not None:
        xi_hook(0, state)
    A = [np.ones(n), np.broadcast_to(np.asarray(sched.coeff(state, 0), float),
                                     (n,)).copy()]  # A[t] = A^{t-1}
    block = max(1, chunk // max(1, k - 1))
    for t in range(rounds):
        unew = np.empty((t + 2, n))
        unew[0] = gen.standard_normal(n)
        for b0 in range(0, n, block):
            b1 = min(n, b0 + block)
            idx = gen.integers(0, n, size=(b1 - b0, k - 1))
            for s in range(t + 1):
                unew[s + 1, b0:b1] = (A[s][idx] * u[s][idx]).sum(axis=1)
        unew[1:] /= np.sqrt(k - 1.0)
        unew[1:] -= unew[1:].mean(axis=1, keepdims=True)
        u = unew
        # rebuild state and coefficient history along the new histories
        state = sched.init_state(u[0])
        A = [np.ones(n)]
        for s in range(t + 2):
            if xi_hook is not None:
                xi_hook(s, state)
            A.append(np.broadcast_to(np.asarray(sched.coeff(state, s), float),
                                     (n,)).copy())
            if s + 1 <= t + 1:
                state = sched.step(state, s + 1, u[s + 1])
    return u[:, :n_samples], state


def ks_distance(sample):
    """Kolmogorov-Smirnov distance of a sample to the standard normal."""
    from scipy.stats import norm
    x = np.sort(np.asarray(sample))
    n = x.size
    cdf = norm.cdf(x)
    lo = np.abs(cdf - np.arange(n) / n).max()
    hi = np.abs(cdf - np.arange(1, n + 1) / n).max()
    return float(max(lo, hi))


@dataclass
class CltReport:
    ks: np.ndarray                 # per-round KS distance to N(0,1)
    cov: np.ndarray                # sample covariance of (u^0..u^L)
    cov_se: float                  # scale of covariance noise, 1/sqrt(samples)
    tau_sq_var: np.ndarray         # Var of sum A^2/(k-1) per round


def clt_diagnostics(k, sched, samples, seed, pop_size=None):
    """Normality diagnostics for the message vector at large degree.

    The internal population defaults to 100k members: shared ancestry
    between population members inflates the covariance estimator beyond
    the i.i.d. 1/sqrt(samples) scale, so the population is kept large
    enough that the residual correlation sits inside that band.
    """
    L = sched.L
    gen = rng.stream(seed, rng.TAG_POPULATION, sub=1)
    if pop_size is None:
        pop_size = 100 * k
    u, _ = sample_message_population(k, sched, L, samples, seed,
                                     pop_size=pop_size)
    ks = np.array([ks_distance(u[l]) for l in range(L + 1)])
    cov = np.cov(u)
    # tau^2 proxy: variance of (1/(k-1)) sum A^2 over fresh recombinations
    tau_var = np.empty(L + 1)
    state = sched.init_state(u[0])
    for l in range(L + 1):
        a = np.broadcast_to(np.asarray(sched.coeff(state, l), float),
                            (samples,))
        idx = gen.integers(0, samples, size=(min(samples, 4000), k - 1))
        tau_var[l] = float((a[idx] ** 2).mean(axis=1).var())
        if l + 1 <= L:
            state = sched.step(state, l + 1, u[l + 1])
    return CltReport(ks=ks, cov=cov, cov_se=1.0 / np.sqrt(samples),
                     tau_sq_var=tau_var)
