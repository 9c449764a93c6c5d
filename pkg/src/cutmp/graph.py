"""k-regular graphs: construction, validation, serialization, diagnostics.

A graph is stored as a flat neighbor table plus a directed-edge reverse
map.  Directed edge ids are packed as ``i * k + slot`` where ``slot``
indexes the k out-edges of vertex ``i``; ``rev[e]`` is the id of the
opposite directed edge, so the message-passing engine can find incoming
messages with a single gather.
"""

from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np

from . import rng

MAX_RESTARTS = 10_000


class GraphFormatError(ValueError):
    pass


class GenerationError(RuntimeError):
    pass


@dataclass(frozen=True)
class TreelikeReport:
    ell: int
    tree_fraction: float
    epsilon: float
    girth: int  # n + 1 means no cycle found


@dataclass(frozen=True)
class RegularGraph:
    n: int
    k: int
    neighbors: np.ndarray = field(repr=False)  # (n, k) int64
    rev: np.ndarray = field(repr=False)        # (n*k,) int64

    def __post_init__(self):
        nb = self.neighbors
        if nb.shape != (self.n, self.k):
            raise GraphFormatError("neighbor table has wrong shape")
        if (self.n * self.k) % 2 != 0:
            raise GraphFormatError("n*k must be even")
        src = np.repeat(np.arange(self.n), self.k)
        if np.any(nb.ravel() == src):
            raise GraphFormatError("self-loop in neighbor table")
        if np.any(np.sort(nb, axis=1)[:, 1:] == np.sort(nb, axis=1)[:, :-1]):
            raise GraphFormatError("duplicate neighbor (multi-edge)")
        heads = self.heads()
        if np.any(self.rev < 0) or np.any(self.rev >= self.n * self.k):
            raise GraphFormatError("rev out of range")
        if np.any(self.rev[self.rev] != np.arange(self.n * self.k)):
            raise GraphFormatError("rev is not an involution")
        if np.any(heads[self.rev] != src):
            raise GraphFormatError("rev does not reverse edges")

    def heads(self):
        """Head vertex of each directed edge id."""
        return self.neighbors.ravel()

    def edges(self):
        """Undirected edges as an (m, 2) array with i < j, sorted."""
        src = np.repeat(np.arange(self.n), self.k)
        dst = self.heads()
        mask = src < dst
        e = np.stack([src[mask], dst[mask]], axis=1)
        order = np.lexsort((e[:, 1], e[:, 0]))
        return e[order]

    def equals(self, other):
        """Equality up to slot order of the neighbor table."""
        return (self.n == other.n and self.k == other.k
                and np.array_equal(np.sort(self.neighbors, axis=1),
                                   np.sort(other.neighbors, axis=1)))


def from_edge_set(n, k, edges):
    """Build a RegularGraph from an iterable of undirected (i, j) pairs."""
    adj = [[] for _ in range(n)]
    seen = set()
    for i, j in edges:
        if i == j:
            raise GraphFormatError(f"self-loop at vertex {i}")
        key = (min(i, j), max(i, j))
        if key in seen:
            raise GraphFormatError(f"duplicate edge {key}")
        seen.add(key)
        adj[i].append(j)
        adj[j].append(i)
    for i, a in enumerate(adj):
        if len(a) != k:
            raise GraphFormatError(f"vertex {i} has degree {len(a)}, expected {k}")
    neighbors = np.array(adj, dtype=np.int64)
    # slot of i in j's row, matched pairwise for parallel-free graphs
    rev = np.empty(n * k, dtype=np.int64)
    slot_of = {}
    for i in range(n):
        for s in range(k):
            slot_of[(i, neighbors[i, s])] = s
    for i in range(n):
        for s in range(k):
            j = neighbors[i, s]
            rev[i * k + s] = j * k + slot_of[(j, i)]
    return RegularGraph(n=n, k=k, neighbors=neighbors, rev=rev)


def generate_random_regular(n, k, seed):
    """Sample a simple k-regular graph via the configuration model.

    Stub pairing with retry of the clashing stubs within an attempt
    (the standard repair used for large k, where the probability that a
    one-shot uniform matching is simple vanishes); a full restart only
    when an attempt gets stuck.  Deterministic given the seed.
    """
    if (n * k) % 2 != 0:
        raise ValueError("n*k must be even")
    if not 3 <= k < n:
        raise ValueError("need 3 <= k < n")
    gen = rng.stream(seed, rng.TAG_GRAPH)

    def suitable(edges, potential):
        if not potential:
            return True
        nodes = list(potential)
        for a in range(len(nodes)):
            for b in range(a + 1, len(nodes)):
                s1, s2 = min(nodes[a], nodes[b]), max(nodes[a], nodes[b])
                if (s1, s2) not in edges:
                    return True
        return False

    for _ in range(MAX_RESTARTS):
        edges = set()
        stubs = np.repeat(np.arange(n), k)
        while stubs.size:
            gen.shuffle(stubs)
            potential = defaultdict(int)
            for s1, s2 in zip(stubs[0::2].tolist(), stubs[1::2].tolist()):
                if s1 > s2:
                    s1, s2 = s2, s1
                if s1 != s2 and (s1, s2) not in edges:
                    edges.add((s1, s2))
                else:
                    potential[s1] += 1
                    potential[s2] += 1
            if not suitable(edges, potential):
                break  # stuck, restart from scratch
            stubs = np.array([v for v, c in potential.items() for _ in range(c)],
                             dtype=np.int64)
        else:
            return from_edge_set(n, k, edges)
    raise GenerationError(f"no simple graph after {MAX_RESTARTS} restarts")


def store_graph(g, path):
    """Write the edge-list text format: header "n k", one "i j" per edge."""
    with open(path, "w") as f:
        f.write(f"{g.n} {g.k}\n")
        for i, j in g.edges():
            f.write(f"{i} {j}\n")


def load_graph(path):
    """Read the edge-list format, re-validating regularity."""
    with open(path) as f:
        lines = f.readlines()
    if not lines:
        raise GraphFormatError("empty file")
    try:
        n, k = map(int, lines[0].split())
    except ValueError:
        raise GraphFormatError("line 1: bad header, expected 'n k'") from None
    edges = []
    for ln, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        try:
            i, j = map(int, line.split())
        except ValueError:
            raise GraphFormatError(f"line {ln}: expected 'i j'") from None
        if not (0 <= i < n and 0 <= j < n):
            raise GraphFormatError(f"line {ln}: vertex id out of range")
        edges.append((i, j))
    try:
        return from_edge_set(n, k, edges)
    except GraphFormatError as e:
        raise GraphFormatError(str(e)) from None


def _root_cycle_scan(g, root, radius, lev):
    """Level-synchronous BFS from root up to the given radius.

    Returns the length of the shortest cycle certificate found among
    vertices within the radius, or 0 if the ball induces a tree.  `lev`
    is a reusable int array filled with -1; it is restored before return.
    """
    nb = g.neighbors
    touched = [root]
    lev[root] = 0
    frontier = np.array([root])
    best = 0
    for d in range(1, radius + 1):
        nbs = nb[frontier]                       # (|F|, k)
        l = lev[nbs]
        # two or more parents at level d-2 -> cycle of length 2(d-1)
        if d >= 2:
            par = (l == d - 2).sum(axis=1)
            if np.any(par > 1):
                best = 2 * (d - 1)
                break
        # edge inside the current frontier -> odd cycle 2(d-1)+1
        if np.any(l == d - 1):
            best = 2 * (d - 1) + 1
            break
        new = np.unique(nbs[l == -1])
        lev[new] = d
        touched.extend(new.tolist())
        frontier = new
        if frontier.size == 0:
            break
    else:
        # check the last shell: multi-parents and intra-shell edges
        if frontier.size:
            nbs = nb[frontier]
            l = lev[nbs]
            if radius >= 1 and np.any((l == radius - 1).sum(axis=1) > 1):
                best = 2 * radius
            elif np.any(l == radius):
                best = 2 * radius + 1
    lev[np.array(touched)] = -1
    return best


def treelike_report(g, ell):
    """Fraction of vertices whose radius-(ell+1) ball induces a tree,
    plus the exact girth of the graph."""
    if ell < 0:
        raise ValueError("ell must be >= 0")
    lev = np.full(g.n, -1, dtype=np.int64)
    tree = 0
    for v in range(g.n):
        if _root_cycle_scan(g, v, ell + 1, lev) == 0:
            tree += 1
    frac = tree / g.n
    return TreelikeReport(ell=ell, tree_fraction=frac, epsilon=1.0 - frac,
                          girth=girth(g))


def girth(g):
    """Exact girth by truncated BFS from every vertex; n+1 if acyclic."""
    best = g.n + 1
    lev = np.full(g.n, -1, dtype=np.int64)
    for v in range(g.n):
        if best == 3:
            break
        radius = (best - 1) // 2 + 1
        c = _root_cycle_scan(g, v, radius, lev)
        if c and c < best:
            best = c
    return best
