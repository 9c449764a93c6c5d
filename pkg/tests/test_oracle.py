import numpy as np
import pytest

from cutmp import graph, oracle, rounding


def c4():
    return graph.from_edge_set(4, 2, [(0, 1), (1, 2), (2, 3), (3, 0)])


def k4():
    return graph.from_edge_set(4, 3, [(0, 1), (0, 2), (0, 3),
                                      (1, 2), (1, 3), (2, 3)])


def test_cycle_maxcut():
    res = oracle.brute_force(c4(), "maxcut")
    assert res.value == 1.0
    assert np.array_equal(res.witness, [1, -1, 1, -1])


def test_cycle_minbis():
    res = oracle.brute_force(c4(), "minbis")
    assert res.value == 0.0
    assert int(res.witness.sum()) == 0


def test_k4_maxcut():
    assert oracle.brute_force(k4(), "maxcut").value == 0.5


def test_witness_achieves_value():
    for seed in range(5):
        g = graph.generate_random_regular(10, 3, seed=seed)
        for mode in ("maxcut", "minbis"):
            res = oracle.brute_force(g, mode)
            u = rounding.evaluate(g, res.witness).u_value
            achieved = -u if mode == "maxcut" else u
            assert achieved == res.value
            if mode == "minbis":
                assert int(res.witness.sum()) == 0


def test_relabeling_invariance():
    gen = np.random.default_rng(41)
    g = graph.generate_random_regular(10, 3, seed=41)
    perm = gen.permutation(g.n)
    edges = [(int(perm[i]), int(perm[j])) for i, j in g.edges()]
    h = graph.from_edge_set(g.n, g.k, edges)
    for mode in ("maxcut", "minbis"):
        assert oracle.brute_force(g, mode).value == \
            oracle.brute_force(h, mode).value


def test_size_guard_and_mode_check():
    g = graph.generate_random_regular(26, 3, seed=0)
    with pytest.raises(RuntimeError):
        oracle.brute_force(g, "maxcut")
    with pytest.raises(ValueError):
        oracle.brute_force(k4(), "mincut")


def test_sanity_bound():
    g = k4()
    exact = oracle.brute_force(g, "maxcut")
    cut = rounding.evaluate(g, exact.witness)
    assert oracle.sanity_bound(g, cut, "maxcut")  # equality at the witness
    fake = rounding.CutResult(sigma=exact.witness, u_value=-0.9, edges_cut=0,
                              balance=0, normalized=0.0)
    with pytest.raises(RuntimeError):
        oracle.sanity_bound(g, fake, "maxcut")
