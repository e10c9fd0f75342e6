from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from oracles import random_digraph

from hoopsnet.embedding import (DeadEndError, TrainConfig, WalkConfig, concat_features,
                                cosine_similarity, generate_walks, initial_vectors,
                                read_embeddings, skipgram_objective, train_skipgram,
                                transition_distribution, walk_matrix, write_embeddings)
from hoopsnet.graph import WeightedDigraph, from_edges


def two_cliques():
    edges = [(i, j, 1.0) for c in (0, 4) for i in range(c, c + 4) for j in range(c, c + 4) if i != j]
    return from_edges(list("abcdefgh"), edges)


def test_alpha_values():
    # t=0 -> v=1; v's neighbors: t (d=0), x=2 adjacent to t (d=1), y=3 not adjacent (d=2)
    g = from_edges(["t", "v", "x", "y"], [(0, 1, 1.0), (1, 0, 1.0), (1, 2, 1.0), (1, 3, 1.0), (0, 2, 1.0)])
    ids, probs = transition_distribution(g, 0, 1, p=2.0, q=0.5)
    assert list(ids) == [0, 2, 3]
    np.testing.assert_allclose(probs, np.array([0.5, 1.0, 2.0]) / 3.5)


def test_adjacency_counts_either_direction():
    # x -> t (not t -> x) still makes d_tx = 1
    g = from_edges(["t", "v", "x"], [(0, 1, 1.0), (1, 2, 1.0), (2, 0, 1.0)])
    _, probs = transition_distribution(g, 0, 1, p=3.0, q=7.0)
    np.testing.assert_allclose(probs, [1.0])
    ids, probs = transition_distribution(g, 0, 1, p=1, q=1)
    assert list(ids) == [2]


def test_uniform_when_p_q_one():
    g = from_edges(list("tvxyz"), [(0, 1, 1.0)] + [(1, k, 1.0) for k in (0, 2, 3, 4)])
    _, probs = transition_distribution(g, 0, 1)
    np.testing.assert_allclose(probs, [0.25] * 4)


def test_hand_normalized_weights():
    g = from_edges(["t", "v", "x"], [(0, 1, 1.0), (1, 0, 1.0), (1, 2, 3.0)])
    _, probs = transition_distribution(g, 0, 1, 1.0, 1.0)
    np.testing.assert_allclose(probs, [0.25, 0.75])


def test_dead_end_signal():
    g = from_edges(["a", "b"], [(0, 1, 1.0)])
    with pytest.raises(DeadEndError):
        transition_distribution(g, 0, 1)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0.1, 5), st.floats(0.1, 5))
def test_distribution_sums_and_order_invariance(seed, p, q):
    rng = np.random.default_rng(seed)
    n = 8
    g = random_digraph(rng, n, 0.4, weighted=True, self_loops=True)
    perm = rng.permutation(n)
    h = WeightedDigraph([g.label(int(i)) for i in np.argsort(perm)])
    for u, v, w in sorted(g.edges(), key=lambda e: -e[2]):
        h.add_edge(int(perm[u]), int(perm[v]), w)
    for t, v, _ in g.edges():
        if g.out_degree(v) == 0:
            continue
        ids, probs = transition_distribution(g, t, v, p, q)
        assert abs(probs.sum() - 1) < 1e-12
        ids2, probs2 = transition_distribution(h, int(perm[t]), int(perm[v]), p, q)
        mine = dict(zip(perm[ids], probs))
        np.testing.assert_allclose([mine[i] for i in ids2], probs2, rtol=1e-14)
        if p == q == 1.0:
            wts = np.array([w for _, w in g.neighborhood(v)])
            np.testing.assert_allclose(probs, wts / wts.sum())


def test_first_order_when_p_q_one():
    g = from_edges(["t", "v", "x", "y"], [(0, 1, 1.0), (1, 0, 2.0), (1, 2, 3.0), (1, 3, 5.0), (0, 2, 1.0)])
    _, probs = transition_distribution(g, 0, 1)
    np.testing.assert_allclose(probs, [0.2, 0.3, 0.5])


def test_walk_single_choice_chain():
    g = from_edges(["a", "b", "c"], [(0, 1, 1.0), (1, 2, 1.0)])
    walks = generate_walks(g, WalkConfig(walk_length=3, walks_per_node=4, seed=9))
    assert all(list(w) == [0, 1, 2] for w in walks[::3])


def test_walk_truncates_at_dead_end():
    g = from_edges(["a", "b"], [(0, 1, 1.0)])
    walks = generate_walks(g, WalkConfig(walk_length=5, walks_per_node=1))
    assert [list(w) for w in walks] == [[0, 1], [1]]


def test_isolated_start():
    g = WeightedDigraph(["solo"]).freeze()
    assert [list(w) for w in generate_walks(g, WalkConfig(walk_length=10, walks_per_node=2))] == [[0], [0]]


def test_walks_reproducible_and_seed_sensitive():
    g = two_cliques()
    a = generate_walks(g, WalkConfig(walk_length=30, seed=5))
    b = generate_walks(g, WalkConfig(walk_length=30, seed=5))
    c = generate_walks(g, WalkConfig(walk_length=30, seed=6))
    assert all(np.array_equal(x, y) for x, y in zip(a, b))
    assert not all(np.array_equal(x, y) for x, y in zip(a, c))


def test_walks_stay_on_edges():
    g = random_digraph(np.random.default_rng(3), 15, 0.25, weighted=True)
    for w in generate_walks(g, WalkConfig(walk_length=20, p=0.5, q=2.0)):
        for a, b in zip(w[:-1], w[1:]):
            assert g.has_edge(int(a), int(b))


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_walks_equivariant_under_relabeling(seed):
    rng = np.random.default_rng(seed)
    n = 10
    g = random_digraph(rng, n, 0.3, weighted=True)
    perm = rng.permutation(n)
    h = WeightedDigraph([g.label(int(i)) for i in np.argsort(perm)])
    for u, v, w in g.edges():
        h.add_edge(int(perm[u]), int(perm[v]), w)
    h.freeze()
    cfg = WalkConfig(walk_length=15, walks_per_node=3, p=0.5, q=2.0, seed=seed)

    def labeled(graph):
        return Counter(tuple(graph.label(int(x)) for x in w) for w in generate_walks(graph, cfg))

    assert labeled(g) == labeled(h)


def test_walk_frequencies_match_distribution():
    from scipy.stats import chisquare
    g = from_edges(["a", "b", "c"], [(0, 1, 1.0), (1, 0, 2.0), (1, 2, 3.0), (2, 1, 1.0), (2, 2, 2.0)])
    out, lengths = walk_matrix(g, WalkConfig(p=2.0, q=0.5, walk_length=400, walks_per_node=20, seed=1))
    counts = Counter()
    for row, n in zip(out, lengths):
        for t, v, x in zip(row[:n - 2], row[1:n - 1], row[2:n]):
            counts[(int(t), int(v), int(x))] += 1
    for t, v in {(t, v) for t, v, _ in counts}:
        ids, probs = transition_distribution(g, t, v, 2.0, 0.5)
        if len(ids) < 2:
            continue
        obs = np.array([counts[(t, v, int(x))] for x in ids])
        assert chisquare(obs, probs * obs.sum()).pvalue > 0.01


def test_epochs_zero_returns_init():
    g = two_cliques()
    walks = generate_walks(g, WalkConfig(walk_length=10))
    cfg = TrainConfig(dimensions=8, epochs=0, seed=3)
    emb = train_skipgram(walks, cfg, g.labels)
    w_in, _ = initial_vectors(8, cfg)
    np.testing.assert_array_equal(emb.vectors, w_in)
    assert np.abs(emb.vectors).max() <= 0.5 / 8


def test_training_deterministic():
    g = two_cliques()
    walks = generate_walks(g, WalkConfig(walk_length=20, seed=1))
    cfg = TrainConfig(dimensions=8, window=5, seed=4)
    a = train_skipgram(walks, cfg, g.labels).vectors
    b = train_skipgram(walks, cfg, g.labels).vectors
    assert a.tobytes() == b.tobytes()


def test_training_homophily_and_objective():
    g = two_cliques()
    walks = generate_walks(g, WalkConfig(walk_length=20, seed=2))
    cfg = TrainConfig(dimensions=8, window=5, seed=2)
    emb = train_skipgram(walks, cfg, g.labels)
    V = emb.vectors
    comm = np.array([0] * 4 + [1] * 4)
    sims = np.array([[cosine_similarity(V[i], V[j]) for j in range(8)] for i in range(8)])
    off = ~np.eye(8, dtype=bool)
    intra = sims[(comm[:, None] == comm[None, :]) & off].mean()
    inter = sims[comm[:, None] != comm[None, :]].mean()
    assert intra > inter
    w_in, w_out = initial_vectors(8, cfg)
    assert skipgram_objective(walks, V, emb.context_vectors, cfg) > skipgram_objective(walks, w_in, w_out, cfg)
    assert np.all(np.isfinite(V))


def test_training_needs_a_pair():
    with pytest.raises(ValueError):
        train_skipgram([[0], [1]], TrainConfig())
    with pytest.raises(ValueError):
        train_skipgram([], TrainConfig())


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 20))
def test_training_finite_on_random_graphs(seed, n):
    g = random_digraph(np.random.default_rng(seed), n, 0.5, weighted=True)
    walks = generate_walks(g, WalkConfig(walk_length=20, walks_per_node=5, seed=seed))
    if max(len(w) for w in walks) < 2:
        return
    emb = train_skipgram(walks, TrainConfig(dimensions=16, window=4, seed=seed), g.labels)
    assert emb.vectors.shape == (n, 16)
    assert np.all(np.isfinite(emb.vectors))


def test_config_validation():
    with pytest.raises(ValueError):
        WalkConfig(p=0)
    with pytest.raises(ValueError):
        TrainConfig(lr_initial=0.001, lr_final=0.01)


def test_cosine():
    assert cosine_similarity([1, 2, 3], [1, 2, 3]) == pytest.approx(1.0)
    assert cosine_similarity([1, 0], [0, 5]) == 0.0
    assert cosine_similarity([0, 0], [1, 1]) == 0.0
    with pytest.raises(ValueError):
        cosine_similarity([1, 2], [1, 2, 3])


def test_concat():
    np.testing.assert_array_equal(concat_features([1, 2], [3, 4]), [1, 2, 3, 4])
    assert not np.array_equal(concat_features([1, 2], [3, 4]), concat_features([3, 4], [1, 2]))
    np.testing.assert_array_equal(concat_features(np.zeros(3), np.zeros(3)), np.zeros(6))
    with pytest.raises(ValueError):
        concat_features([1], [1, 2])


def test_embedding_csv_round_trip(tmp_path):
    g = two_cliques()
    emb = train_skipgram(generate_walks(g, WalkConfig(walk_length=10)), TrainConfig(dimensions=4), g.labels)
    path = tmp_path / "emb.csv"
    write_embeddings(emb, path, ["dimensions=4 p=1.0 q=1.0 seed=0 epochs=5"])
    text = path.read_text()
    assert text.startswith("# dimensions=4")
    assert text.splitlines()[1] == "label,e0,e1,e2,e3"
    back = read_embeddings(path)
    assert back.labels == emb.labels
    assert back.vectors.tobytes() == emb.vectors.tobytes()
