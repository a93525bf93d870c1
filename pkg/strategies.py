"""Hypothesis strategies for the property suites.

Graphs have dim <= 3, at most 8 pairs and integer coordinates in [-3, 3].
"""

import random

import hypothesis.strategies as st

from operators import OperatorGraph, Pair, qm_related

COORD = st.integers(min_value=-3, max_value=3)


def vectors(dim):
    return st.tuples(*[COORD] * dim)


@st.composite
def graphs(draw, max_dim=3, max_pairs=8, min_pairs=1, dim=None):
    d = dim or draw(st.integers(min_value=1, max_value=max_dim))
    pairs = draw(st.lists(st.tuples(vectors(d), vectors(d)), min_size=min_pairs, max_size=max_pairs))
    return OperatorGraph(d, pairs)


def greedy_quasimonotone(T):
    """Keep each pair of T that is ~q-related to every pair kept so far."""
    kept = []
    for p in T.pairs:
        if all(qm_related(p, q) for q in kept):
            kept.append(p)
    return OperatorGraph(T.dim, kept, T.field)


@st.composite
def quasimonotone_graphs(draw, max_dim=3, max_pairs=8, dim=None):
    return greedy_quasimonotone(draw(graphs(max_dim=max_dim, max_pairs=max_pairs, dim=dim)))


@st.composite
def graph_pairs(draw, max_dim=3, max_pairs=8):
    """Two graphs of the same dimension."""
    T = draw(graphs(max_dim=max_dim, max_pairs=max_pairs))
    S = draw(graphs(max_pairs=max_pairs, dim=T.dim))
    return T, S


def random_pairs(dim, count, seed, low=-3, high=3):
    """Deterministic random pairs for a fuzz case."""
    rng = random.Random(seed)
    return [Pair(tuple(rng.randint(low, high) for _ in range(dim)),
                 tuple(rng.randint(low, high) for _ in range(dim)))
            for _ in range(count)]


def random_points(dim, count, seed, low=-3, high=3):
    rng = random.Random(seed)
    return [tuple(rng.randint(low, high) for _ in range(dim)) for _ in range(count)]
