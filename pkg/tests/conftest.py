import numpy as np
import pytest
from hypothesis import strategies as st

from adhcn.hypergraph import Hypergraph


@pytest.fixture
def h3():
    """Three nodes, e0 = {0, 1}, e1 = {1, 2}."""
    return Hypergraph(3, [[0, 1], [1, 2]])


@st.composite
def hypergraphs(draw, max_nodes=20, max_edges=10, max_size=6, min_size=1):
    n = draw(st.integers(1, max_nodes))
    m = draw(st.integers(1, max_edges))
    edges = [
        draw(st.lists(st.integers(0, n - 1), min_size=min_size, max_size=min(max_size, n), unique=True))
        for _ in range(m)
    ]
    return Hypergraph(n, edges)


def random_hypergraph(rng, n_max=20, m_max=10, size_max=6, covered=False):
    n = int(rng.integers(1, n_max + 1))
    m = int(rng.integers(1, m_max + 1))
    edges = [
        list(rng.choice(n, size=int(rng.integers(1, min(size_max, n) + 1)), replace=False))
        for _ in range(m)
    ]
    if covered:
        for v in np.setdiff1d(np.arange(n), np.concatenate(edges)):
            edges[int(rng.integers(m))].append(int(v))
    return Hypergraph(n, edges)


def brute_force_line_graph(hg):
    """O(L^2) reference adjacency: every pair of pairs is compared directly."""
    pairs = [(v, e) for v in range(hg.num_nodes) for e, members in enumerate(hg.hyperedges) if v in members]
    L = len(pairs)
    A = np.zeros((L, L))
    for i in range(L):
        for j in range(L):
            if i != j and (pairs[i][0] == pairs[j][0] or pairs[i][1] == pairs[j][1]):
                A[i, j] = 1.0
    return pairs, A


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
