import numpy as np
import pytest
import scipy.sparse as sp

from adhcn.channels import (
    ChannelParams,
    dropout_mask,
    hypergraph_channel_forward,
    le_back_project,
    le_channel_forward,
    random_stream,
)
from adhcn.hypergraph import Hypergraph, hyper_norm_operator
from adhcn.line_expansion import back_projection_matrix, le_norm_operator, line_expand, projection_matrix


def identity_params(d):
    return ChannelParams(np.eye(d), np.zeros(d))


class TestHypergraphChannel:
    def test_identity_pipeline(self):
        X = np.array([[1.0, 2.0], [0.0, 3.0]])
        np.testing.assert_array_equal(hypergraph_channel_forward(sp.identity(2), X, identity_params(2)), X)

    def test_relu_clamp(self):
        out = hypergraph_channel_forward(sp.identity(1), [[-1.0, 2.0]], identity_params(2))
        np.testing.assert_array_equal(out, [[0.0, 2.0]])

    def test_h3(self, h3):
        out = hypergraph_channel_forward(hyper_norm_operator(h3), [[1.0], [0.0], [0.0]], identity_params(1))
        np.testing.assert_allclose(out, [[0.5], [0.35355], [0.0]], atol=1e-5)

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            hypergraph_channel_forward(sp.identity(3), np.ones((2, 2)), identity_params(2))
        with pytest.raises(ValueError):
            hypergraph_channel_forward(sp.identity(2), np.ones((2, 3)), identity_params(2))

    def test_zero_parameters_give_zero(self, h3):
        out = hypergraph_channel_forward(hyper_norm_operator(h3), np.random.default_rng(0).normal(size=(3, 4)),
                                         ChannelParams(np.zeros((4, 5)), np.zeros(5)))
        np.testing.assert_array_equal(out, 0)


class TestLeChannel:
    def test_identity(self):
        np.testing.assert_array_equal(le_channel_forward(sp.identity(1), [[0.5, 1.5]], identity_params(2)), [[0.5, 1.5]])

    def test_k3_rows_sum_to_one(self):
        op = le_norm_operator(line_expand(Hypergraph(3, [[0, 1, 2]])))
        out = le_channel_forward(op, np.ones((3, 1)), identity_params(1))
        np.testing.assert_allclose(out, np.ones((3, 1)), atol=1e-15)

    def test_bias_only(self, h3):
        op = le_norm_operator(line_expand(h3))
        out = le_channel_forward(op, np.random.default_rng(1).normal(size=(4, 3)),
                                 ChannelParams(np.zeros((3, 2)), np.full(2, 0.7)))
        np.testing.assert_array_equal(out, 0.7)


class TestBackProject:
    def test_h3(self, h3):
        B = back_projection_matrix(h3, line_expand(h3))
        np.testing.assert_array_equal(le_back_project(B, [[1.0], [2.0], [4.0], [8.0]]), [[1], [3], [8]])

    def test_constant_rows(self):
        hg = Hypergraph(5, [[0, 1, 2], [2, 3], [1, 3, 4]])
        B = back_projection_matrix(hg, line_expand(hg))
        u = np.array([0.3, -1.2, 4.0])
        out = le_back_project(B, np.tile(u, (hg.num_incidences, 1)))
        np.testing.assert_allclose(out, np.tile(u, (5, 1)), rtol=1e-15)

    def test_isolated_node_zero(self, h3):
        hg = Hypergraph(4, h3.hyperedges)
        B = back_projection_matrix(hg, line_expand(hg))
        np.testing.assert_array_equal(le_back_project(B, np.ones((4, 2)))[3], 0)

    def test_convex_combination(self):
        rng = np.random.default_rng(5)
        hg = Hypergraph(6, [[0, 1, 2], [2, 3, 4, 5], [0, 5], [1, 4]])
        le = line_expand(hg)
        Z = rng.normal(size=(le.num_pairs, 3))
        out = le_back_project(back_projection_matrix(hg, le), Z)
        for v in range(6):
            rows = Z[le.pairs[:, 0] == v]
            assert np.all(out[v] >= rows.min(axis=0) - 1e-12)
            assert np.all(out[v] <= rows.max(axis=0) + 1e-12)

    def test_shape_mismatch(self, h3):
        with pytest.raises(ValueError):
            le_back_project(back_projection_matrix(h3, line_expand(h3)), np.ones((3, 1)))


def test_channel_permutation_equivariance():
    rng = np.random.default_rng(11)
    hg = Hypergraph(7, [[0, 1, 2], [2, 3, 4], [4, 5, 6, 0], [1, 6]])
    X = rng.normal(size=(7, 3))
    params = ChannelParams(rng.normal(size=(3, 4)), rng.normal(size=4))
    perm = rng.permutation(7)
    inv = np.argsort(perm)
    moved = hg.relabel(perm)
    X_moved = X[inv]  # row perm[v] of X_moved is row v of X

    def both(g, feats):
        le = line_expand(g)
        Zh = hypergraph_channel_forward(hyper_norm_operator(g), feats, params)
        Zt = le_channel_forward(le_norm_operator(le), projection_matrix(g, le) @ feats, params)
        return Zh, le_back_project(back_projection_matrix(g, le), Zt)

    Zh, Zl = both(hg, X)
    Zh2, Zl2 = both(moved, X_moved)
    np.testing.assert_allclose(Zh2[perm], Zh, atol=1e-13)
    np.testing.assert_allclose(Zl2[perm], Zl, atol=1e-13)


class TestDropout:
    def test_rate_zero(self):
        np.testing.assert_array_equal(dropout_mask((3, 4), 0.0, random_stream(0)), 1.0)

    def test_mean_is_one(self):
        mask = dropout_mask((1000, 1000), 0.5, random_stream(7))
        assert set(np.unique(mask)) == {0.0, 2.0}
        assert abs(mask.mean() - 1.0) < 0.01

    def test_same_stream_state_same_mask(self):
        a = dropout_mask((20, 5), 0.3, random_stream(3, 1, 2))
        b = dropout_mask((20, 5), 0.3, random_stream(3, 1, 2))
        np.testing.assert_array_equal(a, b)

    def test_rejects_bad_rate(self):
        with pytest.raises(ValueError):
            dropout_mask((2, 2), 1.0, random_stream(0))
