import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from adhcn.fusion import (
    AttentionParams,
    CommConvParams,
    attention_fuse,
    commconv_fuse,
    fixed_alpha_fuse,
)


def random_attention(rng, h, scale=1.0):
    return AttentionParams(rng.normal(scale=scale, size=(h, h)), rng.normal(size=h), rng.normal(scale=scale, size=h))


def scalar_chain(channels, a, b, q):
    """Hand evaluation of the attention chain for h = 1."""
    scores = [q * math.tanh(a * z + b) for z in channels]
    top = max(scores)
    exps = [math.exp(s - top) for s in scores]
    total = sum(exps)
    weights = [e / total for e in exps]
    return sum(w * z for w, z in zip(weights, channels)), weights


class TestAttentionFuse:
    def test_equal_inputs_pass_through(self):
        rng = np.random.default_rng(0)
        Z = rng.normal(size=(5, 4))
        out = attention_fuse(Z, Z.copy(), random_attention(rng, 4))
        np.testing.assert_allclose(out.weights, 1 / 3, atol=1e-15)
        np.testing.assert_allclose(out.fused, Z, atol=1e-14)

    def test_zero_projection_gives_mean(self):
        rng = np.random.default_rng(1)
        Z_l, Z_h = rng.normal(size=(6, 3)), rng.normal(size=(6, 3))
        att = AttentionParams(np.zeros((3, 3)), rng.normal(size=3), rng.normal(size=3))
        out = attention_fuse(Z_l, Z_h, att)
        np.testing.assert_allclose(out.weights, 1 / 3, atol=1e-15)
        np.testing.assert_allclose(out.fused, (Z_l + Z_h) / 2, atol=1e-14)

    def test_scalar_hand_evaluation(self):
        a, b, q = 0.8, -0.3, 1.7
        att = AttentionParams(np.array([[a]]), np.array([b]), np.array([q]))
        out = attention_fuse([[1.0]], [[0.0]], att)
        fused, weights = scalar_chain([1.0, 0.0, 0.5], a, b, q)
        assert out.fused[0, 0] == pytest.approx(fused, abs=1e-14)
        np.testing.assert_allclose(out.weights[0], weights, atol=1e-14)

    def test_no_common_has_two_weights(self):
        rng = np.random.default_rng(2)
        out = attention_fuse(rng.normal(size=(4, 3)), rng.normal(size=(4, 3)), random_attention(rng, 3), include_common=False)
        assert out.weights.shape == (4, 2)

    def test_shape_mismatch(self):
        rng = np.random.default_rng(3)
        with pytest.raises(ValueError):
            attention_fuse(np.ones((3, 2)), np.ones((2, 2)), random_attention(rng, 2))

    @settings(max_examples=100, deadline=None)
    @given(st.integers(0, 2**31), st.integers(1, 12), st.integers(1, 6), st.booleans(), st.floats(0.1, 30))
    def test_weights_on_simplex(self, seed, n, h, common, scale):
        rng = np.random.default_rng(seed)
        out = attention_fuse(rng.normal(scale=scale, size=(n, h)), rng.normal(scale=scale, size=(n, h)),
                             random_attention(rng, h, scale), include_common=common)
        assert np.all(out.weights >= 0)
        assert np.max(np.abs(out.weights.sum(axis=1) - 1)) <= 1e-12

    def test_row_permutation_equivariance(self):
        rng = np.random.default_rng(4)
        Z_l, Z_h = rng.normal(size=(7, 3)), rng.normal(size=(7, 3))
        att = random_attention(rng, 3)
        perm = rng.permutation(7)
        a = attention_fuse(Z_l, Z_h, att)
        b = attention_fuse(Z_l[perm], Z_h[perm], att)
        np.testing.assert_allclose(b.fused, a.fused[perm], atol=1e-15)
        np.testing.assert_allclose(b.weights, a.weights[perm], atol=1e-15)

    @pytest.mark.parametrize("factor", [0.5, 2.0, 10.0])
    def test_query_scaling_keeps_argmax(self, factor):
        rng = np.random.default_rng(5)
        Z_l, Z_h = rng.normal(size=(20, 4)), rng.normal(size=(20, 4))
        att = random_attention(rng, 4)
        scaled = AttentionParams(att.proj_weight, att.proj_bias, att.query * factor)
        a = attention_fuse(Z_l, Z_h, att, include_common=False)
        b = attention_fuse(Z_l, Z_h, scaled, include_common=False)
        np.testing.assert_array_equal(a.weights.argmax(axis=1), b.weights.argmax(axis=1))


class TestFixedAlpha:
    def test_alpha_zero(self):
        Z_h = np.arange(6.0).reshape(3, 2)
        np.testing.assert_array_equal(fixed_alpha_fuse(np.ones((3, 2)), Z_h, 0.0).fused, Z_h)

    def test_alpha_one_doubles(self):
        M = np.arange(6.0).reshape(2, 3)
        np.testing.assert_array_equal(fixed_alpha_fuse(M, M, 1.0).fused, 2 * M)

    def test_arithmetic(self):
        out = fixed_alpha_fuse([[0.0, 1.0]], [[1.0, 0.0]], 0.3)
        np.testing.assert_allclose(out.fused, [[1.0, 0.3]], rtol=1e-15)
        np.testing.assert_array_equal(out.weights, [[0.3, 1.0]])

    @settings(max_examples=50, deadline=None)
    @given(
        arrays(np.float64, (3, 2), elements=st.floats(-10, 10)),
        arrays(np.float64, (3, 2), elements=st.floats(-10, 10)),
        st.floats(-3, 3),
        st.floats(0, 1),
    )
    def test_linear(self, A, B, c, alpha):
        lhs = fixed_alpha_fuse(c * A, c * B, alpha).fused
        rhs = c * fixed_alpha_fuse(A, B, alpha).fused
        np.testing.assert_allclose(lhs, rhs, atol=1e-9)


class TestCommConv:
    def test_identity_map_reduces_to_default(self):
        rng = np.random.default_rng(6)
        Z_l, Z_h = rng.normal(size=(5, 3)), rng.normal(size=(5, 3))
        att = random_attention(rng, 3)
        a = commconv_fuse(Z_l, Z_h, att, CommConvParams(np.eye(3), np.zeros(3)))
        b = attention_fuse(Z_l, Z_h, att)
        np.testing.assert_allclose(a.fused, b.fused, atol=1e-15)
        np.testing.assert_allclose(a.weights, b.weights, atol=1e-15)

    def test_constant_common_channel(self):
        rng = np.random.default_rng(7)
        u = np.array([0.2, -0.4])
        Z_l, Z_h = rng.normal(size=(4, 2)), rng.normal(size=(4, 2))
        att = random_attention(rng, 2)
        out = commconv_fuse(Z_l, Z_h, att, CommConvParams(np.zeros((2, 2)), u))
        # equal to attention over [Z_l, Z_h, rows of u]
        U = np.tile(u, (4, 1))
        hidden = [np.tanh(Z @ att.proj_weight.T + att.proj_bias) for Z in (Z_l, Z_h, U)]
        s = np.column_stack([H @ att.query for H in hidden])
        w = np.exp(s) / np.exp(s).sum(axis=1, keepdims=True)
        expected = w[:, [0]] * Z_l + w[:, [1]] * Z_h + w[:, [2]] * U
        np.testing.assert_allclose(out.fused, expected, atol=1e-14)

    def test_scalar_hand_evaluation(self):
        a, b, q, wc, bc = -0.6, 0.25, 2.2, 1.5, 0.1
        att = AttentionParams(np.array([[a]]), np.array([b]), np.array([q]))
        out = commconv_fuse([[0.4]], [[1.2]], att, CommConvParams(np.array([[wc]]), np.array([bc])))
        common = ((1.2 * wc + bc) + (0.4 * wc + bc)) / 2
        fused, weights = scalar_chain([0.4, 1.2, common], a, b, q)
        assert out.fused[0, 0] == pytest.approx(fused, abs=1e-14)
        np.testing.assert_allclose(out.weights[0], weights, atol=1e-14)

    def test_weights_on_simplex(self):
        rng = np.random.default_rng(8)
        for _ in range(20):
            out = commconv_fuse(rng.normal(size=(6, 3)), rng.normal(size=(6, 3)), random_attention(rng, 3, 5.0),
                                CommConvParams(rng.normal(size=(3, 3)), rng.normal(size=3)))
            assert np.all(out.weights >= 0)
            assert np.max(np.abs(out.weights.sum(axis=1) - 1)) <= 1e-12
