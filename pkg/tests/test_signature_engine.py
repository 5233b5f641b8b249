"""
Unit tests for path signatures and log-signatures.

Tests cover:
- Closed-form signatures of simple paths
- Chen identity, reversal and reparametrization invariance
- Shuffle identity and log-signature consistency
- Input validation
"""

import math
import sys
from pathlib import Path as FilePath

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

# Add src to path for imports
sys.path.insert(0, str(FilePath(__file__).parent.parent))

from src.algebra.lie_algebra import LieCoordinates, lyndon_to_tensor
from src.algebra.tensor_algebra import (
    TruncatedTensor,
    product_coords,
    tensor_exp,
    tensor_product,
)
from src.exceptions import DomainError
from src.signature.signature_engine import (
    Path,
    batch_log_signature,
    batch_signature,
    path_log_signature,
    path_signature,
    reverse_path,
    shuffle_product,
    signature_on_interval,
)


@pytest.fixture
def axis_path():
    """(0,0) -> (1,0) -> (1,1)."""
    return Path([0.0, 1.0, 2.0], [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0]])


def _random_walk(rng, n_points, d):
    values = np.cumsum(rng.standard_normal((n_points, d)) * 0.5, axis=0)
    return Path(np.linspace(0.0, 1.0, n_points), values)


class TestClosedForms:
    """Signatures known exactly."""

    def test_axis_path(self, axis_path):
        sig = path_signature(axis_path, 2)
        expected = TruncatedTensor.from_words(
            2, 2,
            {(): 1.0, (1,): 1.0, (2,): 1.0, (1, 1): 0.5, (1, 2): 1.0, (2, 2): 0.5},
        )
        assert sig.allclose(expected, atol=1e-14)
        assert sig.coefficient((2, 1)) == 0.0
        print("✓ axis path signature matches")

    def test_scalar_path_is_power_series(self):
        """For d = 1 level k is (x_T - x_0)^k / k!."""
        rng = np.random.default_rng(3)
        path = _random_walk(rng, 20, 1)
        increment = path.values[-1, 0] - path.values[0, 0]
        sig = path_signature(path, 5)
        for k in range(6):
            assert sig.coefficient((1,) * k) == pytest.approx(increment ** k / math.factorial(k), rel=1e-10, abs=1e-12)

    def test_straight_line_is_exponential(self):
        """One segment has signature exp(Δx)."""
        path = Path([0.0, 1.0], [[0.0, 0.0, 0.0], [0.3, -0.2, 0.5]])
        delta = TruncatedTensor.from_words(3, 4, {(1,): 0.3, (2,): -0.2, (3,): 0.5})
        assert path_signature(path, 4).allclose(tensor_exp(delta), atol=1e-14)

    def test_group_like(self):
        rng = np.random.default_rng(4)
        sig = path_signature(_random_walk(rng, 10, 3), 3)
        assert sig.scalar == 1.0
        assert sig.is_group_like()


class TestAlgebraicIdentities:
    """Chen, reversal, shuffle and reparametrization."""

    def test_chen_identity_batch(self):
        rng = np.random.default_rng(11)
        values = np.cumsum(rng.standard_normal((100, 11, 3)) * 0.3, axis=1)
        full = batch_signature(values, 4)
        left = batch_signature(values[:, :6, :], 4)
        right = batch_signature(values[:, 5:, :], 4)
        np.testing.assert_allclose(product_coords(left, right, 3, 4), full, rtol=1e-10, atol=1e-10)

    def test_chen_identity_on_interval(self):
        rng = np.random.default_rng(12)
        path = _random_walk(rng, 9, 2)
        split = 0.4
        joined = tensor_product(
            signature_on_interval(path, 0.0, split, 4),
            signature_on_interval(path, split, 1.0, 4),
        )
        assert joined.allclose(path_signature(path, 4), atol=1e-10)

    @settings(max_examples=100, deadline=None)
    @given(
        st.integers(min_value=0, max_value=2 ** 32 - 1),
        st.integers(min_value=1, max_value=3),
        st.integers(min_value=1, max_value=5),
        st.integers(min_value=2, max_value=12),
        st.floats(min_value=0.05, max_value=0.95),
    )
    def test_chen_identity_random_split(self, seed, d, m, n_points, split):
        """S(X)_{0,1} = S(X)_{0,u} ⊗ S(X)_{u,1} for random paths and split points."""
        path = _random_walk(np.random.default_rng(seed), n_points, d)
        joined = tensor_product(
            signature_on_interval(path, 0.0, split, m),
            signature_on_interval(path, split, 1.0, m),
        )
        np.testing.assert_allclose(joined.coords, path_signature(path, m).coords, rtol=1e-10, atol=1e-10)

    def test_reverse_gives_inverse(self):
        rng = np.random.default_rng(13)
        path = _random_walk(rng, 12, 2)
        product = tensor_product(path_signature(path, 4), path_signature(reverse_path(path), 4))
        assert product.allclose(TruncatedTensor.unit(2, 4), atol=1e-10)

    def test_reparametrization_invariance(self, axis_path):
        stretched = axis_path.with_times([0.0, 5.0, 7.0])
        assert path_signature(stretched, 3) == path_signature(axis_path, 3)

    @pytest.mark.parametrize("u,v", [((1,), (2,)), ((1, 2), (2,)), ((1, 2), (2, 1)), ((1,), (1, 1))])
    def test_shuffle_identity(self, u, v):
        rng = np.random.default_rng(14)
        sig = path_signature(_random_walk(rng, 15, 2), 4)
        lhs = sig.coefficient(u) * sig.coefficient(v)
        rhs = sum(mult * sig.coefficient(w) for w, mult in shuffle_product(u, v).items())
        assert lhs == pytest.approx(rhs, rel=1e-9, abs=1e-12)

    @settings(max_examples=60, deadline=None)
    @given(
        st.integers(min_value=0, max_value=2 ** 32 - 1),
        st.lists(st.integers(min_value=1, max_value=3), min_size=1, max_size=2),
        st.lists(st.integers(min_value=1, max_value=3), min_size=1, max_size=2),
    )
    def test_shuffle_identity_property(self, seed, u, v):
        """S_u S_v = sum of S_w over the shuffles w of u and v."""
        sig = path_signature(_random_walk(np.random.default_rng(seed), 10, 3), 4)
        lhs = sig.coefficient(tuple(u)) * sig.coefficient(tuple(v))
        rhs = sum(mult * sig.coefficient(w) for w, mult in shuffle_product(u, v, 4).items())
        assert lhs == pytest.approx(rhs, rel=1e-9, abs=1e-10)


class TestShuffleProduct:
    """Interleavings and multiplicities."""

    def test_three_letters(self):
        assert shuffle_product("12", "3") == {(1, 2, 3): 1, (1, 3, 2): 1, (3, 1, 2): 1}

    def test_multiplicities(self):
        assert shuffle_product("1", "1") == {(1, 1): 2}
        assert sum(shuffle_product("12", "34").values()) == 6

    def test_empty_word(self):
        assert shuffle_product("", "12") == {(1, 2): 1}

    def test_level_check(self):
        with pytest.raises(DomainError):
            shuffle_product("12", "12", m=3)


class TestLogSignature:
    """Lyndon-coordinate log-signatures."""

    def test_axis_path_log_signature(self, axis_path):
        logsig = path_log_signature(axis_path, 2)
        expected = LieCoordinates.from_dict(2, 2, {"1": 1.0, "2": 1.0, "12": 0.5})
        assert logsig.allclose(expected, atol=1e-12)

    @pytest.mark.parametrize("d,m", [(2, 4), (3, 3)])
    def test_exp_of_log_signature(self, d, m):
        rng = np.random.default_rng(d + 10 * m)
        path = _random_walk(rng, 8, d)
        rebuilt = tensor_exp(lyndon_to_tensor(path_log_signature(path, m)))
        assert rebuilt.allclose(path_signature(path, m), atol=1e-10)

    def test_batch_shape(self):
        rng = np.random.default_rng(15)
        values = rng.standard_normal((7, 5, 2))
        assert batch_log_signature(values, 3).shape == (7, 5)


class TestValidation:
    """Path and kernel input checks."""

    def test_path_needs_two_samples(self):
        with pytest.raises(DomainError):
            Path([0.0], [[1.0, 2.0]])

    def test_times_strictly_increasing(self):
        with pytest.raises(DomainError, match="strictly increasing"):
            Path([0.0, 1.0, 1.0], [[0.0], [1.0], [2.0]])

    def test_non_finite_rejected(self):
        with pytest.raises(DomainError):
            Path([0.0, 1.0], [[0.0], [np.inf]])

    def test_one_dimensional_values(self):
        path = Path([0.0, 1.0, 2.0], [0.0, 1.0, 3.0])
        assert path.d == 1
        assert path.n_segments == 2

    def test_value_at(self, axis_path):
        np.testing.assert_allclose(axis_path.value_at(1.5), [1.0, 0.5])

    def test_interval(self, axis_path):
        sig = signature_on_interval(axis_path, 0.5, 1.5, 2)
        assert sig.coefficient((1,)) == pytest.approx(0.5)
        assert sig.coefficient((2,)) == pytest.approx(0.5)
        assert sig.coefficient((1, 2)) == pytest.approx(0.25)
        with pytest.raises(DomainError):
            signature_on_interval(axis_path, 1.0, 1.0, 2)
        with pytest.raises(DomainError):
            signature_on_interval(axis_path, -0.5, 1.0, 2)

    def test_kernel_arguments(self):
        with pytest.raises(DomainError):
            batch_signature(np.zeros((2, 3, 2)), 0)
        with pytest.raises(DomainError):
            batch_signature(np.zeros((2, 1, 2)), 2)
