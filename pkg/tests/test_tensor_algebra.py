"""
Unit tests for the truncated tensor algebra.

Tests cover:
- Coordinate layout (word index and its inverse)
- Product, exponential and logarithm
- Weight schemes and the weighted max-norm
- Value-type validation
"""

import math
import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

# Add src to path for imports
sys.path.insert(0, str(Path(__file__).parent.parent))

from src.algebra.tensor_algebra import (
    TruncatedTensor,
    WeightScheme,
    coordinate_labels,
    format_word,
    parse_word,
    tensor_exp,
    tensor_log,
    tensor_product,
    tensor_size,
    weighted_norm,
    word_index,
    word_of,
    words,
)
from src.exceptions import DomainError


def _random_tensor(rng, d, m, scalar=0.0, scale=0.5):
    coords = scale * rng.standard_normal(tensor_size(d, m))
    coords[0] = scalar
    return TruncatedTensor(d, m, coords)


def test_layout_sizes():
    """Size is 1 + d + ... + d^m."""
    assert tensor_size(2, 3) == 15
    assert tensor_size(3, 2) == 13
    assert tensor_size(1, 4) == 5


def test_word_index_canonical_order():
    """Words sit level by level, lexicographically inside a level."""
    assert word_index((), 2) == 0
    assert word_index((1,), 2) == 1
    assert word_index((2,), 2) == 2
    assert word_index((1, 1), 2) == 3
    assert word_index((1, 2), 2) == 4
    assert word_index((2, 1), 2) == 5
    assert word_index((2, 2), 2) == 6


@pytest.mark.parametrize("d,m", [(1, 4), (2, 3), (3, 3)])
def test_word_of_inverts_word_index(d, m):
    """word_of(word_index(w)) == w for every word."""
    for position, word in enumerate(words(d, m)):
        assert word_index(word, d, m) == position
        assert word_of(position, d) == word


def test_word_index_rejects_bad_words():
    with pytest.raises(DomainError):
        word_index((3,), 2)
    with pytest.raises(DomainError):
        word_index((1, 1, 1), 2, m=2)


def test_word_labels():
    """Labels round-trip and stay unambiguous for large alphabets."""
    assert format_word((1, 2)) == "12"
    assert format_word((1, 12)) == "1,12"
    assert parse_word("12") == (1, 2)
    assert parse_word("1,12") == (1, 12)
    assert parse_word([2, 1]) == (2, 1)
    assert coordinate_labels(2, 1) == ["S()", "S(1)", "S(2)"]
    print("✓ test_word_labels passed")


def test_unit_is_identity():
    rng = np.random.default_rng(1)
    a = _random_tensor(rng, 2, 3, scalar=0.7)
    unit = TruncatedTensor.unit(2, 3)
    assert tensor_product(unit, a) == a
    assert tensor_product(a, unit) == a


def test_product_of_letters():
    """e1 ⊗ e2 is the single word (1, 2)."""
    e1 = TruncatedTensor.from_words(2, 2, {(1,): 1.0})
    e2 = TruncatedTensor.from_words(2, 2, {(2,): 1.0})
    product = tensor_product(e1, e2)
    assert product.to_dict() == {"12": 1.0}


@pytest.mark.parametrize("d,m", [(2, 3), (3, 4), (2, 5)])
def test_product_associative(d, m):
    rng = np.random.default_rng(d * 10 + m)
    a, b, c = (_random_tensor(rng, d, m, scalar=rng.normal()) for _ in range(3))
    left = tensor_product(tensor_product(a, b), c)
    right = tensor_product(a, tensor_product(b, c))
    assert left.allclose(right, atol=1e-10)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(min_value=-2.0, max_value=2.0), min_size=45, max_size=45))
def test_product_associative_property(values):
    a, b, c = (TruncatedTensor(2, 3, values[i:i + 15]) for i in (0, 15, 30))
    left = tensor_product(tensor_product(a, b), c)
    right = tensor_product(a, tensor_product(b, c))
    assert left.allclose(right, atol=1e-9)


def test_product_truncates():
    """Levels above m are discarded."""
    e1 = TruncatedTensor.from_words(1, 2, {(1,): 1.0})
    cube = tensor_product(tensor_product(e1, e1), e1)
    assert cube == TruncatedTensor.zeros(1, 2)


def test_exp_of_level_one():
    """exp(x) has level k equal to x^{⊗k} / k! for a letter x."""
    x = TruncatedTensor.from_words(1, 5, {(1,): 2.0})
    g = tensor_exp(x)
    for k in range(6):
        assert g.coefficient((1,) * k) == pytest.approx(2.0 ** k / math.factorial(k), rel=1e-14)


@pytest.mark.parametrize("d,m", [(2, 4), (3, 3), (1, 6)])
def test_exp_log_round_trip(d, m):
    rng = np.random.default_rng(d + m)
    a = _random_tensor(rng, d, m)
    assert tensor_log(tensor_exp(a)).allclose(a, atol=1e-10)
    g = tensor_exp(a)
    assert tensor_exp(tensor_log(g)).allclose(g, atol=1e-10)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(min_value=-1.0, max_value=1.0), min_size=14, max_size=14))
def test_exp_log_round_trip_property(values):
    a = TruncatedTensor(2, 3, [0.0] + values)
    assert tensor_log(tensor_exp(a)).allclose(a, atol=1e-10)


def test_exp_log_preconditions():
    with pytest.raises(DomainError):
        tensor_exp(TruncatedTensor.unit(2, 2))
    with pytest.raises(DomainError):
        tensor_log(TruncatedTensor.zeros(2, 2))


def test_shape_mismatch_rejected():
    with pytest.raises(DomainError):
        tensor_product(TruncatedTensor.unit(2, 2), TruncatedTensor.unit(2, 3))
    with pytest.raises(DomainError):
        TruncatedTensor.unit(2, 2) + TruncatedTensor.unit(3, 2)


def test_value_type_validation():
    with pytest.raises(DomainError):
        TruncatedTensor(2, 2, np.zeros(5))
    with pytest.raises(DomainError):
        TruncatedTensor(2, 2, [np.nan] + [0.0] * 6)
    tensor = TruncatedTensor.unit(2, 2)
    assert not tensor.coords.flags.writeable
    with pytest.raises(ValueError):
        tensor.coords[0] = 2.0


def test_level_blocks():
    t = TruncatedTensor.from_words(2, 2, {(): 1.0, (2,): 3.0, (2, 1): 4.0})
    np.testing.assert_array_equal(t.level(1), [0.0, 3.0])
    np.testing.assert_array_equal(t.level(2), [0.0, 0.0, 4.0, 0.0])
    with pytest.raises(DomainError):
        t.level(3)


def test_weight_schemes():
    np.testing.assert_allclose(WeightScheme.unit().weights(2), [1.0, 1.0, 1.0])
    np.testing.assert_allclose(WeightScheme.factorial().weights(3), [1.0, 1.0, 0.5, 1.0 / 6.0])
    np.testing.assert_allclose(WeightScheme.geometric_factorial(2.0).weights(3), [1.0, 2.0, 2.0, 8.0 / 6.0])
    np.testing.assert_allclose(WeightScheme.scaled_factorial(4.0).weights(2), [1.0, 0.5, 0.125])
    scheme = WeightScheme.from_config({"scheme": "geometric_factorial", "beta": 0.5})
    assert scheme.to_dict() == {"scheme": "geometric_factorial", "beta": 0.5, "sigma": None}


def test_weight_scheme_parameters_required():
    with pytest.raises(DomainError):
        WeightScheme.geometric_factorial(0.0)
    with pytest.raises(DomainError):
        WeightScheme.from_config({"scheme": "scaled_factorial"})
    with pytest.raises(ValueError):
        WeightScheme.from_config({"scheme": "harmonic"})


def test_weighted_norm_is_max_over_levels():
    """Level norms (1, 5, 2) with factorial weights give max(1, 5, 1)."""
    t = TruncatedTensor.from_words(2, 2, {(): 1.0, (1,): 3.0, (2,): 4.0, (1, 2): 2.0})
    assert weighted_norm(t, WeightScheme.factorial()) == pytest.approx(5.0)
    assert weighted_norm(t, WeightScheme.geometric_factorial(0.1)) == pytest.approx(1.0)
    print("✓ test_weighted_norm_is_max_over_levels passed")


NORM_SCHEMES = [
    WeightScheme.unit(),
    WeightScheme.factorial(),
    WeightScheme.geometric_factorial(0.5),
    WeightScheme.geometric_factorial(3.0),
    WeightScheme.scaled_factorial(2.0),
]
coords_2_3 = st.lists(st.floats(min_value=-10.0, max_value=10.0), min_size=15, max_size=15)


@settings(max_examples=100, deadline=None)
@given(coords_2_3, coords_2_3, st.sampled_from(NORM_SCHEMES))
def test_weighted_norm_triangle_inequality(x, y, scheme):
    a, b = TruncatedTensor(2, 3, x), TruncatedTensor(2, 3, y)
    bound = weighted_norm(a, scheme) + weighted_norm(b, scheme)
    assert weighted_norm(a + b, scheme) <= bound * (1.0 + 1e-12) + 1e-12


@settings(max_examples=100, deadline=None)
@given(coords_2_3, st.floats(min_value=-100.0, max_value=100.0), st.sampled_from(NORM_SCHEMES))
def test_weighted_norm_homogeneity(x, scale, scheme):
    a = TruncatedTensor(2, 3, x)
    expected = abs(scale) * weighted_norm(a, scheme)
    assert weighted_norm(scale * a, scheme) == pytest.approx(expected, rel=1e-12, abs=1e-12)


@pytest.mark.parametrize("scheme", NORM_SCHEMES, ids=lambda s: s.kind.value)
def test_weighted_norm_zero_only_at_zero(scheme):
    assert weighted_norm(TruncatedTensor.zeros(2, 3), scheme) == 0.0
    assert weighted_norm(TruncatedTensor.from_words(2, 3, {(2, 1, 2): 1e-3}), scheme) > 0.0
