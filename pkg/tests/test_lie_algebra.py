"""
Unit tests for Lyndon words, the Lyndon basis and BCH.
"""

import sys
from pathlib import Path as FilePath

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

# Add src to path for imports
sys.path.insert(0, str(FilePath(__file__).parent.parent))

from src.algebra.lie_algebra import (
    LieCoordinates,
    LyndonWord,
    bch,
    bracket_to_tensor,
    format_bracket,
    is_lyndon,
    lyndon_basis,
    lyndon_to_tensor,
    lyndon_words,
    standard_bracketing,
    tensor_to_lyndon,
    witt_dimension,
)
from src.algebra.tensor_algebra import TruncatedTensor, tensor_exp, tensor_log, tensor_product
from src.exceptions import DomainError, NotLieElementError
from src.signature.signature_engine import Path, signature_on_interval


class TestLyndonWords:
    """Enumeration and counting."""

    def test_small_alphabet_listing(self):
        assert [str(w) for w in lyndon_words(2, 3)] == ["1", "2", "12", "112", "122"]

    def test_is_lyndon(self):
        assert is_lyndon((1, 1, 2))
        assert is_lyndon((1, 2, 2))
        assert not is_lyndon((1, 2, 1))
        assert not is_lyndon((1, 1))
        assert not is_lyndon(())

    def test_lyndon_word_rejects_non_lyndon(self):
        with pytest.raises(DomainError):
            LyndonWord("21")
        assert LyndonWord("112").degree == 3

    @pytest.mark.parametrize("d", [2, 3])
    @pytest.mark.parametrize("m", [1, 2, 3, 4, 5, 6])
    def test_counts_match_witt_formula(self, d, m):
        listed = lyndon_words(d, m)
        for k in range(1, m + 1):
            assert sum(1 for w in listed if w.degree == k) == witt_dimension(d, k)

    def test_witt_values(self):
        assert [witt_dimension(2, k) for k in range(1, 7)] == [2, 1, 2, 3, 6, 9]
        assert [witt_dimension(3, k) for k in range(1, 4)] == [3, 3, 8]
        with pytest.raises(DomainError):
            witt_dimension(0, 2)


class TestBracketing:
    """Standard bracketing and its expansion."""

    def test_standard_bracketing(self):
        assert standard_bracketing("1") == 1
        assert standard_bracketing("12") == (1, 2)
        assert standard_bracketing("112") == (1, (1, 2))
        assert standard_bracketing("122") == ((1, 2), 2)
        assert format_bracket(standard_bracketing("1122")) == "[1,[[1,2],2]]"

    def test_bracket_of_letters(self):
        """[1,2] expands to e1⊗e2 - e2⊗e1."""
        tensor = bracket_to_tensor((1, 2), 2, 2)
        assert tensor.to_dict() == {"12": 1.0, "21": -1.0}

    def test_bracket_degree_too_high(self):
        with pytest.raises(DomainError):
            bracket_to_tensor((1, (1, 2)), 2, 2)

    def test_basis_leading_words(self):
        """Each basis element has coefficient 1 on its own word."""
        basis = lyndon_basis(3, 4)
        for w in basis.words:
            tensor = bracket_to_tensor(standard_bracketing(w), 3, 4)
            assert tensor.coefficient(w.word) == 1.0


def _commutator(a, b):
    return tensor_product(a, b) - tensor_product(b, a)


def _jacobi_sum(x, y, z, d, m):
    terms = [
        bracket_to_tensor((x, (y, z)), d, m),
        bracket_to_tensor((y, (z, x)), d, m),
        bracket_to_tensor((z, (x, y)), d, m),
    ]
    return terms[0] + terms[1] + terms[2]


class TestJacobiIdentity:
    """[x,[y,z]] + [y,[z,x]] + [z,[x,y]] vanishes."""

    @pytest.mark.parametrize(
        "x,y,z,d,m",
        [
            (1, 2, 3, 3, 3),
            (1, 1, 2, 2, 3),
            ((1, 2), 3, 1, 3, 4),
            ((1, (1, 2)), 2, (2, 3), 3, 6),
            ((1, 2), (1, 2), 2, 2, 5),
        ],
    )
    def test_bracket_trees(self, x, y, z, d, m):
        total = _jacobi_sum(x, y, z, d, m)
        assert total.allclose(TruncatedTensor.zeros(d, m), atol=1e-12)

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_random_lie_elements(self, seed):
        """Jacobi holds for embedded Lyndon coordinates under the truncated commutator."""
        rng = np.random.default_rng(seed)
        d, m = 2, 5
        dim = lyndon_basis(d, m).dimension
        x, y, z = (lyndon_to_tensor(LieCoordinates(d, m, rng.standard_normal(dim))) for _ in range(3))
        total = (
            _commutator(x, _commutator(y, z))
            + _commutator(y, _commutator(z, x))
            + _commutator(z, _commutator(x, y))
        )
        assert total.allclose(TruncatedTensor.zeros(d, m), atol=1e-10)


class TestCoordinates:
    """Projection onto and embedding from Lyndon coordinates."""

    @pytest.mark.parametrize("d,m", [(2, 4), (3, 3), (2, 6)])
    def test_round_trip(self, d, m):
        rng = np.random.default_rng(d * m)
        c = LieCoordinates(d, m, rng.standard_normal(lyndon_basis(d, m).dimension))
        assert tensor_to_lyndon(lyndon_to_tensor(c)).allclose(c, atol=1e-10)

    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.floats(min_value=-5.0, max_value=5.0), min_size=8, max_size=8))
    def test_project_embed_round_trip_property(self, values):
        c = LieCoordinates(2, 4, values)
        assert tensor_to_lyndon(lyndon_to_tensor(c)).allclose(c, atol=1e-9)

    def test_from_dict_and_coefficient(self):
        c = LieCoordinates.from_dict(2, 2, {"1": 1.0, "12": 0.5})
        assert c.coefficient("12") == 0.5
        assert c.coefficient("2") == 0.0
        assert c.to_dict() == {"1": 1.0, "12": 0.5}
        with pytest.raises(DomainError):
            LieCoordinates.from_dict(2, 2, {"112": 1.0})

    def test_non_lie_tensor_rejected(self):
        e1 = TruncatedTensor.from_words(2, 2, {(1,): 1.0})
        square = tensor_product(e1, e1)
        with pytest.raises(NotLieElementError) as exc_info:
            tensor_to_lyndon(square)
        assert exc_info.value.degree == 2

    def test_scalar_part_rejected(self):
        with pytest.raises(DomainError):
            tensor_to_lyndon(TruncatedTensor.unit(2, 2))

    def test_by_degree(self):
        c = LieCoordinates.from_dict(2, 3, {"2": 2.0, "122": -1.0})
        degrees = c.by_degree()
        assert len(degrees) == 3
        assert [str(w) for w, _ in degrees[2]] == ["112", "122"]
        assert degrees[2][1][1] == -1.0


class TestBCH:
    """Baker-Campbell-Hausdorff on Lyndon coordinates."""

    def test_level_two(self):
        A = LieCoordinates.from_dict(2, 2, {"1": 1.0})
        B = LieCoordinates.from_dict(2, 2, {"2": 1.0})
        result = bch(A, B)
        expected = LieCoordinates.from_dict(2, 2, {"1": 1.0, "2": 1.0, "12": 0.5})
        assert result.allclose(expected, atol=1e-12)

    def test_level_three(self):
        """Coordinates on [1,[1,2]] and [[1,2],2]; the latter is -[2,[1,2]], so both are +1/12."""
        A = LieCoordinates.from_dict(2, 3, {"1": 1.0})
        B = LieCoordinates.from_dict(2, 3, {"2": 1.0})
        result = bch(A, B)
        assert result.coefficient("12") == pytest.approx(0.5, abs=1e-12)
        assert result.coefficient("112") == pytest.approx(1.0 / 12.0, abs=1e-12)
        assert result.coefficient("122") == pytest.approx(1.0 / 12.0, abs=1e-12)
        flipped = bracket_to_tensor((2, (1, 2)), 2, 3)
        assert bracket_to_tensor(standard_bracketing("122"), 2, 3) == -flipped

    def test_identities(self):
        rng = np.random.default_rng(5)
        A = LieCoordinates(2, 4, rng.standard_normal(lyndon_basis(2, 4).dimension))
        zero = LieCoordinates.zeros(2, 4)
        assert bch(A, zero).allclose(A)
        assert bch(zero, A).allclose(A)
        minus = LieCoordinates(2, 4, -A.values)
        assert bch(A, minus).allclose(zero)

    def test_matches_tensor_exponential(self):
        """exp(BCH(A, B)) equals exp(A) ⊗ exp(B)."""
        rng = np.random.default_rng(9)
        dim = lyndon_basis(3, 3).dimension
        A = LieCoordinates(3, 3, 0.3 * rng.standard_normal(dim))
        B = LieCoordinates(3, 3, 0.3 * rng.standard_normal(dim))
        left = tensor_exp(lyndon_to_tensor(bch(A, B)))
        right = tensor_product(tensor_exp(lyndon_to_tensor(A)), tensor_exp(lyndon_to_tensor(B)))
        assert left.allclose(right, atol=1e-10)

    @pytest.mark.parametrize("seed", [21, 22, 23, 24, 25])
    def test_log_signatures_compose_over_a_split(self, seed):
        """log S on [s,t] is the BCH product of the log-signatures on [s,u] and [u,t]."""
        rng = np.random.default_rng(seed)
        d, m = int(rng.integers(2, 4)), 4
        path = Path(np.linspace(0.0, 1.0, 12), np.cumsum(0.4 * rng.standard_normal((12, d)), axis=0))
        s, u, t = np.sort(rng.uniform(0.0, 1.0, 3))

        def log_signature(a, b):
            return tensor_to_lyndon(tensor_log(signature_on_interval(path, a, b, m)))

        assert bch(log_signature(s, u), log_signature(u, t)).allclose(log_signature(s, t), atol=1e-9)

    def test_shape_mismatch(self):
        with pytest.raises(DomainError):
            bch(LieCoordinates.zeros(2, 2), LieCoordinates.zeros(2, 3))
