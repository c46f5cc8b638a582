"""Products, spectral radii and benchmark sets."""

import cmath
import math

import numpy as np
import pytest

from jsrlab.errors import DomainError, InvalidWordError, NumericError, ShapeError
from jsrlab.schemas import Matrix, MatrixSet, SwitchingWord
from jsrlab.tools.matset import (
    benchmark_family,
    benchmark_sigma2,
    benchmark_sigma8,
    eigenvalues,
    product_of_word,
    spectral_radius,
)


def _companion(roots):
    """Companion matrix whose characteristic polynomial has the given roots."""
    coefficients = np.poly(roots)
    n = len(roots)
    c = np.zeros((n, n))
    c[0, :] = -coefficients[1:]
    c[np.arange(1, n), np.arange(0, n - 1)] = 1.0
    return c


class TestBenchmarks:
    def test_sigma2_literals(self):
        arrays = benchmark_sigma2().arrays()
        assert arrays.shape == (2, 2, 2)
        assert arrays[0].tolist() == [[1.5519, 0.4474], [7.6412, 7.4716]]
        assert arrays[1].tolist() == [[0.4750, 9.1755], [1.8955, 0.1850]]

    def test_sigma8_case_table(self):
        sigma8 = benchmark_sigma8()
        arrays = sigma8.arrays()
        assert sigma8.n == 8 and sigma8.M == 8
        for i in range(8):
            for r in range(8):
                for c in range(8):
                    if i == 0:
                        expected = 1.0 if c == 0 else 0.0
                    elif c == i:
                        expected = -1.0 if r == i else 1.0
                    else:
                        expected = 0.0
                    assert arrays[i, r, c] == expected, (i, r, c)

    def test_family_names(self):
        assert benchmark_family(8).name == "sigma8"
        assert benchmark_family(3).name == "family:3"
        assert benchmark_family(5).M == 5

    def test_family_rejects_small_n(self):
        with pytest.raises(DomainError):
            benchmark_family(1)


class TestProductOfWord:
    def test_order_of_factors(self, sigma2):
        a1, a2 = sigma2.arrays()
        product = product_of_word(sigma2, [1, 2, 2])
        np.testing.assert_allclose(product.to_array(), a1 @ a2 @ a2)

    def test_accepts_switching_word(self, sigma2):
        a1, a2 = sigma2.arrays()
        product = product_of_word(sigma2, SwitchingWord(indices=[2, 1]))
        np.testing.assert_allclose(product.to_array(), a2 @ a1)

    def test_concatenation(self, rng):
        matrix_set = MatrixSet(n=3, matrices=rng.standard_normal((3, 3, 3)).tolist())
        for _ in range(100):
            first = rng.integers(1, 4, size=int(rng.integers(1, 6))).tolist()
            second = rng.integers(1, 4, size=int(rng.integers(1, 6))).tolist()
            joined = product_of_word(matrix_set, first + second).to_array()
            split = product_of_word(matrix_set, first).to_array() @ product_of_word(matrix_set, second).to_array()
            np.testing.assert_allclose(joined, split, rtol=1e-10, atol=1e-12 * max(1.0, np.abs(split).max()))

    @pytest.mark.parametrize("word", [[0], [3], [1, 2, 5], []])
    def test_invalid_words(self, sigma2, word):
        with pytest.raises(InvalidWordError):
            product_of_word(sigma2, word)

    def test_homogeneity(self, sigma2):
        c = 0.37
        word = [1, 2, 1, 1]
        scaled = product_of_word(sigma2.scaled(c), word).to_array()
        np.testing.assert_allclose(scaled, c ** len(word) * product_of_word(sigma2, word).to_array())


class TestSpectralRadius:
    def test_closed_form_2x2(self):
        assert spectral_radius(np.array([[1.0, 2.0], [3.0, 4.0]])) == pytest.approx((5 + math.sqrt(33)) / 2)

    def test_complex_pair_2x2(self):
        assert spectral_radius(np.array([[0.0, -2.0], [2.0, 0.0]])) == pytest.approx(2.0)

    def test_scalar(self):
        assert spectral_radius(np.array([[-3.5]])) == 3.5

    def test_nilpotent(self):
        jordan = np.diag([1.0, 1.0, 1.0], k=1)
        assert spectral_radius(jordan) == pytest.approx(0.0, abs=1e-12)

    def test_companion_roots(self):
        roots = [1.0, 2.0, 3.0, -4.0, 0.5]
        found = np.sort_complex(eigenvalues(_companion(roots)))
        np.testing.assert_allclose(found.real, np.sort(roots), atol=1e-8)
        np.testing.assert_allclose(found.imag, 0.0, atol=1e-8)

    def test_complex_pair_in_similarity(self, rng):
        # eigenvalues ±2i and 1 hidden behind a random similarity
        block = np.array([[0.0, -2.0, 0.0], [2.0, 0.0, 0.0], [0.0, 0.0, 1.0]])
        s = rng.standard_normal((3, 3)) + 3.0 * np.eye(3)
        a = s @ block @ np.linalg.inv(s)
        np.testing.assert_allclose(np.sort(np.abs(eigenvalues(a))), [1.0, 2.0, 2.0], atol=1e-8)
        assert spectral_radius(a) == pytest.approx(2.0, rel=1e-8)

    def test_random_2x2_against_characteristic_roots(self, rng):
        for _ in range(1000):
            a = rng.standard_normal((2, 2)) * rng.uniform(0.01, 100.0)
            trace, det = a[0, 0] + a[1, 1], a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]
            root = cmath.sqrt(trace * trace - 4 * det)
            expected = max(abs((trace + root) / 2), abs((trace - root) / 2))
            assert spectral_radius(a) == pytest.approx(expected, rel=1e-9, abs=1e-12)

    def test_random_against_numpy(self, rng):
        for _ in range(100):
            n = int(rng.integers(3, 9))
            a = rng.standard_normal((n, n))
            expected = np.abs(np.linalg.eigvals(a)).max()
            assert spectral_radius(a) == pytest.approx(expected, rel=1e-8)

    def test_homogeneity(self, rng):
        for _ in range(100):
            a = rng.standard_normal((4, 4))
            c = float(rng.uniform(-3, 3))
            assert spectral_radius(c * a) == pytest.approx(abs(c) * spectral_radius(a), rel=1e-8, abs=1e-12)

    def test_accepts_matrix_model(self):
        assert spectral_radius(Matrix(entries=[[2.0, 0.0], [0.0, -5.0]])) == pytest.approx(5.0)

    def test_non_finite(self):
        with pytest.raises(NumericError):
            spectral_radius(np.array([[1.0, np.nan], [0.0, 1.0]]))

    def test_non_square(self):
        with pytest.raises(ShapeError):
            spectral_radius(np.ones((2, 3)))


class TestMatrixSetSchema:
    def test_mismatched_dimensions(self):
        with pytest.raises(ValueError):
            MatrixSet(n=2, matrices=[[[1.0, 0.0], [0.0, 1.0]], [[1.0]]])

    def test_json_round_trip(self, sigma2):
        restored = MatrixSet.model_validate_json(sigma2.model_dump_json())
        np.testing.assert_array_equal(restored.arrays(), sigma2.arrays())
