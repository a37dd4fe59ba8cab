import numpy as np
import pytest

from ditto.errors import (
    DegenerateInputError,
    InsufficientDataError,
    UndefinedCorrelationError,
)
from ditto.metrics import alignment, avg_cosine, pearson, spearman, uniformity

from .oracles import (
    alignment_oracle,
    avg_cosine_oracle,
    pearson_oracle,
    spearman_oracle,
    uniformity_oracle,
)


class TestSpearman:
    def test_increasing_vs_itself(self):
        assert spearman([1, 2, 3, 4], [1, 2, 3, 4]) == pytest.approx(1.0, abs=1e-12)

    def test_increasing_vs_reversed(self):
        assert spearman([1, 2, 3, 4], [4, 3, 2, 1]) == pytest.approx(-1.0, abs=1e-12)

    def test_ties_example(self):
        a = [1.0, 2.0, 2.0, 4.0]
        b = [1.0, 3.0, 2.0, 4.0]
        assert spearman(a, b) == pytest.approx(spearman_oracle(a, b), abs=1e-12)

    def test_against_oracle_random_with_ties(self):
        rng = np.random.default_rng(7)
        for _ in range(300):
            n = int(rng.integers(3, 12))
            a = rng.integers(0, 5, size=n).astype(float)
            b = rng.integers(0, 5, size=n).astype(float)
            if np.all(a == a[0]) or np.all(b == b[0]):
                continue
            assert spearman(a, b) == pytest.approx(spearman_oracle(a, b), abs=1e-12)

    def test_monotone_transform_invariance(self):
        rng = np.random.default_rng(8)
        a = rng.normal(size=30)
        b = rng.normal(size=30)
        assert spearman(np.exp(a), b) == pytest.approx(spearman(a, b), abs=1e-12)
        assert spearman(a, 3.0 * b + 1.0) == pytest.approx(spearman(a, b), abs=1e-12)

    def test_constant_input_error(self):
        with pytest.raises(UndefinedCorrelationError):
            spearman([1.0, 1.0, 1.0], [1.0, 2.0, 3.0])

    def test_length_mismatch(self):
        with pytest.raises(InsufficientDataError):
            spearman([1.0, 2.0], [1.0, 2.0, 3.0])

    def test_too_short(self):
        with pytest.raises(InsufficientDataError):
            spearman([1.0], [2.0])


class TestPearson:
    def test_self(self):
        v = [0.4, 1.9, -2.0, 3.3]
        assert pearson(v, v) == pytest.approx(1.0, abs=1e-12)

    def test_negated(self):
        v = [0.4, 1.9, -2.0, 3.3]
        assert pearson(v, [-x for x in v]) == pytest.approx(-1.0, abs=1e-12)

    def test_closed_form_example(self):
        assert pearson([1, 2, 3], [1, 2, 4]) == pytest.approx(0.98198, abs=1e-5)

    def test_against_oracle(self):
        rng = np.random.default_rng(9)
        for _ in range(200):
            n = int(rng.integers(3, 15))
            a = rng.normal(size=n)
            b = rng.normal(size=n)
            assert pearson(a, b) == pytest.approx(pearson_oracle(a, b), abs=1e-12)

    def test_positive_affine_invariance(self):
        rng = np.random.default_rng(10)
        a = rng.normal(size=25)
        b = rng.normal(size=25)
        assert pearson(2.5 * a + 3.0, b) == pytest.approx(pearson(a, b), abs=1e-12)

    def test_constant_error(self):
        with pytest.raises(UndefinedCorrelationError):
            pearson([2.0, 2.0], [1.0, 3.0])


class TestAlignment:
    def test_identical_pairs_zero(self):
        rng = np.random.default_rng(11)
        pairs = [(v, v.copy()) for v in rng.normal(size=(5, 8))]
        assert alignment(pairs) == pytest.approx(0.0, abs=1e-9)

    def test_antipodal_pairs_four(self):
        v = np.array([0.6, -0.8, 0.0])
        assert alignment([(v, -v)]) == pytest.approx(4.0, abs=1e-9)

    def test_mixed_set_matches_oracle(self):
        rng = np.random.default_rng(12)
        pairs = [(rng.normal(size=6), rng.normal(size=6)) for _ in range(10)]
        assert alignment(pairs) == pytest.approx(alignment_oracle(pairs), abs=1e-9)

    def test_scale_invariance(self):
        rng = np.random.default_rng(13)
        pairs = [(rng.normal(size=6), rng.normal(size=6)) for _ in range(5)]
        scaled = [(5.0 * x, 0.25 * y) for x, y in pairs]
        assert alignment(scaled) == pytest.approx(alignment(pairs), abs=1e-9)

    def test_zero_vector_error(self):
        with pytest.raises(DegenerateInputError):
            alignment([(np.zeros(3), np.ones(3))])

    def test_empty_error(self):
        with pytest.raises(InsufficientDataError):
            alignment([])


class TestUniformity:
    def test_all_identical_zero(self):
        rows = np.tile([0.3, 0.4, 1.2], (4, 1))
        assert uniformity(rows) == pytest.approx(0.0, abs=1e-9)

    def test_antipodal_closed_form(self):
        rows = np.array([[1.0, 0.0], [-1.0, 0.0]])
        assert uniformity(rows) == pytest.approx(-8.0, abs=1e-9)

    def test_random_matches_oracle(self):
        rng = np.random.default_rng(14)
        rows = rng.normal(size=(9, 7))
        assert uniformity(rows) == pytest.approx(uniformity_oracle(rows), abs=1e-9)

    def test_scale_invariance(self):
        rng = np.random.default_rng(15)
        rows = rng.normal(size=(6, 5))
        assert uniformity(10.0 * rows) == pytest.approx(uniformity(rows), abs=1e-9)

    def test_needs_two_rows(self):
        with pytest.raises(InsufficientDataError):
            uniformity(np.ones((1, 4)))


class TestAvgCosine:
    def test_all_identical_one(self):
        rows = np.tile([1.0, 2.0, 3.0], (5, 1))
        assert avg_cosine(rows) == pytest.approx(1.0, abs=1e-9)

    def test_orthonormal_zero(self):
        assert avg_cosine(np.eye(4)) == pytest.approx(0.0, abs=1e-12)

    def test_random_matches_oracle(self):
        rng = np.random.default_rng(16)
        rows = rng.normal(size=(8, 6))
        assert avg_cosine(rows) == pytest.approx(avg_cosine_oracle(rows), abs=1e-9)

    def test_permutation_invariance(self):
        rng = np.random.default_rng(17)
        rows = rng.normal(size=(7, 5))
        perm = rng.permutation(7)
        assert avg_cosine(rows[perm]) == pytest.approx(avg_cosine(rows), abs=1e-12)

    def test_zero_row_error(self):
        with pytest.raises(DegenerateInputError):
            avg_cosine(np.array([[1.0, 0.0], [0.0, 0.0]]))
