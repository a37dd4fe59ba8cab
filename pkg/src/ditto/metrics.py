"""Correlation and embedding-geometry diagnostics.

Correlations return raw values in [-1, 1]; the CLI scales to the 0-100
convention for reporting. Alignment, uniformity, and average cosine all
L2-normalize internally, so they are scale-invariant in the inputs.
"""

from __future__ import annotations

import numpy as np
from scipy.stats import rankdata

from .errors import DegenerateInputError, InsufficientDataError, UndefinedCorrelationError
from .tensor_ops import l2_normalize_rows


def _validated_pair(a, b) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    if a.shape != b.shape:
        raise InsufficientDataError(f"correlation: length mismatch {a.size} vs {b.size}")
    if a.size < 2:
        raise InsufficientDataError(f"correlation: need >= 2 points, got {a.size}")
    if np.all(a == a[0]) or np.all(b == b[0]):
        raise UndefinedCorrelationError("correlation undefined for constant input")
    return a, b


def pearson(a, b) -> float:
    """Product-moment correlation in float64."""
    a, b = _validated_pair(a, b)
    da = a - a.mean()
    db = b - b.mean()
    denom = np.sqrt((da @ da) * (db @ db))
    return float(np.clip(da @ db / denom, -1.0, 1.0))


def spearman(a, b) -> float:
    """Pearson correlation of mean-tie ranks."""
    a, b = _validated_pair(a, b)
    return pearson(rankdata(a), rankdata(b))


def alignment(pairs: list[tuple[np.ndarray, np.ndarray]]) -> float:
    """Mean squared L2 distance between normalized positive-pair embeddings."""
    if not pairs:
        raise InsufficientDataError("alignment: no pairs")
    x = l2_normalize_rows(np.stack([p[0] for p in pairs]))
    y = l2_normalize_rows(np.stack([p[1] for p in pairs]))
    return float(np.sum((x - y) ** 2, axis=1).mean())


def _pairwise_sq_dists(x: np.ndarray) -> np.ndarray:
    """Squared L2 distances over all unordered distinct row pairs."""
    gram = x @ x.T
    sq = np.diag(gram)
    d2 = sq[:, None] + sq[None, :] - 2.0 * gram
    iu = np.triu_indices(x.shape[0], k=1)
    return np.maximum(d2[iu], 0.0)


def uniformity(embeddings) -> float:
    """log mean exp(-2 ||x - y||^2) over all unordered distinct normalized pairs."""
    x = np.asarray(embeddings, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 2:
        raise InsufficientDataError("uniformity: need a matrix with >= 2 rows")
    x = l2_normalize_rows(x)
    return float(np.log(np.mean(np.exp(-2.0 * _pairwise_sq_dists(x)))))


def avg_cosine(embeddings) -> float:
    """Mean cosine similarity over all unordered distinct row pairs."""
    x = np.asarray(embeddings, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 2:
        raise InsufficientDataError("avg_cosine: need a matrix with >= 2 rows")
    norms = np.linalg.norm(x, axis=1)
    if np.any(norms == 0.0):
        raise DegenerateInputError("avg_cosine: zero-norm row")
    x = x / norms[:, None]
    gram = x @ x.T
    iu = np.triu_indices(x.shape[0], k=1)
    return float(np.mean(np.clip(gram[iu], -1.0, 1.0)))
