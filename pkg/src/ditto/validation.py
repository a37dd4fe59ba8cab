"""Input validation helpers shared by the estimator and the CLI."""

from __future__ import annotations

import numpy as np

from .errors import DegenerateInputError


def check_sentences(X) -> list[str]:
    """Validate a 1-D collection of strings; returns it as a list."""
    if isinstance(X, str):
        raise TypeError("expected a sequence of sentences, got a single string")
    sentences = list(X)
    for i, s in enumerate(sentences):
        if not isinstance(s, str):
            raise TypeError(f"sentence {i} is {type(s).__name__}, expected str")
    return sentences


def check_pairs(X) -> list[tuple[str, str]]:
    """Validate a collection of (sent1, sent2) string pairs."""
    pairs = []
    for i, item in enumerate(X):
        try:
            a, b = item
        except (TypeError, ValueError) as exc:
            raise TypeError(f"item {i} is not a (sent1, sent2) pair") from exc
        if not isinstance(a, str) or not isinstance(b, str):
            raise TypeError(f"pair {i} must hold two strings")
        pairs.append((a, b))
    return pairs


def check_scores(y, n: int) -> np.ndarray:
    scores = np.asarray(y, dtype=np.float64).ravel()
    if scores.size != n:
        raise ValueError(f"got {scores.size} scores for {n} pairs")
    if not np.all(np.isfinite(scores)):
        raise ValueError("scores must be finite")
    return scores


def check_embeddings(X) -> np.ndarray:
    x = np.asarray(X, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] == 0:
        raise ValueError(f"expected a non-empty 2-D embedding matrix, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise DegenerateInputError("embedding matrix contains NaN/Inf")
    return x
