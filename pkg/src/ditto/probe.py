"""Perturbed-masking probe: impact matrices and their TF-IDF correlation.

For every ordered pair of non-special positions (i, j), stage one masks
token i and records its hidden representation; stage two masks {i, j}; the
impact F_ij is the Euclidean distance between the two position-i vectors.
Masking the same position twice changes nothing, so the diagonal is exactly
zero. Specials are never masked and never appear in F.
"""

from __future__ import annotations

import concurrent.futures
import csv
import json
import os
from dataclasses import dataclass

import numpy as np

from .encoder import forward_batch
from .errors import DegenerateInputError, InsufficientDataError
from .metrics import pearson, spearman
from .model_io import LoadedModel
from .tfidf import TfidfModel
from .tokenization import (
    DEFAULT_MAX_LEN,
    TokenizedSentence,
    encode,
    mask_positions,
    non_special_positions,
)


@dataclass(frozen=True)
class ImpactMatrix:
    """n x n impact values over non-special token positions.

    Row i = predicted position, column j = additionally masked position.
    `tokens` holds the subword strings at those positions, so the CSV plus
    sidecar is directly plottable as a labelled heatmap.
    """

    f: np.ndarray
    sentence: TokenizedSentence
    positions: tuple[int, ...]
    repr_layer: int
    tokens: tuple[str, ...] = ()

    @property
    def n(self) -> int:
        return self.f.shape[0]

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            for row in self.f:
                writer.writerow([f"{v:.6g}" for v in row])

    def sidecar(self) -> dict:
        return {
            "text": self.sentence.text,
            "tokens": list(self.tokens),
            "token_positions": list(self.positions),
            "words": self.sentence.words(),
            "word_spans": [[s.start, s.end] for s in self.sentence.word_spans],
            "repr_layer": self.repr_layer,
        }

    def save(self, csv_path, json_path) -> None:
        self.to_csv(csv_path)
        with open(json_path, "w", encoding="utf-8") as fh:
            json.dump(self.sidecar(), fh, indent=2, sort_keys=True)
            fh.write("\n")


def impact_matrix(
    s: TokenizedSentence,
    model: LoadedModel,
    repr_layer: int | None = None,
    batch_size: int = 32,
    threads: int | None = None,
) -> ImpactMatrix:
    """Impact matrix for one tokenized sentence, batched over mask variants.

    Needs n forwards for stage one and n*(n-1) for stage two, where n is the
    number of non-special tokens. The (i, j) variants are independent, so
    batches can fan out to a thread pool; F is assembled by index.
    """
    vocab = model.require_vocab()
    config = model.config
    layer = config.num_layers if repr_layer is None else repr_layer
    if not 0 <= layer <= config.num_layers:
        raise IndexError(f"repr_layer {layer} out of range [0, {config.num_layers}]")
    positions = non_special_positions(s, vocab)
    n = len(positions)
    if n == 0:
        raise DegenerateInputError("impact_matrix: sentence has no non-special tokens")

    def rep_at(variants: list[TokenizedSentence], keep: list[int]) -> np.ndarray:
        starts = list(range(0, len(variants), batch_size))

        def run_chunk(start: int) -> list[np.ndarray]:
            chunk = variants[start : start + batch_size]
            outs = forward_batch(chunk, model.weights, config)
            return [
                out.hidden[layer][pos]
                for out, pos in zip(outs, keep[start : start + batch_size])
            ]

        n_workers = threads if threads is not None else (os.cpu_count() or 1)
        n_workers = max(1, min(n_workers, len(starts)))
        reps: list[np.ndarray] = []
        if n_workers == 1:
            for start in starts:
                reps.extend(run_chunk(start))
        else:
            with concurrent.futures.ThreadPoolExecutor(max_workers=n_workers) as pool:
                for chunk_reps in pool.map(run_chunk, starts):
                    reps.extend(chunk_reps)
        return np.stack(reps).astype(np.float64)

    stage1 = [mask_positions(s, {p}, vocab) for p in positions]
    rep1 = rep_at(stage1, positions)

    pair_variants: list[TokenizedSentence] = []
    pair_index: list[tuple[int, int]] = []
    keep: list[int] = []
    for i, pi in enumerate(positions):
        for j, pj in enumerate(positions):
            if i == j:
                continue
            pair_variants.append(mask_positions(s, {pi, pj}, vocab))
            pair_index.append((i, j))
            keep.append(pi)
    rep2 = rep_at(pair_variants, keep) if pair_variants else np.zeros((0, config.hidden_size))

    f = np.zeros((n, n), dtype=np.float32)
    for (i, j), r2 in zip(pair_index, rep2):
        f[i, j] = np.linalg.norm(rep1[i] - r2)
    tokens = tuple(vocab.id_to_token[s.ids[p]] for p in positions)
    return ImpactMatrix(
        f=f, sentence=s, positions=tuple(positions), repr_layer=layer, tokens=tokens
    )


def mean_impact(m: ImpactMatrix) -> np.ndarray:
    """Column means of F aggregated from subword columns to words.

    Aligned with the sentence's word_spans (truncated spans keep their
    surviving columns).
    """
    col_means = m.f.mean(axis=0, dtype=np.float64)
    pos_to_col = {pos: col for col, pos in enumerate(m.positions)}
    values = []
    for span in m.sentence.word_spans:
        cols = [pos_to_col[p] for p in range(span.start, span.end)]
        values.append(col_means[cols].mean())
    return np.asarray(values, dtype=np.float64)


def impact_tfidf_correlation(
    corpus: list[str],
    model: LoadedModel,
    tfidf: TfidfModel,
    repr_layer: int | None = None,
    max_len: int = DEFAULT_MAX_LEN,
    batch_size: int = 32,
    threads: int | None = None,
) -> tuple[float, float]:
    """Pool (mean impact, TF-IDF weight) per word over a corpus; return (pearson, spearman)."""
    if not corpus:
        raise InsufficientDataError("impact_tfidf_correlation: empty corpus")
    vocab = model.require_vocab()
    impacts: list[float] = []
    weights: list[float] = []
    for text in corpus:
        s = encode(text, vocab, max_len=max_len)
        if not s.word_spans:
            continue
        m = impact_matrix(s, model, repr_layer=repr_layer, batch_size=batch_size, threads=threads)
        values = mean_impact(m)
        word_weights = tfidf.sentence_weights(s.words())
        for span, value in zip(m.sentence.word_spans, values):
            impacts.append(float(value))
            weights.append(word_weights[span.word])
    if len(impacts) < 2:
        raise InsufficientDataError(
            f"impact_tfidf_correlation: only {len(impacts)} (impact, weight) pairs"
        )
    return pearson(impacts, weights), spearman(impacts, weights)
