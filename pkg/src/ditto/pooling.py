"""Learning-free sentence pooling strategies.

Averaging baselines over the static (h^0), last (h^L), or first-plus-last
hidden states; diagonal-attention (Ditto) weighting of the same states by a
chosen head's A_ii; and TF-IDF weighting of the first-last states. Ditto
sums are deliberately not normalized by sentence length: cosine scoring is
scale-free, and A_ii < 1 would make length-normalized values vanishingly
small.
"""

from __future__ import annotations

import concurrent.futures
import os
from dataclasses import dataclass, field

import numpy as np

from . import tfidf as tfidf_mod
from .encoder import EncoderOutput, HeadRef, diagonal_attention, forward_batch
from .errors import DegenerateInputError, PoolingSpecError
from .model_io import LoadedModel
from .tokenization import DEFAULT_MAX_LEN, TokenizedSentence, encode

STATIC_AVG = "static_avg"
LAST_AVG = "last_avg"
FIRST_LAST_AVG = "first_last_avg"
STATIC_DITTO = "static_ditto"
LAST_DITTO = "last_ditto"
FIRST_LAST_DITTO = "first_last_ditto"
FIRST_LAST_TFIDF = "first_last_tfidf"

STRATEGIES = (
    STATIC_AVG,
    LAST_AVG,
    FIRST_LAST_AVG,
    STATIC_DITTO,
    LAST_DITTO,
    FIRST_LAST_DITTO,
    FIRST_LAST_TFIDF,
)
DITTO_STRATEGIES = (STATIC_DITTO, LAST_DITTO, FIRST_LAST_DITTO)


@dataclass(frozen=True)
class PoolingSpec:
    """Which strategy, which head (Ditto), which TF-IDF model (tfidf pooling)."""

    strategy: str
    head: HeadRef | None = None
    tfidf: "tfidf_mod.TfidfModel | None" = field(default=None, repr=False)
    tfidf_path: str | None = None
    include_special_tokens: bool = True

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise PoolingSpecError(
                f"unknown pooling strategy {self.strategy!r}; choose from {', '.join(STRATEGIES)}"
            )
        if self.strategy in DITTO_STRATEGIES and self.head is None:
            raise PoolingSpecError(f"strategy {self.strategy} requires a head (e.g. 1-10)")
        if self.strategy == FIRST_LAST_TFIDF and self.tfidf is None:
            raise PoolingSpecError("strategy first_last_tfidf requires a trained TF-IDF model")

    @classmethod
    def parse(cls, text: str, include_special_tokens: bool = True) -> "PoolingSpec":
        """Parse the compact CLI form: "first_last_ditto@1-10", "first_last_tfidf:w.tsv"."""
        strategy, head, model, path = text.strip(), None, None, None
        if "@" in strategy:
            strategy, _, head_text = strategy.partition("@")
            head = HeadRef.parse(head_text)
        elif ":" in strategy:
            strategy, _, path = strategy.partition(":")
            if not path:
                raise PoolingSpecError(f"empty TF-IDF path in pooling spec {text!r}")
            model = tfidf_mod.TfidfModel.load(path)
        return cls(
            strategy=strategy,
            head=head,
            tfidf=model,
            tfidf_path=path,
            include_special_tokens=include_special_tokens,
        )

    def __str__(self) -> str:
        if self.head is not None:
            return f"{self.strategy}@{self.head}"
        if self.tfidf_path:
            return f"{self.strategy}:{self.tfidf_path}"
        return self.strategy


def _included(out: EncoderOutput, spec: PoolingSpec) -> np.ndarray:
    n = out.n_tokens
    if spec.include_special_tokens:
        return np.arange(n)
    if n <= 2:
        raise DegenerateInputError("pool: no non-special tokens to pool")
    return np.arange(1, n - 1)


def _token_tfidf_weights(s: TokenizedSentence, model: "tfidf_mod.TfidfModel") -> np.ndarray:
    """Per-token weight = parent word's tf-idf within this sentence; specials 0."""
    weights = np.zeros(s.n_tokens, dtype=np.float64)
    words = s.words()
    counts: dict[str, int] = {}
    for w in words:
        counts[w] = counts.get(w, 0) + 1
    for span in s.word_spans:
        weights[span.start : span.end] = model.weight(span.word, counts[span.word])
    return weights


def pool(out: EncoderOutput, spec: PoolingSpec, s: TokenizedSentence | None = None) -> np.ndarray:
    """Reduce one EncoderOutput to a fixed-size float32 sentence embedding."""
    if spec.strategy == FIRST_LAST_TFIDF and s is None:
        raise PoolingSpecError("first_last_tfidf pooling needs the TokenizedSentence for word spans")
    idx = _included(out, spec)
    if idx.size == 0:
        raise DegenerateInputError("pool: zero included tokens")
    h0 = out.hidden[0].astype(np.float64)
    hl = out.hidden[-1].astype(np.float64)

    if spec.strategy == STATIC_AVG:
        emb = h0[idx].mean(axis=0)
    elif spec.strategy == LAST_AVG:
        emb = hl[idx].mean(axis=0)
    elif spec.strategy == FIRST_LAST_AVG:
        emb = (h0[idx] + hl[idx]).sum(axis=0) / (2.0 * idx.size)
    elif spec.strategy in DITTO_STRATEGIES:
        diag = diagonal_attention(out, spec.head)
        w = diag.astype(np.float64)[idx][:, None]
        if spec.strategy == STATIC_DITTO:
            emb = (w * h0[idx]).sum(axis=0)
        elif spec.strategy == LAST_DITTO:
            emb = (w * hl[idx]).sum(axis=0)
        else:
            emb = 0.5 * (w * (h0[idx] + hl[idx])).sum(axis=0)
    else:  # FIRST_LAST_TFIDF
        w = _token_tfidf_weights(s, spec.tfidf)[idx]
        total = w.sum()
        if total <= 0.0:
            raise DegenerateInputError(
                "pool: all TF-IDF weights are zero for this sentence; no informative words"
            )
        emb = ((w[:, None] * (h0[idx] + hl[idx])).sum(axis=0)) / (2.0 * total)
    return emb.astype(np.float32)


def embed_corpus(
    sentences: list[str],
    model: LoadedModel,
    spec: PoolingSpec,
    max_len: int = DEFAULT_MAX_LEN,
    batch_size: int = 32,
    threads: int | None = None,
) -> np.ndarray:
    """Embed raw sentences in order; returns an (n, d) float32 matrix.

    Batches are independent, so they can be fanned out to a thread pool;
    assembly is by index, keeping the output order-deterministic.
    """
    vocab = model.require_vocab()
    tokenized = []
    for i, text in enumerate(sentences):
        try:
            tokenized.append(encode(text, vocab, max_len=max_len))
        except Exception as exc:
            exc.args = (f"sentence {i}: {exc}",)
            raise
    return embed_tokenized(tokenized, model, spec, batch_size=batch_size, threads=threads)


def embed_tokenized(
    tokenized: list[TokenizedSentence],
    model: LoadedModel,
    spec: PoolingSpec,
    batch_size: int = 32,
    threads: int | None = None,
) -> np.ndarray:
    if batch_size < 1:
        raise ValueError(f"batch_size must be >= 1, got {batch_size}")
    if not tokenized:
        return np.zeros((0, model.config.hidden_size), dtype=np.float32)
    starts = list(range(0, len(tokenized), batch_size))

    def run_chunk(start: int) -> list[np.ndarray]:
        chunk = tokenized[start : start + batch_size]
        try:
            outputs = forward_batch(chunk, model.weights, model.config)
            return [pool(out, spec, s) for out, s in zip(outputs, chunk)]
        except Exception as exc:
            exc.args = (f"sentences [{start}, {start + len(chunk)}): {exc}",)
            raise

    n_workers = threads if threads is not None else (os.cpu_count() or 1)
    n_workers = max(1, min(n_workers, len(starts)))
    rows: list[np.ndarray] = []
    if n_workers == 1:
        for start in starts:
            rows.extend(run_chunk(start))
    else:
        with concurrent.futures.ThreadPoolExecutor(max_workers=n_workers) as pool_exec:
            for chunk_rows in pool_exec.map(run_chunk, starts):
                rows.extend(chunk_rows)
    return np.stack(rows, axis=0)
