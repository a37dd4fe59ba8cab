"""Word-level TF-IDF weights trained on a one-sentence-per-line corpus.

One line is one document. Words come from the tokenizer's basic
(pre-WordPiece) stage so the vocabulary lines up with word_spans. The
canonical definition here is idf = log2(n_docs / df) with raw in-sentence
term counts and no vector normalization; unseen words fall back to df = 1.
"""

from __future__ import annotations

import math
from collections import Counter

from .errors import DataFormatError
from .tokenization import basic_tokenize


class TfidfModel:
    """Document frequencies plus a lazy idf cache."""

    def __init__(self, df: dict[str, int], n_docs: int):
        if n_docs < 1:
            raise ValueError(f"n_docs must be >= 1, got {n_docs}")
        bad = {w: c for w, c in df.items() if not 1 <= c <= n_docs}
        if bad:
            raise ValueError(f"document frequencies out of [1, {n_docs}]: {dict(list(bad.items())[:3])}")
        self.df = dict(df)
        self.n_docs = n_docs
        self._idf_cache: dict[str, float] = {}

    def idf(self, word: str) -> float:
        cached = self._idf_cache.get(word)
        if cached is None:
            cached = math.log2(self.n_docs / self.df.get(word, 1))
            self._idf_cache[word] = cached
        return cached

    def weight(self, word: str, tf: int) -> float:
        """tf * idf(word). `tf` is the word's raw count within one sentence."""
        if tf < 1:
            raise ValueError(f"tf must be >= 1, got {tf}")
        return tf * self.idf(word)

    def sentence_weights(self, words: list[str]) -> dict[str, float]:
        """Weight of every distinct word of one sentence (tf counted in place)."""
        counts = Counter(words)
        return {w: self.weight(w, c) for w, c in counts.items()}

    def save(self, path) -> None:
        """n_docs header line, then sorted "word<TAB>df" lines."""
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write(f"n_docs\t{self.n_docs}\n")
            for word in sorted(self.df):
                f.write(f"{word}\t{self.df[word]}\n")

    @classmethod
    def load(cls, path) -> "TfidfModel":
        with open(path, encoding="utf-8") as f:
            header = f.readline().rstrip("\n")
            parts = header.split("\t")
            if len(parts) != 2 or parts[0] != "n_docs":
                raise DataFormatError(f"{path}:1: expected 'n_docs<TAB><int>' header, got {header!r}")
            try:
                n_docs = int(parts[1])
            except ValueError as exc:
                raise DataFormatError(f"{path}:1: bad n_docs value {parts[1]!r}") from exc
            df: dict[str, int] = {}
            for lineno, line in enumerate(f, start=2):
                line = line.rstrip("\n")
                if not line:
                    continue
                word, sep, count = line.partition("\t")
                if not sep:
                    raise DataFormatError(f"{path}:{lineno}: expected 'word<TAB>df', got {line!r}")
                df[word] = int(count)
        return cls(df, n_docs)


def train(corpus_path, lowercase: bool = True) -> TfidfModel:
    """Count document frequencies over the basic-stage tokens of each line."""
    df: Counter[str] = Counter()
    n_docs = 0
    with open(corpus_path, encoding="utf-8") as f:
        for line in f:
            words = basic_tokenize(line, lowercase=lowercase)
            if not words:
                continue
            n_docs += 1
            df.update(set(words))
    if n_docs == 0:
        raise DataFormatError(f"{corpus_path}: empty corpus (no non-blank lines)")
    return TfidfModel(dict(df), n_docs)
