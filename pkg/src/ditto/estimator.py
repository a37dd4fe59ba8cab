"""scikit-learn style front door for the pooling pipeline.

DittoSentenceEncoder is a stateless-by-default transformer: sentences in,
embedding matrix out. The only thing `fit` can learn is the attention-head
coordinate, via the dev-set grid search, when a Ditto strategy is chosen
without an explicit head. That keeps the estimator compatible with
Pipeline/GridSearchCV-style composition while staying true to the
learning-free method.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from . import pooling, sts
from .encoder import HeadRef
from .metrics import spearman
from .model_io import LoadedModel
from .tfidf import TfidfModel
from .tokenization import DEFAULT_MAX_LEN
from .validation import check_pairs, check_scores, check_sentences


class DittoSentenceEncoder(BaseEstimator, TransformerMixin):
    """Sentence -> embedding transformer over an exported encoder checkpoint.

    Parameters
    ----------
    model_dir : str
        Directory with config.json / model.safetensors / vocab.txt.
    strategy : str
        One of the pooling strategies (default "first_last_ditto").
    head : str or None
        "l-h" coordinate for Ditto strategies. When None, fit() selects it
        by Spearman grid search over (X, y) dev pairs.
    tfidf_path : str or None
        Trained TF-IDF model file, required by "first_last_tfidf".
    """

    def __init__(
        self,
        model_dir: str,
        strategy: str = pooling.FIRST_LAST_DITTO,
        head: str | None = None,
        tfidf_path: str | None = None,
        include_special_tokens: bool = True,
        max_len: int = DEFAULT_MAX_LEN,
        batch_size: int = 32,
        threads: int | None = None,
    ):
        self.model_dir = model_dir
        self.strategy = strategy
        self.head = head
        self.tfidf_path = tfidf_path
        self.include_special_tokens = include_special_tokens
        self.max_len = max_len
        self.batch_size = batch_size
        self.threads = threads

    def _load(self) -> LoadedModel:
        if not hasattr(self, "model_"):
            self.model_ = LoadedModel.load(self.model_dir)
        return self.model_

    def _spec(self) -> pooling.PoolingSpec:
        head = getattr(self, "head_", None) or self.head
        tfidf = None
        if self.strategy == pooling.FIRST_LAST_TFIDF:
            if self.tfidf_path is None:
                raise ValueError("first_last_tfidf needs tfidf_path")
            tfidf = TfidfModel.load(self.tfidf_path)
        spec = pooling.PoolingSpec(
            strategy=self.strategy,
            head=HeadRef.parse(head) if isinstance(head, str) else head,
            tfidf=tfidf,
            tfidf_path=self.tfidf_path,
            include_special_tokens=self.include_special_tokens,
        )
        if spec.head is not None:
            spec.head.check(self._load().config)
        return spec

    def fit(self, X=None, y=None):
        """Load the model; grid-search the head from (pairs, scores) if needed.

        X : iterable of (sent1, sent2) pairs, required only when a Ditto
            strategy was configured without a head.
        y : gold similarity scores aligned with X.
        """
        model = self._load()
        self.head_ = self.head
        if self.strategy in pooling.DITTO_STRATEGIES and self.head is None:
            if X is None or y is None:
                raise ValueError(
                    "fit needs (sentence pairs, scores) to grid-search the attention head; "
                    "pass head='l-h' to skip the search"
                )
            pairs = check_pairs(X)
            scores = check_scores(y, len(pairs))
            dev = [
                sts.StsExample(task="DEV", subset="dev", split="dev",
                               score=float(score), sent1=a, sent2=b)
                for (a, b), score in zip(pairs, scores)
            ]
            ranking = sts.grid_search_head(
                dev,
                model,
                strategy=self.strategy,
                max_len=self.max_len,
                batch_size=self.batch_size,
                include_special_tokens=self.include_special_tokens,
            )
            self.head_ = str(ranking[0][0])
            self.dev_score_ = ranking[0][1]
            self.ranking_ = ranking
        self.spec_ = self._spec()
        return self

    def transform(self, X) -> np.ndarray:
        """Embed sentences; rows follow input order."""
        sentences = check_sentences(X)
        if not hasattr(self, "spec_"):
            self.fit()
        return pooling.embed_corpus(
            sentences,
            self._load(),
            self.spec_,
            max_len=self.max_len,
            batch_size=self.batch_size,
            threads=self.threads,
        )

    def score(self, X, y) -> float:
        """Spearman correlation between pair cosine similarities and y."""
        pairs = check_pairs(X)
        gold = check_scores(y, len(pairs))
        flat: list[str] = [s for pair in pairs for s in pair]
        emb = self.transform(flat).astype(np.float64)
        norms = np.linalg.norm(emb, axis=1, keepdims=True)
        norms[norms == 0.0] = 1.0
        emb /= norms
        sims = [float(emb[2 * i] @ emb[2 * i + 1]) for i in range(len(pairs))]
        return spearman(sims, gold)

    def __sklearn_is_fitted__(self) -> bool:
        return hasattr(self, "spec_")
