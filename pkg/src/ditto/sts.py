"""STS benchmark ingestion, evaluation, and the attention-head grid search.

Evaluation follows the "all" setting: per task, every subset's pairs are
pooled and a single Spearman correlation is computed between pair cosine
similarities and gold scores, then task scores (x100) are averaged. No
regressor is ever fit.
"""

from __future__ import annotations

import warnings
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import pooling
from .encoder import HeadRef, forward_batch
from .errors import DataFormatError, InsufficientDataError
from .metrics import pearson, spearman
from .model_io import LoadedModel
from .tfidf import TfidfModel
from .tokenization import DEFAULT_MAX_LEN, TokenizedSentence, encode, parse_pretokenized_line

TASKS = ("STS12", "STS13", "STS14", "STS15", "STS16", "STSB", "SICKR")
SPLITS = ("train", "dev", "test")


@dataclass(frozen=True)
class StsExample:
    task: str
    subset: str
    split: str
    score: float
    sent1: str
    sent2: str
    # sent1/sent2 hold space-separated token ids when the tree is pretokenized.
    pretokenized: bool = False


@dataclass(frozen=True)
class EvalReport:
    """Per-task Spearman x100 plus their arithmetic mean and run provenance."""

    per_task: dict[str, float]
    average: float
    config: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "per_task": {t: round(v, 4) for t, v in self.per_task.items()},
            "average": round(self.average, 4),
            "config": self.config,
        }

    def format_table(self) -> str:
        tasks = [t for t in TASKS if t in self.per_task]
        tasks += [t for t in self.per_task if t not in TASKS]
        header = "  ".join(f"{t:>7}" for t in tasks) + f"  {'Avg.':>7}"
        row = "  ".join(f"{self.per_task[t]:7.2f}" for t in tasks) + f"  {self.average:7.2f}"
        return header + "\n" + row


def _parse_line(line: str, path, lineno: int, pretokenized: bool) -> tuple[float, str, str]:
    parts = line.split("\t")
    if len(parts) != 3:
        raise DataFormatError(f"{path}:{lineno}: expected 'score<TAB>sent1<TAB>sent2', got {len(parts)} fields")
    try:
        score = float(parts[0])
    except ValueError as exc:
        raise DataFormatError(f"{path}:{lineno}: bad score {parts[0]!r}") from exc
    if not 0.0 <= score <= 5.0:
        raise DataFormatError(f"{path}:{lineno}: score {score} outside [0, 5]")
    s1, s2 = parts[1], parts[2]
    if not pretokenized and (not s1.strip() or not s2.strip()):
        raise DataFormatError(f"{path}:{lineno}: empty sentence")
    return score, s1, s2


def load_sts(
    root, tasks: tuple[str, ...] = TASKS, pretokenized: bool = False
) -> list[StsExample]:
    """Read a canonical TSV tree: <root>/<TASK>/<subset>.<split>[.ids].tsv.

    With `pretokenized`, sentence fields hold space-separated token ids.
    """
    root = Path(root)
    examples: list[StsExample] = []
    suffix = ".ids.tsv" if pretokenized else ".tsv"
    for task in tasks:
        task_dir = root / task
        if not task_dir.is_dir():
            raise DataFormatError(f"missing task directory: {task_dir}")
        files = sorted(p for p in task_dir.iterdir() if p.name.endswith(suffix))
        if not pretokenized:
            files = [p for p in files if not p.name.endswith(".ids.tsv")]
        for path in files:
            stem = path.name[: -len(suffix)]
            subset, _, split = stem.rpartition(".")
            if split not in SPLITS:
                raise DataFormatError(f"{path}: cannot parse split from filename (got {split!r})")
            file_examples = 0
            with open(path, encoding="utf-8") as f:
                for lineno, line in enumerate(f, start=1):
                    line = line.rstrip("\n")
                    if not line:
                        continue
                    score, s1, s2 = _parse_line(line, path, lineno, pretokenized)
                    if pretokenized:
                        try:
                            parse_pretokenized_line(s1)
                            parse_pretokenized_line(s2)
                        except ValueError as exc:
                            raise DataFormatError(f"{path}:{lineno}: {exc}") from exc
                    examples.append(
                        StsExample(task=task, subset=subset or stem, split=split,
                                   score=score, sent1=s1, sent2=s2, pretokenized=pretokenized)
                    )
                    file_examples += 1
            if file_examples == 0:
                warnings.warn(f"{path}: no examples", stacklevel=2)
    return examples


def count_by(examples: list[StsExample]) -> dict[tuple[str, str], int]:
    counts: dict[tuple[str, str], int] = defaultdict(int)
    for ex in examples:
        counts[(ex.task, ex.split)] += 1
    return dict(counts)


def _tokenize_example_sentences(
    examples: list[StsExample], model: LoadedModel, max_len: int
) -> tuple[list[TokenizedSentence], dict[str, int]]:
    """Unique sentences (first-appearance order) and a text -> row index map."""
    index: dict[str, int] = {}
    tokenized: list[TokenizedSentence] = []
    for i, ex in enumerate(examples):
        for text in (ex.sent1, ex.sent2):
            if text in index:
                continue
            try:
                if ex.pretokenized:
                    s = parse_pretokenized_line(text, vocab=model.vocab)
                    if s.n_tokens > max_len:
                        s = TokenizedSentence(
                            text=text,
                            ids=s.ids[: max_len - 1] + (s.ids[-1],),
                            word_spans=tuple(sp for sp in s.word_spans if sp.end <= max_len - 1),
                        )
                else:
                    s = encode(text, model.require_vocab(), max_len=max_len)
            except Exception as exc:
                exc.args = (f"example {i} ({ex.task}/{ex.subset}/{ex.split}): {exc}",)
                raise
            index[text] = len(tokenized)
            tokenized.append(s)
    return tokenized, index


def evaluate(
    examples: list[StsExample],
    model: LoadedModel,
    spec: pooling.PoolingSpec,
    max_len: int = DEFAULT_MAX_LEN,
    batch_size: int = 32,
    threads: int | None = None,
) -> EvalReport:
    """Spearman x100 per task over the given examples, plus their mean.

    Unique sentences are embedded once and similarities looked up per pair.
    """
    if not examples:
        raise InsufficientDataError("evaluate: no examples")
    tokenized, index = _tokenize_example_sentences(examples, model, max_len)
    matrix = pooling.embed_tokenized(tokenized, model, spec, batch_size=batch_size, threads=threads)
    normed = matrix.astype(np.float64)
    norms = np.linalg.norm(normed, axis=1, keepdims=True)
    norms[norms == 0.0] = 1.0
    normed /= norms

    by_task: dict[str, list[StsExample]] = defaultdict(list)
    for ex in examples:
        by_task[ex.task].append(ex)
    per_task: dict[str, float] = {}
    for task in sorted(by_task):
        exs = by_task[task]
        sims = [
            float(normed[index[ex.sent1]] @ normed[index[ex.sent2]]) for ex in exs
        ]
        gold = [ex.score for ex in exs]
        per_task[task] = 100.0 * spearman(sims, gold)
    average = float(np.mean(list(per_task.values())))
    return EvalReport(
        per_task=per_task,
        average=average,
        config={
            "model": model.path,
            "pooling": str(spec),
            "max_len": max_len,
            "include_special_tokens": spec.include_special_tokens,
        },
    )


def _collect_pooling_features(
    examples: list[StsExample],
    model: LoadedModel,
    max_len: int,
    batch_size: int,
) -> tuple[list[dict], dict[str, int]]:
    """One forward per unique sentence, keeping only h^0, h^L, and all diagonals.

    This is what makes the full head grid search cost a single encode of the
    dev set: per head, pooling is then one small matrix product.
    """
    tokenized, index = _tokenize_example_sentences(examples, model, max_len)
    feats: list[dict] = []
    for start in range(0, len(tokenized), batch_size):
        chunk = tokenized[start : start + batch_size]
        for s, out in zip(chunk, forward_batch(chunk, model.weights, model.config)):
            diags = np.stack(
                [np.diagonal(layer_attn, axis1=1, axis2=2) for layer_attn in out.attentions]
            )  # (L, H, N)
            feats.append(
                {
                    "sentence": s,
                    "h0": out.hidden[0].astype(np.float64),
                    "hl": out.hidden[-1].astype(np.float64),
                    "diags": diags.astype(np.float64),
                }
            )
    return feats, index


def grid_search_head(
    dev_examples: list[StsExample],
    model: LoadedModel,
    strategy: str = pooling.FIRST_LAST_DITTO,
    max_len: int = DEFAULT_MAX_LEN,
    batch_size: int = 32,
    include_special_tokens: bool = True,
) -> list[tuple[HeadRef, float]]:
    """Evaluate every (layer, head) Ditto variant on the dev set.

    Returns (head, dev Spearman x100) sorted by score descending, ties
    broken by (layer, head) ascending.
    """
    if strategy not in pooling.DITTO_STRATEGIES:
        raise ValueError(f"grid search needs a Ditto strategy, got {strategy!r}")
    if not dev_examples:
        raise InsufficientDataError("grid_search_head: empty dev set")
    config = model.config
    feats, index = _collect_pooling_features(dev_examples, model, max_len, batch_size)

    n_sent = len(feats)
    d = config.hidden_size
    embeddings = np.zeros((config.num_layers, config.num_heads, n_sent, d))
    for row, feat in enumerate(feats):
        n = feat["h0"].shape[0]
        keep = slice(None) if include_special_tokens else slice(1, n - 1)
        if strategy == pooling.STATIC_DITTO:
            states = feat["h0"][keep]
            scale = 1.0
        elif strategy == pooling.LAST_DITTO:
            states = feat["hl"][keep]
            scale = 1.0
        else:
            states = feat["h0"][keep] + feat["hl"][keep]
            scale = 0.5
        diags = feat["diags"][:, :, keep]  # (L, H, N')
        embeddings[:, :, row, :] = scale * np.einsum("lhn,nd->lhd", diags, states)

    norms = np.linalg.norm(embeddings, axis=3, keepdims=True)
    norms[norms == 0.0] = 1.0
    embeddings /= norms
    gold = [ex.score for ex in dev_examples]
    i1 = [index[ex.sent1] for ex in dev_examples]
    i2 = [index[ex.sent2] for ex in dev_examples]

    results: list[tuple[HeadRef, float]] = []
    for l in range(config.num_layers):
        for h in range(config.num_heads):
            sims = np.einsum("pd,pd->p", embeddings[l, h, i1, :], embeddings[l, h, i2, :])
            score = 100.0 * spearman(sims, gold)
            results.append((HeadRef(layer=l + 1, head=h + 1), score))
    results.sort(key=lambda item: (-item[1], item[0].layer, item[0].head))
    return results


def diagonal_tfidf_correlation(
    examples: list[StsExample],
    model: LoadedModel,
    head: HeadRef,
    tfidf: TfidfModel,
    max_len: int = DEFAULT_MAX_LEN,
    batch_size: int = 32,
) -> tuple[float, float]:
    """Correlate per-word diagonal attention with TF-IDF weights, x100.

    Diagonal values are aggregated to words by the mean over each word's
    subword positions; sentences are deduplicated in first-appearance order.
    """
    if not examples:
        raise InsufficientDataError("diagonal_tfidf_correlation: no examples")
    head.check(model.config)
    feats, _ = _collect_pooling_features(examples, model, max_len, batch_size)
    diag_values: list[float] = []
    weights: list[float] = []
    for feat in feats:
        s: TokenizedSentence = feat["sentence"]
        if not s.word_spans:
            continue
        diag = feat["diags"][head.layer - 1, head.head - 1]
        word_weights = tfidf.sentence_weights(s.words())
        for span in s.word_spans:
            diag_values.append(float(diag[span.start : span.end].mean()))
            weights.append(word_weights[span.word])
    if len(diag_values) < 2:
        raise InsufficientDataError("diagonal_tfidf_correlation: fewer than 2 (diag, weight) pairs")
    return 100.0 * pearson(diag_values, weights), 100.0 * spearman(diag_values, weights)


def positive_pairs(
    examples: list[StsExample], threshold: float = 4.0
) -> list[tuple[str, str]]:
    """Sentence pairs whose gold score clears the positive threshold."""
    return [(ex.sent1, ex.sent2) for ex in examples if ex.score >= threshold]
