"""Command-line entry point.

Subcommands cover the full pipeline: embedding, STS evaluation, the
attention-head grid search, perturbed-masking probes, TF-IDF training, and
isotropy / alignment-uniformity diagnostics. All randomness flows from one
--seed flag (corpus sampling only); JSON outputs are byte-stable across
repeat runs with the same flags.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import metrics, pooling, probe, sts, tfidf
from .encoder import HeadRef, forward
from .errors import DittoError
from .model_io import LoadedModel, write_tensors
from .tokenization import DEFAULT_MAX_LEN, encode, parse_pretokenized_line

DEFAULT_SEED = 42


def _add_model_flags(p: argparse.ArgumentParser, pooling_flag: bool = True) -> None:
    p.add_argument("--model", required=True, help="model directory (config.json + model.safetensors [+ vocab.txt])")
    if pooling_flag:
        p.add_argument(
            "--pooling",
            required=True,
            help="pooling spec, e.g. first_last_avg, first_last_ditto@1-10, first_last_tfidf:weights.tsv",
        )
        p.add_argument(
            "--exclude-special-tokens",
            action="store_true",
            help="drop [CLS]/[SEP] from pooled sums (default: included)",
        )
    p.add_argument("--max-len", type=int, default=DEFAULT_MAX_LEN)
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--threads", type=int, default=None, help="worker cap (default: all cores)")


def _spec_from_args(args) -> pooling.PoolingSpec:
    return pooling.PoolingSpec.parse(
        args.pooling, include_special_tokens=not args.exclude_special_tokens
    )


def _write_json(path: str | None, payload: dict) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if path:
        with open(path, "w", encoding="utf-8") as f:
            f.write(text)
    else:
        sys.stdout.write(text)


def _read_lines(path: str) -> list[str]:
    with open(path, encoding="utf-8") as f:
        return [line.rstrip("\n") for line in f if line.strip()]


def _require_dir(path: str) -> str:
    if not os.path.isdir(path):
        raise FileNotFoundError(f"directory does not exist: {path}")
    return path


def cmd_embed(args) -> int:
    model = LoadedModel.load(args.model)
    spec = _spec_from_args(args)
    lines = _read_lines(args.input)
    if args.pretokenized:
        tokenized = [parse_pretokenized_line(line, vocab=model.vocab) for line in lines]
        matrix = pooling.embed_tokenized(
            tokenized, model, spec, batch_size=args.batch_size, threads=args.threads
        )
    else:
        matrix = pooling.embed_corpus(
            lines, model, spec, max_len=args.max_len,
            batch_size=args.batch_size, threads=args.threads,
        )
    if args.output.endswith(".csv"):
        with open(args.output, "w", encoding="utf-8") as f:
            for row in matrix:
                f.write(",".join(f"{v:.6g}" for v in row) + "\n")
    else:
        write_tensors(args.output, {"embeddings": matrix},
                      metadata={"pooling": str(spec), "model": args.model})
    print(f"wrote {matrix.shape[0]} x {matrix.shape[1]} embeddings to {args.output}")
    return 0


def cmd_eval_sts(args) -> int:
    model = LoadedModel.load(args.model)
    spec = _spec_from_args(args)
    tasks = tuple(args.tasks) if args.tasks else sts.TASKS
    examples = sts.load_sts(_require_dir(args.data), tasks=tasks, pretokenized=args.pretokenized)
    if args.split != "all":
        examples = [ex for ex in examples if ex.split == args.split]
    report = sts.evaluate(
        examples, model, spec, max_len=args.max_len,
        batch_size=args.batch_size, threads=args.threads,
    )
    print(report.format_table())
    payload = report.to_dict()
    payload["config"]["split"] = args.split
    _write_json(args.json, payload)
    return 0


def cmd_search_head(args) -> int:
    model = LoadedModel.load(args.model)
    examples = sts.load_sts(_require_dir(args.data), tasks=("STSB",), pretokenized=args.pretokenized)
    dev = [ex for ex in examples if ex.split == "dev"]
    ranking = sts.grid_search_head(
        dev, model, strategy=args.strategy, max_len=args.max_len,
        batch_size=args.batch_size,
        include_special_tokens=not args.exclude_special_tokens,
    )
    top = ranking[: args.top] if args.top else ranking
    print(f"{'head':>6}  {'dev Spearman x100':>18}")
    for head, score in top:
        print(f"{str(head):>6}  {score:18.2f}")
    if args.json:
        _write_json(args.json, {
            "strategy": args.strategy,
            "dev_examples": len(dev),
            "ranking": [{"head": str(h), "dev_spearman": round(s, 4)} for h, s in top],
        })
    return 0


def cmd_probe_impact(args) -> int:
    model = LoadedModel.load(args.model)
    s = encode(args.sentence, model.require_vocab(), max_len=args.max_len)
    m = probe.impact_matrix(s, model, repr_layer=args.layer,
                            batch_size=args.batch_size, threads=args.threads)
    csv_path = f"{args.output_prefix}.csv"
    json_path = f"{args.output_prefix}.json"
    m.save(csv_path, json_path)
    print(f"wrote {m.n} x {m.n} impact matrix to {csv_path} (+ {json_path})")
    return 0


def cmd_probe_corr(args) -> int:
    model = LoadedModel.load(args.model)
    weights = tfidf.TfidfModel.load(args.tfidf)
    corpus = _read_lines(args.corpus)
    if args.limit:
        corpus = corpus[: args.limit]
    pear, spear = probe.impact_tfidf_correlation(
        corpus, model, weights, repr_layer=args.layer,
        max_len=args.max_len, batch_size=args.batch_size, threads=args.threads,
    )
    print(f"impact/TF-IDF correlation over {len(corpus)} sentences: "
          f"Pearson {100 * pear:.2f}  Spearman {100 * spear:.2f}")
    if args.json:
        _write_json(args.json, {
            "sentences": len(corpus),
            "pearson_x100": round(100 * pear, 4),
            "spearman_x100": round(100 * spear, 4),
            "repr_layer": args.layer,
        })
    return 0


def cmd_tfidf_train(args) -> int:
    model = tfidf.train(args.corpus)
    model.save(args.output)
    print(f"trained TF-IDF on {model.n_docs} documents ({len(model.df)} words) -> {args.output}")
    return 0


def cmd_diag_isotropy(args) -> int:
    model = LoadedModel.load(args.model)
    spec = _spec_from_args(args)
    corpus = _read_lines(args.corpus)
    sample = args.sample
    if sample and sample < len(corpus):
        rng = np.random.default_rng(args.seed)
        idx = sorted(rng.choice(len(corpus), size=sample, replace=False).tolist())
        corpus = [corpus[i] for i in idx]
    elif sample and sample > len(corpus):
        print(f"warning: --sample {sample} exceeds corpus size {len(corpus)}; using whole corpus",
              file=sys.stderr)
    matrix = pooling.embed_corpus(
        corpus, model, spec, max_len=args.max_len,
        batch_size=args.batch_size, threads=args.threads,
    )
    value = metrics.avg_cosine(matrix)
    print(f"average cosine similarity over {matrix.shape[0]} sentences: {value:.4f}")
    if args.json:
        _write_json(args.json, {
            "avg_cosine": round(value, 6),
            "sentences": matrix.shape[0],
            "pooling": str(spec),
            "seed": args.seed,
        })
    return 0


def cmd_diag_align_uniform(args) -> int:
    model = LoadedModel.load(args.model)
    spec = _spec_from_args(args)
    examples = sts.load_sts(_require_dir(args.data), tasks=("STSB",))
    examples = [ex for ex in examples if ex.split == args.split]
    if not examples:
        raise DittoError(f"no STSB examples in split {args.split!r}")
    sentences: list[str] = []
    seen: set[str] = set()
    for ex in examples:
        for text in (ex.sent1, ex.sent2):
            if text not in seen:
                seen.add(text)
                sentences.append(text)
    matrix = pooling.embed_corpus(
        sentences, model, spec, max_len=args.max_len,
        batch_size=args.batch_size, threads=args.threads,
    )
    row = {text: matrix[i] for i, text in enumerate(sentences)}
    positives = sts.positive_pairs(examples, threshold=args.threshold)
    if not positives:
        raise DittoError(f"no positive pairs at threshold {args.threshold}")
    align = metrics.alignment([(row[a], row[b]) for a, b in positives])
    uniform = metrics.uniformity(matrix)
    print(f"alignment ({len(positives)} positive pairs, gold >= {args.threshold}): {align:.4f}")
    print(f"uniformity ({matrix.shape[0]} sentences): {uniform:.4f}")
    if args.json:
        _write_json(args.json, {
            "alignment": round(align, 6),
            "uniformity": round(uniform, 6),
            "positive_pairs": len(positives),
            "sentences": matrix.shape[0],
            "threshold": args.threshold,
            "pooling": str(spec),
        })
    return 0


def cmd_dump(args) -> int:
    model = LoadedModel.load(args.model)
    s = encode(args.sentence, model.require_vocab(), max_len=args.max_len)
    out = forward(s, model.weights, model.config)
    tensors = {f"hidden.{l}": h for l, h in enumerate(out.hidden)}
    for l in range(out.num_layers):
        for h in range(out.num_heads):
            tensors[f"attentions.{l + 1}.{h + 1}"] = out.attention(HeadRef(l + 1, h + 1))
    write_tensors(args.output, tensors, metadata={
        "text": args.sentence, "ids": " ".join(str(i) for i in s.ids),
    })
    print(f"dumped {len(tensors)} activation tensors to {args.output}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ditto",
        description="Learning-free sentence embeddings via diagonal attention pooling",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("embed", help="embed a file of sentences")
    _add_model_flags(p)
    p.add_argument("--input", required=True, help="one sentence per line")
    p.add_argument("--output", required=True, help=".csv for text output, else tensor container")
    p.add_argument("--pretokenized", action="store_true",
                   help="input lines are space-separated token ids")
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("eval-sts", help="evaluate a pooling config on the STS benchmark")
    _add_model_flags(p)
    p.add_argument("--data", required=True, help="canonical STS TSV root")
    p.add_argument("--split", choices=("train", "dev", "test", "all"), default="test")
    p.add_argument("--tasks", nargs="*", help=f"subset of {', '.join(sts.TASKS)}")
    p.add_argument("--pretokenized", action="store_true")
    p.add_argument("--json", help="write machine-readable report here")
    p.set_defaults(func=cmd_eval_sts)

    p = sub.add_parser("search-head", help="grid-search the Ditto head on the STS-B dev set")
    _add_model_flags(p, pooling_flag=False)
    p.add_argument("--data", required=True)
    p.add_argument("--strategy", default=pooling.FIRST_LAST_DITTO,
                   choices=pooling.DITTO_STRATEGIES)
    p.add_argument("--top", type=int, default=10, help="print the K best heads (0 = all)")
    p.add_argument("--exclude-special-tokens", action="store_true")
    p.add_argument("--pretokenized", action="store_true")
    p.add_argument("--json", help="write the ranking here")
    p.set_defaults(func=cmd_search_head)

    probe_parser = sub.add_parser("probe", help="perturbed-masking analysis")
    probe_sub = probe_parser.add_subparsers(dest="probe_command", required=True)

    p = probe_sub.add_parser("impact", help="impact matrix for one sentence")
    _add_model_flags(p, pooling_flag=False)
    p.add_argument("--sentence", required=True)
    p.add_argument("--layer", type=int, default=None, help="representation layer (default: last)")
    p.add_argument("--output-prefix", default="impact")
    p.set_defaults(func=cmd_probe_impact)

    p = probe_sub.add_parser("corr", help="impact/TF-IDF correlation over a corpus")
    _add_model_flags(p, pooling_flag=False)
    p.add_argument("--corpus", required=True, help="one sentence per line")
    p.add_argument("--tfidf", required=True, help="trained TF-IDF model file")
    p.add_argument("--layer", type=int, default=None)
    p.add_argument("--limit", type=int, default=None, help="probe only the first N sentences")
    p.add_argument("--json")
    p.set_defaults(func=cmd_probe_corr)

    tfidf_parser = sub.add_parser("tfidf", help="TF-IDF utilities")
    tfidf_sub = tfidf_parser.add_subparsers(dest="tfidf_command", required=True)
    p = tfidf_sub.add_parser("train", help="train word document frequencies on a corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_tfidf_train)

    diag_parser = sub.add_parser("diag", help="embedding-space diagnostics")
    diag_sub = diag_parser.add_subparsers(dest="diag_command", required=True)

    p = diag_sub.add_parser("isotropy", help="average pairwise cosine over sampled sentences")
    _add_model_flags(p)
    p.add_argument("--corpus", required=True)
    p.add_argument("--sample", type=int, default=1000)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--json")
    p.set_defaults(func=cmd_diag_isotropy)

    p = diag_sub.add_parser("align-uniform", help="alignment and uniformity on STS-B")
    _add_model_flags(p)
    p.add_argument("--data", required=True)
    p.add_argument("--split", choices=("train", "dev", "test"), default="test")
    p.add_argument("--threshold", type=float, default=4.0,
                   help="gold score defining positive pairs")
    p.add_argument("--json")
    p.set_defaults(func=cmd_diag_align_uniform)

    p = sub.add_parser("dump", help="dump all activations for one sentence to a container")
    _add_model_flags(p, pooling_flag=False)
    p.add_argument("--sentence", required=True)
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_dump)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        parser.exit(2, f"ditto: path error: {exc}\n")
    except (DittoError, IndexError, ValueError, OSError) as exc:
        print(f"ditto: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
