"""Normalize the heterogeneous raw STS releases into the canonical TSV tree.

Expected raw layout under the source root (the standard evaluation-toolkit
download layout):

    STS12/ .. STS16/   SemEval format: STS.input.<subset>.txt (sent1<TAB>sent2)
                       paired with STS.gs.<subset>.txt (one score per line,
                       blank = unannotated pair, dropped)
    STSB/              stsbenchmark: sts-train.csv / sts-dev.csv / sts-test.csv
                       (genre, file, year, id, score, sent1, sent2, ...)
    SICKR/             SICK_train.txt / SICK_trial.txt / SICK_test_annotated.txt
                       (header line; pair_ID, sentence_A, sentence_B,
                       relatedness_score, entailment_judgment)

Canonical output: <out>/<TASK>/<subset>.<split>.tsv with
"score<TAB>sent1<TAB>sent2" lines.
"""

from __future__ import annotations

from pathlib import Path

SEMEVAL_TASKS = ("STS12", "STS13", "STS14", "STS15", "STS16")

_STSB_FILES = {"train": "sts-train.csv", "dev": "sts-dev.csv", "test": "sts-test.csv"}
_SICK_FILES = {"train": "SICK_train.txt", "dev": "SICK_trial.txt", "test": "SICK_test_annotated.txt"}


class SourceError(ValueError):
    pass


def _clean(text: str) -> str:
    return " ".join(text.split())


def _write_rows(path: Path, rows: list[tuple[float, str, str]]) -> int:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for score, s1, s2 in rows:
            f.write(f"{score:g}\t{s1}\t{s2}\n")
    return len(rows)


def _export_semeval(task_dir: Path, out_dir: Path) -> dict[str, int]:
    counts: dict[str, int] = {}
    inputs = sorted(task_dir.glob("STS.input.*.txt"))
    if not inputs:
        raise SourceError(f"{task_dir}: no STS.input.*.txt files")
    for input_path in inputs:
        subset = input_path.name[len("STS.input.") : -len(".txt")]
        gs_path = task_dir / f"STS.gs.{subset}.txt"
        if not gs_path.exists():
            raise SourceError(f"{task_dir}: missing gold file for subset {subset!r}")
        pairs = input_path.read_text(encoding="utf-8").splitlines()
        scores = gs_path.read_text(encoding="utf-8").splitlines()
        if len(pairs) != len(scores):
            raise SourceError(
                f"{task_dir}/{subset}: {len(pairs)} pairs vs {len(scores)} gold lines"
            )
        rows = []
        for lineno, (pair, score) in enumerate(zip(pairs, scores), start=1):
            if not score.strip():
                continue  # unannotated pair
            parts = pair.split("\t")
            if len(parts) < 2:
                raise SourceError(f"{input_path}:{lineno}: expected sent1<TAB>sent2")
            rows.append((float(score), _clean(parts[0]), _clean(parts[1])))
        counts[subset] = _write_rows(out_dir / f"{subset}.test.tsv", rows)
    return counts


def _export_stsb(task_dir: Path, out_dir: Path) -> dict[str, int]:
    counts: dict[str, int] = {}
    for split, filename in _STSB_FILES.items():
        path = task_dir / filename
        if not path.exists():
            raise SourceError(f"missing {path}")
        rows = []
        with open(path, encoding="utf-8") as f:
            for lineno, line in enumerate(f, start=1):
                line = line.rstrip("\n")
                if not line:
                    continue
                parts = line.split("\t")
                if len(parts) < 7:
                    raise SourceError(f"{path}:{lineno}: expected >= 7 tab fields")
                rows.append((float(parts[4]), _clean(parts[5]), _clean(parts[6])))
        counts[split] = _write_rows(out_dir / f"sts-b.{split}.tsv", rows)
    return counts


def _export_sick(task_dir: Path, out_dir: Path) -> dict[str, int]:
    counts: dict[str, int] = {}
    for split, filename in _SICK_FILES.items():
        path = task_dir / filename
        if not path.exists():
            raise SourceError(f"missing {path}")
        rows = []
        with open(path, encoding="utf-8") as f:
            header = f.readline().rstrip("\n").split("\t")
            try:
                i_s1 = header.index("sentence_A")
                i_s2 = header.index("sentence_B")
                i_score = header.index("relatedness_score")
            except ValueError as exc:
                raise SourceError(f"{path}: unrecognized header {header[:5]}") from exc
            for lineno, line in enumerate(f, start=2):
                line = line.rstrip("\n")
                if not line:
                    continue
                parts = line.split("\t")
                rows.append((float(parts[i_score]), _clean(parts[i_s1]), _clean(parts[i_s2])))
        counts[split] = _write_rows(out_dir / f"sick-r.{split}.tsv", rows)
    return counts


def export_sts(source_root, out_root) -> dict[str, dict[str, int]]:
    """Convert every recognized task directory; returns per-task line counts."""
    source_root = Path(source_root)
    out_root = Path(out_root)
    if not source_root.is_dir():
        raise SourceError(f"source root {source_root} does not exist")
    report: dict[str, dict[str, int]] = {}
    for task in SEMEVAL_TASKS:
        task_dir = source_root / task
        if task_dir.is_dir():
            report[task] = _export_semeval(task_dir, out_root / task)
    if (source_root / "STSB").is_dir():
        report["STSB"] = _export_stsb(source_root / "STSB", out_root / "STSB")
    if (source_root / "SICKR").is_dir():
        report["SICKR"] = _export_sick(source_root / "SICKR", out_root / "SICKR")
    if not report:
        raise SourceError(f"{source_root}: no recognized task directories")
    return report


def load_tokenizer(source, revision=None):
    """AutoTokenizer, with a fallback to a bare vocab.txt (exported model dirs)."""
    from transformers import AutoTokenizer, BertTokenizer

    try:
        return AutoTokenizer.from_pretrained(source, revision=revision)
    except Exception:
        vocab_path = Path(source) / "vocab.txt"
        if vocab_path.exists():
            return BertTokenizer(str(vocab_path), do_lower_case=True)
        raise


def pretokenize_sts(tokenizer_source, data_root, out_root, tasks=None, revision=None) -> int:
    """Emit .ids.tsv mirrors of canonical TSVs using a checkpoint's own tokenizer.

    Needed for byte-pair models the engine cannot tokenize natively. Returns
    the number of files written.
    """
    tokenizer = load_tokenizer(tokenizer_source, revision=revision)
    data_root = Path(data_root)
    out_root = Path(out_root)
    written = 0
    for task_dir in sorted(p for p in data_root.iterdir() if p.is_dir()):
        if tasks and task_dir.name not in tasks:
            continue
        for tsv in sorted(task_dir.glob("*.tsv")):
            if tsv.name.endswith(".ids.tsv"):
                continue
            out_path = out_root / task_dir.name / (tsv.name[:-4] + ".ids.tsv")
            out_path.parent.mkdir(parents=True, exist_ok=True)
            with open(tsv, encoding="utf-8") as fin, open(out_path, "w", encoding="utf-8", newline="\n") as fout:
                for line in fin:
                    line = line.rstrip("\n")
                    if not line:
                        continue
                    score, s1, s2 = line.split("\t")
                    ids1 = tokenizer(s1)["input_ids"]
                    ids2 = tokenizer(s2)["input_ids"]
                    fout.write(
                        f"{score}\t{' '.join(map(str, ids1))}\t{' '.join(map(str, ids2))}\n"
                    )
            written += 1
    return written
