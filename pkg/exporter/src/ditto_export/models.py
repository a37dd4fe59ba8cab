"""Checkpoint conversion: published BERT-family models -> portable container.

Normalizations applied so the engine stays architecture-agnostic:
  * model-type prefixes are absent (we export the base AutoModel state dict);
  * the pooler head is dropped;
  * RoBERTa position embeddings lose their pad-offset rows, so position i
    is always row i;
  * everything is up-cast to float32;
  * the optional embeddings_project tensors are kept when embedding width
    differs from hidden width (ELECTRA-small style).

Byte-pair models get no vocab.txt; their inputs must be pre-tokenized.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np

from .containers import write_container

WEIGHTS_FILE = "model.safetensors"
CONFIG_FILE = "config.json"
VOCAB_FILE = "vocab.txt"
MANIFEST_FILE = "manifest.json"

_DROP_PREFIXES = ("pooler.",)

_SUPPORTED = {"bert", "roberta", "electra"}


class UnsupportedArchitectureError(ValueError):
    pass


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def export_model(source: str, out_dir, revision: str | None = None, source_label: str | None = None) -> Path:
    """Convert a checkpoint (hub id or local directory) into a model directory.

    `source_label` overrides the provenance string recorded in the container
    and manifest (useful when `source` is a throwaway temp path).
    """
    import torch
    from transformers import AutoConfig, AutoModel

    label = source_label if source_label is not None else str(source)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    config = AutoConfig.from_pretrained(source, revision=revision)
    if config.model_type not in _SUPPORTED:
        raise UnsupportedArchitectureError(
            f"model type {config.model_type!r} not supported (expected one of {sorted(_SUPPORTED)})"
        )
    model = AutoModel.from_pretrained(source, revision=revision)
    model = model.float()
    model.eval()

    notes: list[str] = []
    tensors: dict[str, np.ndarray] = {}
    position_offset = 0
    if config.model_type == "roberta":
        # RoBERTa position ids start at pad_token_id + 1; shift the table so
        # the engine can use positions 0..N-1 directly.
        position_offset = config.pad_token_id + 1
        notes.append(f"dropped first {position_offset} position rows (pad offset)")
    for name, param in model.state_dict().items():
        if any(name.startswith(p) for p in _DROP_PREFIXES):
            continue
        value = param.detach().to(torch.float32).cpu().numpy()
        if name == "embeddings.position_embeddings.weight" and position_offset:
            value = value[position_offset:]
        tensors[name] = value
    # Buffers like position_ids / token_type_ids may appear in old checkpoints.
    tensors = {
        n: v
        for n, v in tensors.items()
        if n not in ("embeddings.position_ids", "embeddings.token_type_ids")
    }

    max_pos = config.max_position_embeddings - position_offset
    engine_config = {
        "hidden_size": config.hidden_size,
        "num_layers": config.num_hidden_layers,
        "num_heads": config.num_attention_heads,
        "intermediate_size": config.intermediate_size,
        "vocab_size": config.vocab_size,
        "max_position_embeddings": max_pos,
        "type_vocab_size": config.type_vocab_size,
        "layer_norm_eps": config.layer_norm_eps,
    }
    with open(out_dir / CONFIG_FILE, "w", encoding="utf-8") as f:
        json.dump(engine_config, f, indent=2, sort_keys=True)
        f.write("\n")
    write_container(out_dir / WEIGHTS_FILE, tensors, metadata={"source": label})

    tokenizer_kind = _export_tokenizer(source, revision, out_dir, notes)

    manifest = {
        "source": label,
        "revision": revision,
        "architecture": config.model_type,
        "tensor_count": len(tensors),
        "tokenizer": tokenizer_kind,
        "pretokenized_required": tokenizer_kind != "wordpiece",
        "notes": notes,
        "sha256": {
            WEIGHTS_FILE: _sha256(out_dir / WEIGHTS_FILE),
            CONFIG_FILE: _sha256(out_dir / CONFIG_FILE),
        },
    }
    with open(out_dir / MANIFEST_FILE, "w", encoding="utf-8") as f:
        json.dump(manifest, f, indent=2, sort_keys=True)
        f.write("\n")
    return out_dir


_TOKENIZER_ASSETS = ("vocab.txt", "vocab.json", "tokenizer.json", "tokenizer_config.json",
                     "spiece.model", "merges.txt")


def _export_tokenizer(source, revision, out_dir: Path, notes: list[str]) -> str:
    from transformers import AutoTokenizer

    source_dir = Path(source)
    if source_dir.is_dir() and not any((source_dir / f).exists() for f in _TOKENIZER_ASSETS):
        # Newer transformers fabricates a degenerate specials-only tokenizer
        # instead of raising; refuse to export that.
        notes.append("no tokenizer assets in checkpoint")
        return "none"
    try:
        tokenizer = AutoTokenizer.from_pretrained(source, revision=revision)
    except Exception as exc:  # tokenizer assets can be missing on local dirs
        notes.append(f"no tokenizer exported ({exc})")
        return "none"
    if not _is_wordpiece(tokenizer):
        notes.append("non-WordPiece tokenizer: use pre-tokenized id inputs")
        return type(tokenizer).__name__
    vocab = tokenizer.get_vocab()
    by_id = sorted(vocab.items(), key=lambda kv: kv[1])
    if [i for _, i in by_id] != list(range(len(by_id))):
        notes.append("tokenizer vocab ids are not contiguous; not exported")
        return "wordpiece-noncontiguous"
    with open(out_dir / VOCAB_FILE, "w", encoding="utf-8", newline="\n") as f:
        for token, _ in by_id:
            f.write(token + "\n")
    if getattr(tokenizer, "do_lower_case", True) is False:
        notes.append("tokenizer is cased; the engine pipeline is uncased-only")
    return "wordpiece"


def _is_wordpiece(tokenizer) -> bool:
    # Classic (slow) implementations carry a wordpiece_tokenizer attribute;
    # tokenizers-backed ones expose the backend model class.
    if getattr(tokenizer, "wordpiece_tokenizer", None) is not None:
        return True
    backend = getattr(tokenizer, "backend_tokenizer", None) or getattr(tokenizer, "_tokenizer", None)
    return backend is not None and type(backend.model).__name__ == "WordPiece"
