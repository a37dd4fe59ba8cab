"""Portable weight container and model-directory loading.

Container layout (safetensors-compatible): 8-byte little-endian unsigned
header length, a JSON header mapping tensor name -> {"dtype": "F32",
"shape": [...], "data_offsets": [begin, end)}, then the raw little-endian
float payload. Offsets are relative to the end of the header. Only F32 is
accepted; exporters up-cast.

A model directory holds config.json, model.safetensors, and (for WordPiece
models) vocab.txt.
"""

from __future__ import annotations

import json
import struct
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import FormatError, VocabError, WeightsError
from .tokenization import Vocab

WEIGHTS_FILE = "model.safetensors"
CONFIG_FILE = "config.json"
VOCAB_FILE = "vocab.txt"

# ELECTRA-style optional projection from embedding width to hidden width.
PROJECTION_WEIGHT = "embeddings_project.weight"
PROJECTION_BIAS = "embeddings_project.bias"

_CONFIG_FIELDS = (
    "hidden_size",
    "num_layers",
    "num_heads",
    "intermediate_size",
    "vocab_size",
    "max_position_embeddings",
    "type_vocab_size",
    "layer_norm_eps",
)


@dataclass(frozen=True)
class EncoderConfig:
    hidden_size: int
    num_layers: int
    num_heads: int
    intermediate_size: int
    vocab_size: int
    max_position_embeddings: int
    type_vocab_size: int
    layer_norm_eps: float = 1e-12

    def __post_init__(self):
        sizes = {
            "hidden_size": self.hidden_size,
            "num_layers": self.num_layers,
            "num_heads": self.num_heads,
            "intermediate_size": self.intermediate_size,
            "vocab_size": self.vocab_size,
            "max_position_embeddings": self.max_position_embeddings,
            "type_vocab_size": self.type_vocab_size,
        }
        for name, value in sizes.items():
            if value < 1:
                raise ValueError(f"EncoderConfig.{name} must be positive, got {value}")
        if self.hidden_size % self.num_heads != 0:
            raise ValueError(
                f"hidden_size {self.hidden_size} not divisible by num_heads {self.num_heads}"
            )
        if self.layer_norm_eps <= 0:
            raise ValueError(f"layer_norm_eps must be positive, got {self.layer_norm_eps}")

    @property
    def head_dim(self) -> int:
        return self.hidden_size // self.num_heads

    @classmethod
    def load(cls, path) -> "EncoderConfig":
        with open(path, encoding="utf-8") as f:
            raw = json.load(f)
        missing = [k for k in _CONFIG_FIELDS if k not in raw]
        if missing:
            raise FormatError(f"config {path}: missing fields {missing}")
        return cls(**{k: raw[k] for k in _CONFIG_FIELDS})

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as f:
            json.dump({k: getattr(self, k) for k in _CONFIG_FIELDS}, f, indent=2, sort_keys=True)
            f.write("\n")


def read_tensors(path) -> tuple[dict[str, np.ndarray], dict[str, str]]:
    """Parse a container file. Returns (tensors, metadata)."""
    path = Path(path)
    blob = path.read_bytes()
    if len(blob) < 8:
        raise FormatError(f"{path}: file too short for header length", offset=0)
    (header_len,) = struct.unpack("<Q", blob[:8])
    if 8 + header_len > len(blob):
        raise FormatError(
            f"{path}: header length {header_len} exceeds file size {len(blob)}", offset=0
        )
    try:
        header = json.loads(blob[8 : 8 + header_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FormatError(f"{path}: malformed JSON header: {exc}", offset=8) from exc
    if not isinstance(header, dict):
        raise FormatError(f"{path}: header is not a JSON object", offset=8)
    payload = memoryview(blob)[8 + header_len :]
    metadata = header.pop("__metadata__", {}) or {}
    tensors: dict[str, np.ndarray] = {}
    for name, info in header.items():
        base = 8 + header_len
        try:
            dtype = info["dtype"]
            shape = tuple(int(d) for d in info["shape"])
            begin, end = (int(o) for o in info["data_offsets"])
        except (TypeError, KeyError, ValueError) as exc:
            raise FormatError(f"{path}: malformed entry for tensor '{name}'", offset=base) from exc
        if dtype != "F32":
            raise FormatError(f"{path}: tensor '{name}' has unsupported dtype {dtype}", offset=base)
        n_bytes = int(np.prod(shape, dtype=np.int64)) * 4 if shape else 4
        if any(d < 0 for d in shape):
            raise FormatError(f"{path}: tensor '{name}' has negative dim in {shape}", offset=base)
        if begin < 0 or end > len(payload) or end - begin != n_bytes:
            raise FormatError(
                f"{path}: tensor '{name}' offsets [{begin}, {end}) inconsistent with "
                f"shape {shape} and payload size {len(payload)}",
                offset=base + begin,
            )
        arr = np.frombuffer(payload[begin:end], dtype="<f4").reshape(shape)
        tensors[name] = np.ascontiguousarray(arr, dtype=np.float32)
    return tensors, dict(metadata)


def write_tensors(path, tensors: dict[str, np.ndarray], metadata: dict[str, str] | None = None) -> None:
    """Write a container file. Tensors are up-cast to little-endian float32."""
    header: dict[str, object] = {}
    if metadata:
        header["__metadata__"] = {str(k): str(v) for k, v in metadata.items()}
    payload = bytearray()
    for name in tensors:
        arr = np.ascontiguousarray(np.asarray(tensors[name], dtype=np.float32), dtype="<f4")
        begin = len(payload)
        payload.extend(arr.tobytes())
        header[name] = {
            "dtype": "F32",
            "shape": list(arr.shape),
            "data_offsets": [begin, len(payload)],
        }
    raw = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")
    # Space-pad to an 8-byte boundary for mmap-friendly alignment.
    raw += b" " * (-(8 + len(raw)) % 8)
    with open(path, "wb") as f:
        f.write(struct.pack("<Q", len(raw)))
        f.write(raw)
        f.write(payload)


def required_tensor_shapes(config: EncoderConfig, embedding_size: int | None = None) -> dict[str, tuple[int, ...]]:
    """Canonical tensor name -> expected shape for a checkpoint.

    `embedding_size` differs from hidden_size only when the optional
    embeddings projection is present.
    """
    d = config.hidden_size
    e = embedding_size if embedding_size is not None else d
    ffn = config.intermediate_size
    shapes: dict[str, tuple[int, ...]] = {
        "embeddings.word_embeddings.weight": (config.vocab_size, e),
        "embeddings.position_embeddings.weight": (config.max_position_embeddings, e),
        "embeddings.token_type_embeddings.weight": (config.type_vocab_size, e),
        "embeddings.LayerNorm.weight": (e,),
        "embeddings.LayerNorm.bias": (e,),
    }
    if e != d:
        shapes[PROJECTION_WEIGHT] = (d, e)
        shapes[PROJECTION_BIAS] = (d,)
    for layer in range(config.num_layers):
        p = f"encoder.layer.{layer}"
        shapes.update(
            {
                f"{p}.attention.self.query.weight": (d, d),
                f"{p}.attention.self.query.bias": (d,),
                f"{p}.attention.self.key.weight": (d, d),
                f"{p}.attention.self.key.bias": (d,),
                f"{p}.attention.self.value.weight": (d, d),
                f"{p}.attention.self.value.bias": (d,),
                f"{p}.attention.output.dense.weight": (d, d),
                f"{p}.attention.output.dense.bias": (d,),
                f"{p}.attention.output.LayerNorm.weight": (d,),
                f"{p}.attention.output.LayerNorm.bias": (d,),
                f"{p}.intermediate.dense.weight": (ffn, d),
                f"{p}.intermediate.dense.bias": (ffn,),
                f"{p}.output.dense.weight": (d, ffn),
                f"{p}.output.dense.bias": (d,),
                f"{p}.output.LayerNorm.weight": (d,),
                f"{p}.output.LayerNorm.bias": (d,),
            }
        )
    return shapes


class ModelWeights:
    """Validated, immutable named tensors for one encoder checkpoint."""

    def __init__(self, tensors: dict[str, np.ndarray], config: EncoderConfig, warnings_list=()):
        self._tensors = tensors
        self.config = config
        self.warnings = tuple(warnings_list)
        for arr in tensors.values():
            arr.flags.writeable = False

    def __getitem__(self, name: str) -> np.ndarray:
        return self._tensors[name]

    def __contains__(self, name: str) -> bool:
        return name in self._tensors

    def names(self) -> list[str]:
        return sorted(self._tensors)

    @property
    def has_projection(self) -> bool:
        return PROJECTION_WEIGHT in self._tensors

    @property
    def embedding_size(self) -> int:
        return self._tensors["embeddings.word_embeddings.weight"].shape[1]


def load_weights(path, config: EncoderConfig) -> ModelWeights:
    """Load and fully validate a weight container against `config`.

    Unknown extra tensors are dropped with a warning list on the result;
    missing or misshapen tensors raise WeightsError.
    """
    tensors, _ = read_tensors(path)
    emb_name = "embeddings.word_embeddings.weight"
    if emb_name not in tensors:
        raise WeightsError(f"{path}: missing required tensor '{emb_name}'")
    embedding_size = tensors[emb_name].shape[1] if tensors[emb_name].ndim == 2 else None
    expected = required_tensor_shapes(config, embedding_size=embedding_size)
    missing = sorted(set(expected) - set(tensors))
    if missing:
        raise WeightsError(f"{path}: missing required tensor '{missing[0]}' ({len(missing)} missing)")
    warn_list = []
    for name in sorted(set(tensors) - set(expected)):
        warn_list.append(f"ignoring unknown tensor '{name}'")
        del tensors[name]
    for name, shape in expected.items():
        if tensors[name].shape != shape:
            raise WeightsError(
                f"{path}: tensor '{name}' has shape {tensors[name].shape}, expected {shape}"
            )
    for name, arr in tensors.items():
        if not np.all(np.isfinite(arr)):
            raise WeightsError(f"{path}: tensor '{name}' contains NaN/Inf")
    for message in warn_list:
        warnings.warn(message, stacklevel=2)
    return ModelWeights(tensors, config, warn_list)


@dataclass(frozen=True)
class LoadedModel:
    """Everything needed to encode sentences: config, weights, optional vocab."""

    config: EncoderConfig
    weights: ModelWeights
    vocab: Vocab | None
    path: str = ""

    @classmethod
    def load(cls, model_dir) -> "LoadedModel":
        model_dir = Path(model_dir)
        config = EncoderConfig.load(model_dir / CONFIG_FILE)
        weights = load_weights(model_dir / WEIGHTS_FILE, config)
        vocab_path = model_dir / VOCAB_FILE
        vocab = Vocab.load(vocab_path) if vocab_path.exists() else None
        return cls(config=config, weights=weights, vocab=vocab, path=str(model_dir))

    def require_vocab(self) -> Vocab:
        if self.vocab is None:
            raise VocabError(
                f"model at '{self.path}' has no vocab.txt; raw-text input needs a WordPiece vocab "
                "(use pre-tokenized id input instead)"
            )
        return self.vocab
