"""BERT-style transformer forward pass exposing every layer and every head.

The forward keeps all L+1 hidden-state layers and all per-head post-softmax
attention matrices, trimmed to each sentence's true length, so pooling and
probing can be driven from a single encode. Dropout is always off.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from . import tensor_ops as ops
from .errors import SequenceTooLongError
from .model_io import EncoderConfig, ModelWeights
from .tokenization import TokenizedSentence


@dataclass(frozen=True, order=True)
class HeadRef:
    """1-based (layer, head) coordinate, conventionally written "l-h"."""

    layer: int
    head: int

    def __str__(self) -> str:
        return f"{self.layer}-{self.head}"

    @classmethod
    def parse(cls, text: str) -> "HeadRef":
        m = re.fullmatch(r"(\d+)-(\d+)", text.strip())
        if not m:
            raise ValueError(f"head must look like '1-10', got {text!r}")
        return cls(layer=int(m.group(1)), head=int(m.group(2)))

    def check(self, config: EncoderConfig) -> "HeadRef":
        if not 1 <= self.layer <= config.num_layers:
            raise IndexError(f"head {self}: layer out of range [1, {config.num_layers}]")
        if not 1 <= self.head <= config.num_heads:
            raise IndexError(f"head {self}: head out of range [1, {config.num_heads}]")
        return self


@dataclass(frozen=True)
class EncoderOutput:
    """All hidden layers h^0..h^L plus per-layer (H, N, N) attention stacks."""

    hidden: tuple[np.ndarray, ...]
    attentions: tuple[np.ndarray, ...]
    n_tokens: int

    @property
    def num_layers(self) -> int:
        return len(self.attentions)

    @property
    def num_heads(self) -> int:
        return self.attentions[0].shape[0]

    def attention(self, head: HeadRef) -> np.ndarray:
        """The (N, N) post-softmax attention matrix for 1-based head l-h."""
        if not 1 <= head.layer <= self.num_layers or not 1 <= head.head <= self.num_heads:
            raise IndexError(
                f"head {head} out of range for {self.num_layers} layers x {self.num_heads} heads"
            )
        return self.attentions[head.layer - 1][head.head - 1]


def diagonal_attention(out: EncoderOutput, head: HeadRef) -> np.ndarray:
    """[A_11, ..., A_NN] of the selected head, aligned with token positions."""
    return np.ascontiguousarray(np.diagonal(out.attention(head)))


def forward(s: TokenizedSentence, weights: ModelWeights, config: EncoderConfig) -> EncoderOutput:
    return forward_batch([s], weights, config)[0]


def forward_batch(
    sentences: list[TokenizedSentence], weights: ModelWeights, config: EncoderConfig
) -> list[EncoderOutput]:
    """Encode a batch, padding to the max length; outputs are trimmed to true N.

    Padded columns receive a -1e9 additive mask before softmax and are
    excluded from all returned matrices, so indices align with each
    sentence's ids.
    """
    if not sentences:
        return []
    lengths = [s.n_tokens for s in sentences]
    max_n = max(lengths)
    if max_n > config.max_position_embeddings:
        raise SequenceTooLongError(
            f"sequence of {max_n} tokens exceeds max_position_embeddings "
            f"{config.max_position_embeddings}"
        )
    batch = len(sentences)
    ids = np.zeros((batch, max_n), dtype=np.int64)
    pad_mask = np.zeros((batch, max_n), dtype=np.float32)
    for row, s in enumerate(sentences):
        ids[row, : s.n_tokens] = s.ids
        pad_mask[row, : s.n_tokens] = 1.0

    hidden_layers, attn_layers = _run_encoder(ids, pad_mask, weights, config)

    outputs = []
    for row, n in enumerate(lengths):
        hidden = tuple(np.ascontiguousarray(h[row, :n]) for h in hidden_layers)
        attentions = tuple(np.ascontiguousarray(a[row, :, :n, :n]) for a in attn_layers)
        outputs.append(EncoderOutput(hidden=hidden, attentions=attentions, n_tokens=n))
    return outputs


def _embed(ids: np.ndarray, weights: ModelWeights, config: EncoderConfig) -> np.ndarray:
    word = weights["embeddings.word_embeddings.weight"]
    pos = weights["embeddings.position_embeddings.weight"]
    seg = weights["embeddings.token_type_embeddings.weight"]
    n = ids.shape[1]
    x = word[ids] + pos[:n][None, :, :] + seg[0][None, None, :]
    x = ops.layer_norm(
        x,
        weights["embeddings.LayerNorm.weight"],
        weights["embeddings.LayerNorm.bias"],
        config.layer_norm_eps,
    )
    if weights.has_projection:
        x = ops.linear(x, weights["embeddings_project.weight"], weights["embeddings_project.bias"])
    return x


def _run_encoder(
    ids: np.ndarray, pad_mask: np.ndarray, weights: ModelWeights, config: EncoderConfig
) -> tuple[list[np.ndarray], list[np.ndarray]]:
    batch, n = ids.shape
    d = config.hidden_size
    heads = config.num_heads
    head_dim = config.head_dim
    # (B, 1, 1, N) additive mask broadcast over heads and query positions.
    additive = ((1.0 - pad_mask) * ops.MASK_VALUE)[:, None, None, :].astype(np.float32)

    x = _embed(ids, weights, config)
    hidden_layers = [x]
    attn_layers = []

    def split_heads(t: np.ndarray) -> np.ndarray:
        return t.reshape(batch, n, heads, head_dim).transpose(0, 2, 1, 3)

    for layer in range(config.num_layers):
        p = f"encoder.layer.{layer}"
        q = split_heads(ops.linear(x, weights[f"{p}.attention.self.query.weight"],
                                   weights[f"{p}.attention.self.query.bias"]))
        k = split_heads(ops.linear(x, weights[f"{p}.attention.self.key.weight"],
                                   weights[f"{p}.attention.self.key.bias"]))
        v = split_heads(ops.linear(x, weights[f"{p}.attention.self.value.weight"],
                                   weights[f"{p}.attention.self.value.bias"]))
        scores = ops.accum_matmul(q, k.transpose(0, 1, 3, 2)) / np.float32(np.sqrt(head_dim))
        attn = ops.softmax_rows(scores, additive_mask=np.broadcast_to(additive, scores.shape))
        attn_layers.append(attn)
        context = ops.accum_matmul(attn, v)  # (B, H, N, head_dim)
        context = context.transpose(0, 2, 1, 3).reshape(batch, n, d)
        att_out = ops.linear(context, weights[f"{p}.attention.output.dense.weight"],
                             weights[f"{p}.attention.output.dense.bias"])
        x = ops.layer_norm(x + att_out,
                           weights[f"{p}.attention.output.LayerNorm.weight"],
                           weights[f"{p}.attention.output.LayerNorm.bias"],
                           config.layer_norm_eps)
        inter = ops.gelu(ops.linear(x, weights[f"{p}.intermediate.dense.weight"],
                                    weights[f"{p}.intermediate.dense.bias"]))
        ffn_out = ops.linear(inter, weights[f"{p}.output.dense.weight"],
                             weights[f"{p}.output.dense.bias"])
        x = ops.layer_norm(x + ffn_out,
                           weights[f"{p}.output.LayerNorm.weight"],
                           weights[f"{p}.output.LayerNorm.bias"],
                           config.layer_norm_eps)
        hidden_layers.append(x)
    return hidden_layers, attn_layers
