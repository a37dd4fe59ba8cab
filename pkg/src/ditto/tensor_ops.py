"""Dense float32 kernels underneath the encoder and the diagnostics.

All public ops take and return float32 arrays; matrix products accumulate in
float64 before rounding back, which keeps deep-stack activations stable
without leaving 32-bit storage. Values are never mutated in place.
"""

from __future__ import annotations

import numpy as np
from scipy.special import erf

from .errors import DegenerateInputError, ShapeError

F32 = np.float32

# Additive mask sentinel for positions that must receive ~zero attention.
MASK_VALUE = -1.0e9


def as_f32(x) -> np.ndarray:
    """Coerce to a float32 ndarray without copying when already one."""
    return np.asarray(x, dtype=F32)


def matmul(a, b) -> np.ndarray:
    """2-D matrix product with float64 accumulation, returned as float32."""
    a = as_f32(a)
    b = as_f32(b)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ShapeError(f"matmul: incompatible shapes {a.shape} x {b.shape}")
    return accum_matmul(a, b)


def accum_matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """np.matmul in float64 (supports stacked/batched operands), cast to float32."""
    out = np.matmul(a.astype(np.float64), b.astype(np.float64))
    return out.astype(F32)


def linear(x: np.ndarray, weight: np.ndarray, bias: np.ndarray) -> np.ndarray:
    """x @ weight.T + bias with (out_features, in_features) weight storage."""
    return accum_matmul(x, as_f32(weight).T) + as_f32(bias)


def softmax_rows(x, additive_mask=None) -> np.ndarray:
    """Row-wise softmax of a 2-D (or stacked-last-two-dims) array.

    `additive_mask`, when given, is added to the logits first; masked
    positions carry MASK_VALUE and come out <= 1e-9.
    """
    x = as_f32(x)
    if additive_mask is not None:
        mask = as_f32(additive_mask)
        if mask.shape != x.shape:
            raise ShapeError(f"softmax_rows: mask shape {mask.shape} != input shape {x.shape}")
        x = x + mask
    shifted = x - np.max(x, axis=-1, keepdims=True)
    e = np.exp(shifted, dtype=np.float64)
    return (e / np.sum(e, axis=-1, keepdims=True)).astype(F32)


def layer_norm(x, gamma, beta, eps: float) -> np.ndarray:
    """Normalize the last axis to zero mean / unit variance, then scale and shift."""
    if eps <= 0:
        raise ValueError(f"layer_norm: eps must be positive, got {eps}")
    x = as_f32(x)
    gamma = as_f32(gamma)
    beta = as_f32(beta)
    if x.shape[-1] != gamma.shape[-1] or gamma.shape != beta.shape:
        raise ShapeError(
            f"layer_norm: input last dim {x.shape[-1]} vs gamma {gamma.shape} / beta {beta.shape}"
        )
    mean = x.mean(axis=-1, keepdims=True, dtype=np.float64)
    var = np.square(x.astype(np.float64) - mean).mean(axis=-1, keepdims=True)
    normed = (x - mean) / np.sqrt(var + eps)
    return (normed * gamma + beta).astype(F32)


def gelu(x) -> np.ndarray:
    """Exact-erf GELU: x * Phi(x) with Phi the standard normal CDF."""
    x = as_f32(x)
    cdf = 0.5 * (1.0 + erf(x.astype(np.float64) / np.sqrt(2.0)))
    return (x * cdf).astype(F32)


def cosine(a, b) -> float:
    """Cosine similarity of two 1-D vectors, clamped into [-1, 1]."""
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    if a.shape != b.shape:
        raise ShapeError(f"cosine: shapes {a.shape} vs {b.shape}")
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        raise DegenerateInputError("cosine: zero-norm vector")
    return float(np.clip(a @ b / (na * nb), -1.0, 1.0))


def l2_normalize_rows(x) -> np.ndarray:
    """Normalize each row to unit L2 norm (float64). Zero rows are an error."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2:
        raise ShapeError(f"l2_normalize_rows: expected 2-D input, got shape {x.shape}")
    norms = np.linalg.norm(x, axis=1, keepdims=True)
    if np.any(norms == 0.0):
        raise DegenerateInputError("l2_normalize_rows: zero-norm row")
    return x / norms
