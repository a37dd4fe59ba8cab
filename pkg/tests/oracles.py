"""Independent brute-force oracles the suite checks the engine against.

Deliberately slow and structurally different from the implementations:
explicit loops, no shared rank/distance helpers.
"""

import math

import numpy as np

from ditto.encoder import forward
from ditto.probe import ImpactMatrix
from ditto.tokenization import mask_positions, non_special_positions


def mean_tie_ranks(values) -> list[float]:
    """1-based ranks with ties resolved to the mean rank, by direct counting."""
    values = list(values)
    ranks = []
    for v in values:
        smaller = sum(1 for u in values if u < v)
        equal = sum(1 for u in values if u == v)
        # ranks occupied by the tie group: smaller+1 .. smaller+equal
        ranks.append(smaller + (equal + 1) / 2.0)
    return ranks


def pearson_oracle(a, b) -> float:
    a = [float(x) for x in a]
    b = [float(x) for x in b]
    n = len(a)
    ma = sum(a) / n
    mb = sum(b) / n
    cov = sum((x - ma) * (y - mb) for x, y in zip(a, b))
    va = sum((x - ma) ** 2 for x in a)
    vb = sum((y - mb) ** 2 for y in b)
    return cov / math.sqrt(va * vb)


def spearman_oracle(a, b) -> float:
    return pearson_oracle(mean_tie_ranks(a), mean_tie_ranks(b))


def alignment_oracle(pairs) -> float:
    total = 0.0
    for x, y in pairs:
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        x = x / math.sqrt(float(x @ x))
        y = y / math.sqrt(float(y @ y))
        total += float((x - y) @ (x - y))
    return total / len(pairs)


def uniformity_oracle(rows) -> float:
    rows = [np.asarray(r, dtype=np.float64) for r in rows]
    rows = [r / math.sqrt(float(r @ r)) for r in rows]
    values = []
    for i in range(len(rows)):
        for j in range(i + 1, len(rows)):
            d2 = float((rows[i] - rows[j]) @ (rows[i] - rows[j]))
            values.append(math.exp(-2.0 * d2))
    return math.log(sum(values) / len(values))


def avg_cosine_oracle(rows) -> float:
    rows = [np.asarray(r, dtype=np.float64) for r in rows]
    values = []
    for i in range(len(rows)):
        for j in range(i + 1, len(rows)):
            num = float(rows[i] @ rows[j])
            den = math.sqrt(float(rows[i] @ rows[i])) * math.sqrt(float(rows[j] @ rows[j]))
            values.append(num / den)
    return sum(values) / len(values)


def impact_two_loop(s, model, repr_layer=None) -> ImpactMatrix:
    """Unbatched perturbed masking: one forward call per mask variant."""
    vocab = model.vocab
    layer = model.config.num_layers if repr_layer is None else repr_layer
    positions = non_special_positions(s, vocab)
    n = len(positions)
    f = np.zeros((n, n), dtype=np.float32)
    for i, pi in enumerate(positions):
        first = mask_positions(s, {pi}, vocab)
        rep1 = forward(first, model.weights, model.config).hidden[layer][pi].astype(np.float64)
        for j, pj in enumerate(positions):
            if i == j:
                continue
            second = mask_positions(first, {pj}, vocab)
            rep2 = forward(second, model.weights, model.config).hidden[layer][pi].astype(np.float64)
            f[i, j] = np.linalg.norm(rep1 - rep2)
    return ImpactMatrix(f=f, sentence=s, positions=tuple(positions), repr_layer=layer)
