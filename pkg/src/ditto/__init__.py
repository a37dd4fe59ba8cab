"""Learning-free sentence embeddings via diagonal attention pooling.

A self-contained BERT-family inference engine (portable weight container,
WordPiece tokenizer, full hidden-state/attention forward pass), the Ditto
pooling family with its learning-free baselines, perturbed-masking probes,
TF-IDF weighting, STS evaluation, and embedding-geometry diagnostics.
"""

from .encoder import EncoderOutput, HeadRef, diagonal_attention, forward, forward_batch
from .errors import DittoError
from .estimator import DittoSentenceEncoder
from .model_io import EncoderConfig, LoadedModel, ModelWeights, load_weights
from .pooling import PoolingSpec, embed_corpus, pool
from .probe import ImpactMatrix, impact_matrix, impact_tfidf_correlation, mean_impact
from .sts import EvalReport, StsExample, evaluate, grid_search_head, load_sts
from .tfidf import TfidfModel
from .tokenization import TokenizedSentence, Vocab, encode, mask_positions, wordpiece

__version__ = "0.1.0"

__all__ = [
    "DittoError",
    "DittoSentenceEncoder",
    "EncoderConfig",
    "EncoderOutput",
    "EvalReport",
    "HeadRef",
    "ImpactMatrix",
    "LoadedModel",
    "ModelWeights",
    "PoolingSpec",
    "StsExample",
    "TfidfModel",
    "TokenizedSentence",
    "Vocab",
    "diagonal_attention",
    "embed_corpus",
    "encode",
    "evaluate",
    "forward",
    "forward_batch",
    "grid_search_head",
    "impact_matrix",
    "impact_tfidf_correlation",
    "load_sts",
    "load_weights",
    "mask_positions",
    "mean_impact",
    "pool",
    "wordpiece",
]
