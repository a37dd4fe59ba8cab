"""Offline conversion layer for the diagonal-attention-pooling engine.

Dumps published checkpoints into the portable weight container, normalizes
the STS benchmark into the canonical TSV layout, pre-tokenizes inputs for
byte-pair models, and generates the committed test fixtures (tiny model,
oracle activation dumps, tokenizer parity corpus).
"""

from .containers import write_container
from .fixtures import make_fixtures
from .models import export_model
from .sts_data import export_sts

__all__ = ["export_model", "export_sts", "make_fixtures", "write_container"]
