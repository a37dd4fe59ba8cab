import json
from pathlib import Path

import pytest

from ditto.model_io import LoadedModel, read_tensors

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def tiny_model() -> LoadedModel:
    return LoadedModel.load(FIXTURES / "tiny_model")


@pytest.fixture(scope="session")
def parity_corpus() -> list[dict]:
    with open(FIXTURES / "parity" / "corpus.jsonl", encoding="utf-8") as f:
        return [json.loads(line) for line in f]


@pytest.fixture(scope="session")
def forward_oracles() -> list[tuple[dict, dict]]:
    """(sidecar, tensors) for each committed forward dump."""
    dumps = []
    for k in range(5):
        with open(FIXTURES / "oracle" / f"forward_{k}.json", encoding="utf-8") as f:
            meta = json.load(f)
        tensors, _ = read_tensors(FIXTURES / "oracle" / f"forward_{k}.safetensors")
        dumps.append((meta, tensors))
    return dumps


@pytest.fixture(scope="session")
def sts_root() -> Path:
    return FIXTURES / "sts"


@pytest.fixture(scope="session")
def wiki_corpus_path() -> Path:
    return FIXTURES / "corpora" / "wiki_sample.txt"


@pytest.fixture(scope="session")
def pud_corpus_path() -> Path:
    return FIXTURES / "corpora" / "pud_sample.txt"
