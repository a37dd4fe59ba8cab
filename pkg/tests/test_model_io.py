import json
import struct

import numpy as np
import pytest

from ditto.errors import FormatError, WeightsError
from ditto.model_io import (
    EncoderConfig,
    LoadedModel,
    load_weights,
    read_tensors,
    required_tensor_shapes,
    write_tensors,
)


class TestContainer:
    def test_round_trip_bitwise(self, tmp_path):
        rng = np.random.default_rng(0)
        tensors = {
            "a": rng.normal(size=(3, 4)).astype(np.float32),
            "b": rng.normal(size=(7,)).astype(np.float32),
        }
        path = tmp_path / "t.safetensors"
        write_tensors(path, tensors, metadata={"k": "v"})
        loaded, metadata = read_tensors(path)
        assert metadata == {"k": "v"}
        for name in tensors:
            assert loaded[name].tobytes() == tensors[name].tobytes()

    def test_load_twice_identical(self, fixtures_dir):
        path = fixtures_dir / "tiny_model" / "model.safetensors"
        first, _ = read_tensors(path)
        second, _ = read_tensors(path)
        for name in first:
            assert first[name].tobytes() == second[name].tobytes()

    def test_too_short_file(self, tmp_path):
        path = tmp_path / "bad.safetensors"
        path.write_bytes(b"\x01\x02")
        with pytest.raises(FormatError) as err:
            read_tensors(path)
        assert err.value.offset == 0

    def test_header_length_beyond_file(self, tmp_path):
        path = tmp_path / "bad.safetensors"
        path.write_bytes(struct.pack("<Q", 1 << 40) + b"{}")
        with pytest.raises(FormatError):
            read_tensors(path)

    def test_malformed_json_header(self, tmp_path):
        path = tmp_path / "bad.safetensors"
        header = b"not json"
        path.write_bytes(struct.pack("<Q", len(header)) + header)
        with pytest.raises(FormatError) as err:
            read_tensors(path)
        assert err.value.offset == 8

    def test_unsupported_dtype(self, tmp_path):
        path = tmp_path / "bad.safetensors"
        header = json.dumps(
            {"x": {"dtype": "F16", "shape": [1], "data_offsets": [0, 2]}}
        ).encode()
        path.write_bytes(struct.pack("<Q", len(header)) + header + b"\x00\x00")
        with pytest.raises(FormatError, match="F16"):
            read_tensors(path)

    def test_inconsistent_offsets(self, tmp_path):
        path = tmp_path / "bad.safetensors"
        header = json.dumps(
            {"x": {"dtype": "F32", "shape": [2], "data_offsets": [0, 4]}}
        ).encode()
        path.write_bytes(struct.pack("<Q", len(header)) + header + b"\x00" * 4)
        with pytest.raises(FormatError, match="offsets"):
            read_tensors(path)


class TestEncoderConfig:
    def test_loads_tiny_fixture(self, fixtures_dir):
        config = EncoderConfig.load(fixtures_dir / "tiny_model" / "config.json")
        assert (config.num_layers, config.hidden_size, config.num_heads) == (2, 8, 2)
        assert config.head_dim == 4

    def test_divisibility(self):
        with pytest.raises(ValueError, match="divisible"):
            EncoderConfig(hidden_size=10, num_layers=1, num_heads=3, intermediate_size=4,
                          vocab_size=8, max_position_embeddings=8, type_vocab_size=2)

    def test_positive_sizes(self):
        with pytest.raises(ValueError):
            EncoderConfig(hidden_size=8, num_layers=0, num_heads=2, intermediate_size=4,
                          vocab_size=8, max_position_embeddings=8, type_vocab_size=2)

    def test_missing_field(self, tmp_path):
        path = tmp_path / "config.json"
        path.write_text(json.dumps({"hidden_size": 8}))
        with pytest.raises(FormatError, match="missing"):
            EncoderConfig.load(path)

    def test_save_load_round_trip(self, tmp_path):
        config = EncoderConfig(hidden_size=8, num_layers=2, num_heads=2, intermediate_size=32,
                               vocab_size=64, max_position_embeddings=64, type_vocab_size=2)
        config.save(tmp_path / "config.json")
        assert EncoderConfig.load(tmp_path / "config.json") == config


class TestLoadWeights:
    def test_tiny_fixture_loads_clean(self, tiny_model):
        assert tiny_model.weights.warnings == ()
        assert not tiny_model.weights.has_projection
        assert tiny_model.weights.embedding_size == 8

    def test_missing_tensor_named(self, tiny_model, tmp_path):
        tensors = {n: tiny_model.weights[n] for n in tiny_model.weights.names()}
        victim = "encoder.layer.1.intermediate.dense.bias"
        del tensors[victim]
        path = tmp_path / "model.safetensors"
        write_tensors(path, tensors)
        with pytest.raises(WeightsError, match=victim.replace(".", r"\.")):
            load_weights(path, tiny_model.config)

    def test_extra_tensor_warns_and_loads(self, tiny_model, tmp_path):
        tensors = {n: tiny_model.weights[n] for n in tiny_model.weights.names()}
        tensors["pooler.dense.weight"] = np.zeros((8, 8), dtype=np.float32)
        path = tmp_path / "model.safetensors"
        write_tensors(path, tensors)
        with pytest.warns(UserWarning, match="pooler.dense.weight"):
            weights = load_weights(path, tiny_model.config)
        assert any("pooler" in w for w in weights.warnings)
        assert "pooler.dense.weight" not in weights

    def test_shape_mismatch(self, tiny_model, tmp_path):
        tensors = {n: tiny_model.weights[n] for n in tiny_model.weights.names()}
        tensors["embeddings.LayerNorm.bias"] = np.zeros(9, dtype=np.float32)
        path = tmp_path / "model.safetensors"
        write_tensors(path, tensors)
        with pytest.raises(WeightsError, match="shape"):
            load_weights(path, tiny_model.config)

    def test_nan_rejected(self, tiny_model, tmp_path):
        tensors = {n: np.array(tiny_model.weights[n]) for n in tiny_model.weights.names()}
        bad = np.array(tensors["embeddings.LayerNorm.bias"])
        bad[0] = np.nan
        tensors["embeddings.LayerNorm.bias"] = bad
        path = tmp_path / "model.safetensors"
        write_tensors(path, tensors)
        with pytest.raises(WeightsError, match="NaN"):
            load_weights(path, tiny_model.config)

    def test_loaded_tensors_immutable(self, tiny_model):
        arr = tiny_model.weights["embeddings.LayerNorm.bias"]
        with pytest.raises(ValueError):
            arr[0] = 1.0

    def test_projection_shapes_requested_when_widths_differ(self):
        config = EncoderConfig(hidden_size=8, num_layers=1, num_heads=2, intermediate_size=16,
                               vocab_size=16, max_position_embeddings=16, type_vocab_size=1)
        shapes = required_tensor_shapes(config, embedding_size=4)
        assert shapes["embeddings_project.weight"] == (8, 4)
        assert shapes["embeddings.word_embeddings.weight"] == (16, 4)


class TestLoadedModel:
    def test_loads_vocab(self, tiny_model):
        assert tiny_model.vocab is not None
        assert len(tiny_model.vocab) == 64

    def test_missing_vocab_is_ok(self, tiny_model, tmp_path):
        model_dir = tmp_path / "m"
        model_dir.mkdir()
        tiny_model.config.save(model_dir / "config.json")
        write_tensors(
            model_dir / "model.safetensors",
            {n: tiny_model.weights[n] for n in tiny_model.weights.names()},
        )
        loaded = LoadedModel.load(model_dir)
        assert loaded.vocab is None
        with pytest.raises(Exception, match="vocab"):
            loaded.require_vocab()
