"""Writer for the portable tensor container consumed by the engine.

Kept independent of the engine package on purpose: the file format is the
interface. Layout: 8-byte little-endian header length, JSON header mapping
tensor name -> {dtype: "F32", shape, data_offsets [begin, end)}, raw
little-endian float32 payload. The header is space-padded to an 8-byte
boundary.
"""

from __future__ import annotations

import json
import struct

import numpy as np


def write_container(path, tensors: dict[str, np.ndarray], metadata: dict[str, str] | None = None) -> None:
    header: dict[str, object] = {}
    if metadata:
        header["__metadata__"] = {str(k): str(v) for k, v in metadata.items()}
    payload = bytearray()
    for name, value in tensors.items():
        arr = np.ascontiguousarray(np.asarray(value, dtype=np.float32), dtype="<f4")
        begin = len(payload)
        payload.extend(arr.tobytes())
        header[name] = {
            "dtype": "F32",
            "shape": list(arr.shape),
            "data_offsets": [begin, len(payload)],
        }
    raw = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")
    raw += b" " * (-(8 + len(raw)) % 8)
    with open(path, "wb") as f:
        f.write(struct.pack("<Q", len(raw)))
        f.write(raw)
        f.write(payload)
