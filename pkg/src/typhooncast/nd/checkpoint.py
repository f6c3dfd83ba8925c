"""Checkpoint serialization: plain-text manifest plus one raw float payload.

The manifest lists ``name shape byte_offset`` per tensor, sorted by name so
identical parameter sets serialize byte-identically. The payload is the
concatenation of each array as little-endian float64. Round trips are
bit-exact.
"""

from __future__ import annotations

import os

import numpy as np

from ..errors import DataError
from .tensor import Tensor

HEADER = "typhooncast-checkpoint v1 float64 little-endian"


def _shape_token(shape) -> str:
    if len(shape) == 0:
        return "scalar"
    return "x".join(str(int(d)) for d in shape)


def _parse_shape(token: str):
    if token == "scalar":
        return ()
    return tuple(int(d) for d in token.split("x"))


def save_checkpoint(stem: str, tensors: dict) -> tuple[str, str]:
    """Write ``stem.manifest`` and ``stem.bin``; returns both paths."""
    manifest_path = stem + ".manifest"
    payload_path = stem + ".bin"
    lines = [HEADER]
    offset = 0
    blobs = []
    for name in sorted(tensors):
        arr = tensors[name]
        if isinstance(arr, Tensor):
            arr = arr.data
        arr = np.ascontiguousarray(arr, dtype="<f8")
        lines.append(f"{name} {_shape_token(arr.shape)} {offset}")
        blobs.append(arr.tobytes())
        offset += arr.nbytes
    os.makedirs(os.path.dirname(os.path.abspath(manifest_path)), exist_ok=True)
    with open(manifest_path, "w", encoding="ascii") as fh:
        fh.write("\n".join(lines) + "\n")
    with open(payload_path, "wb") as fh:
        fh.write(b"".join(blobs))
    return manifest_path, payload_path


def load_checkpoint(stem: str) -> dict[str, np.ndarray]:
    manifest_path = stem + ".manifest"
    payload_path = stem + ".bin"
    if not os.path.exists(manifest_path):
        raise DataError(f"missing checkpoint manifest: {manifest_path}")
    if not os.path.exists(payload_path):
        raise DataError(f"missing checkpoint payload: {payload_path}")
    with open(manifest_path, encoding="ascii") as fh:
        lines = [ln.rstrip("\n") for ln in fh if ln.strip()]
    if not lines or lines[0] != HEADER:
        raise DataError(f"bad checkpoint header in {manifest_path}")
    with open(payload_path, "rb") as fh:
        payload = fh.read()
    out: dict[str, np.ndarray] = {}
    for ln in lines[1:]:
        try:
            name, token, off = ln.rsplit(" ", 2)
            shape = _parse_shape(token)
            offset = int(off)
        except ValueError:
            raise DataError(f"bad manifest line: {ln!r}") from None
        count = int(np.prod(shape)) if shape else 1
        nbytes = count * 8
        if offset + nbytes > len(payload):
            raise DataError(f"payload truncated for tensor {name!r}")
        arr = np.frombuffer(payload, dtype="<f8", count=count, offset=offset)
        out[name] = arr.reshape(shape).copy()
    return out
