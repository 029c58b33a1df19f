"""Binary container for trained models.

Layout, all integers little-endian u32:

    4-byte magic | config_len | config JSON (UTF-8) | tensor_count |
    per tensor: rows | cols | rows*cols float64 values, row-major LE

The magic selects the model family; the JSON carries whatever settings
the family needs to rebuild the architecture before loading tensors.
"""

import json
import os
import struct

import numpy as np

from .errors import DataError

MAGIC_AUTOENCODER = b"CAE1"
MAGIC_BACKBONE = b"CAM0"
MAGIC_AUGS = b"CAM1"
MAGIC_AUGSS = b"CAM2"

KNOWN_MAGICS = (MAGIC_AUTOENCODER, MAGIC_BACKBONE, MAGIC_AUGS, MAGIC_AUGSS)


def save_model_file(path: str, magic: bytes, config: dict, tensors: list[np.ndarray]) -> None:
    if magic not in KNOWN_MAGICS:
        raise ValueError(f"unknown container magic {magic!r}")
    blob = json.dumps(config, sort_keys=True).encode("utf-8")
    tmp = path + ".tmp"
    with open(tmp, "wb") as fh:
        fh.write(magic)
        fh.write(struct.pack("<I", len(blob)))
        fh.write(blob)
        fh.write(struct.pack("<I", len(tensors)))
        for t in tensors:
            t = np.ascontiguousarray(t, dtype=np.float64)
            if t.ndim != 2:
                raise ValueError(f"tensors must be 2-D, got shape {t.shape}")
            fh.write(struct.pack("<II", t.shape[0], t.shape[1]))
            fh.write(t.astype("<f8").tobytes())
    os.replace(tmp, path)


def _read_exactly(fh, count: int, path: str, what: str) -> bytes:
    data = fh.read(count)
    if len(data) != count:
        raise DataError(f"{path}: truncated model file while reading {what}")
    return data


def load_model_file(path: str) -> tuple[bytes, dict, list[np.ndarray]]:
    try:
        fh = open(path, "rb")
    except FileNotFoundError as exc:
        raise DataError(f"{path}: missing model file") from exc
    with fh:
        magic = _read_exactly(fh, 4, path, "magic")
        if magic not in KNOWN_MAGICS:
            raise DataError(f"{path}: unrecognized model container magic {magic!r}")
        (config_len,) = struct.unpack("<I", _read_exactly(fh, 4, path, "config length"))
        try:
            config = json.loads(_read_exactly(fh, config_len, path, "config").decode("utf-8"))
        except (json.JSONDecodeError, UnicodeDecodeError) as exc:
            raise DataError(f"{path}: bad config block: {exc}") from exc
        (count,) = struct.unpack("<I", _read_exactly(fh, 4, path, "tensor count"))
        tensors = []
        for i in range(count):
            rows, cols = struct.unpack("<II", _read_exactly(fh, 8, path, f"tensor {i} shape"))
            raw = _read_exactly(fh, rows * cols * 8, path, f"tensor {i} data")
            tensors.append(np.frombuffer(raw, dtype="<f8").reshape(rows, cols).astype(np.float64))
        if fh.read(1):
            raise DataError(f"{path}: trailing bytes after the last tensor")
    return magic, config, tensors


def assign_tensors(params, tensors: list[np.ndarray], path: str = "<model>") -> None:
    """Copy loaded tensors into parameters, in order, with shape checks."""
    if len(params) != len(tensors):
        raise DataError(f"{path}: {len(tensors)} tensors for {len(params)} parameters")
    for p, t in zip(params, tensors):
        if p.value.shape != t.shape:
            raise DataError(
                f"{path}: tensor shape {t.shape} does not fit parameter '{p.name}' {p.value.shape}"
            )
        p.value[...] = t
