"""Linear parameter interpolation between two checkpoints.

``out[k] = alpha * theta_v[k] + (1 - alpha) * theta_t[k]`` for every key the
filter accepts that both checkpoints share; everything else of ``theta_v``
is copied through untouched and keys only ``theta_t`` has are dropped.

Checkpoints are read and written in a small self-describing container: an
8-byte little-endian header length, a JSON header mapping each key to
``{"dtype", "shape", "data_offsets"}``, then the raw little-endian arrays
(the safetensors layout). ``.json`` files hold the same data as plain text.
"""

from __future__ import annotations

import fnmatch
import json
import os
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Mapping

import numpy as np

from .errors import NonFiniteInput, ShapeMismatch

ParameterMap = dict[str, np.ndarray]

_DTYPES = {
    "F64": np.float64,
    "F32": np.float32,
    "F16": np.float16,
    "I64": np.int64,
    "I32": np.int32,
    "I16": np.int16,
    "I8": np.int8,
    "U8": np.uint8,
    "BOOL": np.bool_,
}
_CODES = {np.dtype(v): k for k, v in _DTYPES.items()}


@dataclass(frozen=True)
class MergeSpec:
    alpha: float = 0.8
    key_filter: str | Callable[[str], bool] = "*"

    def __post_init__(self) -> None:
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha}")

    def accepts(self, key: str) -> bool:
        if callable(self.key_filter):
            return bool(self.key_filter(key))
        return any(fnmatch.fnmatchcase(key, pat) for pat in self.key_filter.split(","))


def _check_finite(name: str, key: str, arr: np.ndarray) -> None:
    if np.issubdtype(arr.dtype, np.floating) and not np.all(np.isfinite(arr)):
        raise NonFiniteInput(f"{name}[{key!r}] contains NaN or inf")


def interpolate(theta_v: Mapping[str, np.ndarray], theta_t: Mapping[str, np.ndarray], spec: MergeSpec) -> ParameterMap:
    alpha = float(spec.alpha)
    out: ParameterMap = {}
    for key, v in theta_v.items():
        v = np.asarray(v)
        _check_finite("theta_v", key, v)
        if key not in theta_t or not spec.accepts(key):
            out[key] = v.copy()
            continue
        t = np.asarray(theta_t[key])
        if t.shape != v.shape:
            raise ShapeMismatch(f"{key!r}: {v.shape} vs {t.shape}")
        _check_finite("theta_t", key, t)
        v64, t64 = v.astype(np.float64), t.astype(np.float64)
        merged = alpha * v64 + (1.0 - alpha) * t64
        # rounding can push a combination a hair outside its endpoints
        merged = np.clip(merged, np.minimum(v64, t64), np.maximum(v64, t64))
        if np.issubdtype(v.dtype, np.integer):
            merged = np.rint(merged)
        out[key] = merged.astype(v.dtype)
    return out


# --------------------------------------------------------------------------
# container I/O


def save_tensors(path: str | os.PathLike, params: Mapping[str, np.ndarray], metadata: dict[str, str] | None = None) -> None:
    path = Path(path)
    if path.suffix == ".json":
        save_text(path, params)
        return
    header: dict = {}
    chunks = []
    offset = 0
    for key in sorted(params):
        arr = np.asarray(params[key])
        code = _CODES.get(np.dtype(arr.dtype.name))
        if code is None:
            raise TypeError(f"unsupported dtype {arr.dtype} for {key!r}")
        raw = arr.astype(arr.dtype.newbyteorder("<"), copy=False).tobytes(order="C")
        header[key] = {"dtype": code, "shape": list(arr.shape), "data_offsets": [offset, offset + len(raw)]}
        chunks.append(raw)
        offset += len(raw)
    if metadata:
        header["__metadata__"] = metadata
    blob = json.dumps(header, separators=(",", ":")).encode("utf-8")
    blob += b" " * (-len(blob) % 8)
    with path.open("wb") as fh:
        fh.write(struct.pack("<Q", len(blob)))
        fh.write(blob)
        for raw in chunks:
            fh.write(raw)


def load_tensors(path: str | os.PathLike) -> ParameterMap:
    path = Path(path)
    if path.suffix == ".json":
        return load_text(path)
    data = path.read_bytes()
    (n,) = struct.unpack("<Q", data[:8])
    header = json.loads(data[8 : 8 + n])
    body = memoryview(data)[8 + n :]
    out: ParameterMap = {}
    for key, info in header.items():
        if key == "__metadata__":
            continue
        dtype = np.dtype(_DTYPES[info["dtype"]]).newbyteorder("<")
        begin, end = info["data_offsets"]
        arr = np.frombuffer(body[begin:end], dtype=dtype).reshape(info["shape"])
        out[key] = arr.astype(dtype.newbyteorder("="))
    return out


def save_text(path: str | os.PathLike, params: Mapping[str, np.ndarray]) -> None:
    rec = {}
    for key in sorted(params):
        arr = np.asarray(params[key])
        rec[key] = {"dtype": _CODES[np.dtype(arr.dtype.name)], "shape": list(arr.shape), "values": arr.ravel().tolist()}
    Path(path).write_text(json.dumps(rec, indent=1), encoding="utf-8")


def load_text(path: str | os.PathLike) -> ParameterMap:
    rec = json.loads(Path(path).read_text(encoding="utf-8"))
    out = {}
    for key, info in rec.items():
        dtype = _DTYPES[info.get("dtype", "F64")]
        out[key] = np.asarray(info["values"], dtype=dtype).reshape(info.get("shape", [len(info["values"])]))
    return out
