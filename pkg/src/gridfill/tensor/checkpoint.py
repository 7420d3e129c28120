"""On-disk tensor store: plain-text header plus one little-endian blob.

Layout:

    GRIDFILL-CKPT-1
    meta {...json...}
    tensor <name> <dtype> <d0xd1x...> <byte offset into blob>
    ...
    end
    <raw little-endian tensor data>

The header is utf-8; names may not contain whitespace. Scalars are
written with the shape token "scalar".
"""

import json

import numpy as np

from ..errors import DatasetError

MAGIC = "GRIDFILL-CKPT-1"

_DTYPES = {"f4": "<f4", "f8": "<f8", "i8": "<i8"}


def _shape_token(shape):
    return "scalar" if shape == () else "x".join(str(d) for d in shape)


def _parse_shape(token):
    return () if token == "scalar" else tuple(int(d) for d in token.split("x"))


def save_tensors(path, meta, tensors):
    """Write meta (JSON-able dict) and named arrays to path."""
    lines = [MAGIC, "meta " + json.dumps(meta, sort_keys=True)]
    blobs = []
    offset = 0
    for name in sorted(tensors):
        arr = np.asarray(tensors[name])
        code = {np.float32: "f4", np.float64: "f8", np.int64: "i8"}.get(arr.dtype.type)
        if code is None:
            raise DatasetError(f"checkpoint: unsupported dtype {arr.dtype} for {name}")
        if any(ch.isspace() for ch in name):
            raise DatasetError(f"checkpoint: whitespace in tensor name '{name}'")
        raw = np.ascontiguousarray(arr, dtype=_DTYPES[code]).tobytes()
        lines.append(f"tensor {name} {code} {_shape_token(arr.shape)} {offset}")
        blobs.append(raw)
        offset += len(raw)
    lines.append("end")
    with open(path, "wb") as f:
        f.write(("\n".join(lines) + "\n").encode("utf-8"))
        for raw in blobs:
            f.write(raw)


def load_tensors(path):
    """Read (meta, dict name -> array) written by save_tensors."""
    with open(path, "rb") as f:
        data = f.read()
    nl = data.find(b"\n")
    if nl < 0 or data[:nl].decode("utf-8", "replace") != MAGIC:
        raise DatasetError(f"checkpoint: bad magic in {path}")
    # locate the end-of-header marker
    marker = b"\nend\n"
    end = data.find(marker)
    if end < 0:
        raise DatasetError(f"checkpoint: truncated header in {path}")
    header = data[nl + 1 : end].decode("utf-8").splitlines()
    blob = data[end + len(marker) :]
    meta = {}
    tensors = {}
    for line in header:
        if line.startswith("meta "):
            meta = json.loads(line[5:])
            continue
        parts = line.split()
        if len(parts) != 5 or parts[0] != "tensor":
            raise DatasetError(f"checkpoint: bad header line '{line}'")
        _, name, code, shape_tok, off = parts
        if code not in _DTYPES:
            raise DatasetError(f"checkpoint: unknown dtype code '{code}'")
        shape = _parse_shape(shape_tok)
        dt = np.dtype(_DTYPES[code])
        count = int(np.prod(shape, dtype=np.int64)) if shape else 1
        start = int(off)
        raw = blob[start : start + count * dt.itemsize]
        if len(raw) != count * dt.itemsize:
            raise DatasetError(f"checkpoint: truncated blob for '{name}'")
        tensors[name] = np.frombuffer(raw, dtype=dt).reshape(shape).copy()
    return meta, tensors
