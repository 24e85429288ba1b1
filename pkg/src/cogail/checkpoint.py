"""Deterministic binary checkpoint format.

Layout: magic, u32 format version, u64 header length, UTF-8 JSON header,
then the raw little-endian array payloads back to back.  The header
carries user metadata plus an ordered array index (name, dtype, shape,
offset).  Writing the same state twice produces byte-identical files.
"""

import json
import struct

import numpy as np

MAGIC = b"CGCP"
FORMAT_VERSION = 1


class CheckpointError(RuntimeError):
    pass


def save_checkpoint(path, meta: dict, arrays: dict):
    """Write metadata and named float arrays to `path`."""
    index = []
    payload = bytearray()
    for name, arr in arrays.items():
        arr = np.ascontiguousarray(arr)
        data = arr.astype(arr.dtype.newbyteorder("<"), copy=False).tobytes()
        index.append({"name": name, "dtype": arr.dtype.str.replace(">", "<"),
                      "shape": list(arr.shape), "offset": len(payload)})
        payload.extend(data)
    header = json.dumps({"meta": meta, "arrays": index},
                        sort_keys=True, separators=(",", ":")).encode("utf-8")
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<I", FORMAT_VERSION))
        f.write(struct.pack("<Q", len(header)))
        f.write(header)
        f.write(bytes(payload))


def load_checkpoint(path):
    """Read a checkpoint; returns (meta, arrays) with insertion order kept."""
    with open(path, "rb") as f:
        blob = f.read()
    if blob[:4] != MAGIC:
        raise CheckpointError("%s: not a checkpoint file" % (path,))
    version = struct.unpack("<I", blob[4:8])[0]
    if version != FORMAT_VERSION:
        raise CheckpointError("%s: unsupported checkpoint version %d"
                              % (path, version))
    hlen = struct.unpack("<Q", blob[8:16])[0]
    header = json.loads(blob[16:16 + hlen].decode("utf-8"))
    base = 16 + hlen
    arrays = {}
    for entry in header["arrays"]:
        dt = np.dtype(entry["dtype"])
        shape = tuple(entry["shape"])
        n = dt.itemsize * int(np.prod(shape, dtype=np.int64)) if shape else dt.itemsize
        start = base + entry["offset"]
        arr = np.frombuffer(blob[start:start + n], dtype=dt).reshape(shape)
        arrays[entry["name"]] = arr.copy()
    return header["meta"], arrays
