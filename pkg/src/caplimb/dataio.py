"""Versioned little-endian binary container for datasets and models.

Layout:

    magic      4 bytes (b"CLDS" dataset, b"CLMD" model)
    version    uint32 LE
    hdr_len    uint32 LE
    header     hdr_len bytes of UTF-8 JSON (array names, dtypes, shapes,
               plus free-form metadata)
    payload    arrays concatenated in header order, raw C-order bytes
    crc32      uint32 LE over header + payload

Arrays round-trip bitwise. Readers reject unknown magic/version and any
checksum mismatch.
"""

from __future__ import annotations

import json
import struct
import zlib
from pathlib import Path

import numpy as np

DATASET_MAGIC = b"CLDS"
MODEL_MAGIC = b"CLMD"
FORMAT_VERSION = 1


class IoError(OSError):
    pass


class VersionMismatch(IoError):
    pass


class ChecksumMismatch(IoError):
    pass


def write_container(path, magic: bytes, metadata: dict, arrays: dict[str, np.ndarray]):
    header = {
        "metadata": metadata,
        "arrays": [
            {"name": k, "dtype": str(v.dtype), "shape": list(v.shape)}
            for k, v in arrays.items()
        ],
    }
    hdr = json.dumps(header, sort_keys=True).encode("utf-8")
    payload = b"".join(np.ascontiguousarray(v).tobytes() for v in arrays.values())
    crc = zlib.crc32(hdr + payload) & 0xFFFFFFFF
    try:
        with open(path, "wb") as f:
            f.write(magic)
            f.write(struct.pack("<II", FORMAT_VERSION, len(hdr)))
            f.write(hdr)
            f.write(payload)
            f.write(struct.pack("<I", crc))
    except OSError as e:
        raise IoError(str(e)) from e


def read_container(path, magic: bytes) -> tuple[dict, dict[str, np.ndarray]]:
    try:
        blob = Path(path).read_bytes()
    except OSError as e:
        raise IoError(str(e)) from e
    if len(blob) < 16 or blob[:4] != magic:
        raise VersionMismatch(f"{path}: bad magic, expected {magic!r}")
    version, hdr_len = struct.unpack("<II", blob[4:12])
    if version != FORMAT_VERSION:
        raise VersionMismatch(f"{path}: unsupported version {version}")
    if len(blob) < 12 + hdr_len + 4:
        raise ChecksumMismatch(f"{path}: truncated file")
    hdr = blob[12 : 12 + hdr_len]
    payload = blob[12 + hdr_len : -4]
    (crc_stored,) = struct.unpack("<I", blob[-4:])
    if zlib.crc32(hdr + payload) & 0xFFFFFFFF != crc_stored:
        raise ChecksumMismatch(f"{path}: checksum mismatch")
    try:
        header = json.loads(hdr.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise ChecksumMismatch(f"{path}: corrupt header") from e
    arrays = {}
    off = 0
    for spec in header["arrays"]:
        dt = np.dtype(spec["dtype"])
        count = int(np.prod(spec["shape"], dtype=np.int64)) if spec["shape"] else 1
        nbytes = dt.itemsize * count
        if off + nbytes > len(payload):
            raise ChecksumMismatch(f"{path}: payload shorter than declared arrays")
        arrays[spec["name"]] = np.frombuffer(
            payload[off : off + nbytes], dtype=dt
        ).reshape(spec["shape"]).copy()
        off += nbytes
    return header["metadata"], arrays
