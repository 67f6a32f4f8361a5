"""Named-tensor checkpoint files (magic ``NFCK``).

Byte layout, all integers little-endian:

    offset  size  field
    0       4     magic b"NFCK"
    4       4     u32 format version (currently 1)
    8       4     u32 tensor count N
    12      ...   N table entries, each:
                      u16  name length (bytes)
                      ...  name, UTF-8
                      u8   dtype code (0 = float32, 1 = float64)
                      u8   ndim
                      u32 * ndim  shape
                      u64  offset of the block inside the data section
    ...     8     u64 data section size (bytes)
    ...     ...   raw row-major little-endian blocks

The table is written in sorted name order so identical tensor dicts always
serialize to identical bytes.
"""

from __future__ import annotations

import struct

import numpy as np

MAGIC = b"NFCK"
VERSION = 1
_DTYPES = {0: np.dtype("<f4"), 1: np.dtype("<f8")}
_CODES = {"float32": 0, "float64": 1}


class CheckpointError(IOError):
    pass


def save_checkpoint(path, named: dict[str, np.ndarray], dtype: str = "float32"):
    """Write named arrays; values are cast to `dtype` ('float32'|'float64')."""
    code = _CODES[dtype]
    np_dtype = _DTYPES[code]
    names = sorted(named)
    blocks = []
    table = bytearray()
    offset = 0
    for name in names:
        arr = np.ascontiguousarray(np.asarray(named[name]), dtype=np_dtype)
        raw = arr.tobytes()
        nb = name.encode("utf-8")
        table += struct.pack("<H", len(nb)) + nb
        table += struct.pack("<BB", code, arr.ndim)
        table += struct.pack(f"<{arr.ndim}I", *arr.shape)
        table += struct.pack("<Q", offset)
        blocks.append(raw)
        offset += len(raw)
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<II", VERSION, len(names)))
        fh.write(table)
        fh.write(struct.pack("<Q", offset))
        for raw in blocks:
            fh.write(raw)


def load_checkpoint(path) -> dict[str, np.ndarray]:
    """Read a checkpoint back as float64 arrays keyed by name."""
    with open(path, "rb") as fh:
        buf = fh.read()
    if buf[:4] != MAGIC:
        raise CheckpointError(f"{path}: bad magic {buf[:4]!r} at offset 0")
    pos = 4
    version, count = struct.unpack_from("<II", buf, pos)
    pos += 8
    if version != VERSION:
        raise CheckpointError(f"{path}: unsupported version {version} at offset 4")
    entries = []
    try:
        for _ in range(count):
            (nlen,) = struct.unpack_from("<H", buf, pos)
            pos += 2
            name = buf[pos:pos + nlen].decode("utf-8")
            pos += nlen
            code, ndim = struct.unpack_from("<BB", buf, pos)
            pos += 2
            shape = struct.unpack_from(f"<{ndim}I", buf, pos)
            pos += 4 * ndim
            (off,) = struct.unpack_from("<Q", buf, pos)
            pos += 8
            if code not in _DTYPES:
                raise CheckpointError(f"{path}: unknown dtype code {code} at offset {pos}")
            entries.append((name, code, shape, off))
        (data_size,) = struct.unpack_from("<Q", buf, pos)
        pos += 8
    except struct.error:
        raise CheckpointError(f"{path}: truncated header at offset {pos}") from None
    data = buf[pos:]
    if len(data) < data_size:
        raise CheckpointError(
            f"{path}: truncated data section at offset {pos + len(data)} "
            f"(expected {data_size} bytes, found {len(data)})")
    out = {}
    for name, code, shape, off in entries:
        np_dtype = _DTYPES[code]
        nbytes = int(np.prod(shape, dtype=np.int64)) * np_dtype.itemsize
        if off + nbytes > data_size:
            raise CheckpointError(f"{path}: tensor {name!r} block overruns data section "
                                  f"at offset {pos + off}")
        arr = np.frombuffer(data, dtype=np_dtype, count=nbytes // np_dtype.itemsize,
                            offset=off).reshape(shape)
        out[name] = arr.astype(np.float64)
    return out
