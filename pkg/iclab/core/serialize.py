"""Binary tensor serialization.

Tensor file format (all integers little-endian):

====================  ========  ===========================================
field                 size      description
====================  ========  ===========================================
magic                 4 bytes   ``b"ICTN"``
rank                  u32       number of dimensions
dims                  rank*u64  shape, outermost first
dtype flag            u8        0 = float32, 1 = float64
payload               ...       row-major little-endian data
====================  ========  ===========================================

Used for checkpoints and golden files.
"""
import io
import math
import struct

import numpy as np

from iclab import error

MAGIC = b"ICTN"
DTYPE_FLAGS = {
    0: np.dtype("<f4"),
    1: np.dtype("<f8"),
}
FLAG_FOR_DTYPE = {
    np.dtype(np.float32): 0,
    np.dtype(np.float64): 1,
}


def write_tensor(fout, x):
    """Write ndarray ``x`` to binary file object ``fout``."""
    x = np.asarray(x)
    if x.dtype not in FLAG_FOR_DTYPE:
        raise error.ParameterError(
            f"only float32 and float64 tensors can be serialized: {x.dtype}"
        )
    flag = FLAG_FOR_DTYPE[x.dtype]
    fout.write(MAGIC)
    fout.write(struct.pack("<I", x.ndim))
    fout.write(struct.pack(f"<{x.ndim}Q", *x.shape))
    fout.write(struct.pack("<B", flag))
    fout.write(np.ascontiguousarray(x, dtype=DTYPE_FLAGS[flag]).tobytes())


def read_tensor(fin):
    """Read one tensor from binary file object ``fin``.

    Raises
    ------
    FormatError
        if the stream is truncated or not in tensor format
    """
    offset = fin.tell() if fin.seekable() else 0
    magic = fin.read(4)
    if magic != MAGIC:
        raise error.FormatError(f"bad tensor magic {magic!r}", offset)
    rank = _unpack(fin, "<I", offset + 4)[0]
    dims = _unpack(fin, f"<{rank}Q", offset + 8)
    flag_offset = offset + 8 + 8 * rank
    flag = _unpack(fin, "<B", flag_offset)[0]
    if flag not in DTYPE_FLAGS:
        raise error.FormatError(f"unknown dtype flag {flag}", flag_offset)
    dtype = DTYPE_FLAGS[flag]
    nbytes = math.prod(dims) * dtype.itemsize
    payload = fin.read(nbytes)
    if len(payload) != nbytes:
        raise error.FormatError(
            f"truncated payload: expected {nbytes} bytes, got {len(payload)}",
            flag_offset + 1 + len(payload)
        )
    x = np.frombuffer(payload, dtype=dtype).reshape(dims)
    return x.astype(dtype.newbyteorder("="))


def _unpack(fin, fmt, offset):
    size = struct.calcsize(fmt)
    data = fin.read(size)
    if len(data) != size:
        raise error.FormatError("unexpected end of tensor header", offset)
    return struct.unpack(fmt, data)


def tensor_to_bytes(x):
    buf = io.BytesIO()
    write_tensor(buf, x)
    return buf.getvalue()


def tensor_from_bytes(data):
    return read_tensor(io.BytesIO(data))


def save_tensor(path, x):
    with open(path, "wb") as fout:
        write_tensor(fout, x)


def load_tensor(path):
    with open(path, "rb") as fin:
        return read_tensor(fin)
