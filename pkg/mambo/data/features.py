"""
Feature File Format (MBFT1)

┌──────────────────────────────────────────────┐
│ Magic "MBFT1\0" (6 bytes)                    │
│ T (u32 LE) | F (u32 LE)                      │
│ T*F float32 LE, row-major (frame by frame)   │
└──────────────────────────────────────────────┘

Readers reject malformed files without returning partial data.
"""

import struct

import numpy as np

from ..errors import (BadMagicError, FormatError, NonFiniteError, ShapeError,
                      SizeOverflowError, TruncatedError)

MAGIC = b"MBFT1\0"
HEADER_FORMAT = '<II'
HEADER_SIZE = len(MAGIC) + struct.calcsize(HEADER_FORMAT)
MAX_ELEMENTS = 2 ** 31 - 1


def encode_features(x):
    """
    Serialize a (T, F) matrix.

    Returns:
        bytes
    """
    x = np.asarray(x)
    if x.ndim != 2 or x.shape[0] < 1 or x.shape[1] < 1:
        raise ShapeError(f"features must be a non-empty (T, F) matrix, got shape {x.shape}")
    if x.shape[0] * x.shape[1] > MAX_ELEMENTS:
        raise SizeOverflowError(f"{x.shape[0]}x{x.shape[1]} features exceed {MAX_ELEMENTS} values")
    x = x.astype('<f4', copy=False)
    if not np.isfinite(x).all():
        raise NonFiniteError("features contain non-finite values")
    return MAGIC + struct.pack(HEADER_FORMAT, *x.shape) + np.ascontiguousarray(x).tobytes()


def decode_features(data, source="features"):
    """
    Parse MBFT1 bytes.

    Returns:
        np.ndarray: float32 (T, F)

    Raises:
        BadMagicError, TruncatedError, SizeOverflowError, FormatError
    """
    if len(data) < len(MAGIC) and MAGIC.startswith(bytes(data)):
        raise TruncatedError(f"{source}: truncated magic ({len(data)} < {len(MAGIC)} bytes)")
    if data[:len(MAGIC)] != MAGIC:
        raise BadMagicError(f"{source}: bad magic, not an MBFT1 feature file")
    if len(data) < HEADER_SIZE:
        raise TruncatedError(f"{source}: truncated header ({len(data)} < {HEADER_SIZE} bytes)")
    frames, dims = struct.unpack(HEADER_FORMAT, data[len(MAGIC):HEADER_SIZE])
    if frames == 0 or dims == 0:
        raise FormatError(f"{source}: zero-sized features T={frames} F={dims}")
    if frames * dims > MAX_ELEMENTS:
        raise SizeOverflowError(f"{source}: T*F = {frames}*{dims} exceeds {MAX_ELEMENTS}")
    expected = HEADER_SIZE + 4 * frames * dims
    if len(data) < expected:
        raise TruncatedError(f"{source}: truncated payload ({len(data)} < {expected} bytes)")
    if len(data) > expected:
        raise FormatError(f"{source}: {len(data) - expected} trailing bytes")
    payload = np.frombuffer(data, dtype='<f4', offset=HEADER_SIZE, count=frames * dims)
    return payload.astype(np.float32).reshape(frames, dims)


def write_features(path, x):
    """Write a (T, F) matrix to path"""
    data = encode_features(x)
    with open(path, 'wb') as f:
        f.write(data)
    return len(data)


def read_features(path):
    """Read a (T, F) float32 matrix from path"""
    with open(path, 'rb') as f:
        data = f.read()
    return decode_features(data, source=str(path))
