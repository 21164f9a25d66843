"""Binary container for sampled functions and lambda grids.

Layout (little-endian):

  grid function   magic ``HNCGFN01`` | uint32 axis count k
                  | per axis: float64 half_width, uint32 points
                  | row-major complex128 values (float64 re, im interleaved)

  lambda grid     magic ``HNCLGD01`` | uint32 n | uint8 has_constant
                  | float64 constant | uint64 count
                  | count * float64 nodes | count * float64 weights

Round trips are bit-exact: payloads come straight from ``ndarray.tobytes``.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .grids import Grid1D, GridFunction
from .representations import LambdaGrid

MAGIC_FUNCTION = b"HNCGFN01"
MAGIC_LGRID = b"HNCLGD01"


class ContainerError(ValueError):
    """Malformed or mismatched container data."""


def write_function(path, f: GridFunction) -> None:
    path = Path(path)
    parts = [MAGIC_FUNCTION, struct.pack("<I", f.ndim)]
    for g in f.grids:
        parts.append(struct.pack("<dI", g.half_width, g.points))
    parts.append(np.ascontiguousarray(f.values, dtype=np.complex128).tobytes())
    path.write_bytes(b"".join(parts))


def read_function(path) -> GridFunction:
    data = Path(path).read_bytes()
    if data[:8] != MAGIC_FUNCTION:
        raise ContainerError(f"bad magic {data[:8]!r}; expected grid function")
    off = 8
    (k,) = struct.unpack_from("<I", data, off)
    off += 4
    if not (1 <= k <= 7):
        raise ContainerError(f"implausible axis count {k}")
    grids = []
    for _ in range(k):
        half, points = struct.unpack_from("<dI", data, off)
        off += 12
        grids.append(Grid1D(half, points))
    shape = tuple(g.points for g in grids)
    count = int(np.prod(shape))
    expected = off + 16 * count
    if len(data) != expected:
        raise ContainerError(f"payload size {len(data) - off} != {16 * count}")
    values = np.frombuffer(data, dtype=np.complex128, count=count, offset=off)
    return GridFunction(tuple(grids), values.reshape(shape).copy())


def write_lambda_grid(path, lg: LambdaGrid) -> None:
    path = Path(path)
    has_c = lg.plancherel_constant is not None
    parts = [MAGIC_LGRID,
             struct.pack("<IBd", lg.n, int(has_c),
                         lg.plancherel_constant if has_c else 0.0),
             struct.pack("<Q", len(lg.nodes)),
             np.ascontiguousarray(lg.nodes, dtype=np.float64).tobytes(),
             np.ascontiguousarray(lg.weights, dtype=np.float64).tobytes()]
    path.write_bytes(b"".join(parts))


def read_lambda_grid(path) -> LambdaGrid:
    data = Path(path).read_bytes()
    if data[:8] != MAGIC_LGRID:
        raise ContainerError(f"bad magic {data[:8]!r}; expected lambda grid")
    off = 8
    n, has_c, const = struct.unpack_from("<IBd", data, off)
    off += struct.calcsize("<IBd")
    (count,) = struct.unpack_from("<Q", data, off)
    off += 8
    if len(data) != off + 16 * count:
        raise ContainerError("lambda grid payload size mismatch")
    nodes = np.frombuffer(data, dtype=np.float64, count=count, offset=off).copy()
    weights = np.frombuffer(data, dtype=np.float64, count=count,
                            offset=off + 8 * count).copy()
    return LambdaGrid(nodes, weights, n, const if has_c else None)
