"""Binary snapshot-matrix interchange format.

Layout: a 16-byte header (8-byte magic ``NESTSNP1``, then N and T as
little-endian uint32), followed by the N x T complex matrix in column-major
order as little-endian float64 pairs (real, imaginary). Bit-exact across
platforms and languages.
"""

import struct

import numpy as np

from .synth import SnapshotMatrix

MAGIC = b"NESTSNP1"
_HEADER = struct.Struct("<8sII")


def write_snapshots(path, snapshots):
    """Writes a SnapshotMatrix to ``path`` in the interchange format."""
    data = snapshots.data
    n, t = data.shape
    interleaved = np.empty((2, n, t), dtype="<f8", order="F")
    interleaved[0] = data.real
    interleaved[1] = data.imag
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, n, t))
        # Column-major over the matrix, re/im innermost.
        fh.write(np.ascontiguousarray(interleaved.transpose(2, 1, 0)).tobytes())


def read_snapshots(path):
    """Reads a SnapshotMatrix written by :func:`write_snapshots`."""
    with open(path, "rb") as fh:
        header = fh.read(_HEADER.size)
        if len(header) != _HEADER.size:
            raise ValueError(f"{path}: truncated header")
        magic, n, t = _HEADER.unpack(header)
        if magic != MAGIC:
            raise ValueError(f"{path}: bad magic {magic!r}")
        raw = np.fromfile(fh, dtype="<f8", count=2 * n * t)
    if raw.size != 2 * n * t:
        raise ValueError(f"{path}: expected {2 * n * t} floats, got {raw.size}")
    pairs = raw.reshape(t, n, 2)
    data = (pairs[:, :, 0] + 1j * pairs[:, :, 1]).T
    return SnapshotMatrix(data=np.ascontiguousarray(data))
