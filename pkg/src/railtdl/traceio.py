"""Canonical trace file formats.

Binary layout (little-endian), the canonical bit-exact form:

    offset  size  field
    0       8     magic b"RAILTDL\\0"
    8       4     format version (u32, currently 1)
    12      4     tap count L (u32)
    16      8     snapshot count n (u64)
    24      8     snapshot interval, picoseconds (u64)
    32      8     delay resolution, picoseconds (u64)
    40      8     carrier frequency, Hz (f64)
    48      8     RNG seed (u64)
    56      16    generator tag, zero-padded ASCII
    72      8*L   tap delays, picoseconds (i64 each)
    ...     16*n*L gains, row-major complex128 (f64 re, f64 im)

Exact complex zeros encode dead taps, so sparsity survives a round trip
losslessly.  A delimited-text export exists for inspection; the binary form
is what the tooling reads back.  All writes are atomic (temp file + rename).
"""

import os
import struct
import tempfile

import numpy as np

from .generator import CirTrace, TraceMeta

__all__ = ["TraceFormatError", "write_trace", "write_trace_text", "read_trace"]

MAGIC = b"RAILTDL\x00"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<8sIIQQQdQ16s")


class TraceFormatError(ValueError):
    """Corrupt or foreign trace file; ``offset`` is the failing byte."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


def atomic_write_bytes(path: str, data: bytes) -> None:
    fd, tmp = tempfile.mkstemp(dir=os.path.dirname(os.path.abspath(path)))
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _seconds_to_ps(seconds: float) -> int:
    return round(seconds * 1e12)


def trace_to_bytes(trace: CirTrace) -> bytes:
    tag = trace.meta.generator_tag.encode("ascii")[:16]
    header = _HEADER.pack(
        MAGIC,
        FORMAT_VERSION,
        trace.n_taps,
        trace.n_snapshots,
        _seconds_to_ps(trace.snapshot_interval_s),
        _seconds_to_ps(trace.meta.delay_resolution_s),
        trace.meta.carrier_hz,
        trace.meta.rng_seed,
        tag,
    )
    delays = np.array([_seconds_to_ps(d) for d in trace.delays_s], dtype="<i8")
    gains = np.ascontiguousarray(trace.gains, dtype="<c16")
    return header + delays.tobytes() + gains.tobytes()


def write_trace(trace: CirTrace, path: str) -> None:
    atomic_write_bytes(path, trace_to_bytes(trace))


def write_trace_text(trace: CirTrace, path: str) -> None:
    """Human-inspectable export: header comments, then one CSV row per
    snapshot with re,im per tap."""
    lines = [
        f"# railtdl trace text export, format {FORMAT_VERSION}",
        f"# generator = {trace.meta.generator_tag}",
        f"# n_snapshots = {trace.n_snapshots}",
        f"# n_taps = {trace.n_taps}",
        f"# snapshot_interval_s = {trace.snapshot_interval_s!r}",
        f"# delay_resolution_s = {trace.meta.delay_resolution_s!r}",
        f"# carrier_hz = {trace.meta.carrier_hz!r}",
        f"# rng_seed = {trace.meta.rng_seed}",
        "# delays_s = " + " ".join(repr(float(d)) for d in trace.delays_s),
        "# columns: snapshot, then re,im per tap",
    ]
    for t in range(trace.n_snapshots):
        row = [str(t)]
        for g in trace.gains[t]:
            row.append(repr(float(g.real)))
            row.append(repr(float(g.imag)))
        lines.append(",".join(row))
    atomic_write_bytes(path, ("\n".join(lines) + "\n").encode())


def read_trace(path: str) -> CirTrace:
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < _HEADER.size:
        raise TraceFormatError("truncated header", len(blob))
    (magic, version, n_taps, n_snapshots, snap_ps, res_ps, carrier_hz, seed,
     tag) = _HEADER.unpack_from(blob, 0)
    if magic != MAGIC:
        raise TraceFormatError("bad magic, not a railtdl trace", 0)
    if version != FORMAT_VERSION:
        raise TraceFormatError(f"unsupported format version {version}", 8)
    if n_taps < 1 or n_snapshots < 1:
        raise TraceFormatError("empty trace dimensions", 12)

    off = _HEADER.size
    delays_end = off + 8 * n_taps
    if len(blob) < delays_end:
        raise TraceFormatError("truncated delay table", len(blob))
    delays_ps = np.frombuffer(blob, dtype="<i8", count=n_taps, offset=off)

    expected = delays_end + 16 * n_taps * n_snapshots
    if len(blob) != expected:
        raise TraceFormatError(
            f"gain payload is {len(blob) - delays_end} bytes, "
            f"expected {expected - delays_end}",
            min(len(blob), expected),
        )
    gains = np.frombuffer(blob, dtype="<c16", offset=delays_end)
    gains = gains.reshape(n_snapshots, n_taps).copy()

    meta = TraceMeta(
        carrier_hz=carrier_hz,
        delay_resolution_s=res_ps * 1e-12,
        rng_seed=seed,
        generator_tag=tag.rstrip(b"\x00").decode("ascii"),
    )
    try:
        return CirTrace(gains, delays_ps * 1e-12, snap_ps * 1e-12, meta)
    except ValueError as exc:
        raise TraceFormatError(f"inconsistent trace contents: {exc}", _HEADER.size)
