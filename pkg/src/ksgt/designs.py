"""Binary measurement matrices: Kautz-Singleton, random baselines, stacking, file I/O.

A :class:`TestMatrix` stores its ``t x N`` bits row-major in 64-bit words;
bit ``j % 64`` of word ``j // 64`` in a row is column ``j``.  Dense and
column-support views are derived lazily and cached.
"""

from __future__ import annotations

import math
import os
import struct
from functools import cached_property
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import BadDensity, FormatError, IndexOutOfRange, TooManyItems, WidthMismatch
from .rscode import RSCode, codeword_table

MAGIC = b"GTM1"
_HEADER = struct.Struct("<4sQQ")
# Dimensions beyond this are rejected when reading; keeps t * row_bytes from overflowing memory checks.
_MAX_DIM = 1 << 40

DEFAULT_NU = math.log(2)


def _words_per_row(N: int) -> int:
    return max(1, -(-N // 64))


def _pack(dense: np.ndarray) -> np.ndarray:
    t, N = dense.shape
    w = _words_per_row(N)
    padded = np.zeros((t, w * 64), dtype=np.uint8)
    padded[:, :N] = dense
    packed = np.packbits(padded, axis=1, bitorder="little")
    return packed.view("<u8").astype(np.uint64, copy=False).reshape(t, w)


class TestMatrix:
    """Immutable ``t x N`` binary matrix."""

    __test__ = False  # not a pytest class

    def __init__(self, words: np.ndarray, t: int, N: int, label: str = "",
                 parts: Optional[Sequence[tuple]] = None):
        words = np.array(words, dtype=np.uint64, copy=True).reshape(t, _words_per_row(N))
        tail = N % 64
        if tail and t:
            if np.any(words[:, -1] >> np.uint64(tail)):
                raise IndexOutOfRange("bits set beyond the last column")
        words.setflags(write=False)
        self._words = words
        self.t = int(t)
        self.N = int(N)
        self.label = label
        # (label, first row, stop row) per stacked block
        self.parts = tuple(parts) if parts else ((label, 0, self.t),)

    @classmethod
    def from_dense(cls, dense, label: str = "", parts=None) -> "TestMatrix":
        dense = np.asarray(dense)
        if dense.ndim != 2:
            raise ValueError("dense matrix must be 2-D")
        if dense.size and not np.isin(dense, (0, 1)).all():
            raise ValueError("entries must be 0 or 1")
        dense = dense.astype(bool)
        m = cls(_pack(dense), dense.shape[0], dense.shape[1], label, parts)
        dense = dense.copy()
        dense.setflags(write=False)
        m.__dict__["dense"] = dense
        return m

    @classmethod
    def from_supports(cls, t: int, supports: Iterable[Iterable[int]], label: str = "") -> "TestMatrix":
        """Build from one row-index collection per column."""
        supports = [list(s) for s in supports]
        dense = np.zeros((t, len(supports)), dtype=bool)
        for j, rows in enumerate(supports):
            for r in rows:
                if not 0 <= r < t:
                    raise IndexOutOfRange(f"row {r} outside [0, {t})")
                dense[r, j] = True
        return cls.from_dense(dense, label)

    @property
    def words(self) -> np.ndarray:
        return self._words

    @property
    def shape(self) -> tuple:
        return (self.t, self.N)

    @cached_property
    def dense(self) -> np.ndarray:
        """Read-only ``(t, N)`` bool view."""
        if self.t == 0:
            out = np.zeros((0, self.N), dtype=bool)
        else:
            raw = np.ascontiguousarray(self._words).astype("<u8").view(np.uint8)
            bits = np.unpackbits(raw.reshape(self.t, -1), axis=1, bitorder="little")
            out = bits[:, : self.N].astype(bool)
        out.setflags(write=False)
        return out

    @cached_property
    def supports(self) -> tuple:
        """Row indices of every column, as a tuple of int arrays."""
        cols = np.asarray(self.dense.T)
        return tuple(np.flatnonzero(c) for c in cols)

    @cached_property
    def column_weights(self) -> np.ndarray:
        w = self.dense.sum(axis=0).astype(np.int64)
        w.setflags(write=False)
        return w

    def column_support(self, j: int) -> np.ndarray:
        if not 0 <= j < self.N:
            raise IndexOutOfRange(f"column {j} outside [0, {self.N})")
        return self.supports[j]

    def get(self, row: int, col: int) -> bool:
        if not (0 <= row < self.t and 0 <= col < self.N):
            raise IndexOutOfRange(f"({row}, {col}) outside {self.t}x{self.N}")
        return bool((int(self._words[row, col // 64]) >> (col % 64)) & 1)

    def row_origin(self, row: int) -> tuple:
        """``(part index, local row)`` of a row in a stacked matrix."""
        if not 0 <= row < self.t:
            raise IndexOutOfRange(f"row {row} outside [0, {self.t})")
        for i, (_, start, stop) in enumerate(self.parts):
            if start <= row < stop:
                return i, row - start
        raise AssertionError("parts do not tile the rows")

    def part_rows(self, i: int) -> slice:
        _, start, stop = self.parts[i]
        return slice(start, stop)

    def __eq__(self, other):
        if not isinstance(other, TestMatrix):
            return NotImplemented
        return self.shape == other.shape and np.array_equal(self._words, other._words)

    def __hash__(self):
        return hash((self.t, self.N, self._words.tobytes()))

    def __repr__(self):
        return f"TestMatrix(t={self.t}, N={self.N}, label={self.label!r})"


def ks_build(code: RSCode, N: int) -> TestMatrix:
    """Kautz-Singleton matrix: each codeword symbol becomes a one-hot block of length q."""
    if N > code.capacity:
        raise TooManyItems(f"N={N} exceeds q^k={code.capacity} codewords of {code}")
    q, n = code.q, code.n
    cw = codeword_table(code, N)
    rows = cw + (np.arange(n, dtype=np.int64) * q)[None, :]
    dense = np.zeros((n * q, N), dtype=bool)
    dense[rows.ravel(), np.repeat(np.arange(N), n)] = True
    return TestMatrix.from_dense(dense, label=f"ks{code}")


def bernoulli_build(t: int, N: int, d: int, nu: float = DEFAULT_NU, seed=None) -> TestMatrix:
    """i.i.d. Bernoulli(nu/d) entries."""
    if t < 1 or N < 1 or d < 1:
        raise BadDensity("t, N and d must be positive")
    density = nu / d
    if not 0 < density <= 1:
        raise BadDensity(f"density nu/d = {density} outside (0, 1]")
    rng = np.random.default_rng(seed)
    dense = rng.random((t, N)) < density
    return TestMatrix.from_dense(dense, label=f"bernoulli(nu={nu:g})")


def ncc_weight(t: int, d: int, nu: float = DEFAULT_NU) -> int:
    return int(round(nu * t / d))


def ncc_build(t: int, N: int, d: int, nu: float = DEFAULT_NU, seed=None) -> TestMatrix:
    """Near-constant column weight: each column sets L rows drawn with replacement."""
    if t < 1 or N < 1 or d < 1:
        raise BadDensity("t, N and d must be positive")
    L = ncc_weight(t, d, nu)
    if L < 1:
        raise BadDensity(f"column draws L = round(nu*t/d) = {L} < 1")
    rng = np.random.default_rng(seed)
    picks = rng.integers(0, t, size=(N, L))
    dense = np.zeros((t, N), dtype=bool)
    dense[picks.ravel(), np.repeat(np.arange(N), L)] = True
    return TestMatrix.from_dense(dense, label=f"ncc(nu={nu:g},L={L})")


def identity_build(N: int, repeats: int = 1) -> TestMatrix:
    """Individual testing, each item tested ``repeats`` times (rows grouped by repetition)."""
    dense = np.tile(np.eye(N, dtype=bool), (repeats, 1))
    return TestMatrix.from_dense(dense, label=f"individual(x{repeats})")


def stack(parts: Sequence[TestMatrix], label: str = "stack") -> TestMatrix:
    """Concatenate rows; ``parts`` of the result records where each block sits."""
    if not parts:
        raise ValueError("nothing to stack")
    N = parts[0].N
    for p in parts:
        if p.N != N:
            raise WidthMismatch(f"cannot stack width {p.N} onto width {N}")
    if len(parts) == 1:
        return parts[0]
    words = np.concatenate([p.words for p in parts], axis=0)
    spans, start = [], 0
    for p in parts:
        spans.append((p.label, start, start + p.t))
        start += p.t
    return TestMatrix(words, start, N, label, spans)


# -- file formats -----------------------------------------------------------

def _row_bytes(N: int) -> int:
    return -(-N // 8)


def to_gtm1_bytes(m: TestMatrix) -> bytes:
    rb = _row_bytes(m.N)
    raw = np.ascontiguousarray(m.words).astype("<u8").view(np.uint8).reshape(m.t, m.words.shape[1] * 8)[:, :rb]
    return _HEADER.pack(MAGIC, m.t, m.N) + raw.tobytes()


def from_gtm1_bytes(data: bytes, label: str = "") -> TestMatrix:
    if len(data) < _HEADER.size:
        raise FormatError(f"truncated header ({len(data)} bytes)")
    magic, t, N = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise FormatError(f"bad magic {magic!r}, expected {MAGIC!r}")
    if t > _MAX_DIM or N > _MAX_DIM:
        raise FormatError(f"dimensions {t}x{N} overflow the supported range")
    rb = _row_bytes(N)
    expected = _HEADER.size + t * rb
    if len(data) < expected:
        raise FormatError(f"truncated payload: {len(data)} bytes, expected {expected}")
    if len(data) > expected:
        raise FormatError(f"{len(data) - expected} trailing bytes after payload")
    raw = np.frombuffer(data, dtype=np.uint8, offset=_HEADER.size).reshape(t, rb)
    w = _words_per_row(N)
    buf = np.zeros((t, w * 8), dtype=np.uint8)
    buf[:, :rb] = raw
    words = buf.view("<u8").astype(np.uint64).reshape(t, w)
    try:
        return TestMatrix(words, t, N, label)
    except IndexOutOfRange as e:
        raise FormatError(f"padding bits set: {e}") from None


def to_text(m: TestMatrix) -> str:
    lines = [f"{m.t} {m.N}"]
    for row in m.dense:
        lines.append("".join("1" if b else "0" for b in row))
    return "\n".join(lines) + "\n"


def from_text(text: str, label: str = "") -> TestMatrix:
    lines = text.splitlines()
    if not lines:
        raise FormatError("empty text matrix")
    head = lines[0].split()
    if len(head) != 2 or not all(h.isdigit() for h in head):
        raise FormatError(f"bad text header {lines[0]!r}")
    t, N = int(head[0]), int(head[1])
    body = [ln.strip() for ln in lines[1:] if ln.strip()]
    if len(body) != t:
        raise FormatError(f"expected {t} rows, found {len(body)}")
    dense = np.zeros((t, N), dtype=bool)
    for r, ln in enumerate(body):
        if len(ln) != N or set(ln) - {"0", "1"}:
            raise FormatError(f"row {r} is not {N} characters of 0/1")
        dense[r] = np.frombuffer(ln.encode(), dtype=np.uint8) == ord("1")
    return TestMatrix.from_dense(dense, label)


def write_matrix(m: TestMatrix, path, fmt: str = "gtm1") -> None:
    if fmt == "gtm1":
        with open(path, "wb") as fh:
            fh.write(to_gtm1_bytes(m))
    elif fmt == "text":
        with open(path, "w") as fh:
            fh.write(to_text(m))
    else:
        raise ValueError(f"unknown matrix format {fmt!r}")


def read_matrix(path) -> TestMatrix:
    """Read a GTM1 or debug-text matrix; the format is sniffed from the first bytes."""
    with open(path, "rb") as fh:
        data = fh.read()
    label = os.path.basename(str(path))
    if data[:4] == MAGIC:
        return from_gtm1_bytes(data, label)
    if not data:
        raise FormatError("empty file")
    if data[:1].isdigit():
        try:
            text = data.decode("ascii")
        except UnicodeDecodeError:
            raise FormatError("not a GTM1 file and not ASCII text") from None
        return from_text(text, label)
    raise FormatError(f"bad magic {data[:4]!r}, expected {MAGIC!r}")
