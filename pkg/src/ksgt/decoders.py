"""Cover (COMP) decoding and the noisy threshold decoder."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional

import numpy as np

from .designs import TestMatrix
from .errors import BadNoise, IndexOutOfRange, LengthMismatch


def as_outcome(Y, t: int) -> np.ndarray:
    """Coerce an outcome vector to a length-``t`` bool array."""
    y = np.asarray(Y)
    if y.ndim != 1 or y.shape[0] != t:
        raise LengthMismatch(f"outcome has shape {y.shape}, matrix has {t} rows")
    return y.astype(bool, copy=False)


def _exact(x) -> Fraction:
    # decimal reading: 0.1 means 1/10, not the nearest binary double
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    return Fraction(repr(float(x)))


@dataclass
class DecodeCounter:
    """Counts how many columns a restricted decode had to inspect."""

    columns_checked: int = 0


def comp_decode(Y, M: TestMatrix) -> set:
    """Items whose column support lies inside the positive tests."""
    y = as_outcome(Y, M.t)
    negative = ~y
    if not negative.any():
        return set(range(M.N))
    hit = np.bitwise_or.reduce(M.words[negative], axis=0)
    bits = np.unpackbits(hit.astype("<u8").view(np.uint8), bitorder="little")[: M.N]
    return set(np.flatnonzero(bits == 0).tolist())


def _check_candidates(candidates: Iterable[int], N: int) -> list:
    cands = sorted(set(int(c) for c in candidates))
    if cands and (cands[0] < 0 or cands[-1] >= N):
        raise IndexOutOfRange(f"candidate outside [0, {N})")
    return cands


def comp_decode_restricted(Y, M: TestMatrix, candidates: Iterable[int],
                           counter: Optional[DecodeCounter] = None) -> set:
    """COMP over ``candidates`` only; touches ``len(candidates)`` columns."""
    y = as_outcome(Y, M.t)
    cands = _check_candidates(candidates, M.N)
    out = set()
    for j in cands:
        if y[M.supports[j]].all():
            out.add(j)
    if counter is not None:
        counter.columns_checked += len(cands)
    return out


def default_tau(p: float) -> float:
    """Threshold slack 3(1/2 - p) / (4p)."""
    if not 0 < p < 0.5:
        raise BadNoise(f"need 0 < p < 0.5, got {p}")
    pf = _exact(p)
    return float(3 * (Fraction(1, 2) - pf) / (4 * pf))


@dataclass(frozen=True)
class DecoderConfig:
    """Noise level and slack for :func:`ncomp_decode`.

    Both values are read as the decimals they print as, so ``p=0.1,
    tau=3`` gives a threshold fraction of exactly 3/5.
    """

    p: float
    tau: Optional[float] = None
    _frac: Fraction = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not 0 < self.p < 0.5:
            raise BadNoise(f"need 0 < p < 0.5, got {self.p}")
        pf = _exact(self.p)
        if self.tau is None:
            tf = 3 * (Fraction(1, 2) - pf) / (4 * pf)
            object.__setattr__(self, "tau", float(tf))
        else:
            tf = _exact(self.tau)
        limit = (Fraction(3, 4) - Fraction(3, 2) * pf) / pf
        if not 0 < tf < limit:
            raise BadNoise(f"tau={self.tau} outside (0, {float(limit):.6g})")
        object.__setattr__(self, "_frac", 1 - pf * (1 + tf))

    @property
    def keep_fraction(self) -> Fraction:
        """``1 - p(1 + tau)``: the share of a column's tests that must be positive."""
        return self._frac

    def min_matches(self, w: int) -> int:
        """Smallest integer match count passing ``w_hat >= w * keep_fraction``."""
        return math.ceil(w * self._frac)


def matched_positives(Y, M: TestMatrix) -> np.ndarray:
    """Per column, the number of rows where both the column and ``Y`` are 1."""
    y = as_outcome(Y, M.t)
    return y.astype(np.int64) @ M.dense


def ncomp_decode(Y, M: TestMatrix, cfg: DecoderConfig) -> set:
    """Threshold decoder; zero-weight columns are never declared defective."""
    w_hat = matched_positives(Y, M)
    w = M.column_weights
    need = _threshold_vector(w, cfg)
    hits = (w_hat >= need) & (w > 0)
    return set(np.flatnonzero(hits).tolist())


def _threshold_vector(w: np.ndarray, cfg: DecoderConfig) -> np.ndarray:
    uniq, inv = np.unique(w, return_inverse=True)
    need = np.array([cfg.min_matches(int(u)) for u in uniq], dtype=np.int64)
    return need[inv.reshape(-1)]


def ncomp_decode_restricted(Y, M: TestMatrix, cfg: DecoderConfig, candidates: Iterable[int],
                            counter: Optional[DecodeCounter] = None) -> set:
    y = as_outcome(Y, M.t)
    cands = _check_candidates(candidates, M.N)
    out = set()
    for j in cands:
        rows = M.supports[j]
        if len(rows) and int(y[rows].sum()) >= cfg.min_matches(len(rows)):
            out.add(j)
    if counter is not None:
        counter.columns_checked += len(cands)
    return out
