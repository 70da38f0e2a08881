"""Brute-force ground truth for small instances.

Everything here enumerates; nothing samples.  Each routine refuses inputs
whose enumeration would exceed its guard instead of silently estimating.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

import numpy as np

from .designs import TestMatrix
from .gf import PrimeField
from .errors import TooLarge

DISJUNCT_GUARD = 10**8
SUBSET_GUARD = 10**6
CENSUS_GUARD = 10**7


def _column_masks(M: TestMatrix) -> list:
    return [sum(1 << int(r) for r in rows) for rows in M.supports]


def is_d_disjunct(M: TestMatrix, d: int) -> bool:
    """True iff no column is covered by the union of at most ``d`` other columns."""
    N = M.N
    if d < 0:
        raise ValueError("d must be non-negative")
    size = min(d, N - 1)
    checks = N * math.comb(N - 1, size) if N else 0
    if checks > DISJUNCT_GUARD:
        raise TooLarge(f"{checks} cover checks exceed the guard {DISJUNCT_GUARD}")
    masks = _column_masks(M)
    for i in range(N):
        target = masks[i]
        # columns disjoint from the target cannot help cover it
        useful = [masks[j] for j in range(N) if j != i and masks[j] & target]
        if len(useful) <= size:
            union = 0
            for m in useful:
                union |= m
            if target & ~union == 0:
                return False
            continue
        for combo in combinations(useful, size):
            union = 0
            for m in combo:
                union |= m
            if target & ~union == 0:
                return False
    return True


def exact_comp_error_prob(M: TestMatrix, d: int) -> Fraction:
    """Fraction of d-subsets ``S`` whose noiseless outcome COMP-decodes to something other than ``S``."""
    N = M.N
    if not 0 <= d <= N:
        raise ValueError(f"need 0 <= d <= N, got d={d}, N={N}")
    total = math.comb(N, d)
    if total > SUBSET_GUARD:
        raise TooLarge(f"C({N},{d}) = {total} subsets exceed the guard {SUBSET_GUARD}")
    masks = _column_masks(M)
    failures = 0
    for S in combinations(range(N), d):
        y = 0
        for j in S:
            y |= masks[j]
        inside = set(S)
        for j in range(N):
            if j not in inside and masks[j] & ~y == 0:
                failures += 1
                break
    return Fraction(failures, total)


@dataclass(frozen=True)
class RootCensus:
    """Root counts of all nonzero polynomials of degree < k over GF(q).

    ``counts[l]`` is the number of such polynomials with exactly ``l``
    distinct roots.
    """

    q: int
    k: int
    counts: tuple

    @property
    def total(self) -> int:
        return sum(self.counts)

    def prob(self, l: int) -> Fraction:
        if l >= len(self.counts):
            return Fraction(0)
        return Fraction(self.counts[l], self.total)

    @property
    def mean(self) -> Fraction:
        return Fraction(sum(l * c for l, c in enumerate(self.counts)), self.total)

    @property
    def second_moment(self) -> Fraction:
        return Fraction(sum(l * l * c for l, c in enumerate(self.counts)), self.total)

    def factorial_bound_holds(self) -> bool:
        """``Pr(r = l) <= 1/l!`` for every ``l >= 1``."""
        return all(self.prob(l) <= Fraction(1, math.factorial(l)) for l in range(1, len(self.counts)))


def root_census(q: int, k: int, chunk: int = 1 << 16) -> RootCensus:
    PrimeField(q)
    if k < 1:
        raise ValueError("k must be >= 1")
    size = q**k
    if size > CENSUS_GUARD:
        raise TooLarge(f"q^k = {size} polynomials exceed the guard {CENSUS_GUARD}")
    xs = np.arange(q, dtype=np.int64)
    counts = np.zeros(max(k, 1) + q + 1, dtype=np.int64)
    for start in range(1, size, chunk):
        idx = np.arange(start, min(size, start + chunk), dtype=np.int64)
        acc = np.zeros((idx.size, q), dtype=np.int64)
        coeffs = []
        rest = idx.copy()
        for _ in range(k):
            rest, c = np.divmod(rest, q)
            coeffs.append(c)
        for c in reversed(coeffs):
            acc = (acc * xs[None, :] + c[:, None]) % q
        roots = (acc == 0).sum(axis=1)
        counts += np.bincount(roots, minlength=counts.size)[: counts.size]
    top = int(np.flatnonzero(counts).max()) if counts.any() else 0
    length = max(k, top + 1)
    return RootCensus(q, k, tuple(int(c) for c in counts[:length]))
