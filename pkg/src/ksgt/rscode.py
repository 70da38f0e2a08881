"""Reed-Solomon encoding and Kautz-Singleton parameter selection."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import BadMessageLength, ConfigError, IndexOutOfRange, Infeasible
from .gf import PrimeField, smallest_prime_at_least

# Every logarithm used for sizing n goes through this one function.
LOG_BASE = 2

NOISY_C2_FLOOR = 40.57


def size_log(x: float) -> float:
    if LOG_BASE == 2:
        return math.log2(x)
    return math.log(x, LOG_BASE)


def noisy_c2_min(p: float) -> float:
    return max(8.0 / (9.0 * (0.5 - p) ** 2), NOISY_C2_FLOOR)


@dataclass(frozen=True)
class RSCode:
    """An ``[n, k]_q`` Reed-Solomon code with explicit evaluation points."""

    field: PrimeField
    n: int
    k: int
    eval_points: tuple = ()

    def __post_init__(self):
        q = self.field.q
        if not self.eval_points:
            object.__setattr__(self, "eval_points", tuple(range(self.n)))
        else:
            object.__setattr__(self, "eval_points", tuple(int(a) for a in self.eval_points))
        if not 1 <= self.k <= self.n:
            raise Infeasible(f"need 1 <= k <= n, got k={self.k}, n={self.n}")
        if self.n > q:
            raise Infeasible(
                f"n={self.n} evaluation points exceed the field size q={q}; "
                "the construction needs n <= q (regime d = Omega(log^2 N))"
            )
        if len(self.eval_points) != self.n:
            raise ValueError("eval_points must have exactly n entries")
        if len(set(self.eval_points)) != self.n:
            raise ValueError("eval_points must be pairwise distinct")
        if any(not 0 <= a < q for a in self.eval_points):
            raise ValueError("eval_points must be field elements")

    @property
    def q(self) -> int:
        return self.field.q

    @property
    def capacity(self) -> int:
        """Number of distinct messages, q**k."""
        return self.q**self.k

    @property
    def tests(self) -> int:
        """Rows of the Kautz-Singleton matrix built from this code."""
        return self.n * self.q

    def __str__(self):
        return f"[{self.n},{self.k}]_{self.q}"


@dataclass(frozen=True)
class GTParams:
    """Problem size and construction constants for a Kautz-Singleton design.

    ``q``, ``n`` and ``k`` override the values derived from the constants;
    this is how parameter sweeps pick arbitrary ``(q, n)`` pairs.
    """

    N: int
    d: int
    regime: str = "noiseless"
    p: float = 0.0
    delta: float = 0.2
    c1: Optional[float] = None
    c2: Optional[float] = None
    q: Optional[int] = None
    n: Optional[int] = None
    k: Optional[int] = None

    def __post_init__(self):
        if self.regime not in ("noiseless", "noisy"):
            raise ConfigError(f"unknown regime {self.regime!r}")
        if not 1 <= self.d < self.N:
            raise ConfigError(f"need 1 <= d < N, got d={self.d}, N={self.N}")
        if self.delta <= 0:
            raise ConfigError("delta must be positive")
        if self.regime == "noisy" and not 0 < self.p < 0.5:
            raise ConfigError(f"noisy regime needs 0 < p < 0.5, got {self.p}")
        if self.c1 is None:
            object.__setattr__(self, "c1", 4.0 if self.regime == "noiseless" else 24.0)
        if self.regime == "noisy" and self.c2 is None:
            object.__setattr__(self, "c2", noisy_c2_min(self.p))
        if self.q is None:
            floor = 4.0 if self.regime == "noiseless" else 24.0
            if self.c1 < floor:
                raise ConfigError(f"c1 must be >= {floor:g} in the {self.regime} regime")
        if self.regime == "noisy" and self.n is None and self.c2 < noisy_c2_min(self.p) - 1e-12:
            raise ConfigError(f"c2 must be >= {noisy_c2_min(self.p):.4f} for p={self.p}")


def min_dimension(N: int, q: int) -> int:
    """Smallest k >= 1 with q**k >= N (integer arithmetic, no float logs)."""
    k, cap = 1, q
    while cap < N:
        k += 1
        cap *= q
    return k


def select_params(params: GTParams) -> RSCode:
    """Pick ``(q, n, k)`` for the given problem and return the code.

    Raises :class:`Infeasible` when ``n > q``.
    """
    if params.q is not None:
        q = params.q
    else:
        q = smallest_prime_at_least(max(2, math.ceil(params.c1 * params.d)))
    if params.n is not None:
        n = params.n
    elif params.regime == "noiseless":
        n = math.ceil((1 + params.delta) * size_log(params.N))
    else:
        n = math.ceil(params.c2 * (1 + params.delta) * size_log(params.N))
    k = params.k if params.k is not None else min_dimension(params.N, q)
    if k < 1:
        raise Infeasible(f"dimension k={k} < 1")
    if n > q:
        raise Infeasible(
            f"n={n} > q={q}: a Reed-Solomon code needs at most q evaluation points "
            f"(n <= q), which requires d = Omega(log^2 N); got N={params.N}, d={params.d}"
        )
    if n < k:
        raise Infeasible(f"n={n} < k={k}: code length must be at least its dimension")
    if q**k < params.N:
        raise Infeasible(f"q^k = {q}^{k} < N = {params.N}")
    return RSCode(PrimeField(q), n, k)


def encode(code: RSCode, message: Sequence[int]) -> list:
    """Evaluate the message polynomial at every evaluation point (Horner)."""
    if len(message) != code.k:
        raise BadMessageLength(f"message has length {len(message)}, code dimension is {code.k}")
    q = code.q
    for m in message:
        if not 0 <= m < q:
            raise ValueError(f"message symbol {m} not in GF({q})")
    out = []
    for a in code.eval_points:
        acc = 0
        for m in reversed(message):
            acc = (acc * a + m) % q
        out.append(acc)
    return out


def index_to_message(code: RSCode, j: int) -> list:
    """Base-q digits of ``j``, least significant first."""
    if not 0 <= j < code.capacity:
        raise IndexOutOfRange(f"item index {j} outside [0, {code.capacity})")
    q = code.q
    digits = []
    for _ in range(code.k):
        j, r = divmod(j, q)
        digits.append(r)
    return digits


def message_to_index(code: RSCode, message: Sequence[int]) -> int:
    j = 0
    for m in reversed(message):
        j = j * code.q + m
    return j


def codeword_table(code: RSCode, N: int) -> np.ndarray:
    """Codewords of items ``0..N-1`` as an ``(N, n)`` int64 array.

    Vectorized counterpart of ``encode(code, index_to_message(code, j))``.
    """
    if N > code.capacity:
        raise IndexOutOfRange(f"N={N} exceeds q^k={code.capacity}")
    q = code.q
    idx = np.arange(N, dtype=np.int64)
    digits = np.empty((N, code.k), dtype=np.int64)
    for i in range(code.k):
        idx, digits[:, i] = np.divmod(idx, q)
    alphas = np.asarray(code.eval_points, dtype=np.int64)
    acc = np.zeros((N, code.n), dtype=np.int64)
    for i in reversed(range(code.k)):
        acc = (acc * alphas[None, :] + digits[:, i : i + 1]) % q
    return acc
