"""Prime-field arithmetic GF(q).

Only prime orders are supported; elements are plain ints in ``[0, q)``.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import DivisionByZero, NotPrime

MAX_ORDER = 2**31 - 1


def is_prime(n: int) -> bool:
    """Deterministic trial division."""
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0 or n % 3 == 0:
        return False
    i = 5
    while i * i <= n:
        if n % i == 0 or n % (i + 2) == 0:
            return False
        i += 6
    return True


def smallest_prime_at_least(x: int) -> int:
    if x < 2:
        raise ValueError(f"x must be >= 2, got {x}")
    p = x
    while not is_prime(p):
        p += 1
    return p


@dataclass(frozen=True)
class PrimeField:
    """Arithmetic context for GF(q) with q prime."""

    q: int

    def __post_init__(self):
        if not isinstance(self.q, int) or self.q < 2:
            raise NotPrime(f"field order must be an integer >= 2, got {self.q!r}")
        if self.q > MAX_ORDER:
            raise NotPrime(f"field order {self.q} exceeds the supported maximum {MAX_ORDER}")
        if not is_prime(self.q):
            raise NotPrime(f"{self.q} is not prime")

    def _check(self, *xs: int) -> None:
        for x in xs:
            if not 0 <= x < self.q:
                raise ValueError(f"{x} is not an element of GF({self.q})")

    def add(self, a: int, b: int) -> int:
        self._check(a, b)
        return (a + b) % self.q

    def sub(self, a: int, b: int) -> int:
        self._check(a, b)
        return (a - b) % self.q

    def mul(self, a: int, b: int) -> int:
        self._check(a, b)
        return (a * b) % self.q

    def neg(self, a: int) -> int:
        self._check(a)
        return (-a) % self.q

    def inv(self, a: int) -> int:
        self._check(a)
        if a == 0:
            raise DivisionByZero(f"0 has no inverse in GF({self.q})")
        return pow(a, self.q - 2, self.q)

    def pow(self, a: int, e: int) -> int:
        self._check(a)
        if e < 0:
            return pow(self.inv(a), -e, self.q)
        return pow(a, e, self.q)

    def elements(self) -> range:
        return range(self.q)


def field_new(q: int) -> PrimeField:
    return PrimeField(q)
