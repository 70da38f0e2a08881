"""Efficiently decodable construction: recursive half-index matrices plus a KS layer.

Item ``i`` is split into a high digit ``i // radix`` and a low digit
``i % radix``.  A child scheme over ``child_items`` items is replicated
column-wise twice, keyed by each digit (``M_F`` and ``M_L``), and stacked
on top of a Kautz-Singleton layer over all ``N`` items.  Decoding runs the
child decoder on both halves, forms the Cartesian product of the digit
estimates (at most ``d**2`` candidates) and cover-decodes the KS layer over
those candidates only.

Budgets: each child gets ``eps/4`` and the KS layer ``eps/2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .decoders import (DecodeCounter, DecoderConfig, as_outcome, comp_decode,
                       comp_decode_restricted, ncomp_decode, ncomp_decode_restricted)
from .designs import TestMatrix, identity_build, ks_build, read_matrix, stack, write_matrix
from .errors import ConfigError, FormatError
from .gf import PrimeField, smallest_prime_at_least
from .rscode import RSCode, min_dimension, noisy_c2_min, size_log

SPLIT_MODES = ("sqrt", "bits")


def ks_code_for_budget(N: int, d: int, epsilon: float, regime: str = "noiseless",
                       p: float = 0.0, c1: Optional[float] = None,
                       c2: Optional[float] = None) -> RSCode:
    """KS code for ``N`` items targeting error ``epsilon``.

    Noiseless length is ``ceil(log(N/eps))``: the ``N * 2**-n`` term of the
    cover-decoder bound, with the ``N**(-c log q)`` term dropped.  Noisy
    length multiplies that by ``c2``.
    """
    if c1 is None:
        c1 = 4.0 if regime == "noiseless" else 24.0
    q = smallest_prime_at_least(max(2, math.ceil(c1 * d)))
    base = size_log(N / epsilon)
    if regime == "noiseless":
        n = math.ceil(base)
    else:
        if c2 is None:
            c2 = noisy_c2_min(p)
        n = math.ceil(c2 * base)
    k = min_dimension(N, q)
    n = max(n, k)
    # RSCode raises Infeasible when n > q
    return RSCode(PrimeField(q), n, k)


def individual_repeats(N: int, epsilon: float, p: float) -> int:
    """Repetitions per item so a majority vote errs with probability below eps/N each."""
    return math.ceil(8 * math.log(2 * N / epsilon) / (1 - 2 * p) ** 2)


@dataclass(frozen=True)
class Base:
    kind: str  # "individual" or "ks"
    matrix: TestMatrix
    repeats: int = 1
    code: Optional[RSCode] = None


@dataclass(frozen=True)
class Split:
    child: "RecursiveScheme"
    ks_layer: TestMatrix
    code: RSCode
    radix: int
    child_items: int
    high_bits: int
    low_bits: int
    rows_f: slice
    rows_l: slice
    rows_ks: slice

    def high_of(self, i):
        return i // self.radix

    def low_of(self, i):
        return i % self.radix

    def combine(self, h: int, l: int) -> int:
        return h * self.radix + l


@dataclass(frozen=True)
class RecursiveScheme:
    N: int
    d: int
    epsilon: float
    regime: str
    p: float
    node: Union[Base, Split]
    matrix: TestMatrix
    c1: Optional[float] = None
    c2: Optional[float] = None
    split: str = "sqrt"

    @property
    def tests(self) -> int:
        return self.matrix.t

    @property
    def decoder_config(self) -> Optional[DecoderConfig]:
        return DecoderConfig(self.p) if self.regime == "noisy" else None

    def levels(self):
        """Schemes from the root down to the base."""
        s = self
        while True:
            yield s
            if isinstance(s.node, Base):
                return
            s = s.node.child


@dataclass
class DecodeStats:
    """Instrumentation for :func:`decode_scheme`.

    ``final_stage_checks`` counts columns inspected by the top-level
    restricted cover decode; ``column_checks`` counts all column checks.
    """

    final_stage_checks: int = 0
    column_checks: int = 0
    guard_trips: int = 0


def _split_shape(N: int, split: str) -> tuple:
    if split == "sqrt":
        radix = math.isqrt(N - 1) + 1
        child = radix
        low_bits = (radix - 1).bit_length()
        high_bits = (child - 1).bit_length()
    else:
        b = (N - 1).bit_length()
        high_bits = -(-b // 2)
        low_bits = b - high_bits
        radix = 1 << low_bits
        child = 1 << high_bits
    return radix, child, high_bits, low_bits


def build_scheme(N: int, d: int, epsilon: float = 0.1, regime: str = "noiseless",
                 p: float = 0.0, c1: Optional[float] = None, c2: Optional[float] = None,
                 split: str = "sqrt") -> RecursiveScheme:
    """Build the recursive scheme; raises ``Infeasible`` if some KS layer is."""
    if N < 1 or d < 1:
        raise ConfigError(f"need N >= 1 and d >= 1, got N={N}, d={d}")
    if not 0 < epsilon < 1:
        raise ConfigError(f"need 0 < epsilon < 1, got {epsilon}")
    if regime not in ("noiseless", "noisy"):
        raise ConfigError(f"unknown regime {regime!r}")
    if regime == "noisy" and not 0 < p < 0.5:
        raise ConfigError(f"noisy regime needs 0 < p < 0.5, got {p}")
    if split not in SPLIT_MODES:
        raise ConfigError(f"split must be one of {SPLIT_MODES}")
    common = dict(N=N, d=d, epsilon=epsilon, regime=regime, p=p, c1=c1, c2=c2, split=split)

    if N <= d:
        r = 1 if regime == "noiseless" else individual_repeats(N, epsilon, p)
        m = identity_build(N, r)
        return RecursiveScheme(node=Base("individual", m, repeats=r), matrix=m, **common)

    radix, child_items, high_bits, low_bits = _split_shape(N, split)
    if N <= d * d or child_items >= N:
        code = ks_code_for_budget(N, d, epsilon, regime, p, c1, c2)
        m = ks_build(code, N)
        return RecursiveScheme(node=Base("ks", m, code=code), matrix=m, **common)

    child = build_scheme(child_items, d, epsilon / 4, regime, p, c1, c2, split)
    code = ks_code_for_budget(N, d, epsilon / 2, regime, p, c1, c2)
    ks_layer = ks_build(code, N)
    items = np.arange(N)
    cdense = child.matrix.dense
    m_f = TestMatrix.from_dense(cdense[:, items // radix], label="first")
    m_l = TestMatrix.from_dense(cdense[:, items % radix], label="last")
    ks_layer = TestMatrix(ks_layer.words, ks_layer.t, N, label="ks")
    full = stack([m_f, m_l, ks_layer], label=f"recursive(N={N},d={d})")
    tf = child.tests
    node = Split(child=child, ks_layer=ks_layer, code=code, radix=radix,
                 child_items=child_items, high_bits=high_bits, low_bits=low_bits,
                 rows_f=slice(0, tf), rows_l=slice(tf, 2 * tf),
                 rows_ks=slice(2 * tf, 2 * tf + ks_layer.t))
    return RecursiveScheme(node=node, matrix=full, **common)


def predicted_tests(scheme: RecursiveScheme) -> int:
    """Row count from the recursion ``2 * child + ks_rows`` down to the base."""
    node = scheme.node
    if isinstance(node, Base):
        if node.kind == "individual":
            return scheme.N * node.repeats
        return node.code.tests
    return 2 * predicted_tests(node.child) + node.code.tests


def _majority(y: np.ndarray, N: int, repeats: int) -> set:
    votes = y.reshape(repeats, N).sum(axis=0)
    return set(np.flatnonzero(2 * votes > repeats).tolist())


def final_stage(scheme: RecursiveScheme, y_ks, high_set, low_set,
                stats: Optional[DecodeStats] = None, top: bool = True) -> set:
    """Restricted cover decode of the KS layer over ``high_set x low_set``."""
    node = scheme.node
    cands = {node.combine(h, l) for h in high_set for l in low_set}
    cands = {c for c in cands if c < scheme.N}
    counter = DecodeCounter()
    cfg = scheme.decoder_config
    if cfg is None:
        out = comp_decode_restricted(y_ks, node.ks_layer, cands, counter)
    else:
        out = ncomp_decode_restricted(y_ks, node.ks_layer, cfg, cands, counter)
    if stats is not None:
        stats.column_checks += counter.columns_checked
        if top:
            stats.final_stage_checks += counter.columns_checked
    return out


def _decode(scheme: RecursiveScheme, y: np.ndarray, stats: Optional[DecodeStats], top: bool) -> set:
    node = scheme.node
    if isinstance(node, Base):
        if node.kind == "individual":
            if stats is not None:
                stats.column_checks += scheme.N
            if scheme.regime == "noiseless":
                return set(np.flatnonzero(y).tolist())
            return _majority(y, scheme.N, node.repeats)
        if stats is not None:
            stats.column_checks += scheme.N
        cfg = scheme.decoder_config
        if cfg is None:
            return comp_decode(y, node.matrix)
        return ncomp_decode(y, node.matrix, cfg)

    high_limit = -(-scheme.N // node.radix)
    s_high = {h for h in _decode(node.child, y[node.rows_f], stats, False) if h < high_limit}
    s_low = {l for l in _decode(node.child, y[node.rows_l], stats, False) if l < node.radix}
    if len(s_high) > scheme.d or len(s_low) > scheme.d:
        if stats is not None:
            stats.guard_trips += 1
        return set()
    return final_stage(scheme, y[node.rows_ks], s_high, s_low, stats, top)


def decode_scheme(scheme: RecursiveScheme, Y, stats: Optional[DecodeStats] = None) -> set:
    y = as_outcome(Y, scheme.tests)
    return _decode(scheme, y, stats, True)


# -- serialization ----------------------------------------------------------

META_FORMAT = "ksgt-scheme-1"


def _fmt_slice(s: slice) -> str:
    return f"{s.start}:{s.stop}"


def scheme_metadata(scheme: RecursiveScheme) -> dict:
    meta = {
        "format": META_FORMAT,
        "N": str(scheme.N),
        "d": str(scheme.d),
        "epsilon": repr(scheme.epsilon),
        "regime": scheme.regime,
        "p": repr(scheme.p),
        "c1": "" if scheme.c1 is None else repr(scheme.c1),
        "c2": "" if scheme.c2 is None else repr(scheme.c2),
        "split": scheme.split,
        "tests": str(scheme.tests),
    }
    for depth, s in enumerate(scheme.levels()):
        pre = f"level.{depth}."
        meta[pre + "N"] = str(s.N)
        meta[pre + "epsilon"] = repr(s.epsilon)
        meta[pre + "tests"] = str(s.tests)
        node = s.node
        if isinstance(node, Base):
            meta[pre + "kind"] = node.kind
            if node.kind == "individual":
                meta[pre + "repeats"] = str(node.repeats)
            else:
                meta[pre + "code"] = str(node.code)
        else:
            meta[pre + "kind"] = "split"
            meta[pre + "radix"] = str(node.radix)
            meta[pre + "child_items"] = str(node.child_items)
            meta[pre + "high_bits"] = str(node.high_bits)
            meta[pre + "low_bits"] = str(node.low_bits)
            meta[pre + "rows_f"] = _fmt_slice(node.rows_f)
            meta[pre + "rows_l"] = _fmt_slice(node.rows_l)
            meta[pre + "rows_ks"] = _fmt_slice(node.rows_ks)
            meta[pre + "child_epsilon"] = repr(s.epsilon / 4)
            meta[pre + "ks_epsilon"] = repr(s.epsilon / 2)
            meta[pre + "code"] = str(node.code)
    return meta


def write_scheme(scheme: RecursiveScheme, path) -> str:
    """Write the stacked matrix (GTM1) to ``path`` and metadata to ``path + '.meta'``."""
    write_matrix(scheme.matrix, path)
    meta_path = f"{path}.meta"
    with open(meta_path, "w") as fh:
        for key, value in scheme_metadata(scheme).items():
            fh.write(f"{key}={value}\n")
    return meta_path


def read_metadata(path) -> dict:
    meta = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise FormatError(f"{path}:{lineno}: expected key=value")
            key, value = line.split("=", 1)
            meta[key.strip()] = value.strip()
    if meta.get("format") != META_FORMAT:
        raise FormatError(f"{path}: not a {META_FORMAT} document")
    return meta


def load_scheme(path) -> RecursiveScheme:
    """Rebuild a scheme from its metadata and check it against the stored matrix."""
    meta = read_metadata(f"{path}.meta")
    try:
        scheme = build_scheme(
            int(meta["N"]), int(meta["d"]), float(meta["epsilon"]), meta["regime"],
            float(meta["p"]),
            float(meta["c1"]) if meta.get("c1") else None,
            float(meta["c2"]) if meta.get("c2") else None,
            meta.get("split", "sqrt"),
        )
    except (KeyError, ValueError) as e:
        raise FormatError(f"bad scheme metadata: {e}") from None
    if scheme_metadata(scheme) != meta:
        raise FormatError("metadata does not match the rebuilt scheme")
    if read_matrix(path) != scheme.matrix:
        raise FormatError("stored matrix does not match the rebuilt scheme")
    return scheme
