"""Monte Carlo harness: defective sampling, the noisy OR channel, trial runs and sweeps.

Trial ``r`` of a run draws from ``SeedSequence([seed, 0, r])`` and random
matrix ``m`` from ``SeedSequence([seed, 1, m])``, so results do not depend
on how trials are spread across worker processes.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import time
from concurrent.futures import Executor, ProcessPoolExecutor
from dataclasses import dataclass, fields
from functools import lru_cache
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy.stats import binomtest

from .decoders import DecoderConfig, comp_decode, ncomp_decode
from .designs import DEFAULT_NU, TestMatrix, bernoulli_build, ks_build, ncc_build, read_matrix
from .errors import BadSize, ConfigError, GroupTestingError, IndexOutOfRange
from .recursive import build_scheme, decode_scheme
from .rscode import GTParams, select_params

DESIGNS = ("ks", "bernoulli", "ncc", "file")
DECODERS = ("comp", "ncomp", "recursive")
CSV_FIELDS = ("design", "N", "d", "q", "n", "t", "p", "tau", "trials", "successes",
              "success_rate", "ci_lo", "ci_hi", "error")


def trial_rng(seed: int, r: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, 0, r]))


def matrix_seed(seed: int, m: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([seed, 1, m])


def sample_defective_set(N: int, d: int, rng: np.random.Generator,
                         with_replacement: bool = False) -> set:
    """Uniform d-subset of ``range(N)``.

    With ``with_replacement`` the d draws are independent and duplicates
    collapse, so the set may be smaller than d.
    """
    if not 0 <= d <= N:
        raise BadSize(f"need 0 <= d <= N, got d={d}, N={N}")
    if d == 0:
        return set()
    if with_replacement:
        return set(rng.integers(0, N, size=d).tolist())
    return set(rng.choice(N, size=d, replace=False, shuffle=False).tolist())


def measure(M: TestMatrix, S: Iterable[int], p: float, rng: Optional[np.random.Generator] = None) -> np.ndarray:
    """Boolean OR of the columns in ``S``, each test then flipped with probability ``p``."""
    if not 0 <= p < 0.5:
        raise ConfigError(f"need 0 <= p < 0.5, got {p}")
    idx = np.fromiter((int(i) for i in S), dtype=np.int64)
    if idx.size and (idx.min() < 0 or idx.max() >= M.N):
        raise IndexOutOfRange(f"defective index outside [0, {M.N})")
    y = M.dense[:, idx].any(axis=1) if idx.size else np.zeros(M.t, dtype=bool)
    if p > 0:
        if rng is None:
            raise ConfigError("a noisy measurement needs an rng")
        y = y ^ (rng.random(M.t) < p)
    return y


@dataclass(frozen=True)
class TrialConfig:
    """One simulation point.

    ``design`` picks the matrix (``file`` reads ``matrix_path``);
    ``decoder="recursive"`` ignores the design and builds the recursive
    scheme for ``(N, d, epsilon, p)``.  Random designs use ``tests`` rows and
    spread trials evenly over ``matrices`` independent draws.
    """

    N: int
    d: int
    design: str = "ks"
    p: float = 0.0
    decoder: str = "comp"
    tau: Optional[float] = None
    trials: int = 1000
    seed: int = 0
    q: Optional[int] = None
    rs_n: Optional[int] = None
    rs_k: Optional[int] = None
    delta: float = 0.2
    tests: Optional[int] = None
    nu: float = DEFAULT_NU
    matrices: int = 1
    matrix_path: Optional[str] = None
    epsilon: float = 0.1
    with_replacement: bool = False

    def __post_init__(self):
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if not 0 <= self.p < 0.5:
            raise ConfigError(f"need 0 <= p < 0.5, got {self.p}")
        if not 1 <= self.d < self.N:
            raise ConfigError(f"need 1 <= d < N, got d={self.d}, N={self.N}")
        if self.design not in DESIGNS:
            raise ConfigError(f"design must be one of {DESIGNS}")
        if self.decoder not in DECODERS:
            raise ConfigError(f"decoder must be one of {DECODERS}")
        if self.seed < 0:
            raise ConfigError("seed must be non-negative")
        if self.decoder == "ncomp":
            if self.p == 0:
                raise ConfigError("the threshold decoder needs p > 0")
            DecoderConfig(self.p, self.tau)
        if self.design in ("bernoulli", "ncc") and self.decoder != "recursive":
            if self.tests is None or self.tests < 1:
                raise ConfigError(f"design {self.design} needs tests >= 1")
            if self.matrices < 1 or self.matrices > self.trials:
                raise ConfigError("need 1 <= matrices <= trials")
        if self.design == "file" and not self.matrix_path:
            raise ConfigError("design 'file' needs matrix_path")

    @property
    def regime(self) -> str:
        return "noisy" if self.p > 0 else "noiseless"

    @property
    def label(self) -> str:
        return "recursive" if self.decoder == "recursive" else self.design

    def decoder_config(self) -> Optional[DecoderConfig]:
        return DecoderConfig(self.p, self.tau) if self.decoder == "ncomp" else None

    def ks_code(self):
        return select_params(GTParams(self.N, self.d, self.regime, self.p, self.delta,
                                      q=self.q, n=self.rs_n, k=self.rs_k))

    def matrix_index(self, r: int) -> int:
        return r * self.matrices // self.trials


class _Context:
    """Per-process cache of everything a config needs to run trials."""

    def __init__(self, cfg: TrialConfig):
        self.cfg = cfg
        self.scheme = None
        self.code = None
        self._random: dict = {}
        self.fixed: Optional[TestMatrix] = None
        self.dec_cfg = cfg.decoder_config()
        if cfg.decoder == "recursive":
            self.scheme = build_scheme(cfg.N, cfg.d, cfg.epsilon, cfg.regime, cfg.p)
            self.fixed = self.scheme.matrix
        elif cfg.design == "ks":
            self.code = cfg.ks_code()
            self.fixed = ks_build(self.code, cfg.N)
        elif cfg.design == "file":
            self.fixed = read_matrix(cfg.matrix_path)
            if self.fixed.N != cfg.N:
                raise ConfigError(f"matrix has {self.fixed.N} columns, config says N={cfg.N}")

    def matrix(self, r: int) -> TestMatrix:
        if self.fixed is not None:
            return self.fixed
        m = self.cfg.matrix_index(r)
        if m not in self._random:
            self._random.clear()
            build = bernoulli_build if self.cfg.design == "bernoulli" else ncc_build
            self._random[m] = build(self.cfg.tests, self.cfg.N, self.cfg.d, self.cfg.nu,
                                    matrix_seed(self.cfg.seed, m))
        return self._random[m]

    @property
    def t(self) -> int:
        return self.fixed.t if self.fixed is not None else self.cfg.tests

    def decode(self, M: TestMatrix, y: np.ndarray) -> set:
        if self.scheme is not None:
            return decode_scheme(self.scheme, y)
        if self.dec_cfg is not None:
            return ncomp_decode(y, M, self.dec_cfg)
        return comp_decode(y, M)


@lru_cache(maxsize=8)
def _context(cfg: TrialConfig) -> _Context:
    return _Context(cfg)


def _run_chunk(cfg: TrialConfig, start: int, stop: int) -> int:
    ctx = _context(cfg)
    successes = 0
    for r in range(start, stop):
        rng = trial_rng(cfg.seed, r)
        M = ctx.matrix(r)
        S = sample_defective_set(cfg.N, cfg.d, rng, cfg.with_replacement)
        y = measure(M, S, cfg.p, rng)
        if ctx.decode(M, y) == S:
            successes += 1
    return successes


def _chunks(trials: int, parts: int) -> list:
    parts = max(1, min(parts, trials))
    bounds = [trials * i // parts for i in range(parts + 1)]
    return list(zip(bounds[:-1], bounds[1:]))


def wilson_interval(successes: int, trials: int, level: float = 0.95) -> tuple:
    ci = binomtest(successes, trials).proportion_ci(confidence_level=level, method="wilson")
    return float(ci.low), float(ci.high)


@dataclass(frozen=True)
class TrialReport:
    config: TrialConfig
    t: int
    q: Optional[int]
    n: Optional[int]
    successes: int
    trials: int
    wall_time: float
    tau: Optional[float] = None

    @property
    def success_rate(self) -> float:
        return self.successes / self.trials

    @property
    def ci(self) -> tuple:
        return wilson_interval(self.successes, self.trials)

    @property
    def sigma(self) -> float:
        """Binomial standard error of ``success_rate``."""
        r = self.success_rate
        return float(np.sqrt(r * (1 - r) / self.trials))

    def row(self) -> dict:
        lo, hi = self.ci
        c = self.config
        return {
            "design": c.label, "N": c.N, "d": c.d,
            "q": "" if self.q is None else self.q,
            "n": "" if self.n is None else self.n,
            "t": self.t, "p": repr(c.p),
            "tau": "" if self.tau is None else repr(self.tau),
            "trials": self.trials, "successes": self.successes,
            "success_rate": f"{self.success_rate:.6f}",
            "ci_lo": f"{lo:.6f}", "ci_hi": f"{hi:.6f}", "error": "",
        }


def run_trials(cfg: TrialConfig, workers: int = 1, executor: Optional[Executor] = None) -> TrialReport:
    """Run ``cfg.trials`` independent trials; success means the decoded set equals ``S``."""
    started = time.perf_counter()
    ctx = _context(cfg)
    chunks = _chunks(cfg.trials, workers)
    if executor is not None:
        futures = [executor.submit(_run_chunk, cfg, a, b) for a, b in chunks]
        successes = sum(f.result() for f in futures)
    elif workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            successes = sum(pool.map(_run_chunk, *zip(*[(cfg, a, b) for a, b in chunks])))
    else:
        successes = _run_chunk(cfg, 0, cfg.trials)
    q = n = None
    if ctx.code is not None:
        q, n = ctx.code.q, ctx.code.n
    tau = ctx.dec_cfg.tau if ctx.dec_cfg is not None else None
    return TrialReport(cfg, ctx.t, q, n, successes, cfg.trials,
                       time.perf_counter() - started, tau)


# -- sweeps -----------------------------------------------------------------

_CFG_FIELDS = {f.name for f in fields(TrialConfig)}


def _point_tests(cfg: TrialConfig) -> int:
    if cfg.decoder == "recursive":
        return build_scheme(cfg.N, cfg.d, cfg.epsilon, cfg.regime, cfg.p).tests
    if cfg.design == "ks":
        return cfg.ks_code().tests
    if cfg.design == "file":
        return read_matrix(cfg.matrix_path).t
    return cfg.tests


def expand_grid(spec: dict) -> tuple:
    """Turn a grid document into ``(base settings, list of point overrides)``.

    Keys: ``base`` (TrialConfig fields shared by all points), ``points``
    (explicit overrides), ``grid`` (field -> list of values, Cartesian
    product appended after ``points``) and ``match_baselines``
    (``{"designs": [...], "matrices": m}``: for every KS point add each
    random design with the same number of tests).
    """
    unknown = set(spec) - {"base", "points", "grid", "match_baselines"}
    if unknown:
        raise ConfigError(f"unknown grid keys {sorted(unknown)}")
    base = dict(spec.get("base", {}))
    points = [dict(p) for p in spec.get("points", [])]
    grid = spec.get("grid") or {}
    if grid:
        keys = list(grid)
        for combo in itertools.product(*(grid[k] for k in keys)):
            points.append(dict(zip(keys, combo)))
    for p in [base, *points]:
        bad = set(p) - _CFG_FIELDS
        if bad:
            raise ConfigError(f"unknown config fields {sorted(bad)}")
    match = spec.get("match_baselines")
    if match:
        extra = []
        for p in points:
            merged = {**base, **p}
            if merged.get("design", "ks") != "ks" or merged.get("decoder", "comp") == "recursive":
                continue
            try:
                t = _point_tests(TrialConfig(**merged))
            except GroupTestingError:
                continue
            for design in match.get("designs", ("bernoulli", "ncc")):
                extra.append({**p, "design": design, "tests": t, "q": None, "rs_n": None,
                              "rs_k": None, "matrices": match.get("matrices", 1)})
        points.extend(extra)
    return base, points


def _error_row(settings: dict, err: Exception) -> dict:
    row = {k: "" for k in CSV_FIELDS}
    for k in ("design", "N", "d", "p", "trials"):
        if k in settings:
            row[k] = settings[k]
    row["q"] = settings.get("q") or ""
    row["n"] = settings.get("rs_n") or ""
    row["error"] = f"{type(err).__name__}: {err}".replace("\n", " ")
    return row


def sweep(base: dict, points: Sequence[dict], workers: int = 1) -> list:
    """One CSV row dict per point, ordered by number of tests.

    A point that fails to configure or run yields a row with ``error`` set.
    """
    entries = []
    pool = ProcessPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        for i, p in enumerate(points):
            settings = {**base, **p}
            try:
                cfg = TrialConfig(**settings)
                report = run_trials(cfg, workers, pool)
                entries.append((report.t, i, report.row()))
            except (GroupTestingError, OSError, TypeError) as e:
                entries.append((float("inf"), i, _error_row(settings, e)))
    finally:
        if pool is not None:
            pool.shutdown()
    entries.sort(key=lambda e: (e[0], e[1]))
    return [row for _, _, row in entries]


def write_csv(rows: Iterable[dict], fh) -> None:
    writer = csv.DictWriter(fh, fieldnames=CSV_FIELDS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow(row)


def csv_text(rows: Iterable[dict]) -> str:
    buf = io.StringIO()
    write_csv(rows, buf)
    return buf.getvalue()


def load_grid(path) -> dict:
    with open(path) as fh:
        return json.load(fh)


def figure_grid(N: int, d: int, q_values: Sequence[int], n_values: Sequence[int],
                trials: int = 5000, seed: int = 0, matrices: int = 100,
                baselines: Sequence[str] = ("bernoulli", "ncc")) -> dict:
    """KS over a ``(q, n)`` grid plus random baselines at matched test counts."""
    spec = {
        "base": {"N": N, "d": d, "trials": trials, "seed": seed, "decoder": "comp"},
        "grid": {"design": ["ks"], "q": list(q_values), "rs_n": list(n_values)},
    }
    if baselines:
        spec["match_baselines"] = {"designs": list(baselines), "matrices": matrices}
    return spec


PRESETS = {
    "fig2": lambda trials, seed: figure_grid(500, 10, [41], range(4, 12), trials, seed),
    "fig3": lambda trials, seed: figure_grid(2000, 100, [211], range(6, 17, 2), trials, seed),
}

