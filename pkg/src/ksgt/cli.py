"""Command-line entry point: ``ksgt {build,decode,simulate,sweep,oracle,recursive}``.

Exit codes: 0 success, 2 invalid configuration or input, 3 infeasible parameters.
"""

from __future__ import annotations

import argparse
import logging
import sys

import numpy as np

from . import designs, oracle, sim
from .decoders import DecoderConfig, comp_decode, ncomp_decode
from .errors import GroupTestingError, Infeasible
from .recursive import DecodeStats, build_scheme, decode_scheme, predicted_tests, write_scheme
from .rscode import GTParams, select_params

log = logging.getLogger("ksgt")

EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3


def _add_problem(p, need_items=True):
    p.add_argument("--n-items", type=int, required=need_items, help="number of items N")
    p.add_argument("--defectives", type=int, required=need_items, help="defective-set size d")


def _add_design(p):
    p.add_argument("--design", choices=("ks", "bernoulli", "ncc"), default="ks")
    p.add_argument("--q", type=int, help="field size (KS)")
    p.add_argument("--rs-n", type=int, help="code length / evaluation points (KS)")
    p.add_argument("--rs-k", type=int, help="code dimension (KS)")
    p.add_argument("--delta", type=float, default=0.2, help="error exponent for default n")
    p.add_argument("--tests", type=int, help="rows for random designs")
    p.add_argument("--nu", type=float, default=designs.DEFAULT_NU, help="random-design density constant")


def _add_run(p):
    p.add_argument("--noise", type=float, default=0.0, help="flip probability p")
    p.add_argument("--tau", type=float, help="threshold slack (default 3(0.5-p)/(4p))")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ksgt", description="Kautz-Singleton group testing toolkit")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", help="write a measurement matrix")
    _add_problem(p)
    _add_design(p)
    p.add_argument("--noise", type=float, default=0.0, help="size a KS code for the noisy regime")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=("gtm1", "text"), default="gtm1")
    p.add_argument("--out", required=True)

    p = sub.add_parser("decode", help="decode an outcome vector")
    p.add_argument("--matrix", required=True)
    p.add_argument("--outcome", required=True, help="file of 0/1 characters, one per test")
    p.add_argument("--decoder", choices=("comp", "ncomp"), default="comp")
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--tau", type=float)

    p = sub.add_parser("simulate", help="Monte Carlo success rate of one configuration")
    _add_problem(p)
    _add_design(p)
    _add_run(p)
    p.add_argument("--decoder", choices=sim.DECODERS, default="comp")
    p.add_argument("--matrix", help="read the design from a matrix file instead")
    p.add_argument("--matrices", type=int, default=1, help="independent random matrices")
    p.add_argument("--epsilon", type=float, default=0.1, help="recursive-scheme error budget")
    p.add_argument("--with-replacement", action="store_true")
    p.add_argument("--out")

    p = sub.add_parser("sweep", help="run a grid of configurations to CSV")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--grid", help="JSON grid document")
    src.add_argument("--preset", choices=sorted(sim.PRESETS))
    p.add_argument("--trials", type=int, help="override trials for every point")
    p.add_argument("--seed", type=int, help="override the master seed")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out")

    p = sub.add_parser("oracle", help="exact enumeration checks")
    osub = p.add_subparsers(dest="check", required=True)
    o = osub.add_parser("error", help="exact COMP error probability")
    o.add_argument("--matrix", required=True)
    o.add_argument("--defectives", type=int, required=True)
    o = osub.add_parser("disjunct", help="brute-force d-disjunctness")
    o.add_argument("--matrix", required=True)
    o.add_argument("--defectives", type=int, required=True)
    o = osub.add_parser("census", help="root counts of low-degree polynomials")
    o.add_argument("--q", type=int, required=True)
    o.add_argument("--k", type=int, required=True)

    p = sub.add_parser("recursive", help="build and simulate the recursive scheme")
    _add_problem(p)
    _add_run(p)
    p.add_argument("--epsilon", type=float, default=0.1)
    p.add_argument("--split", choices=("sqrt", "bits"), default="sqrt")
    p.add_argument("--c1", type=float, help="field size constant q >= c1*d")
    p.add_argument("--c2", type=float, help="noisy code-length multiplier")
    p.add_argument("--out", help="write matrix (GTM1) and .meta sidecar here")
    return parser


def _emit(text: str, out):
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _cmd_build(a):
    regime = "noisy" if a.noise > 0 else "noiseless"
    if a.design == "ks":
        code = select_params(GTParams(a.n_items, a.defectives, regime, a.noise, a.delta,
                                      q=a.q, n=a.rs_n, k=a.rs_k))
        m = designs.ks_build(code, a.n_items)
    else:
        if a.tests is None:
            raise GroupTestingError("random designs need --tests")
        build = designs.bernoulli_build if a.design == "bernoulli" else designs.ncc_build
        m = build(a.tests, a.n_items, a.defectives, a.nu, a.seed)
    designs.write_matrix(m, a.out, a.format)
    print(f"{m.label}: {m.t} tests x {m.N} items -> {a.out}")


def _read_outcome(path, t):
    with open(path) as fh:
        chars = "".join(fh.read().split())
    if set(chars) - {"0", "1"}:
        raise GroupTestingError("outcome file must contain only 0/1 characters")
    y = np.frombuffer(chars.encode(), dtype=np.uint8) == ord("1")
    if y.size != t:
        raise GroupTestingError(f"outcome has {y.size} entries, matrix has {t} tests")
    return y


def _cmd_decode(a):
    m = designs.read_matrix(a.matrix)
    y = _read_outcome(a.outcome, m.t)
    if a.decoder == "ncomp":
        found = ncomp_decode(y, m, DecoderConfig(a.noise, a.tau))
    else:
        found = comp_decode(y, m)
    print(" ".join(str(i) for i in sorted(found)))


def _cmd_simulate(a):
    cfg = sim.TrialConfig(
        N=a.n_items, d=a.defectives, design="file" if a.matrix else a.design, p=a.noise,
        decoder=a.decoder, tau=a.tau, trials=a.trials, seed=a.seed, q=a.q, rs_n=a.rs_n,
        rs_k=a.rs_k, delta=a.delta, tests=a.tests, nu=a.nu, matrices=a.matrices,
        matrix_path=a.matrix, epsilon=a.epsilon, with_replacement=a.with_replacement)
    report = sim.run_trials(cfg, a.workers)
    log.info("%d trials in %.2fs", report.trials, report.wall_time)
    _emit(sim.csv_text([report.row()]), a.out)


def _cmd_sweep(a):
    spec = sim.load_grid(a.grid) if a.grid else sim.PRESETS[a.preset](5000, 0)
    base, points = sim.expand_grid(spec)
    if a.trials is not None:
        base["trials"] = a.trials
        points = [{**p, "trials": a.trials} if "trials" in p else p for p in points]
        # random designs spread trials over matrices; never more matrices than trials
        points = [{**p, "matrices": min(p["matrices"], a.trials)} if "matrices" in p else p
                  for p in points]
    if a.seed is not None:
        base["seed"] = a.seed
        points = [{**p, "seed": a.seed} if "seed" in p else p for p in points]
    rows = sim.sweep(base, points, a.workers)
    _emit(sim.csv_text(rows), a.out)


def _cmd_oracle(a):
    if a.check == "census":
        c = oracle.root_census(a.q, a.k)
        print(f"q={c.q} k={c.k} total={c.total}")
        for l, n in enumerate(c.counts):
            print(f"roots={l} count={n} prob={c.prob(l)}")
        print(f"E[r]={c.mean} ({float(c.mean):.6f})")
        print(f"E[r^2]={c.second_moment} ({float(c.second_moment):.6f})")
        print(f"factorial_bound={'ok' if c.factorial_bound_holds() else 'violated'}")
        return
    m = designs.read_matrix(a.matrix)
    if a.check == "error":
        pe = oracle.exact_comp_error_prob(m, a.defectives)
        print(f"{pe} ({float(pe):.6f})")
    else:
        print("true" if oracle.is_d_disjunct(m, a.defectives) else "false")


def _cmd_recursive(a):
    regime = "noisy" if a.noise > 0 else "noiseless"
    scheme = build_scheme(a.n_items, a.defectives, a.epsilon, regime, a.noise, a.c1, a.c2, a.split)
    if a.out:
        meta = write_scheme(scheme, a.out)
        print(f"wrote {a.out} and {meta}", file=sys.stderr)
    rng_seed = a.seed
    successes, worst = 0, 0
    for r in range(a.trials):
        rng = sim.trial_rng(rng_seed, r)
        S = sim.sample_defective_set(scheme.N, scheme.d, rng)
        y = sim.measure(scheme.matrix, S, a.noise, rng)
        stats = DecodeStats()
        if decode_scheme(scheme, y, stats) == S:
            successes += 1
        worst = max(worst, stats.final_stage_checks)
    lo, hi = sim.wilson_interval(successes, a.trials)
    print("N,d,epsilon,p,t,predicted_t,trials,successes,success_rate,ci_lo,ci_hi,max_final_checks")
    print(f"{scheme.N},{scheme.d},{scheme.epsilon!r},{a.noise!r},{scheme.tests},"
          f"{predicted_tests(scheme)},{a.trials},{successes},{successes / a.trials:.6f},"
          f"{lo:.6f},{hi:.6f},{worst}")


COMMANDS = {
    "build": _cmd_build,
    "decode": _cmd_decode,
    "simulate": _cmd_simulate,
    "sweep": _cmd_sweep,
    "oracle": _cmd_oracle,
    "recursive": _cmd_recursive,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        COMMANDS[args.command](args)
    except Infeasible as e:
        print(f"infeasible: {e}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (GroupTestingError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    return 0


if __name__ == "__main__":
    sys.exit(main())
