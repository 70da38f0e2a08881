import itertools
import math
from fractions import Fraction

import numpy as np
import pytest

from ksgt.designs import TestMatrix, bernoulli_build, identity_build, ks_build
from ksgt.errors import NotPrime, TooLarge
from ksgt.gf import PrimeField
from ksgt.oracle import exact_comp_error_prob, is_d_disjunct, root_census
from ksgt.rscode import RSCode

# columns: c0 = {t0}, c1 = {t0, t1}, c2 = {t1, t2}, c3 = {t2}
SMALL = TestMatrix.from_dense(np.array([[1, 1, 0, 0], [0, 1, 1, 0], [0, 0, 1, 1]], bool))


def test_small_matrix_error():
    # {0,2}, {1,2}, {1,3} light every test and pull in extra columns;
    # {0,1}, {0,3}, {2,3} decode exactly.
    assert exact_comp_error_prob(SMALL, 2) == Fraction(1, 2)
    assert not is_d_disjunct(SMALL, 2)
    assert is_d_disjunct(SMALL, 0)


def test_cover_example():
    # columns {0}, {1}, {2}, {0,1}: the last is covered by the first two
    m = TestMatrix.from_supports(3, [[0], [1], [2], [0, 1]])
    assert not is_d_disjunct(m, 2)
    assert is_d_disjunct(identity_build(3), 2)
    # failing pairs: {0,1}, {0,3}, {1,3}, {2,3}
    assert exact_comp_error_prob(m, 2) == Fraction(2, 3)
    assert brute_error(m, 2) == Fraction(2, 3)


def test_ks_small_is_disjunct():
    m = ks_build(RSCode(PrimeField(5), 5, 2), 25)
    # any two codewords agree in at most 1 of 5 positions, so 4 others cannot cover
    assert is_d_disjunct(m, 4)
    assert not is_d_disjunct(m, 5)
    for d in range(1, 5):
        assert exact_comp_error_prob(m, d) == 0


def test_identity_and_trivial_cases():
    eye = identity_build(6)
    assert is_d_disjunct(eye, 5)
    assert exact_comp_error_prob(eye, 3) == 0
    assert exact_comp_error_prob(eye, 0) == 0
    assert exact_comp_error_prob(eye, 6) == 0
    ones = TestMatrix.from_dense(np.ones((3, 4), bool))
    assert exact_comp_error_prob(ones, 1) == 1
    assert exact_comp_error_prob(ones, 4) == 0


def test_guards():
    big = identity_build(200)
    with pytest.raises(TooLarge):
        exact_comp_error_prob(big, 5)
    with pytest.raises(TooLarge):
        is_d_disjunct(big, 6)
    with pytest.raises(TooLarge):
        root_census(101, 4)
    with pytest.raises(NotPrime):
        root_census(9, 2)


def brute_error(M, d):
    dense = M.dense
    fails = 0
    subsets = list(itertools.combinations(range(M.N), d))
    for S in subsets:
        y = dense[:, list(S)].any(axis=1)
        decoded = {j for j in range(M.N) if not (dense[:, j] & ~y).any()}
        fails += decoded != set(S)
    return Fraction(fails, len(subsets))


def brute_disjunct(M, d):
    dense = M.dense
    for i in range(M.N):
        others = [j for j in range(M.N) if j != i]
        for combo in itertools.combinations(others, min(d, len(others))):
            union = dense[:, list(combo)].any(axis=1) if combo else np.zeros(M.t, bool)
            if not (dense[:, i] & ~union).any():
                return False
    return True


@pytest.mark.parametrize("seed", range(40))
def test_error_and_disjunct_against_brute_force(seed):
    rng = np.random.default_rng(seed)
    t, N = int(rng.integers(3, 12)), int(rng.integers(3, 9))
    d = int(rng.integers(1, N))
    M = bernoulli_build(t, N, d, nu=min(0.9 * d, rng.uniform(0.3, 1.0)), seed=seed)
    pe = exact_comp_error_prob(M, d)
    assert pe == brute_error(M, d)
    disjunct = is_d_disjunct(M, d)
    assert disjunct == brute_disjunct(M, d)
    if disjunct:
        assert pe == 0


def brute_census(q, k):
    counts = [0] * (q + 1)
    for coeffs in itertools.product(range(q), repeat=k):
        if not any(coeffs):
            continue
        roots = sum(1 for x in range(q) if sum(c * x**i for i, c in enumerate(coeffs)) % q == 0)
        counts[roots] += 1
    return counts


@pytest.mark.parametrize("q, k", [(5, 2), (7, 3), (11, 3), (3, 1), (5, 4), (13, 2)])
def test_census_matches_brute_force(q, k):
    c = root_census(q, k, chunk=97)
    ref = brute_census(q, k)
    padded = list(c.counts) + [0] * (len(ref) - len(c.counts))
    assert padded == ref
    assert c.total == q**k - 1


def test_census_examples():
    c = root_census(5, 2)
    assert c.counts == (4, 20)
    assert c.mean == Fraction(5, 6)
    assert root_census(7, 3).counts == (132, 84, 126)
    assert root_census(11, 3).counts == (560, 220, 550)


@pytest.mark.parametrize("q, k", [(5, 2), (7, 3), (11, 3), (13, 4), (31, 3), (41, 2)])
def test_census_invariants(q, k):
    c = root_census(q, k)
    assert c.mean <= 1
    assert c.second_moment < 6
    assert c.factorial_bound_holds()
    assert sum(c.prob(l) for l in range(len(c.counts))) == 1
    # a nonzero polynomial of degree < k has at most k-1 roots
    assert all(n == 0 for n in c.counts[k:])
    assert c.prob(k + 5) == 0
    assert float(c.mean) == pytest.approx(sum(l * float(c.prob(l)) for l in range(k)))
    assert math.isclose(float(c.second_moment),
                        sum(l * l * c.counts[l] for l in range(len(c.counts))) / c.total)
