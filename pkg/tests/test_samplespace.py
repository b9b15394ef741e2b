import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from exactmultinom import (
    ShapeError,
    SpaceTooLargeError,
    bhattacharyya,
    cell_probability,
    enumerate_counts,
    enumerate_joint,
    log_multinomial_coef,
    select_subspace,
)
from exactmultinom.samplespace import TIE_TOL, JointOutcome


def exact_coef(t):
    out = math.factorial(sum(t))
    for c in t:
        out //= math.factorial(c)
    return out


def test_enumerate_counts_examples():
    assert enumerate_counts(2, 2) == ((0, 2), (1, 1), (2, 0))
    assert len(enumerate_counts(5, 3)) == 21
    assert enumerate_counts(0, 3) == ((0, 0, 0),)


def test_enumerate_counts_recursion_order():
    # first cell ascending, remaining cells by the same rule
    assert enumerate_counts(2, 3) == ((0, 0, 2), (0, 1, 1), (0, 2, 0), (1, 0, 1), (1, 1, 0), (2, 0, 0))


def test_enumerate_counts_invalid_dimension():
    with pytest.raises(ShapeError):
        enumerate_counts(3, 1)


@pytest.mark.parametrize("d", [2, 3, 4, 5])
def test_enumerate_counts_matches_brute_force(d):
    for n in range(0, 7):
        brute = {t for t in itertools.product(range(n + 1), repeat=d) if sum(t) == n}
        got = enumerate_counts(n, d)
        assert len(got) == len(set(got)) == len(brute) == math.comb(n + d - 1, d - 1)
        assert set(got) == brute


@given(n=st.integers(0, 12), d=st.integers(2, 5))
def test_enumerate_counts_cardinality(n, d):
    got = enumerate_counts(n, d)
    assert len(got) == math.comb(n + d - 1, d - 1)
    assert all(sum(t) == n and len(t) == d for t in got)


@pytest.mark.parametrize("t, expected", [
    ((1, 1), math.log(2)),
    ((7, 0), 0.0),
    ((3, 2, 1), math.log(60)),
])
def test_log_multinomial_coef_examples(t, expected):
    assert log_multinomial_coef(t) == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize("d", [2, 3, 4, 5])
def test_log_multinomial_coef_exact(d):
    for n in range(13):
        for t in enumerate_counts(n, d):
            exact = exact_coef(t)
            assert math.exp(log_multinomial_coef(t)) == pytest.approx(exact, rel=1e-9)


@given(st.lists(st.integers(0, 6), min_size=2, max_size=5), st.randoms())
def test_log_multinomial_coef_permutation_invariant(t, rnd):
    perm = list(t)
    rnd.shuffle(perm)
    assert log_multinomial_coef(perm) == pytest.approx(log_multinomial_coef(t), abs=1e-12)
    assert log_multinomial_coef(t) >= 0


def test_enumerate_joint_cardinalities():
    b2 = bhattacharyya(2, 2)
    assert len(enumerate_joint([(2, 2), (2, 2)], b2)) == 9
    assert len(enumerate_joint([(5, 3)], cell_probability(0))) == 21
    assert len(enumerate_joint([(10, 4), (10, 4)], bhattacharyya(2, 4))) == 286 ** 2


def test_enumerate_joint_outcomes_carry_coef_and_psi():
    psi = bhattacharyya(2, 3)
    space = enumerate_joint([(2, 3), (3, 3)], psi)
    seen = set()
    for out in space:
        assert isinstance(out, JointOutcome)
        t1, t2 = out.counts[:3], out.counts[3:]
        assert sum(t1) == 2 and sum(t2) == 3
        assert out.log_coef == pytest.approx(log_multinomial_coef(t1) + log_multinomial_coef(t2))
        theta = np.r_[np.array(t1) / 2, np.array(t2) / 3]
        assert out.psi_hat == pytest.approx(psi(theta), abs=1e-12)
        seen.add(out.counts)
    assert len(seen) == len(space) == 6 * 10


def test_enumerate_joint_cap():
    with pytest.raises(SpaceTooLargeError, match="cap of 1000"):
        enumerate_joint([(10, 4), (10, 4)], bhattacharyya(2, 4), cap=1000)


def test_enumerate_joint_rejects_empty_sample():
    with pytest.raises(ShapeError):
        enumerate_joint([(0, 2)], cell_probability(0))


def test_enumerate_joint_is_cached():
    psi = bhattacharyya(2, 2)
    assert enumerate_joint([(3, 2), (3, 2)], psi) is enumerate_joint([(3, 2), (3, 2)], psi)


def binomial_space():
    return enumerate_joint([(5, 2)], cell_probability(0))


def test_select_subspace_examples():
    space = binomial_space()
    assert sorted(space.psi_hat) == pytest.approx([0, 0.2, 0.4, 0.6, 0.8, 1.0])
    sub = select_subspace(space, 0.8, "geq")
    assert sorted(o.counts for o in sub.outcomes) == [(4, 1), (5, 0)]
    assert (4, 1) in sub
    assert len(select_subspace(space, space.psi_hat.min(), "geq")) == len(space)
    top = select_subspace(space, space.psi_hat.max(), "geq")
    assert [o.counts for o in top.outcomes] == [(5, 0)]
    assert sorted(o.counts for o in select_subspace(space, 0.2, "leq").outcomes) == [(0, 5), (1, 4)]


def test_select_subspace_keeps_float_ties():
    space = binomial_space()
    sub = select_subspace(space, 0.8 + TIE_TOL / 2, "geq")
    assert (4, 1) in sub


def test_select_subspace_empty_is_internal_error():
    with pytest.raises(RuntimeError):
        select_subspace(binomial_space(), 2.0, "geq")


@settings(max_examples=50)
@given(a=st.floats(0, 1), b=st.floats(0, 1))
def test_select_subspace_monotone(a, b):
    space = enumerate_joint([(3, 2), (3, 2)], bhattacharyya(2, 2))
    lo, hi = sorted((a, b))
    sub_hi = select_subspace(space, hi, "geq") if space.psi_hat.max() >= hi - TIE_TOL else None
    sub_lo = select_subspace(space, lo, "geq")
    if sub_hi is not None:
        assert np.all(sub_lo.mask[sub_hi.mask])
