"""Frequency-constrained families, concatenation sets and the counting chains.

The oracle throughout is a literal brute force: walk every string over the
family's sub-alphabet and test every factor of every same-parity level with
exact Fractions. It shares nothing with the window-automaton DP.
"""
import itertools
import math
from fractions import Fraction

import pytest
from hypothesis import assume, given, settings, strategies as st

from subshiftlab.bounds import SEED, STRICT, Schedule, extend_schedule
from subshiftlab.errors import CountingOverflow, DomainError, ScheduleError
from subshiftlab.subshift import (B_set_count, C_count, blowup_expand, count_P, enumerate_C, f0,
                                  in_Fk, signed, verify_lemma51_chain, verify_prop52,
                                  weighted_G_count)

ONE = {"plus": "+", "minus": "-"}


def admissible_oracle(word, k, s, parity):
    if set(word) - {"0", ONE[parity]}:
        return False
    first = 1 if parity == "plus" else 2
    for j in range(first, k + 1, 2):
        w = 2 * s.lengths[j - 1] - 1
        for i in range(len(word) - w + 1):
            if Fraction(word[i:i + w].count("0"), w) >= s.rates[j - 1]:
                return False
    return True


def brute_P(k, s, parity, length=None):
    length = length or 2 * s.lengths[k - 1] - 1
    return ["".join(t) for t in itertools.product(("0", ONE[parity]), repeat=length)
            if admissible_oracle("".join(t), k, s, parity)]


def seed(r=Fraction(1, 2), l1=4):
    return Schedule((l1,), (r,))


# -- f0, F_k, blow-up -------------------------------------------------------


def test_f0_examples():
    assert f0(signed("+" * 7)) == 0
    assert f0(signed("0" * 5)) == 1
    assert f0(signed("0+0++")) == Fraction(2, 5)
    with pytest.raises(DomainError):
        f0(signed(""))


def test_in_Fk_examples():
    s = seed()
    assert in_Fk(signed("+++-+++"), 1, s)
    assert not in_Fk(signed("+" * 7), 1, s)
    assert in_Fk(signed("0+0+0+0"), 1, s)          # 4/7 >= 1/2
    assert not in_Fk(signed("0+0+0++"), 1, s)      # 3/7 < 1/2
    with pytest.raises(DomainError):
        in_Fk(signed("+" * 6), 1, s)


def test_blowup_examples():
    assert blowup_expand(signed("+++++")) == 1
    assert blowup_expand(signed("00")) == 4
    assert blowup_expand(signed("0+0-0")) == 8


def test_blowup_sum_matches_direct_enumeration():
    # enumerate strings over the blown-up sub-alphabet {0, 0~, +} and project
    s = Schedule((3,), (Fraction(2, 5),))
    direct = sum(1 for t in itertools.product(("0", "0~", "+"), repeat=5)
                 if admissible_oracle("".join("0" if c.startswith("0") else c for c in t), 1, s, "plus"))
    assert direct == sum(blowup_expand(signed(w)) for w in brute_P(1, s, "plus"))


# -- P, B, C ----------------------------------------------------------------


def test_count_P_seed_examples():
    assert count_P(1, "plus", seed()) == 64 == len(brute_P(1, seed(), "plus"))
    assert count_P(1, "plus", seed(), method="brute") == 64
    assert count_P(1, "plus", seed(Fraction(1, 8))) == 1
    # r_1 = 1 still excludes the all-zero word, whose frequency equals 1
    assert count_P(1, "plus", seed(Fraction(1))) == 127 == len(brute_P(1, seed(Fraction(1)), "plus"))


def test_B_examples():
    assert B_set_count(1, "plus", seed()) == 63
    assert B_set_count(1, "plus", seed(Fraction(1, 8))) == 0
    assert B_set_count(1, "plus", seed(Fraction(1))) == 126


def test_C_examples():
    s = Schedule((4, 11), (Fraction(1, 2), Fraction(1, 2)))  # W: 7 -> 21, m = 3
    assert C_count(2, "plus", s) == 63 ** 2 == 3969
    small = Schedule((2, 5), (Fraction(1, 2), Fraction(1, 3)))  # W: 3 -> 9, |B| = 3
    assert B_set_count(1, "plus", small) == 3
    assert C_count(2, "plus", small) == 9 == len(enumerate_C(2, "plus", small))
    five = Schedule((2, 8), (Fraction(1, 2), Fraction(1, 3)))  # W: 3 -> 15, m = 5
    assert C_count(2, "plus", five) == 27 == len(set(enumerate_C(2, "plus", five)))
    empty = Schedule((2, 5), (Fraction(1, 3), Fraction(1, 3)))
    assert C_count(2, "plus", empty) == 0
    with pytest.raises(ScheduleError):
        C_count(2, "plus", Schedule((4, 8), (Fraction(1, 2), Fraction(1, 2))))


def test_concatenations_are_admissible():
    s = Schedule((2, 5), (Fraction(1, 2), Fraction(1, 3)))
    P = set(brute_P(1, s, "plus", length=9))
    C = enumerate_C(2, "plus", s)
    assert set(C) <= P and C_count(2, "plus", s) <= len(P)


def test_counting_overflow():
    with pytest.raises(CountingOverflow):
        count_P(3, "plus", Schedule((12, 12, 40), (Fraction(1, 2),) * 3), state_cap=1 << 10)


toy_schedules = st.lists(st.tuples(st.integers(1, 6), st.integers(1, 8)), min_size=1, max_size=3).map(
    lambda lv: Schedule(tuple(sorted(l for l, _ in lv)),
                        tuple(sorted((Fraction(n, 8) for _, n in lv), reverse=True))))


@settings(max_examples=60, deadline=None)
@given(toy_schedules, st.sampled_from(["plus", "minus"]))
def test_dp_matches_brute_oracle(s, parity):
    for k in range(1, s.depth + 1):
        if 2 * s.lengths[k - 1] - 1 > 11 or (parity == "minus" and k == 1):
            continue
        fam = "plus" if k % 2 else "minus"
        assert count_P(k, fam, s) == len(brute_P(k, s, fam))


@settings(max_examples=40, deadline=None)
@given(toy_schedules)
def test_nesting_and_extremal_words(s):
    assume(s.depth == 3 and 2 * s.lengths[2] - 1 <= 11)
    w1 = 2 * s.lengths[0] - 1
    for word in brute_P(3, s, "plus"):
        assert all(admissible_oracle(word[i:i + w1], 1, s, "plus") for i in range(len(word) - w1 + 1))
    for k in (1, 2, 3):
        one = "+" if k % 2 else "-"
        assert not in_Fk(signed(one * (2 * s.lengths[k - 1] - 1)), k, s)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 6), st.integers(1, 7))
def test_parity_families_disjoint(l, n):
    s = Schedule((l, l), (Fraction(n, 8), Fraction(n, 8)))
    assert not set(brute_P(1, s, "plus")) & set(brute_P(2, s, "minus"))


# -- weighted counts and the chains -----------------------------------------


def test_weighted_examples():
    one = seed(Fraction(1, 8))
    assert weighted_G_count(1, "plus", one, b=2).value == pytest.approx(0, abs=1e-30)
    w = weighted_G_count(1, "plus", seed(), b=2)
    expected = math.log(sum(math.comb(7, i) * 2 ** (7 * i) for i in range(4)))
    assert w.value == pytest.approx(expected, rel=1e-14)
    w2 = weighted_G_count(1, "plus", seed(), b=2, c=2)
    assert w2.value - w.value == pytest.approx(math.log(2), abs=1e-14)
    with pytest.raises(DomainError):
        weighted_G_count(1, "plus", seed(), c=0)


@settings(max_examples=30, deadline=None)
@given(toy_schedules)
def test_weight_one_is_log_count(s):
    assume(2 * s.lengths[0] - 1 <= 15)
    assert weighted_G_count(1, "plus", s, b=1).value == pytest.approx(math.log(count_P(1, "plus", s)),
                                                                      abs=1e-12)


def test_blowup_weight_is_site_scale():
    s = Schedule((3,), (Fraction(2, 5),))
    total = sum(blowup_expand(signed(w)) for w in brute_P(1, s, "plus"))
    assert weighted_G_count(1, "plus", s, b=2, scale="site").value == pytest.approx(math.log(total))


def test_lemma51_toy_and_strict():
    with pytest.raises(ScheduleError):
        verify_lemma51_chain(2, Schedule((4, 8), (Fraction(1, 2), Fraction(1, 2))))
    toy = Schedule((4, 11), (Fraction(1, 2), Fraction(1, 2)))
    rep = verify_lemma51_chain(2, toy, power=1)
    assert rep["(i) tight count bound"].holds
    assert rep.tight_count == count_P(2, "minus", toy)
    strict = extend_schedule(Schedule(*SEED, STRICT))
    assert strict.mode == STRICT
    rep = verify_lemma51_chain(2, strict, power=10)
    assert rep.holds and rep.mode == STRICT


def test_prop52_examples():
    degenerate = Schedule((2, 5), (Fraction(1, 2), Fraction(1, 9)))
    assert count_P(2, "minus", degenerate) == 1
    rep = verify_prop52(2, degenerate, power=10)
    assert rep.holds and rep["weighted inequality"].margin.lo > 0
    # b = 1 collapses the weights to the plain counts
    rep1 = verify_prop52(2, degenerate, power=10, b=1)
    assert rep1.C_log.mid == pytest.approx(math.log(C_count(2, "plus", degenerate)))
    symmetric = Schedule((2, 2), (Fraction(1, 2), Fraction(1, 2)))
    rep = verify_prop52(2, symmetric, power=1, c=1)
    assert rep.tight_log.mid == pytest.approx(rep.rich_log.mid, abs=1e-30)
