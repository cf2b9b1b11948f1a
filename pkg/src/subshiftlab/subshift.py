"""Frequency-constrained subshifts over the signed alphabet {-1, 0, +1}.

Level k of a schedule forbids, inside windows of length W_k = 2 l_k - 1, a
zero frequency of r_k or more. Odd levels belong to the plus family (strings
over {0, +1}), even levels to the minus family (strings over {0, -1}). A
string of length W_k is admissible for a family when it uses only that
family's symbols and every contiguous factor of length W_j (j <= k, same
family) has zero frequency below r_j.

Counting never enumerates strings. Encode each symbol as one bit (1 = zero
symbol), slide a window automaton over the last ``max W_j - 1`` bits, and
carry a histogram of total zero counts; the histogram gives plain counts,
weighted counts and the blow-up multiplicities alike.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .bounds import STRICT, Interval, Schedule, _ctx, _rat, binom_partial_sum, decide, entropy_mpi
from .core import DEFAULT_ENUM_CAP, DEFAULT_STATE_CAP, Alphabet, Pattern
from .errors import (ContractViolation, CountingOverflow, DomainError, EnumerationOverflow,
                     ScheduleError)

MODULE = "subshift-x"

SIGNED = Alphabet(("-", "0", "+"))
MINUS_SYM, ZERO_SYM, PLUS_SYM = "-", "0", "+"
PLUS, MINUS = "plus", "minus"
SUB_ALPHABET = {PLUS: frozenset({ZERO_SYM, PLUS_SYM}), MINUS: frozenset({ZERO_SYM, MINUS_SYM})}
_ALIASES = {"-1": "-", "-": "-", "0": "0", "+1": "+", "+": "+", "1": "+", -1: "-", 0: "0", 1: "+"}


def signed(symbols) -> Pattern:
    """1D signed pattern from ``"+0-"``, ``"+1 0 -1"`` or a sequence of -1/0/+1."""
    if isinstance(symbols, str):
        symbols = symbols.split() if " " in symbols.strip() else list(symbols)
    if len(symbols) == 0:
        raise DomainError("empty string", module=MODULE)
    try:
        return Pattern.from_symbols(SIGNED, [_ALIASES[s] for s in symbols])
    except KeyError as exc:
        raise ContractViolation(f"not a signed symbol: {exc.args[0]!r}", module=MODULE) from None


def parity_of_level(k: int) -> str:
    return PLUS if k % 2 == 1 else MINUS


def normalize_parity(parity) -> str:
    p = {"+": PLUS, "plus": PLUS, "-": MINUS, "minus": MINUS}.get(str(parity).lower())
    if p is None:
        raise DomainError(f"parity must be plus/+ or minus/-, got {parity!r}", module=MODULE)
    return p


@dataclass(frozen=True)
class BlowupSymbol:
    """Symbol of the blow-up alphabet: nonzero symbols carry tag '*', zero splits into '0' and '0~'."""

    base: str
    tag: str

    def __post_init__(self):
        ok = self.tag in ("0", "0~") if self.base == ZERO_SYM else self.tag == "*"
        if self.base not in SIGNED or not ok:
            raise ContractViolation(f"invalid blow-up symbol ({self.base}, {self.tag})", module=MODULE)


BLOWUP_SYMBOLS = (BlowupSymbol("-", "*"), BlowupSymbol("0", "0"), BlowupSymbol("0", "0~"),
                  BlowupSymbol("+", "*"))


def _zeros(omega: Pattern) -> int:
    z = SIGNED.index(ZERO_SYM)
    return sum(1 for v in omega.values if v == z)


def _require_1d(omega: Pattern):
    if omega.alphabet != SIGNED or omega.dimension != 1:
        raise ContractViolation("expected a 1D pattern over the signed alphabet", module=MODULE)


def f0(omega: Pattern) -> Fraction:
    """Exact frequency of the zero symbol."""
    _require_1d(omega)
    if len(omega.values) == 0:
        raise DomainError("zero frequency of an empty string", module=MODULE)
    return Fraction(_zeros(omega), len(omega.values))


def blowup_expand(omega: Pattern) -> int:
    """Number of blow-up strings projecting onto ``omega``."""
    _require_1d(omega)
    return 2 ** _zeros(omega)


def zero_limit(r: Fraction, w: int) -> int:
    """Largest zero count z with z / w < r."""
    return math.ceil(Fraction(r) * w) - 1


def in_Fk(omega: Pattern, k: int, s: Schedule) -> bool:
    """Whether ``omega`` (length W_k) is forbidden at level k."""
    _require_1d(omega)
    w = s.window(k)
    if len(omega.values) != w:
        raise DomainError(f"level {k} strings have length {w}, got {len(omega.values)}", module=MODULE)
    parity = parity_of_level(k)
    if not set(omega.symbols) <= SUB_ALPHABET[parity]:
        return True
    bits = [1 if c == ZERO_SYM else 0 for c in omega.symbols]
    for j in range(k, 0, -2):
        wj, limit = s.window(j), zero_limit(s.r(j), s.window(j))
        if any(sum(bits[i:i + wj]) > limit for i in range(w - wj + 1)):
            return True
    return False


def level_constraints(k: int, parity: str, s: Schedule) -> list:
    """(window, max zeros) pairs of the family's levels j <= k."""
    first = 1 if parity == PLUS else 2
    return [(s.window(j), zero_limit(s.r(j), s.window(j))) for j in range(first, k + 1, 2)]


def zero_histogram(length: int, constraints, state_cap: int = DEFAULT_STATE_CAP) -> list:
    """hist[z] = number of binary strings of ``length`` with z ones in which every
    window of size w contains at most ``limit`` ones, for each (w, limit).

    A constraint whose window equals the whole length is a filter on the total;
    longer windows never fit and are ignored.
    """
    sliding = [(w, lim) for w, lim in constraints if w < length]
    total_cap = min([lim for w, lim in constraints if w == length], default=length)
    n = max([w for w, _ in sliding], default=1) - 1
    if n > 0 and (1 << n) > state_cap:
        raise CountingOverflow(f"window automaton needs 2^{n} states (cap {state_cap})",
                               cap=state_cap, module=MODULE)
    size = 1 << n
    states = np.arange(size, dtype=np.int64)
    # ones among the last t bits of each state, for every t we need
    recent = {t: np.array([bin(x & ((1 << t) - 1)).count("1") for x in range(size)], dtype=np.int64)
              for t in {w - 1 for w, _ in sliding}}
    dtype = np.int64 if length < 62 else object  # counts stay below 2^length
    hist = np.zeros((size, length + 1), dtype=dtype)
    hist[0, 0] = 1
    half = size >> 1
    for pos in range(length):
        new = np.zeros_like(hist)
        for bit in (0, 1):
            ok = np.ones(size, dtype=bool)
            for w, lim in sliding:
                if pos + 1 >= w:
                    ok &= recent[w - 1] + bit <= lim
            contrib = np.zeros_like(hist)
            if bit:
                contrib[:, 1:] = hist[:, :-1]
            else:
                contrib[:] = hist
            contrib[~ok] = 0
            if n == 0:
                new[0] += contrib[0]
            else:
                # state s moves to ((s << 1) | bit) mod size; s and s + half share a target
                new[((states[:half] << 1) | bit)] += contrib[:half] + contrib[half:]
        hist = new
    out = [int(v) for v in hist.sum(axis=0)]
    return [v if z <= total_cap else 0 for z, v in enumerate(out)]


def _histogram_brute(length: int, constraints) -> list:
    hist = [0] * (length + 1)
    for bits in itertools.product((0, 1), repeat=length):
        if all(sum(bits[i:i + w]) <= lim for w, lim in constraints if w <= length
               for i in range(length - w + 1)):
            hist[sum(bits)] += 1
    return hist


def P_histogram(k: int, parity, s: Schedule, method: str = "dp",
                state_cap: int = DEFAULT_STATE_CAP) -> list:
    """Zero-count histogram of the family's admissible strings of length W_k."""
    parity = normalize_parity(parity)
    length, cons = s.window(k), level_constraints(k, parity, s)
    if method == "brute":
        if length > 24:
            raise CountingOverflow(f"brute force over 2^{length} strings", cap=1 << 24, module=MODULE)
        return _histogram_brute(length, cons)
    return _cached_histogram(length, tuple(cons), state_cap)


@lru_cache(maxsize=128)
def _cached_histogram(length, cons, state_cap):
    return tuple(zero_histogram(length, cons, state_cap))


def count_P(k: int, parity, s: Schedule, method: str = "dp",
            state_cap: int = DEFAULT_STATE_CAP) -> int:
    """Number of admissible strings of length W_k for the given family."""
    return sum(P_histogram(k, parity, s, method, state_cap))


def B_set_count(k: int, parity, s: Schedule, **kw) -> int:
    """Admissible strings of length W_k other than the zero-free one."""
    return count_P(k, parity, s, **kw) - 1


def odd_slots(m: int) -> int:
    return (m + 1) // 2


def multiplicity(k: int, s: Schedule) -> int:
    if k < 2:
        raise ScheduleError("concatenation sets start at level 2", module=MODULE)
    m = s.multiplicity(k)
    if m is None:
        raise ScheduleError(f"(2*l_{k}-1) = {s.window(k)} is not a multiple of {s.window(k - 1)}",
                            module=MODULE)
    return m


def C_count(k: int, parity, s: Schedule, **kw) -> int:
    """Size of the concatenation set: m_k slots of length W_{k-1}, odd slots free
    in B (level k-1, same family), even slots the zero-free block."""
    m = multiplicity(k, s)
    return B_set_count(k - 1, parity, s, **kw) ** odd_slots(m)


def enumerate_C(k: int, parity, s: Schedule, cap: int = DEFAULT_ENUM_CAP) -> list:
    """Explicit concatenations (as strings over '0'/'+' or '0'/'-')."""
    parity = normalize_parity(parity)
    m = multiplicity(k, s)
    w = s.window(k - 1)
    one = PLUS_SYM if parity == PLUS else MINUS_SYM
    cons = level_constraints(k - 1, parity, s)
    blocks = []
    for bits in itertools.product((0, 1), repeat=w):
        if any(bits) and all(sum(bits[i:i + wj]) <= lim for wj, lim in cons if wj <= w
                             for i in range(w - wj + 1)):
            blocks.append("".join(ZERO_SYM if b else one for b in bits))
    total = len(blocks) ** odd_slots(m)
    if total > cap:
        raise EnumerationOverflow(f"{total} concatenations exceed cap {cap}", cap=cap, module=MODULE)
    filler = one * w
    out = []
    for choice in itertools.product(blocks, repeat=odd_slots(m)):
        it = iter(choice)
        out.append("".join(next(it) if i % 2 == 0 else filler for i in range(m)))
    return out


# -- counting chains --------------------------------------------------------


def _log_int(ctx, n: int):
    return ctx.log(ctx.mpf(n))


@dataclass(frozen=True)
class Step:
    name: str
    holds: bool
    margin: Interval  # natural-log margin, >= 0 when the step holds

    @property
    def margin_bits(self) -> float:
        return self.margin.mid / math.log(2)


@dataclass(frozen=True)
class ChainReport:
    k: int
    power: int
    tight: str
    rich: str
    slots: int
    steps: tuple
    mode: str
    tight_count: int | None = None
    rich_count: int | None = None
    C_size: int | None = None

    @property
    def holds(self) -> bool:
        return all(st.holds for st in self.steps)

    def __getitem__(self, name) -> Step:
        for st in self.steps:
            if st.name == name:
                return st
        raise KeyError(name)


def _step(name, margin_fn):
    holds, iv = decide(margin_fn, name=name, module=MODULE)
    return Step(name, holds, iv)


def verify_lemma51_chain(k: int, s: Schedule, power: int = 10,
                         state_cap: int = DEFAULT_STATE_CAP) -> ChainReport:
    """Check |P_tight|^power <= |C_rich| at level k through its three links.

    The tight family is the one owning level k (bounded by r_k); the rich family
    is the other one, whose concatenation set is built from level k-1.

      (i)   power * log|P_tight| <= power * W_k H(r_k)
      (ii)  log|C|               >= W_k r_{k-1} / 2
      (iii) power * W_k H(r_k)   <= W_k r_{k-1} / 2

    In toy mode |P_tight| is counted exactly; in strict mode it is replaced by
    the binomial partial sum bounding it (no enumeration), and (i) is the
    binomial upper bound at that size.
    """
    m = multiplicity(k, s)
    tight, rich = parity_of_level(k), parity_of_level(k - 1)
    W, rk, rprev = s.window(k), s.r(k), s.r(k - 1)
    slots = odd_slots(m)
    if s.mode == STRICT:
        if rk > Fraction(1, 2):
            raise DomainError("binomial bound needs r_k <= 1/2", module=MODULE)
        tight_count = binom_partial_sum(W, rk)  # upper bound for |P_tight|
    else:
        tight_count = count_P(k, tight, s, state_cap=state_cap)
    B = B_set_count(k - 1, rich, s, state_cap=state_cap)
    if B <= 0:
        raise DomainError("the concatenation set is empty (no admissible block with a zero)",
                          module=MODULE)

    def s1(ctx):
        return power * W * entropy_mpi(ctx, rk) - power * _log_int(ctx, tight_count)

    def s2(ctx):
        return slots * _log_int(ctx, B) - W * _rat(ctx, rprev) / 2

    def s3(ctx):
        return W * _rat(ctx, rprev) / 2 - power * W * entropy_mpi(ctx, rk)

    steps = [_step("(i) tight count bound", s1), _step("(ii) concatenation lower bound", s2),
             _step("(iii) entropy gap", s3)]
    rich_count = None
    if s.mode != STRICT:
        rich_count = count_P(k, rich, s, state_cap=state_cap)
        steps.append(_step("direct", lambda ctx: slots * _log_int(ctx, B)
                           - power * _log_int(ctx, tight_count)))
    return ChainReport(k, power, tight, rich, slots, tuple(steps), s.mode, tight_count, rich_count,
                       B ** slots if slots * B.bit_length() < 4096 else None)


def _log_base(ctx, b):
    if isinstance(b, str):
        if b.lower() == "e":
            return ctx.mpf(1)
        b = Fraction(b)
    return ctx.log(_rat(ctx, Fraction(b)))


def _log_weighted(ctx, hist, log_b, per_zero):
    """log sum_z hist[z] * b^(per_zero * z), with all terms in the interval context."""
    terms = [_log_int(ctx, n) + per_zero * z * log_b for z, n in enumerate(hist) if n]
    if not terms:
        raise DomainError("weighted count of an empty set", module=MODULE)
    top = max(terms, key=lambda t: t.b)
    return top + ctx.log(sum(ctx.exp(t - top) for t in terms))


@dataclass(frozen=True)
class WeightedCount:
    log_value: Interval
    base: object
    c: int

    @property
    def value(self) -> float:
        return self.log_value.mid


def _exponent(k, s, scale):
    if scale == "window":
        return s.window(k)  # f0 * W^2 = zeros * W
    if scale == "site":
        return 1
    raise DomainError(f"scale must be 'window' or 'site', got {scale!r}", module=MODULE)


def weighted_G_count(k: int, parity, s: Schedule, b=2, c: int = 1, scale: str = "window",
                     prec: int = 128) -> WeightedCount:
    """log( c * sum over admissible strings of b^(f0 * W_k^2) ).

    ``scale='site'`` weights each string by b^(number of zeros) instead, the
    count of blow-up strings when b = 2.
    """
    if c < 1:
        raise DomainError("c must be a positive integer", module=MODULE)
    hist = P_histogram(k, parity, s)
    e = _exponent(k, s, scale)
    ctx = _ctx(prec)
    val = _log_int(ctx, c) + _log_weighted(ctx, hist, _log_base(ctx, b), e)
    return WeightedCount(Interval.from_mpi(val), b, c)


@dataclass(frozen=True)
class Prop52Report:
    k: int
    power: int
    tight: str
    rich: str
    tight_log: Interval  # log(c * weighted sum over P_tight)
    rich_log: Interval   # log(c * weighted sum over P_rich)
    C_log: Interval      # log(c * weighted sum over the concatenation set)
    steps: tuple

    @property
    def holds(self) -> bool:
        return all(st.holds for st in self.steps)

    def __getitem__(self, name) -> Step:
        for st in self.steps:
            if st.name == name:
                return st
        raise KeyError(name)


def verify_prop52(k: int, s: Schedule, power: int = 10, b=2, c: int = 1,
                  scale: str = "window") -> Prop52Report:
    """Weighted version of the counting chain: power * log G_tight <= log G_C <= log G_rich.

    The concatenation weight factorises over free slots because the exponent
    is linear in the number of zeros.
    """
    m = multiplicity(k, s)
    tight, rich = parity_of_level(k), parity_of_level(k - 1)
    slots = odd_slots(m)
    e = _exponent(k, s, scale)
    h_tight = P_histogram(k, tight, s)
    h_rich = P_histogram(k, rich, s)
    h_B = list(P_histogram(k - 1, rich, s))
    h_B[0] = 0  # drop the zero-free block

    def parts(ctx):
        lb = _log_base(ctx, b)
        lc = _log_int(ctx, c)
        return (lc + _log_weighted(ctx, h_tight, lb, e), lc + _log_weighted(ctx, h_rich, lb, e),
                lc + slots * _log_weighted(ctx, h_B, lb, e))

    steps = (
        _step("containment", lambda ctx: parts(ctx)[1] - parts(ctx)[2]),
        _step("weighted inequality", lambda ctx: parts(ctx)[2] - power * parts(ctx)[0]),
    )
    t, r, cl = (Interval.from_mpi(x) for x in parts(_ctx(128)))
    return Prop52Report(k, power, tight, rich, t, r, cl, steps)
