"""Binary entropy, binomial partial sums and the level schedule (lengths, frequencies).

Every comparison involving a logarithm or exponential is decided with
interval arithmetic (mpmath's interval context, a private instance per call)
and the working precision is doubled until the interval clears the
threshold. Interval endpoints are handed back as exact ``Fraction`` values.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from mpmath import libmp
from mpmath.ctx_iv import MPIntervalContext

from .errors import (DomainError, InfeasibleSchedule, ParseError, PrecisionError,
                     ScheduleError, UndecidedCondition)

DEFAULT_PREC = 128
MAX_PREC = 1 << 15


def _ctx(prec: int) -> MPIntervalContext:
    ctx = MPIntervalContext()
    ctx.prec = prec
    return ctx


def _rat(ctx, q) -> object:
    q = Fraction(q)
    return ctx.mpf(q.numerator) / q.denominator


@dataclass(frozen=True)
class Interval:
    """Closed interval with exact rational endpoints."""

    lo: Fraction
    hi: Fraction

    @classmethod
    def from_mpi(cls, x) -> "Interval":
        a, b = x._mpi_
        return cls(Fraction(*libmp.to_rational(a)), Fraction(*libmp.to_rational(b)))

    @classmethod
    def exact(cls, q) -> "Interval":
        return cls(Fraction(q), Fraction(q))

    @property
    def mid(self) -> float:
        return float((self.lo + self.hi) / 2)

    @property
    def radius(self) -> Fraction:
        return (self.hi - self.lo) / 2

    def __contains__(self, x) -> bool:
        return self.lo <= Fraction(x) <= self.hi

    def __float__(self):
        return self.mid

    def __str__(self):
        return f"[{float(self.lo):.12g}, {float(self.hi):.12g}]"


def decide(margin: Callable, name: str = "comparison", prec: int = DEFAULT_PREC,
           max_prec: int = MAX_PREC, module: str = "schedule-bounds"):
    """Decide ``margin >= 0`` where ``margin(ctx)`` returns an interval.

    Returns ``(holds, Interval)``. Raises UndecidedCondition when the interval
    still straddles zero at ``max_prec``.
    """
    while prec <= max_prec:
        m = margin(_ctx(prec))
        iv = Interval.from_mpi(m)
        if iv.lo >= 0:
            return True, iv
        if iv.hi < 0:
            return False, iv
        prec *= 2
    raise UndecidedCondition(f"{name}: interval {iv} straddles the threshold at {max_prec} bits",
                             condition=name, module=module)


def _as_fraction(t, what="t") -> Fraction:
    try:
        return Fraction(t)
    except (TypeError, ValueError):
        raise DomainError(f"{what} must be an exact rational, got {t!r}",
                          module="schedule-bounds") from None


def entropy_mpi(ctx, t: Fraction):
    """Interval for H(t) in the given context (H(0) = H(1) = 0)."""
    if t == 0 or t == 1:
        return ctx.mpf(0)
    x = _rat(ctx, t)
    y = _rat(ctx, 1 - t)
    return -x * ctx.log(x) - y * ctx.log(y)


@dataclass(frozen=True)
class EntropyValue:
    interval: Interval
    prec: int

    @property
    def value(self) -> float:
        return self.interval.mid

    @property
    def radius(self) -> Fraction:
        return self.interval.radius

    def __contains__(self, x):
        return x in self.interval

    def __float__(self):
        return self.value


def binary_entropy(t, tol: float = 1e-30, prec: int = DEFAULT_PREC) -> EntropyValue:
    """Certified enclosure of -t log t - (1-t) log(1-t) with radius below ``tol``."""
    t = _as_fraction(t)
    if not 0 <= t <= 1:
        raise DomainError(f"binary entropy needs 0 <= t <= 1, got {t}", module="schedule-bounds")
    tol = Fraction(tol)
    while prec <= MAX_PREC:
        iv = Interval.from_mpi(entropy_mpi(_ctx(prec), t))
        if iv.radius < tol:
            return EntropyValue(iv, prec)
        prec *= 2
    raise PrecisionError(f"could not reach radius {tol} for H({t})", module="schedule-bounds")


def _floor_mul(alpha: Fraction, n: int) -> int:
    return math.floor(alpha * n)


def binom_partial_sum(n: int, alpha) -> int:
    """Exact sum of C(n, r) for r = 0 .. floor(alpha * n)."""
    alpha = _as_fraction(alpha, "alpha")
    if n < 1 or not 0 <= alpha <= 1:
        raise DomainError(f"need n >= 1 and 0 <= alpha <= 1, got n={n}, alpha={alpha}",
                          module="schedule-bounds")
    top = _floor_mul(alpha, n)
    total, c = 0, 1
    for r in range(top + 1):
        total += c
        c = c * (n - r) // (r + 1)
    return total


@dataclass(frozen=True)
class BinomBounds:
    n: int
    alpha: Fraction
    lower: int
    sum: int
    upper: Interval
    holds: bool


def binom_bounds_check(n: int, alpha) -> BinomBounds:
    """Lower bound 2^floor(alpha n) and upper bound e^{n H(alpha)} around the partial sum.

    The upper comparison is certified: the partial sum must lie below the
    lower endpoint of the enclosure of e^{n H(alpha)}.
    """
    alpha = _as_fraction(alpha, "alpha")
    if not 0 < alpha <= Fraction(1, 2):
        raise DomainError(f"alpha must lie in (0, 1/2], got {alpha}", module="schedule-bounds")
    total = binom_partial_sum(n, alpha)
    lower = 2 ** _floor_mul(alpha, n)
    up_ok, _ = decide(lambda ctx: ctx.exp(n * entropy_mpi(ctx, alpha)) - total,
                      name=f"binomial upper bound n={n}")
    upper = Interval.from_mpi(_ctx(DEFAULT_PREC).exp(n * entropy_mpi(_ctx(DEFAULT_PREC), alpha)))
    return BinomBounds(n, alpha, lower, total, upper, lower <= total and up_ok)


# -- schedule ---------------------------------------------------------------

STRICT, TOY = "strict", "toy"


@dataclass(frozen=True)
class Schedule:
    """Level lengths l_k (k = 1, 2, ...) and zero-frequency thresholds r_k.

    Strict mode demands strictly increasing lengths, strictly decreasing
    frequencies, (2 l_k - 1) divisible by (2 l_{k-1} - 1), and all four level
    conditions between consecutive levels. Toy mode only asks for positive
    lengths and frequencies in (0, 1]; equal levels are allowed so that
    symmetric toy schedules can be written down.
    """

    lengths: tuple
    rates: tuple
    mode: str = TOY

    def __post_init__(self):
        lengths = tuple(int(l) for l in self.lengths)
        rates = tuple(Fraction(r) for r in self.rates)
        object.__setattr__(self, "lengths", lengths)
        object.__setattr__(self, "rates", rates)
        if self.mode not in (STRICT, TOY):
            raise ScheduleError(f"unknown schedule mode {self.mode!r}", module="schedule-bounds")
        if len(lengths) != len(rates) or not lengths:
            raise ScheduleError("schedule needs matching, nonempty length and rate lists",
                                module="schedule-bounds")
        if any(l < 1 for l in lengths) or any(not 0 < r <= 1 for r in rates):
            raise ScheduleError("lengths must be >= 1 and rates in (0, 1]", module="schedule-bounds")
        if any(b < a for a, b in zip(lengths, lengths[1:])) or any(b > a for a, b in zip(rates, rates[1:])):
            raise ScheduleError("lengths must not decrease and rates must not increase",
                                module="schedule-bounds")
        if self.mode == STRICT:
            if any(b <= a for a, b in zip(lengths, lengths[1:])):
                raise ScheduleError("strict schedule needs strictly increasing lengths",
                                    module="schedule-bounds")
            if any(b >= a for a, b in zip(rates, rates[1:])):
                raise ScheduleError("strict schedule needs strictly decreasing rates",
                                    module="schedule-bounds")
            for k in range(2, len(lengths) + 1):
                if self.multiplicity(k) is None:
                    raise ScheduleError(
                        f"(2*l_{k}-1) = {self.window(k)} is not divisible by {self.window(k - 1)}",
                        module="schedule-bounds")
            for k in range(1, len(lengths)):
                report = check_conditions(self, k)
                if not report.all_hold:
                    raise ScheduleError(f"levels {k},{k + 1} fail {report.failed}",
                                        module="schedule-bounds")

    @property
    def depth(self) -> int:
        return len(self.lengths)

    def _check(self, k):
        if not 1 <= k <= self.depth:
            raise ScheduleError(f"level {k} not in schedule (depth {self.depth})",
                                module="schedule-bounds")

    def ell(self, k: int) -> int:
        self._check(k)
        return self.lengths[k - 1]

    def r(self, k: int) -> Fraction:
        self._check(k)
        return self.rates[k - 1]

    def window(self, k: int) -> int:
        return 2 * self.ell(k) - 1

    def multiplicity(self, k: int):
        """(2 l_k - 1)/(2 l_{k-1} - 1) when integral, else None."""
        q, rem = divmod(self.window(k), self.window(k - 1))
        return q if rem == 0 else None

    @staticmethod
    def parity(k: int) -> str:
        return "plus" if k % 2 == 1 else "minus"

    def to_text(self) -> str:
        lines = [f"mode {self.mode}"]
        for k in range(1, self.depth + 1):
            r = self.r(k)
            lines.append(f"level {k} l={self.ell(k)} r={r.numerator}/{r.denominator}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str, mode: str | None = None) -> "Schedule":
        levels, file_mode = {}, None
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if parts[0] == "mode" and len(parts) == 2:
                file_mode = parts[1]
                continue
            if parts[0] != "level" or len(parts) != 4:
                raise ParseError(f"expected 'level <k> l=<int> r=<p>/<q>', got {line!r}", lineno,
                                 module="schedule-bounds")
            try:
                k = int(parts[1])
                kv = dict(p.split("=", 1) for p in parts[2:])
                levels[k] = (int(kv["l"]), Fraction(kv["r"]))
            except (ValueError, KeyError, ZeroDivisionError):
                raise ParseError(f"malformed level line {line!r}", lineno,
                                 module="schedule-bounds") from None
        if sorted(levels) != list(range(1, len(levels) + 1)):
            raise ParseError("levels must be numbered 1..K without gaps", module="schedule-bounds")
        ks = sorted(levels)
        return cls(tuple(levels[k][0] for k in ks), tuple(levels[k][1] for k in ks),
                   mode or file_mode or TOY)


SEED = ((4,), (Fraction(1, 2),))


@dataclass(frozen=True)
class ConditionResult:
    name: str
    holds: bool
    margin: object  # Fraction/int for exact conditions, Interval otherwise

    def margin_text(self) -> str:
        if isinstance(self.margin, Interval):
            return str(self.margin)
        if isinstance(self.margin, int) and abs(self.margin) > 10 ** 30:
            sign = "-" if self.margin < 0 else ""
            return f"{sign}2^{abs(self.margin).bit_length() - 1}..."
        return str(self.margin)


@dataclass(frozen=True)
class ConditionReport:
    k: int
    results: tuple = field(default_factory=tuple)

    def __getitem__(self, name) -> ConditionResult:
        for r in self.results:
            if r.name == name:
                return r
        raise KeyError(name)

    @property
    def all_hold(self) -> bool:
        return all(r.holds for r in self.results)

    @property
    def failed(self) -> list:
        return [r.name for r in self.results if not r.holds]


def condition_s1(s: Schedule, k: int) -> ConditionResult:
    margin = s.window(k) * s.r(k) - 1
    return ConditionResult("S1", margin >= 0, margin)


def condition_s2(s: Schedule, k: int) -> ConditionResult:
    rk, rn = s.r(k), s.r(k + 1)
    holds, iv = decide(lambda ctx: _rat(ctx, rk) * ctx.log(2) / 2 - 10 * entropy_mpi(ctx, rn), "S2")
    return ConditionResult("S2", holds, iv)


def condition_s3(s: Schedule, k: int) -> ConditionResult:
    lhs = Fraction(1, 4 * s.ell(k) - 2)
    rn, wn = s.r(k + 1), s.window(k + 1)

    def margin(ctx):
        return _rat(ctx, lhs) - 10 * (_rat(ctx, rn) + 2 * ctx.log(ctx.mpf(wn)) / (ctx.mpf(wn) ** 2))

    holds, iv = decide(margin, "S3")
    return ConditionResult("S3", holds, iv)


def condition_s4(s: Schedule, k: int) -> ConditionResult:
    margin = s.ell(k + 1) - 2 ** (4 * s.ell(k))
    return ConditionResult("S4", margin >= 0, margin)


def check_conditions(s: Schedule, k: int) -> ConditionReport:
    """Evaluate the four level conditions between levels k and k+1.

    S1 is reported for both levels (its margin is the smaller of the two).
    """
    if not 1 <= k < s.depth:
        raise ScheduleError(f"need levels {k} and {k + 1} in a schedule of depth {s.depth}",
                            module="schedule-bounds")
    a, b = condition_s1(s, k), condition_s1(s, k + 1)
    s1 = ConditionResult("S1", a.holds and b.holds, min(a.margin, b.margin))
    return ConditionReport(k, (s1, condition_s2(s, k), condition_s3(s, k), condition_s4(s, k)))


def extend_schedule(s: Schedule) -> Schedule:
    """Append the next level of a strict schedule.

    The new length is the smallest l >= 2^{4 l_k} with (2l - 1) divisible by
    (2 l_k - 1); the new frequency is the largest 2^-m below r_k meeting S2
    and S3, and it must still satisfy S1 at the new length.
    """
    if s.mode != STRICT:
        raise ScheduleError("extend_schedule requires a strict schedule", module="schedule-bounds")
    k = s.depth
    lk, rk, q = s.ell(k), s.r(k), s.window(k)
    start = max(2 ** (4 * lk), lk + 1)
    target = (q + 1) // 2  # 2l - 1 = 0 (mod q)  <=>  l = (q + 1)/2 (mod q)
    ell = start + (target - start) % q

    m = 1
    while Fraction(1, 2 ** m) >= rk:
        m += 1
    while True:
        trial = Schedule(s.lengths + (ell,), s.rates + (Fraction(1, 2 ** m),), TOY)
        if condition_s2(trial, k).holds and condition_s3(trial, k).holds:
            break
        m += 1
    r_new = Fraction(1, 2 ** m)
    if (2 * ell - 1) * r_new < 1:
        raise InfeasibleSchedule(
            f"largest admissible r_{k + 1} = 2^-{m} violates S1 at length {2 * ell - 1}",
            module="schedule-bounds")
    return Schedule(s.lengths + (ell,), s.rates + (r_new,), STRICT)
