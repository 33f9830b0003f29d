"""Closed-form bounds, parameter choices and prime-sum diagnostics."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath
import numpy as np

from . import arith
from .curve import CubicForm, coefficient_norm, reduction_profile

_DPS = 30
RANK_PROVENANCE = "fixture-supplied, unverified"


def _mp(x):
    if isinstance(x, Fraction):
        return mpmath.mpf(x.numerator) / x.denominator
    return mpmath.mpf(x)


@dataclass(frozen=True)
class BoundInputs:
    B: int
    r: int = 0
    m: int = 1
    A: Fraction = Fraction(1)
    u: Fraction = Fraction(1)

    def __post_init__(self):
        if self.B < 3:
            raise ValueError("B must be at least 3")
        if self.r < 0 or self.m < 1:
            raise ValueError("need r >= 0 and m >= 1")
        if self.A <= 0 or self.u < 1:
            raise ValueError("need A > 0 and u >= 1")
        object.__setattr__(self, "A", Fraction(self.A))
        object.__setattr__(self, "u", Fraction(self.u))


def uniform_bound(inputs: BoundInputs) -> float:
    """m^r (B^(2/(3 m^2)) + m^2) log B."""
    B, r, m = inputs.B, inputs.r, inputs.m
    with mpmath.workdps(_DPS):
        val = mpmath.mpf(m) ** r * (mpmath.power(B, mpmath.mpf(2) / (3 * m * m)) + m * m) * mpmath.log(B)
        return float(val)


def optimal_m(B, log_B=None) -> int:
    """1 + floor(sqrt(log B)); pass ``log_B`` directly for B too large to form."""
    if log_B is None:
        if B < 3:
            raise ValueError("B must be at least 3")
        with mpmath.workdps(_DPS):
            log_B = mpmath.log(B)
    with mpmath.workdps(_DPS):
        return 1 + int(mpmath.floor(mpmath.sqrt(log_B)))


@dataclass(frozen=True)
class ParameterChoice:
    a: int
    b: int
    s: int
    size_lhs: float  # s
    size_rhs: float  # u B^(2(a+Ab)/s) log B
    size_holds: bool


def size_condition(B, s: int, a: int, b: int, A, u) -> tuple[float, bool]:
    """Right side u B^(2(a+Ab)/s) log B of the size condition and whether s exceeds it."""
    with mpmath.workdps(_DPS):
        e = 2 * (a + _mp(A) * b) / s
        rhs = _mp(u) * mpmath.power(B, e) * mpmath.log(B)
        return float(rhs), bool(s > rhs)


def parameter_choice(B, m: int, A=1, u=1) -> ParameterChoice:
    """b = m^2, a = 1 + floor(u B^(2/(3m^2)) log B / m^2 + A log B), s = 3(m^2 a + b)."""
    if B < 3 or m < 1:
        raise ValueError("need B >= 3 and m >= 1")
    with mpmath.workdps(_DPS):
        LB = mpmath.log(B)
        inner = _mp(u) * mpmath.power(B, mpmath.mpf(2) / (3 * m * m)) * LB / (m * m) + _mp(A) * LB
        a = 1 + int(mpmath.floor(inner))
    b = m * m
    s = 3 * (m * m * a + b)
    rhs, ok = size_condition(B, s, a, b, A, u)
    return ParameterChoice(a, b, s, float(s), rhs, ok)


@dataclass(frozen=True)
class MertensReport:
    s: int
    sum_logp_over_p: float
    log_s: float
    sum_logp: float
    deviation: float  # |sum log p / p - log s|
    chebyshev_ratio: float  # sum log p / s


def mertens_diagnostics(s: int) -> MertensReport:
    if s < 2:
        raise ValueError("s must be at least 2")
    ps = np.array(arith.primes_up_to(s), dtype=float)
    lp = np.log(ps)
    s1 = math.fsum(lp / ps)
    s2 = math.fsum(lp)
    return MertensReport(s, s1, math.log(s), s2, abs(s1 - math.log(s)), s2 / s)


def divisor_sum_check(Pi: int) -> tuple[float, float, bool]:
    """(sum over primes p | Pi of log p / p, log log Pi + 2, lhs <= rhs)."""
    if Pi <= 1:
        raise ValueError("Pi must exceed 1")
    lhs = math.fsum(math.log(p) / p for p in arith.prime_factors(Pi))
    rhs = math.log(math.log(Pi)) + 2
    return lhs, rhs, lhs <= rhs


def divisor_sum_exhaustive(limit: int) -> tuple[int, int | None]:
    """Check the prime-divisor sum bound for every square-free 2 <= Pi <= limit.

    Returns (number checked, first failure or None). The sums are built for all
    n at once with a sieve.
    """
    sums = np.zeros(limit + 1)
    squarefree = np.ones(limit + 1, dtype=bool)
    for p in arith.primes_up_to(limit):
        sums[p::p] += math.log(p) / p
        squarefree[p * p :: p * p] = False
    n = np.arange(limit + 1, dtype=float)
    idx = np.flatnonzero(squarefree[2:]) + 2
    rhs = np.log(np.log(n[idx])) + 2
    bad = idx[sums[idx] > rhs]
    return len(idx), (int(bad[0]) if len(bad) else None)


def m_l(l: int) -> Fraction:
    if l < 1:
        raise ValueError("l must be positive")
    return Fraction(l * l - 4 * l - 4, 8 * l * l + 8 * l)


@dataclass(frozen=True)
class ExponentReport:
    r: int
    m_values: tuple[Fraction, ...]  # m_1 .. m_max(r, 16)
    partial_sums: tuple[Fraction, ...]
    exponent: Fraction
    within_one_plus_half_r: bool


def rank_exponent(r: int) -> ExponentReport:
    """Exponent of log B: r/2 - (m_1 + ... + m_r) for r < 16, r/2 from 16 on."""
    if r < 1:
        raise ValueError("r must be positive")
    ms = tuple(m_l(l) for l in range(1, max(r, 16) + 1))
    sums, acc = [], Fraction(0)
    for v in ms:
        acc += v
        sums.append(acc)
    half = Fraction(r, 2)
    exponent = half - sums[r - 1] if r < 16 else half
    return ExponentReport(r, ms, tuple(sums), exponent, exponent <= 1 + half)


@dataclass(frozen=True)
class ReductionDiagnostics:
    B: int
    N_observed: int
    few_points: bool  # N <= 9
    log_norm_ratio: float  # log ||F|| / (30 log B)
    log_radical: float
    log_radical_ratio: float  # log Pi_C / log B
    bad_primes: tuple[int, ...]
    prime_bound: int


def reduction_diagnostics(F: CubicForm, B: int, N_observed: int, prime_bound: int = 10_000) -> ReductionDiagnostics:
    if B < 3:
        raise ValueError("B must be at least 3")
    prof = reduction_profile(F, prime_bound)
    LB = math.log(B)
    return ReductionDiagnostics(
        B,
        N_observed,
        N_observed <= 9,
        math.log(coefficient_norm(F)) / (30 * LB),
        prof.log_radical,
        prof.log_radical / LB,
        prof.bad_primes,
        prime_bound,
    )
