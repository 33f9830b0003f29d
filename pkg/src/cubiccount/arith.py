"""Exact integer/rational arithmetic, prime fields and fraction-free linear algebra.

Rationals are :class:`fractions.Fraction` (always canonical). Matrices are
plain grids of ``int``/``Fraction``; :class:`ExactMatrix` adds optional row
and column labels.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from typing import Iterable, Sequence

import numpy as np


_MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


class DimensionError(ValueError):
    pass


# -- primes -------------------------------------------------------------------


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin for n < 3.3e24 (fixed witness set)."""
    if n < 2:
        return False
    for p in _MR_WITNESSES:
        if n % p == 0:
            return n == p
    d, r = n - 1, 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in _MR_WITNESSES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def primes_up_to(n: int) -> list[int]:
    """All primes <= n (sieve of Eratosthenes)."""
    if n < 2:
        return []
    sieve = np.ones(n + 1, dtype=bool)
    sieve[:2] = False
    for p in range(2, math.isqrt(n) + 1):
        if sieve[p]:
            sieve[p * p :: p] = False
    return np.flatnonzero(sieve).tolist()


def next_prime(n: int) -> int:
    """Smallest prime strictly greater than n."""
    k = max(n + 1, 2)
    while not is_prime(k):
        k += 1
    return k


def prime_factors(n: int) -> list[int]:
    """Distinct prime divisors of |n| by trial division (small inputs only)."""
    n = abs(n)
    out = []
    p = 2
    while p * p <= n:
        if n % p == 0:
            out.append(p)
            while n % p == 0:
                n //= p
        p += 1 if p == 2 else 2
    if n > 1:
        out.append(n)
    return out


def valuation(n: int, p: int) -> int:
    """Largest k with p**k dividing n."""
    if n == 0:
        raise ValueError("valuation of 0 is undefined")
    n = abs(n)
    k = 0
    # square the divisor while it still divides: O(log v) big divisions
    powers = [p]
    while n % powers[-1] == 0:
        n //= powers[-1]
        k += 1 << (len(powers) - 1)
        powers.append(powers[-1] * powers[-1])
    for i in range(len(powers) - 2, -1, -1):
        if n % powers[i] == 0:
            n //= powers[i]
            k += 1 << i
    return k


# -- prime field --------------------------------------------------------------


@dataclass(frozen=True)
class FpElement:
    value: int
    p: int

    def __post_init__(self):
        object.__setattr__(self, "value", self.value % self.p)

    def _other(self, other):
        if isinstance(other, FpElement):
            if other.p != self.p:
                raise ValueError(f"modulus mismatch: {self.p} vs {other.p}")
            return other.value
        return other % self.p

    def __add__(self, other):
        return FpElement(self.value + self._other(other), self.p)

    __radd__ = __add__

    def __sub__(self, other):
        return FpElement(self.value - self._other(other), self.p)

    def __rsub__(self, other):
        return FpElement(self._other(other) - self.value, self.p)

    def __mul__(self, other):
        return FpElement(self.value * self._other(other), self.p)

    __rmul__ = __mul__

    def __neg__(self):
        return FpElement(-self.value, self.p)

    def inverse(self) -> "FpElement":
        if self.value == 0:
            raise ZeroDivisionError("inverse of 0 in F_p")
        return FpElement(pow(self.value, -1, self.p), self.p)

    def __truediv__(self, other):
        return self * FpElement(self._other(other), self.p).inverse()

    def __pow__(self, e: int):
        if e < 0:
            return self.inverse() ** (-e)
        return FpElement(pow(self.value, e, self.p), self.p)

    def __eq__(self, other):
        if isinstance(other, FpElement):
            return self.p == other.p and self.value == other.value
        if isinstance(other, int):
            return self.value == other % self.p
        return NotImplemented

    def __hash__(self):
        return hash((self.value, self.p))

    def __int__(self):
        return self.value

    def __repr__(self):
        return f"{self.value} (mod {self.p})"


# -- univariate polynomials over F_p (ascending coefficient lists) -------------


def _trim(f: list[int]) -> list[int]:
    while f and f[-1] == 0:
        f.pop()
    return f


def pmod(f: Sequence[int], p: int) -> list[int]:
    return _trim([c % p for c in f])


def padd(f, g, p):
    n = max(len(f), len(g))
    return _trim([((f[i] if i < len(f) else 0) + (g[i] if i < len(g) else 0)) % p for i in range(n)])


def psub(f, g, p):
    n = max(len(f), len(g))
    return _trim([((f[i] if i < len(f) else 0) - (g[i] if i < len(g) else 0)) % p for i in range(n)])


def pmul(f, g, p):
    if not f or not g:
        return []
    out = [0] * (len(f) + len(g) - 1)
    for i, a in enumerate(f):
        if a:
            for j, b in enumerate(g):
                out[i + j] += a * b
    return _trim([c % p for c in out])


def pdivmod(f, g, p):
    if not g:
        raise ZeroDivisionError("polynomial division by zero")
    f = list(f)
    inv = pow(g[-1], -1, p)
    q = [0] * max(len(f) - len(g) + 1, 0)
    while len(f) >= len(g) and f:
        c = f[-1] * inv % p
        k = len(f) - len(g)
        q[k] = c
        for i, b in enumerate(g):
            f[k + i] = (f[k + i] - c * b) % p
        _trim(f)
    return _trim(q), f


def pgcd(f, g, p):
    """Monic gcd in F_p[x]; gcd(0, 0) = 0."""
    f, g = pmod(f, p), pmod(g, p)
    while g:
        f, g = g, pdivmod(f, g, p)[1]
    if not f:
        return []
    inv = pow(f[-1], -1, p)
    return [c * inv % p for c in f]


def ppowmod(base, e, modulus, p):
    result = [1]
    base = pdivmod(base, modulus, p)[1]
    while e:
        if e & 1:
            result = pdivmod(pmul(result, base, p), modulus, p)[1]
        base = pdivmod(pmul(base, base, p), modulus, p)[1]
        e >>= 1
    return result


def peval(f, x, p):
    acc = 0
    for c in reversed(f):
        acc = (acc * x + c) % p
    return acc


def sqrt_mod(a: int, p: int) -> int | None:
    """A square root of a mod p (Tonelli-Shanks), or None if a is a non-residue."""
    a %= p
    if a == 0 or p == 2:
        return a
    if pow(a, (p - 1) // 2, p) != 1:
        return None
    if p % 4 == 3:
        return pow(a, (p + 1) // 4, p)
    q, s = p - 1, 0
    while q % 2 == 0:
        q //= 2
        s += 1
    z = 2
    while pow(z, (p - 1) // 2, p) != p - 1:
        z += 1
    m, c, t, r = s, pow(z, q, p), pow(a, q, p), pow(a, (q + 1) // 2, p)
    while t != 1:
        i, t2 = 0, t
        while t2 != 1:
            t2 = t2 * t2 % p
            i += 1
        b = pow(c, 1 << (m - i - 1), p)
        m, c, t, r = i, b * b % p, t * b * b % p, r * b % p
    return r


def _split_roots(g: list[int], p: int) -> list[int]:
    """Roots of a monic squarefree g that splits into distinct linear factors."""
    d = len(g) - 1
    if d == 0:
        return []
    if d == 1:
        return [(-g[0]) % p]
    if d == 2 and p != 2:
        disc = (g[1] * g[1] - 4 * g[0]) % p
        r = sqrt_mod(disc, p)
        inv2 = pow(2, -1, p)
        return sorted({(-g[1] + r) * inv2 % p, (-g[1] - r) * inv2 % p})
    # equal-degree splitting with a deterministic shift sequence
    for delta in range(p):
        h = ppowmod([delta, 1], (p - 1) // 2, g, p)
        h = pgcd(g, psub(h, [1], p), p)
        if 0 < len(h) - 1 < d:
            other, _ = pdivmod(g, h, p)
            return sorted(_split_roots(h, p) + _split_roots(pgcd(other, other, p), p))
    raise ArithmeticError("failed to split polynomial")  # unreachable for p > 2


def poly_roots_mod_p(coeffs: Sequence, p: int) -> list[int]:
    """Roots in F_p of ``sum(coeffs[i] * x**i)`` listed with multiplicity.

    Coefficients may be ints or FpElement; the result is sorted.
    """
    f = pmod([int(c) for c in coeffs], p)
    if not f:
        raise ValueError("zero polynomial has every element as a root")
    if len(f) == 1:
        return []
    if p <= 64:
        distinct = [x for x in range(p) if peval(f, x, p) == 0]
    else:
        g = pgcd(f, psub(ppowmod([0, 1], p, f, p), [0, 1], p), p)
        distinct = _split_roots(g, p)
    roots = []
    for r in distinct:
        h = f
        while True:
            q, rem = pdivmod(h, [(-r) % p, 1], p)
            if rem:
                break
            roots.append(r)
            h = q
            if len(h) <= 1:
                break
    return sorted(roots)


# -- integer polynomials (ascending lists) ------------------------------------


def zpoly_trim(f):
    return _trim(list(f))


def zpoly_add(f, g):
    n = max(len(f), len(g))
    return _trim([(f[i] if i < len(f) else 0) + (g[i] if i < len(g) else 0) for i in range(n)])


def zpoly_sub(f, g):
    n = max(len(f), len(g))
    return _trim([(f[i] if i < len(f) else 0) - (g[i] if i < len(g) else 0) for i in range(n)])


def zpoly_mul(f, g):
    if not f or not g:
        return []
    out = [0] * (len(f) + len(g) - 1)
    for i, a in enumerate(f):
        for j, b in enumerate(g):
            out[i + j] += a * b
    return _trim(out)


# -- matrices -----------------------------------------------------------------


@dataclass(frozen=True)
class ExactMatrix:
    """Rectangular grid of exact rationals with optional row/column labels."""

    entries: tuple[tuple, ...]
    row_labels: tuple | None = None
    col_labels: tuple | None = None

    def __post_init__(self):
        entries = tuple(tuple(row) for row in self.entries)
        if entries and any(len(r) != len(entries[0]) for r in entries):
            raise DimensionError("ragged matrix")
        object.__setattr__(self, "entries", entries)
        if self.row_labels is not None:
            object.__setattr__(self, "row_labels", tuple(self.row_labels))
            if len(self.row_labels) != len(entries):
                raise DimensionError("row labels do not match row count")
        if self.col_labels is not None:
            object.__setattr__(self, "col_labels", tuple(self.col_labels))
            if len(self.col_labels) != self.cols:
                raise DimensionError("column labels do not match column count")

    @property
    def rows(self) -> int:
        return len(self.entries)

    @property
    def cols(self) -> int:
        return len(self.entries[0]) if self.entries else 0

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows, self.cols

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def is_square(self) -> bool:
        return self.rows == self.cols

    def submatrix(self, row_idx: Sequence[int], col_idx: Sequence[int]) -> "ExactMatrix":
        return ExactMatrix(
            [[self.entries[i][j] for j in col_idx] for i in row_idx],
            None if self.row_labels is None else [self.row_labels[i] for i in row_idx],
            None if self.col_labels is None else [self.col_labels[j] for j in col_idx],
        )

    def tolist(self) -> list[list]:
        return [list(r) for r in self.entries]


def _as_grid(A) -> list[list]:
    if isinstance(A, ExactMatrix):
        return A.tolist()
    return [list(r) for r in A]


def _integer_rows(grid: list[list]) -> tuple[list[list[int]], Fraction]:
    """Scale each row to integers; returns rows and the product of row scales."""
    out, scale = [], Fraction(1)
    for row in grid:
        den = reduce(math.lcm, (Fraction(x).denominator for x in row), 1)
        out.append([int(Fraction(x) * den) for x in row])
        scale *= den
    return out, scale


def det_exact(A) -> int | Fraction:
    """Exact determinant by Bareiss fraction-free elimination."""
    grid = _as_grid(A)
    n = len(grid)
    if any(len(r) != n for r in grid):
        raise DimensionError("determinant of a non-square matrix")
    if n == 0:
        return 1
    M, scale = _integer_rows(grid)
    sign, prev = 1, 1
    for k in range(n - 1):
        if M[k][k] == 0:
            for i in range(k + 1, n):
                if M[i][k] != 0:
                    M[k], M[i] = M[i], M[k]
                    sign = -sign
                    break
            else:
                return 0
        pivot, rk = M[k][k], M[k]
        for i in range(k + 1, n):
            ri = M[i]
            f = ri[k]
            for j in range(k + 1, n):
                ri[j] = (ri[j] * pivot - f * rk[j]) // prev
        prev = pivot
    det = sign * M[n - 1][n - 1]
    if scale == 1:
        return det
    return Fraction(det) / scale


def _fraction_free_rref(M: list[list[int]]) -> tuple[list[int], int]:
    """In-place Jordan-Bareiss elimination on an integer grid.

    On return every pivot row r has value d at column pivots[r] and zero in all
    other pivot columns; rows past the rank are zero. Returns (pivots, d).
    """
    rows = len(M)
    cols = len(M[0]) if rows else 0
    prev, r, pivots = 1, 0, []
    for c in range(cols):
        if r == rows:
            break
        for i in range(r, rows):
            if M[i][c] != 0:
                break
        else:
            continue
        M[r], M[i] = M[i], M[r]
        piv, rr = M[r][c], M[r]
        for i in range(rows):
            if i == r:
                continue
            ri = M[i]
            f = ri[c]
            if f == 0 and piv == prev:
                continue
            for j in range(cols):
                ri[j] = (piv * ri[j] - f * rr[j]) // prev
        prev = piv
        pivots.append(c)
        r += 1
    return pivots, prev


def primitive_vector(v: Iterable) -> list[int]:
    """Clear denominators, divide by the content, make the first nonzero entry positive."""
    v = [Fraction(x) for x in v]
    den = reduce(math.lcm, (x.denominator for x in v), 1)
    ints = [int(x * den) for x in v]
    g = reduce(math.gcd, ints, 0)
    if g == 0:
        return ints
    ints = [x // g for x in ints]
    lead = next(x for x in ints if x != 0)
    return ints if lead > 0 else [-x for x in ints]


def rank_nullspace(A, max_vectors: int | None = None) -> tuple[int, list[list[int]]]:
    """Exact rank and a nullspace basis of primitive integer vectors.

    ``max_vectors`` truncates the basis (useful when a single kernel vector is
    enough and the nullity is large).
    """
    grid = _as_grid(A)
    if not grid:
        return 0, []
    cols = len(grid[0])
    M, _ = _integer_rows(grid)
    pivots, d = _fraction_free_rref(M)
    rank = len(pivots)
    pivset = set(pivots)
    basis = []
    for f in range(cols):
        if f in pivset:
            continue
        if max_vectors is not None and len(basis) >= max_vectors:
            break
        v = [0] * cols
        v[f] = d
        for r, pc in enumerate(pivots):
            v[pc] = -M[r][f]
        basis.append(primitive_vector(v))
    return rank, basis


_RANK_PRIME = 2**61 - 1


def rank_mod_prime(A, p: int = _RANK_PRIME) -> int:
    """Rank of an integer matrix reduced mod p; a lower bound for the rank over Q."""
    M = [[int(x) % p for x in row] for row in _as_grid(A)]
    rank = 0
    cols = len(M[0]) if M else 0
    for c in range(cols):
        piv = next((i for i in range(rank, len(M)) if M[i][c]), None)
        if piv is None:
            continue
        M[rank], M[piv] = M[piv], M[rank]
        inv = pow(M[rank][c], -1, p)
        top = [x * inv % p for x in M[rank]]
        M[rank] = top
        for i in range(rank + 1, len(M)):
            f = M[i][c]
            if f:
                M[i] = [(x - f * y) % p for x, y in zip(M[i], top)]
        rank += 1
        if rank == len(M):
            break
    return rank


def has_full_rank(A) -> bool:
    """Sufficient test: full rank mod a large prime implies full rank over Q."""
    grid = _as_grid(A)
    if not grid:
        return True
    M, _ = _integer_rows(grid)
    return rank_mod_prime(M) == min(len(M), len(M[0]))


def matrix_rank(A) -> int:
    grid = _as_grid(A)
    if grid and has_full_rank(grid):
        return min(len(grid), len(grid[0]))
    return rank_nullspace(grid, max_vectors=0)[0]


def mat_vec(A, v) -> list:
    return [sum(a * b for a, b in zip(row, v)) for row in _as_grid(A)]
