"""Ternary cubic forms: points, heights, reduction mod p and point enumeration."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, reduce
from typing import Iterable, Sequence, Union

import numpy as np

from . import arith
from .arith import pgcd, pmod, primes_up_to, zpoly_mul, zpoly_sub

MONOMIALS: tuple[tuple[int, int, int], ...] = (
    (3, 0, 0), (2, 1, 0), (2, 0, 1), (1, 2, 0), (1, 1, 1),
    (1, 0, 2), (0, 3, 0), (0, 2, 1), (0, 1, 2), (0, 0, 3),
)


class CurveError(ValueError):
    pass


class BadReductionError(CurveError):
    pass


@dataclass(frozen=True)
class ProjPoint:
    """Normalized point of P^2 over Q (``p is None``) or over F_p.

    Rational points are stored as a primitive integer triple whose first
    nonzero entry is positive; F_p points have first nonzero entry 1.
    """

    coords: tuple[int, int, int]
    p: int | None = None

    def __iter__(self):
        return iter(self.coords)

    def __getitem__(self, i):
        return self.coords[i]

    def __lt__(self, other: "ProjPoint"):
        return (self.p or 0, self.coords) < (other.p or 0, other.coords)

    def __str__(self):
        return "[" + ":".join(str(c) for c in self.coords) + "]"

    __repr__ = __str__


Point = Union[ProjPoint, Sequence[int]]


def normalize_point(raw: Sequence, p: int | None = None) -> ProjPoint:
    if len(raw) != 3:
        raise CurveError("projective plane points have three coordinates")
    if p is not None:
        xs = [int(c) % p for c in raw]
        lead = next((c for c in xs if c), 0)
        if lead == 0:
            raise CurveError("(0, 0, 0) is not a projective point")
        inv = pow(lead, -1, p)
        return ProjPoint(tuple(c * inv % p for c in xs), p)
    if all(type(c) is int for c in raw):
        xs = list(raw)
    else:
        fr = [Fraction(c) for c in raw]
        den = reduce(math.lcm, (c.denominator for c in fr), 1)
        xs = [int(c * den) for c in fr]
    g = math.gcd(*xs)
    if g == 0:
        raise CurveError("(0, 0, 0) is not a projective point")
    lead = next(c for c in xs if c)
    if lead < 0:
        g = -g
    return ProjPoint(tuple(c // g for c in xs))


def height(P: ProjPoint) -> int:
    """Naive height max |x_i| of a normalized rational point."""
    if P.p is not None:
        raise CurveError("height is defined for rational points only")
    return max(abs(c) for c in P.coords)


def _eval_cubic(c: Sequence[int], x: int, y: int, z: int) -> int:
    return (
        ((c[0] * x + c[1] * y + c[2] * z) * x + c[3] * y * y + c[4] * y * z + c[5] * z * z) * x
        + ((c[6] * y + c[7] * z) * y + c[8] * z * z) * y
        + c[9] * z * z * z
    )


def _grad_cubic(c: Sequence[int], x: int, y: int, z: int) -> tuple[int, int, int]:
    return (
        3 * c[0] * x * x + 2 * c[1] * x * y + 2 * c[2] * x * z + c[3] * y * y + c[4] * y * z + c[5] * z * z,
        c[1] * x * x + 2 * c[3] * x * y + c[4] * x * z + 3 * c[6] * y * y + 2 * c[7] * y * z + c[8] * z * z,
        c[2] * x * x + c[4] * x * y + 2 * c[5] * x * z + c[7] * y * y + 2 * c[8] * y * z + 3 * c[9] * z * z,
    )


@dataclass(frozen=True)
class CubicForm:
    """Ternary cubic with integer coefficients in the order of ``MONOMIALS``."""

    coeffs: tuple[int, ...]
    name: str = field(default="", compare=False)

    def __post_init__(self):
        cs = tuple(int(c) for c in self.coeffs)
        if len(cs) != 10:
            raise CurveError("a ternary cubic has exactly 10 coefficients")
        if not any(cs):
            raise CurveError("zero form")
        object.__setattr__(self, "coeffs", cs)

    @classmethod
    def from_coefficients(cls, coeffs: Iterable, name: str = "") -> "CubicForm":
        """Build the primitive form (coefficients divided by their gcd)."""
        cs = [int(c) for c in coeffs]
        g = math.gcd(*cs)
        if g == 0:
            raise CurveError("zero form")
        return cls(tuple(c // g for c in cs), name)

    @classmethod
    def from_dict(cls, terms: dict, name: str = "") -> "CubicForm":
        return cls.from_coefficients([terms.get(e, 0) for e in MONOMIALS], name)

    def coefficient(self, e: tuple[int, int, int]) -> int:
        return self.coeffs[MONOMIALS.index(tuple(e))]

    def as_dict(self) -> dict:
        return {e: c for e, c in zip(MONOMIALS, self.coeffs) if c}

    def is_primitive(self) -> bool:
        return math.gcd(*self.coeffs) == 1

    def __str__(self):
        names = "xyz"
        terms = []
        for e, c in self.as_dict().items():
            mono = "*".join(f"{names[i]}^{k}" if k > 1 else names[i] for i, k in enumerate(e) if k)
            terms.append(f"{c}*{mono}")
        return " + ".join(terms).replace("+ -", "- ")

    # -- cached elimination data for smoothness tests ------------------------

    @cached_property
    def _partials(self) -> tuple[dict, dict, dict]:
        out = []
        for i in range(3):
            d = {}
            for e, c in zip(MONOMIALS, self.coeffs):
                if c and e[i]:
                    f = list(e)
                    f[i] -= 1
                    d[tuple(f)] = d.get(tuple(f), 0) + c * e[i]
            out.append(d)
        return tuple(out)

    @cached_property
    def _affine_resultants(self) -> tuple[list[int], list[int], list[int]]:
        """Pairwise formal resultants in y of the partials on the chart z = 1.

        Each is a polynomial in x vanishing at the x-coordinate of every common
        zero of the two partials (over any field the coefficients map to).
        """
        as_y = []
        for d in self._partials:
            coeffs = [[0] * 3 for _ in range(3)]  # coeffs[k] = poly in x for y^k
            for (e0, e1, _), c in d.items():
                coeffs[e1][e0] += c
            as_y.append([arith.zpoly_trim(a) for a in coeffs])
        return tuple(_formal_quadratic_resultant(as_y[i], as_y[j]) for i, j in ((0, 1), (0, 2), (1, 2)))

    @cached_property
    def _infinity_partials(self) -> tuple[list[int], list[int], list[int]]:
        """Partials restricted to [t : 1 : 0], as polynomials in t."""
        out = []
        for d in self._partials:
            poly = [0, 0, 0]
            for (e0, _, e2), c in d.items():
                if e2 == 0:
                    poly[e0] += c
            out.append(arith.zpoly_trim(poly))
        return tuple(out)


def _formal_quadratic_resultant(a, b):
    """Res_y of a2 y^2 + a1 y + a0 and b2 y^2 + b1 y + b0 with formal degree 2."""
    a0, a1, a2 = a
    b0, b1, b2 = b
    t1 = zpoly_sub(zpoly_mul(a2, b0), zpoly_mul(a0, b2))
    t2 = zpoly_sub(zpoly_mul(a2, b1), zpoly_mul(a1, b2))
    t3 = zpoly_sub(zpoly_mul(a1, b0), zpoly_mul(a0, b1))
    return zpoly_sub(zpoly_mul(t1, t1), zpoly_mul(t2, t3))


def _coords(P: Point) -> tuple:
    return P.coords if isinstance(P, ProjPoint) else tuple(P)


def _field(P: Point, p: int | None) -> int | None:
    if p is not None:
        return p
    return P.p if isinstance(P, ProjPoint) else None


def evaluate(F: CubicForm, P: Point, p: int | None = None):
    """F at the given representative; reduced mod p for F_p points."""
    v = _eval_cubic(F.coeffs, *_coords(P))
    q = _field(P, p)
    return v % q if q else v


def gradient(F: CubicForm, P: Point, p: int | None = None) -> tuple:
    g = _grad_cubic(F.coeffs, *_coords(P))
    q = _field(P, p)
    return tuple(c % q for c in g) if q else g


def is_singular_at(F: CubicForm, P: Point, p: int | None = None) -> bool:
    return evaluate(F, P, p) == 0 and not any(gradient(F, P, p))


def coefficient_norm(F: CubicForm) -> int:
    return max(abs(c) for c in F.coeffs)


def reduce_point_mod_p(P: ProjPoint, p: int) -> ProjPoint:
    if P.p is not None:
        raise CurveError("point is already over a finite field")
    return normalize_point(P.coords, p)


# -- points over F_p ----------------------------------------------------------


def _chart_cubic_coeffs(c: Sequence[int], x: int, p: int) -> tuple[int, int, int, int]:
    """Coefficients (ascending in y) of F(x, y, 1) mod p."""
    a0 = ((c[0] * x + c[2]) * x + c[5]) * x + c[9]
    a1 = (c[1] * x + c[4]) * x + c[8]
    a2 = c[3] * x + c[7]
    return a0 % p, a1 % p, a2 % p, c[6] % p


def list_points_fp(F: CubicForm, p: int) -> list[ProjPoint]:
    """Every point of the reduced curve in P^2(F_p), sorted (exhaustive)."""
    c = [x % p for x in F.coeffs]
    if not any(c):
        raise CurveError(f"form vanishes identically mod {p}")
    pts = []
    if p <= 20000:
        ys = np.arange(p, dtype=np.int64)
        for x in range(p):
            a0, a1, a2, a3 = _chart_cubic_coeffs(c, x, p)
            vals = (((a3 * ys + a2) % p * ys + a1) % p * ys + a0) % p
            for y in np.flatnonzero(vals == 0).tolist():
                pts.append((x, y, 1))
    else:
        for x in range(p):
            poly = _chart_cubic_coeffs(c, x, p)
            if not any(poly):
                pts.extend((x, y, 1) for y in range(p))
                continue
            pts.extend((x, y, 1) for y in sorted(set(arith.poly_roots_mod_p(poly, p))))
    at_inf = (c[6], c[3], c[1], c[0])  # F(t, 1, 0) ascending in t
    if any(at_inf):
        pts.extend((t, 1, 0) for t in sorted(set(arith.poly_roots_mod_p(at_inf, p))))
    else:
        pts.extend((t, 1, 0) for t in range(p))
    if c[0] == 0:
        pts.append((1, 0, 0))
    return sorted(normalize_point(P, p) for P in pts)


def singular_points_mod_p(F: CubicForm, p: int) -> list[ProjPoint]:
    """All F_p-rational singular points of the reduced curve (exhaustive)."""
    return [P for P in list_points_fp(F, p) if not any(gradient(F, P))]


def _smooth_over_closure(F: CubicForm, p: int) -> bool:
    """True only if F mod p provably has no singular point over the algebraic closure.

    Every singular point is a common zero of the three partials. On the chart
    z = 1 their x-coordinates are roots of each pairwise resultant; a constant
    gcd therefore rules them out. The line z = 0 is handled separately.
    A False result is inconclusive.
    """
    res = [pmod(r, p) for r in F._affine_resultants]
    nonzero = [r for r in res if r]
    if not nonzero:
        return False
    g = reduce(lambda f, h: pgcd(f, h, p), nonzero[1:], pgcd(nonzero[0], nonzero[0], p))
    if len(g) != 1:
        return False
    inf = [pmod(r, p) for r in F._infinity_partials]
    nonzero = [r for r in inf if r]
    if not nonzero:
        return False
    g = reduce(lambda f, h: pgcd(f, h, p), nonzero[1:], pgcd(nonzero[0], nonzero[0], p))
    if len(g) != 1:
        return False
    return any(d.get((2, 0, 0), 0) % p for d in F._partials)


def _hasse_ok(n: int, p: int) -> bool:
    return (n - p - 1) ** 2 <= 4 * p


def bad_reduction_certificate(F: CubicForm, p: int) -> dict | None:
    """None when F has good reduction at p, else a description of the evidence.

    Decision procedure: (1) elimination certificate of smoothness; (2) search of
    F_p-rational singular points; (3) if the reduced curve is singular but has
    no rational singular point it is a rational line plus a conic meeting in
    two conjugate points (2p + 2 points) or a triangle of conjugate lines
    (no points), and both violate the Hasse interval.
    """
    if _smooth_over_closure(F, p):
        return None
    pts = list_points_fp(F, p)
    sing = [P for P in pts if not any(gradient(F, P))]
    if sing:
        return {"kind": "singular_point", "point": sing[0]}
    if _hasse_ok(len(pts), p):
        return None
    return {"kind": "conjugate_singularities", "n_p": len(pts)}


def good_reduction(F: CubicForm, p: int) -> bool:
    return bad_reduction_certificate(F, p) is None


def count_points_fp(F: CubicForm, p: int) -> int:
    """n_p = #C(F_p) at a prime of good reduction."""
    if not good_reduction(F, p):
        raise BadReductionError(f"{p} is a prime of bad reduction")
    return len(list_points_fp(F, p))


@dataclass(frozen=True)
class ReductionProfile:
    curve: CubicForm
    prime_bound: int
    bad_primes: tuple[int, ...]
    certificates: dict = field(compare=False, repr=False)

    @property
    def conductor_radical(self) -> int:
        """Pi_C restricted to the scanned range (a certified factor of the full product)."""
        return math.prod(self.bad_primes)

    @property
    def log_radical(self) -> float:
        return math.log(self.conductor_radical)


def reduction_profile(F: CubicForm, prime_bound: int = 10_000) -> ReductionProfile:
    bad, certs = [], {}
    for p in primes_up_to(prime_bound):
        cert = bad_reduction_certificate(F, p)
        if cert is not None:
            bad.append(p)
            certs[p] = cert
    return ReductionProfile(F, prime_bound, tuple(bad), certs)


# -- smoothness over Q --------------------------------------------------------


@dataclass(frozen=True)
class SmoothCertified:
    prime: int


@dataclass(frozen=True)
class SingularCertified:
    point: ProjPoint


@dataclass(frozen=True)
class Undetermined:
    primes_tried: tuple[int, ...]


Verdict = Union[SmoothCertified, SingularCertified, Undetermined]


def _small_points(bound: int):
    yield from (ProjPoint((1, 0, 0)), ProjPoint((0, 1, 0)), ProjPoint((0, 0, 1)))
    rng = range(-bound, bound + 1)
    pts = {normalize_point(t) for t in itertools.product(rng, repeat=3) if any(t) and math.gcd(*t) == 1}
    yield from sorted(pts, key=lambda P: (height(P), P.coords))


def smoothness_verdict(F: CubicForm, prime_budget: int = 30, height_budget: int = 12) -> Verdict:
    """Certify smoothness by good reduction at a prime >= 5, or find a rational singular point.

    Good reduction at any prime certifies a nonzero discriminant. Witness
    primes start at 5 so that the characteristic never divides the degree.
    """
    tried = []
    p = 4
    for _ in range(prime_budget):
        p = arith.next_prime(p)
        tried.append(p)
        if _smooth_over_closure(F, p):
            return SmoothCertified(p)
    for P in _small_points(height_budget):
        if is_singular_at(F, P):
            return SingularCertified(P)
    return Undetermined(tuple(tried))


# -- rational points of bounded height ----------------------------------------


def substitute_linear(F: CubicForm, T: Sequence[Sequence[int]]) -> tuple[int, ...]:
    """Coefficients of y -> F(T y) (not normalized)."""
    out = dict.fromkeys(MONOMIALS, 0)
    rows = [{(1, 0, 0): r[0], (0, 1, 0): r[1], (0, 0, 1): r[2]} for r in T]

    def mul(a, b):
        d = {}
        for ea, ca in a.items():
            for eb, cb in b.items():
                e = (ea[0] + eb[0], ea[1] + eb[1], ea[2] + eb[2])
                d[e] = d.get(e, 0) + ca * cb
        return d

    for e, c in zip(MONOMIALS, F.coeffs):
        if not c:
            continue
        term = {(0, 0, 0): c}
        for i, k in enumerate(e):
            for _ in range(k):
                term = mul(term, rows[i])
        for m, v in term.items():
            out[m] += v
    return tuple(out[m] for m in MONOMIALS)


def _solver_setup(F: CubicForm):
    """Pick the solved coordinate k and a unimodular T with a nonzero y_k^3 term in F(T y)."""
    cube = {0: F.coeffs[0], 1: F.coeffs[6], 2: F.coeffs[9]}
    for k in (2, 0, 1):
        if cube[k]:
            return k, None
    k = 2
    for c0, c1 in sorted(itertools.product(range(-3, 4), repeat=2), key=lambda t: (abs(t[0]) + abs(t[1]), t)):
        if _eval_cubic(F.coeffs, c0, c1, 1):
            T = ((1, 0, c0), (0, 1, c1), (0, 0, 1))
            return k, T
    raise CurveError("cannot find a coordinate change with nonzero cube term")  # pragma: no cover


def _int64_safe(G: Sequence[int], bound: int) -> bool:
    return 10 * max(abs(c) for c in G) * (bound + 2) ** 3 < 2**62


def _real_cubic_roots(a, b, c) -> np.ndarray:
    """Approximate real roots of t^3 + a t^2 + b t + c, shape (n, 4), NaN padded.

    Both the trigonometric and the Cardano branch are kept wherever they are
    defined so near-degenerate discriminants never drop a root; two Newton
    steps polish the result. Callers confirm candidates exactly.
    """
    a, b, c = (np.asarray(x, dtype=float) for x in (a, b, c))
    shift = a / 3
    P = b - a * a / 3
    Q = 2 * a**3 / 27 - a * b / 3 + c
    out = np.full((len(a), 4), np.nan)
    with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
        neg = P < 0
        r = np.where(neg, 2 * np.sqrt(np.where(neg, -P, 0) / 3), 0.0)
        arg = np.where(neg, 3 * Q / np.where(neg, P * r, 1.0), 0.0)
        theta = np.arccos(np.clip(arg, -1, 1)) / 3
        for kk in range(3):
            out[:, kk] = np.where(neg, r * np.cos(theta - 2 * np.pi * kk / 3), np.nan)
        disc = Q * Q / 4 + P**3 / 27
        sq = np.sqrt(np.where(disc >= 0, disc, np.nan))
        out[:, 3] = np.cbrt(-Q / 2 + sq) + np.cbrt(-Q / 2 - sq)
        out -= shift[:, None]
        for _ in range(2):
            f = ((out + a[:, None]) * out + b[:, None]) * out + c[:, None]
            df = (3 * out + 2 * a[:, None]) * out + b[:, None]
            step = np.where(np.abs(df) > 0, f / np.where(df == 0, 1.0, df), 0.0)
            out = np.where(np.isfinite(step) & (np.abs(step) < 1), out - step, out)
    return out


def enumerate_rational_points(F: CubicForm, B: int) -> list[ProjPoint]:
    """All rational points of height <= B, sorted; len() is N(B).

    Sweeps two coordinates over [-B, B] and solves the remaining cubic with a
    vectorized closed form, confirming every candidate exactly.
    """
    if B < 1:
        raise CurveError("height bound must be >= 1")
    k, T = _solver_setup(F)
    if T is None:
        G, bound = F.coeffs, B
    else:
        G = substitute_linear(F, T)
        bound = B * (1 + max(abs(T[0][2]), abs(T[1][2])))
    i, j = [t for t in range(3) if t != k]
    by_deg = [[] for _ in range(4)]  # (coef, e_i, e_j) grouped by e_k
    for e, c in zip(MONOMIALS, G):
        if c:
            by_deg[e[k]].append((c, e[i], e[j]))
    c3 = sum(c for c, _, _ in by_deg[3])
    dtype = np.int64 if _int64_safe(G, bound) else object
    vs = np.arange(-bound, bound + 1, dtype=np.int64).astype(dtype)
    found = set()
    for u in range(0, bound + 1):
        cs = []
        for d in range(3):
            acc = np.zeros(len(vs), dtype=dtype)
            for c, ei, ej in by_deg[d]:
                acc = acc + c * (u**ei) * vs**ej
            cs.append(acc)
        roots = _real_cubic_roots(cs[2] / c3, cs[1] / c3, cs[0] / c3)
        keep = np.isfinite(roots) & (np.abs(roots) <= bound + 1)
        rows, cols = np.nonzero(keep)
        if len(rows) == 0:
            continue
        base = np.rint(roots[rows, cols]).astype(np.int64)
        cand_rows = np.concatenate([rows, rows, rows])
        cand_t = np.concatenate([base - 1, base, base + 1]).astype(dtype)
        val = c3 * cand_t**3
        for d in range(3):
            val = val + cs[d][cand_rows] * cand_t**d
        hit = np.flatnonzero(val == 0)
        for h in hit.tolist():
            y = [0, 0, 0]
            y[i], y[j], y[k] = u, int(vs[cand_rows[h]]), int(cand_t[h])
            if not any(y) or math.gcd(*y) != 1:
                continue
            if T is not None:
                y = [sum(T[r][s] * y[s] for s in range(3)) for r in range(3)]
            if max(abs(c) for c in y) <= B:
                found.add(normalize_point(y))
    return sorted(found)
