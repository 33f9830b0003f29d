"""Global determinant method on the biprojective curve X_R.

Monomial bases of bidegree (a, b), the evaluation matrix at point pairs,
congruence blocks, p-adic divisibility certificates, the global factor T,
the auxiliary form and the Bezout count.
"""
from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field
from typing import Iterable, Iterator, NamedTuple, Sequence

import numpy as np

from . import arith
from .arith import ExactMatrix, det_exact, valuation
from .bounds import size_condition, parameter_choice
from .curve import (
    CubicForm,
    ProjPoint,
    count_points_fp,
    enumerate_rational_points,
    evaluate,
    good_reduction,
    list_points_fp,
    reduce_point_mod_p,
)
from .descent import ClassPartition, XPair, estimate_height_exponent, partition_classes
from .group import GroupContext, divide_point, scalar_mul, sub


class BasisDeficiencyError(RuntimeError):
    pass


class NonvanishingError(RuntimeError):
    pass


class BiMonomial(NamedTuple):
    ex: tuple[int, int, int]
    ey: tuple[int, int, int]

    @property
    def bidegree(self) -> tuple[int, int]:
        return sum(self.ex), sum(self.ey)

    def __call__(self, x: Sequence[int], y: Sequence[int]) -> int:
        v = 1
        for base, e in zip(itertools.chain(x, y), itertools.chain(self.ex, self.ey)):
            if e:
                v *= base**e
        return v

    def label(self) -> str:
        parts = [f"{v}{i}^{e}" if e > 1 else f"{v}{i}" for v, es in (("x", self.ex), ("y", self.ey)) for i, e in enumerate(es) if e]
        return "*".join(parts) or "1"


def monomials(d: int) -> list[tuple[int, int, int]]:
    """Exponent triples of degree d in lex-descending order."""
    return [(e0, e1, d - e0 - e1) for e0 in range(d, -1, -1) for e1 in range(d - e0, -1, -1)]


def all_bimonomials(a: int, b: int) -> list[BiMonomial]:
    if a < 0 or b < 0:
        raise ValueError("bidegree must be nonnegative")
    ys = monomials(b)
    return [BiMonomial(ex, ey) for ex in monomials(a) for ey in ys]


def expected_dimension(m: int, a: int, b: int) -> int:
    """dim of bidegree (a, b) forms modulo those vanishing on X, for a >= 1, b >= m^2."""
    return 3 * (m * m * a + b)


def _candidate_order(F: CubicForm, a: int, b: int) -> Iterator[BiMonomial]:
    """Bimonomials with monomials reduced modulo F first, then all the rest.

    If x_k^3 occurs in F, monomials with e_k <= 2 span forms modulo F in each
    factor, so the first group already spans the quotient on X.
    """
    cube = [F.coeffs[0], F.coeffs[6], F.coeffs[9]]
    k = next((i for i in range(3) if cube[i]), None)

    def std(d):
        return [e for e in monomials(d) if k is None or e[k] <= 2]

    first = [BiMonomial(ex, ey) for ex in std(a) for ey in std(b)]
    yield from first
    if k is not None:
        return
    seen = set(first)  # pragma: no cover - only for forms without cube terms
    for mono in all_bimonomials(a, b):  # pragma: no cover
        if mono not in seen:
            yield mono


# -- X(F_q) samples and modular evaluation ------------------------------------


def x_samples(F: CubicForm, R: ProjPoint, m: int, q: int) -> list[tuple[ProjPoint, ProjPoint]]:
    """(m*Q - (m-1)*R, Q) mod q for every Q in C(F_q), in point order."""
    ctx = GroupContext(F, reduce_point_mod_p(R, q), q, check=False)
    Rq = ctx.origin
    shift = scalar_mul(ctx, m - 1, Rq)
    out = []
    for Q in list_points_fp(F, q):
        P = Q if m == 1 else sub(ctx, scalar_mul(ctx, m, Q), shift)
        out.append((P, Q))
    return out


class _ModEvaluator:
    """Evaluates bimonomials at X(F_q) sample points, vectorized over samples."""

    def __init__(self, samples, a: int, b: int, q: int):
        self.q = q
        self.n = len(samples)
        coords = np.array([P.coords + Q.coords for P, Q in samples], dtype=np.int64).T  # 6 x n
        self.tables = []
        for v in range(6):
            deg = a if v < 3 else b
            t = np.ones((deg + 1, self.n), dtype=np.int64)
            for e in range(1, deg + 1):
                t[e] = t[e - 1] * coords[v] % q
            self.tables.append(t)

    def __call__(self, monos: Sequence[BiMonomial]) -> np.ndarray:
        exps = np.array([m.ex + m.ey for m in monos], dtype=np.int64).reshape(len(monos), 6)
        out = self.tables[0][exps[:, 0]]
        for v in range(1, 6):
            out = out * self.tables[v][exps[:, v]] % self.q
        return out


def _greedy_independent(cands: Iterable, evaluate, n: int, q: int, target: int, batch: int = 64) -> list:
    """First ``target`` candidates (in order) whose value vectors are independent over F_q.

    Accepted vectors are kept in reduced row echelon form. Residues live in
    int64; products of residue blocks go through float64 matrix multiplication,
    which stays exact while rank * q^2 < 2^53.
    """
    if target * q * q >= 2**53:
        raise ValueError(f"modulus {q} too large for exact float64 elimination at rank {target}")
    basis = np.zeros((0, n), dtype=np.int64)
    pivots: list[int] = []
    chosen = []
    it = iter(cands)
    while len(chosen) < target:
        items = list(itertools.islice(it, batch))
        if not items:
            break
        V = evaluate(items)
        if pivots:
            V = (V - (V[:, pivots].astype(float) @ basis.astype(float)).astype(np.int64)) % q
        new_piv: list[int] = []
        keep: list[int] = []
        for i in range(len(items)):
            nz = np.flatnonzero(V[i])
            if len(nz) == 0:
                continue
            pc = int(nz[0])
            V[i] = V[i] * pow(int(V[i, pc]), -1, q) % q
            V[i + 1 :] = (V[i + 1 :] - np.outer(V[i + 1 :, pc], V[i])) % q
            new_piv.append(pc)
            keep.append(i)
            chosen.append(items[i])
            if len(chosen) == target:
                break
        if not keep:
            continue
        N = V[keep]
        for j in range(len(keep) - 1, 0, -1):
            N[:j] = (N[:j] - np.outer(N[:j, new_piv[j]], N[j])) % q
        if pivots:
            basis = (basis - (basis[:, new_piv].astype(float) @ N.astype(float)).astype(np.int64)) % q
        basis = np.vstack([basis, N])
        pivots += new_piv
    return chosen


@dataclass(frozen=True)
class MonomialBasis:
    m: int
    a: int
    b: int
    monomials: tuple[BiMonomial, ...]
    q: int
    n_samples: int
    certified_rank: int
    samples: tuple = field(default=(), repr=False, compare=False)

    @property
    def s(self) -> int:
        return len(self.monomials)

    def labels(self) -> list[str]:
        return [mono.label() for mono in self.monomials]


def _next_good_prime(F: CubicForm, n: int) -> int:
    q = arith.next_prime(n)
    while not good_reduction(F, q):
        q = arith.next_prime(q)
    return q


def select_independent_monomials(
    F: CubicForm,
    R: ProjPoint,
    m: int,
    a: int,
    b: int,
    q: int | None = None,
    max_retries: int = 6,
    seed: int = 0,
) -> MonomialBasis:
    """Greedy basis of bidegree (a, b) forms modulo those vanishing on X_R.

    Independence of the value vectors at points of X(F_q) certifies
    independence of the cosets over Q. The modulus starts at the smallest good
    prime above 500 (or ``q``) and doubles until enough points exist and the
    rank reaches 3(m^2 a + b).
    """
    if a < 1 or b < m * m:
        raise ValueError("need a >= 1 and b >= m^2")
    s = expected_dimension(m, a, b)
    q = _next_good_prime(F, 500) if q is None else q
    if not good_reduction(F, q):
        raise ValueError(f"{q} is not a prime of good reduction")
    best = 0
    for _ in range(max_retries + 1):
        if q + 1 + 2 * math.isqrt(q) + 2 >= 2 * s:
            samples = x_samples(F, R, m, q)
            if len(samples) >= 2 * s:
                if seed:
                    random.Random(seed).shuffle(samples)
                samples = samples[: 2 * s]
                ev = _ModEvaluator(samples, a, b, q)
                chosen = _greedy_independent(_candidate_order(F, a, b), ev, len(samples), q, s)
                best = max(best, len(chosen))
                if len(chosen) == s:
                    return MonomialBasis(m, a, b, tuple(chosen), q, len(samples), s, tuple(samples))
        q = _next_good_prime(F, 2 * q)
    raise BasisDeficiencyError(f"certified only {best} of {s} independent monomials")


# -- evaluation matrix and blocks ---------------------------------------------


def build_matrix(pairs: Sequence[XPair], basis: MonomialBasis | Sequence[BiMonomial]) -> ExactMatrix:
    """Rows: pairs; columns: basis monomials at the normalized representatives."""
    monos = basis.monomials if isinstance(basis, MonomialBasis) else tuple(basis)
    if not pairs:
        raise ValueError("no pairs")
    a = max(sum(m.ex) for m in monos)
    b = max(sum(m.ey) for m in monos)
    rows = []
    for pr in pairs:
        pw = [[c**e for e in range(a + 1)] for c in pr.P.coords]
        pw += [[c**e for e in range(b + 1)] for c in pr.Q.coords]
        rows.append(
            [
                pw[0][m.ex[0]] * pw[1][m.ex[1]] * pw[2][m.ex[2]] * pw[3][m.ey[0]] * pw[4][m.ey[1]] * pw[5][m.ey[2]]
                for m in monos
            ]
        )
    return ExactMatrix(rows, [f"pair{j}" for j in range(len(pairs))], [m.label() for m in monos])


@dataclass(frozen=True)
class BlockPartition:
    p: int
    blocks: dict  # ProjPoint over F_p -> tuple of row indices

    def sizes(self) -> list[int]:
        return [len(v) for v in self.blocks.values()]


def congruence_blocks(pairs: Sequence[XPair], p: int, F: CubicForm | None = None) -> BlockPartition:
    """Group row indices by the reduction of Q_j mod p."""
    if F is not None and not good_reduction(F, p):
        raise ValueError(f"{p} is a prime of bad reduction")
    blocks: dict[ProjPoint, list[int]] = {}
    for j, pr in enumerate(pairs):
        blocks.setdefault(reduce_point_mod_p(pr.Q, p), []).append(j)
    return BlockPartition(p, {k: tuple(v) for k, v in sorted(blocks.items())})


def block_minor_certificate(Dstar, p: int, E: int | None = None, det: int | None = None) -> bool:
    """p^(E(E-1)/2) divides det of an E x E matrix whose rows share a reduction class."""
    E = len(Dstar.entries if isinstance(Dstar, ExactMatrix) else Dstar) if E is None else E
    need = E * (E - 1) // 2
    d = det_exact(Dstar) if det is None else det
    return d == 0 or valuation(d, p) >= need


@dataclass(frozen=True)
class DivisibilityCertificate:
    p: int
    N_p: int
    block_sizes: tuple[int, ...]
    verified: bool
    det_valuation: int | None  # None when det = 0
    n_p: int | None = None

    @property
    def comparison(self) -> float | None:
        """s^2 / (2 n_p), the leading term of the lower bound for N_p."""
        if not self.n_p:
            return None
        s = sum(self.block_sizes)
        return s * s / (2 * self.n_p)


def divisibility_certificate(Delta, blocks: BlockPartition, p: int, det: int | None = None, n_p: int | None = None):
    sizes = tuple(blocks.sizes())
    N_p = sum(k * (k - 1) // 2 for k in sizes)
    d = det_exact(Delta) if det is None else det
    v = None if d == 0 else valuation(d, p)
    return DivisibilityCertificate(p, N_p, sizes, d == 0 or v >= N_p, v, n_p)


def block_certificates(Delta: ExactMatrix, blocks: BlockPartition, column_sets: str = "first") -> list[dict]:
    """Minor divisibility checks for every block of size >= 2.

    ``column_sets``: "first" (first E columns) or "spread" (first, last and
    evenly spaced E columns).
    """
    out = []
    s = Delta.cols
    for Qstar, rows in blocks.blocks.items():
        E = len(rows)
        if E < 2:
            continue
        choices = [list(range(E))]
        if column_sets == "spread" and E < s:
            choices.append(list(range(s - E, s)))
            choices.append(sorted({round(i * (s - 1) / (E - 1)) for i in range(E)}) if E > 1 else [0])
        for cols in choices:
            if len(cols) != E:
                continue
            sub_m = Delta.submatrix(rows, cols)
            d = det_exact(sub_m)
            out.append(
                {
                    "Q_reduction": str(Qstar),
                    "rows": list(rows),
                    "cols": cols,
                    "E": E,
                    "required": E * (E - 1) // 2,
                    "valuation": None if d == 0 else valuation(d, blocks.p),
                    "ok": block_minor_certificate(sub_m, blocks.p, E, det=d),
                }
            )
    return out


@dataclass(frozen=True)
class GlobalFactor:
    T: int
    log_T: float
    certificates: tuple[DivisibilityCertificate, ...]
    status: str  # "divides", "vanishing determinant" or "FAILED"
    lower_bound_diagnostic: float | None = None


def global_factor(
    Delta: ExactMatrix,
    pairs: Sequence[XPair],
    prime_limit: int,
    F: CubicForm,
    B: float | None = None,
    det: int | None = None,
) -> GlobalFactor:
    """T = product over good p <= prime_limit of p^N_p, checked to divide det."""
    d = det_exact(Delta) if det is None else det
    certs = []
    T = 1
    for p in arith.primes_up_to(prime_limit):
        if not good_reduction(F, p):
            continue
        blocks = congruence_blocks(pairs, p)
        cert = divisibility_certificate(Delta, blocks, p, det=d, n_p=count_points_fp(F, p))
        certs.append(cert)
        T *= p**cert.N_p
    if d == 0:
        status = "vanishing determinant"
    else:
        status = "divides" if d % T == 0 else "FAILED"
    s = Delta.rows if isinstance(Delta, ExactMatrix) else len(Delta)
    diag = None
    if B is not None and s >= 2 and math.log(B) > 0:
        diag = s * s / 2 * math.log(s / math.log(B))
    return GlobalFactor(T, math.log(T), tuple(certs), status, diag)


# -- auxiliary form -----------------------------------------------------------


@dataclass(frozen=True)
class AuxiliaryForm:
    coefficients: tuple[int, ...]
    monomials: tuple[BiMonomial, ...]
    witness: tuple | None  # X(F_q) sample where G is nonzero
    q: int

    def __call__(self, x, y) -> int:
        return sum(c * m(x, y) for c, m in zip(self.coefficients, self.monomials) if c)

    def support(self) -> list[tuple[int, str]]:
        return [(c, m.label()) for c, m in zip(self.coefficients, self.monomials) if c]


def _nonvanishing_sample(c: Sequence[int], basis: MonomialBasis):
    q = basis.q
    terms = [(ci % q, mono) for ci, mono in zip(c, basis.monomials) if ci % q]
    for P, Q in basis.samples:
        xy = P.coords + Q.coords
        val = 0
        for ci, mono in terms:
            t = ci
            for base, e in zip(xy, mono.ex + mono.ey):
                if e:
                    t = t * pow(base, e, q) % q
            val += t
        if val % q:
            return (P, Q)
    return None


def find_auxiliary_form(pairs: Sequence[XPair], basis: MonomialBasis, M: ExactMatrix | None = None) -> AuxiliaryForm | None:
    """A primitive kernel vector of M read as a form G, or None if rank(M) = s.

    G vanishes at every pair and is certified nonzero on X by a sample point
    of X(F_q) where it does not vanish.
    """
    M = build_matrix(pairs, basis) if M is None else M
    if M.rows >= basis.s and arith.has_full_rank(M):
        return None
    rank, kernel = arith.rank_nullspace(M, max_vectors=1)
    if rank == basis.s:
        return None
    c = tuple(kernel[0])
    for pr in pairs:
        val = sum(ci * mono(pr.P.coords, pr.Q.coords) for ci, mono in zip(c, basis.monomials) if ci)
        if val != 0:
            raise AssertionError("kernel vector does not vanish on the pairs")  # pragma: no cover
    witness = _nonvanishing_sample(c, basis)
    if witness is None:
        raise NonvanishingError("auxiliary form vanishes at every X(F_q) sample")
    return AuxiliaryForm(c, basis.monomials, witness, basis.q)


def bezout_count_check(pairs: Sequence[XPair], G: AuxiliaryForm | None, a: int, b: int, m: int) -> bool:
    """Distinct pairs on X and on G = 0 number at most 3(m^2 a + b)."""
    distinct = {(pr.P, pr.Q) for pr in pairs}
    return len(distinct) <= expected_dimension(m, a, b)


# -- full pipeline ------------------------------------------------------------


@dataclass(frozen=True)
class ExperimentConfig:
    A: float | None = None  # None: ceiling of the empirical height exponent
    u: float = 1
    prime_limit: int | None = None  # None: s
    q: int | None = None
    a: int | None = None
    b: int | None = None
    seed: int = 0
    all_minors: bool = False


@dataclass
class ExperimentReport:
    curve: dict
    m: int
    B: int
    R: ProjPoint
    n_points: int
    n_classes: int
    class_method: str
    n_pairs: int
    pair_list: list
    A: float
    A_source: str
    u: float
    a: int
    b: int
    s: int
    basis: MonomialBasis
    rank: int | None
    det: int | None = None
    global_factor: GlobalFactor | None = None
    block_checks: list = field(default_factory=list)
    minors: list = field(default_factory=list)
    auxiliary: AuxiliaryForm | None = None
    auxiliary_recheck: bool | None = None
    bezout_bound: int = 0
    bezout_ok: bool | None = None
    vanishing_forced_by: str | None = None
    diagnostics: dict = field(default_factory=dict)
    errors: list = field(default_factory=list)

    def to_dict(self) -> dict:
        """JSON-ready view; big integers become decimal strings."""
        gf = self.global_factor
        aux = self.auxiliary
        return {
            "curve": self.curve,
            "m": self.m,
            "B": self.B,
            "R": str(self.R),
            "points": self.n_points,
            "classes": {"count": self.n_classes, "method": self.class_method},
            "pairs": self.n_pairs,
            "pair_list": [[str(pr.P), str(pr.Q)] for pr in self.pair_list],
            "A": {"value": self.A, "source": self.A_source},
            "u": self.u,
            "a": self.a,
            "b": self.b,
            "s": self.s,
            "basis": {
                "q": self.basis.q,
                "samples": self.basis.n_samples,
                "certified_rank": self.basis.certified_rank,
                "monomials": self.basis.labels(),
            },
            "rank": self.rank,
            "det": None if self.det is None else str(self.det),
            "global_factor": None
            if gf is None
            else {
                "T": str(gf.T),
                "log_T": gf.log_T,
                "status": gf.status,
                "per_prime": [
                    {"p": c.p, "N_p": c.N_p, "valuation": c.det_valuation, "verified": c.verified}
                    for c in gf.certificates
                ],
            },
            "block_checks": self.block_checks,
            "minors": self.minors,
            "auxiliary_form": None
            if aux is None
            else {
                "coefficients": [str(c) for c in aux.coefficients],
                "vanishes_at_pairs": self.auxiliary_recheck,
                "nonvanishing_witness": [str(aux.witness[0]), str(aux.witness[1])],
                "q": aux.q,
            },
            "bezout": {"bound": self.bezout_bound, "pairs": self.n_pairs, "ok": self.bezout_ok},
            "vanishing_forced_by": self.vanishing_forced_by,
            "diagnostics": self.diagnostics,
            "errors": self.errors,
        }


def _curve_record(F: CubicForm) -> dict:
    return {"name": F.name, "coefficients": [str(c) for c in F.coeffs]}


def collect_pairs(
    F: CubicForm, R: ProjPoint, m: int, points: Sequence[ProjPoint]
) -> tuple[list[XPair], ClassPartition]:
    """Pairs (P, Q) with P = m*Q in the group with origin R, for P in the class of R.

    Q is searched among ``points``; for m = 1 every point pairs with itself.
    """
    ctx = GroupContext(F, R)
    pts = sorted(set(points) | {R})
    classes = partition_classes(pts, m, ctx, pts)
    pairs = []
    for P in classes.class_of(R):
        Q = P if m == 1 else divide_point(ctx, m, P, pts)
        if Q is not None:
            pairs.append(XPair(P, Q, R, m))
    return pairs, classes


def run_experiment(
    F: CubicForm, R: ProjPoint | None, m: int, B: int, config: ExperimentConfig = ExperimentConfig()
) -> ExperimentReport:
    points = enumerate_rational_points(F, B)
    if R is None:
        if not points:
            raise ValueError("no rational point of height <= B to serve as R")
        R = points[0]
    if evaluate(F, R) != 0:
        raise ValueError(f"{R} is not on the curve")
    pairs, classes = collect_pairs(F, R, m, points)
    if config.A is not None:
        A, A_source = config.A, "config"
    elif pairs:
        A, A_source = estimate_height_exponent(pairs).ceiling(), "empirical height exponent, rounded up"
    else:
        A, A_source = 1, "default"
    choice = parameter_choice(B, m, A, config.u)
    a = config.a if config.a is not None else choice.a
    b = config.b if config.b is not None else choice.b
    basis = select_independent_monomials(F, R, m, a, b, q=config.q, seed=config.seed)
    s = basis.s
    report = ExperimentReport(
        curve=_curve_record(F),
        m=m,
        B=B,
        R=R,
        n_points=len(points),
        n_classes=len(classes),
        class_method=classes.method,
        n_pairs=len(pairs),
        pair_list=pairs,
        A=A,
        A_source=A_source,
        u=config.u,
        a=a,
        b=b,
        s=s,
        basis=basis,
        rank=None,
        bezout_bound=expected_dimension(m, a, b),
    )
    size_rhs, ok_size = size_condition(B, s, a, b, A, config.u)
    report.diagnostics["size_condition"] = {"lhs": s, "rhs": size_rhs, "holds": ok_size}
    report.diagnostics["A_sensitivity"] = [
        {"A": A2, "a": pc.a, "s": pc.s} for A2 in (A, A + 1, 2 * A) for pc in [parameter_choice(B, m, A2, config.u)]
    ]
    if not pairs:
        report.errors.append("no pairs in the class of R")
        return report
    M = build_matrix(pairs, basis)
    report.rank = arith.matrix_rank(M)
    if len(pairs) >= s:
        rows = list(range(s))
        Delta = M.submatrix(rows, list(range(s)))
        d = det_exact(Delta)
        report.det = d
        limit = config.prime_limit if config.prime_limit is not None else s
        gf = global_factor(Delta, pairs[:s], limit, F, B, det=d)
        report.global_factor = gf
        if gf.status == "FAILED":
            report.errors.append("global factor does not divide the determinant")
        for p in arith.primes_up_to(limit):
            if good_reduction(F, p):
                for chk in block_certificates(Delta, congruence_blocks(pairs[:s], p)):
                    report.block_checks.append({"p": p, **chk})
        report.diagnostics["det_size"] = {
            "lhs": None if d == 0 else math.log(abs(d)),
            "rhs": s * math.log(s) + s * (a + A * b) * math.log(B),
        }
        report.diagnostics["global_factor_size"] = {"log_T": gf.log_T, "reference": gf.lower_bound_diagnostic}
        if config.all_minors and len(pairs) - s <= 2:
            for idx in itertools.combinations(range(len(pairs)), s):
                dm = det_exact(M.submatrix(list(idx), list(range(s))))
                report.minors.append({"rows": list(idx), "vanishes": dm == 0})
    G = find_auxiliary_form(pairs, basis, M) if report.rank < s else None
    report.auxiliary = G
    if G is not None:
        report.auxiliary_recheck = all(G(pr.P.coords, pr.Q.coords) == 0 for pr in pairs)
        report.bezout_ok = bezout_count_check(pairs, G, a, b, m)
        report.vanishing_forced_by = "scarcity" if len(pairs) < s else "determinant"
    return report
