"""m-descent classes and points on the curve X_R of pairs (P, Q) with [P] = m[Q] - (m-1)[R]."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

from .curve import CubicForm, ProjPoint, height
from .group import GroupContext, check_divisor_relation, negate, scalar_mul, sub


@dataclass(frozen=True)
class XPair:
    P: ProjPoint
    Q: ProjPoint
    R: ProjPoint
    m: int

    def verify(self, F: CubicForm, origin: ProjPoint | None = None) -> bool:
        return check_divisor_relation(F, self.m, self.P, self.Q, self.R, origin)


@dataclass(frozen=True)
class ClassPartition:
    """Partition of a point set into (possibly refined) m-descent classes.

    Same-class decisions come from a bounded divisibility search, so the
    partition may be strictly finer than the true one.
    """

    m: int
    classes: tuple[tuple[ProjPoint, ...], ...]
    method: str = "heuristic: bounded search for m-division points"
    search_size: int = 0

    def __len__(self):
        return len(self.classes)

    def class_of(self, P: ProjPoint) -> tuple[ProjPoint, ...]:
        for cls in self.classes:
            if P in cls:
                return cls
        raise KeyError(P)

    def within_bound(self, rank: int) -> bool:
        """Class count against the 16 m^r ceiling (torsion at most 16)."""
        return len(self.classes) <= 16 * self.m**rank


def partition_classes(
    points: Sequence[ProjPoint], m: int, ctx: GroupContext, search: Sequence[ProjPoint]
) -> ClassPartition:
    if m < 1:
        raise ValueError("m must be a positive integer")
    points = list(dict.fromkeys(points))
    parent = list(range(len(points)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    if m == 1:
        parent = [0] * len(points)
    else:
        image = {scalar_mul(ctx, m, S) for S in search}
        image |= {negate(ctx, T) for T in image}  # P - Q = mS iff Q - P = m(-S)
        for i in range(len(points)):
            for j in range(i + 1, len(points)):
                if find(i) == find(j):
                    continue
                if sub(ctx, points[i], points[j]) in image:
                    parent[find(j)] = find(i)
    groups: dict[int, list[ProjPoint]] = {}
    for i, P in enumerate(points):
        groups.setdefault(find(i), []).append(P)
    classes = tuple(tuple(g) for g in groups.values())
    return ClassPartition(m, classes, search_size=len(search))


def build_x_points(
    F: CubicForm, R: ProjPoint, m: int, seeds: Sequence[ProjPoint], cap: int | None = None
) -> list[XPair]:
    """Pairs (m*Q - (m-1)*R, Q) for each seed Q, relation-checked and deduplicated."""
    ctx = GroupContext(F, R)
    pairs, seen = [], set()
    for Q in seeds:
        if cap is not None and len(pairs) >= cap:
            break
        P = sub(ctx, scalar_mul(ctx, m, Q), scalar_mul(ctx, m - 1, R))
        if (P, Q) in seen:
            continue
        pair = XPair(P, Q, R, m)
        if not check_divisor_relation(F, m, P, Q, R):
            raise AssertionError(f"relation check failed for {pair}")  # pragma: no cover
        seen.add((P, Q))
        pairs.append(pair)
    return pairs


@dataclass(frozen=True)
class HeightExponentEstimate:
    estimate: float
    table: tuple[tuple[int, int, int, float], ...] = field(repr=False)  # (H(P), H(Q), H(R), ratio)

    def ceiling(self) -> int:
        """Smallest positive integer >= the estimate."""
        return max(1, math.ceil(self.estimate - 1e-12))


def estimate_height_exponent(pairs: Sequence[XPair]) -> HeightExponentEstimate:
    """max over pairs of log H(Q) / log max(3, H(P), H(R)).

    An empirical lower estimate for an exponent A with H(Q) <= B^A.
    """
    if not pairs:
        raise ValueError("no pairs to estimate from")
    rows = []
    for pr in pairs:
        hp, hq, hr = height(pr.P), height(pr.Q), height(pr.R)
        ratio = math.log(hq) / math.log(max(3, hp, hr))
        rows.append((hp, hq, hr, ratio))
    return HeightExponentEstimate(max(r[3] for r in rows), tuple(rows))
