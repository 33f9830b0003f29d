"""Chord-tangent group law on a smooth plane cubic over Q or F_p."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .curve import (
    CubicForm,
    CurveError,
    ProjPoint,
    _eval_cubic,
    _grad_cubic,
    evaluate,
    good_reduction,
    normalize_point,
)


class GroupLawError(CurveError):
    pass


def _dot(u, v):
    return u[0] * v[0] + u[1] * v[1] + u[2] * v[2]


def _cross(u, v):
    return (u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0])


def _proportional(u, v, p):
    c = _cross(u, v)
    return all((x % p if p else x) == 0 for x in c)


def third_intersection(F: CubicForm, P: ProjPoint, Q: ProjPoint) -> ProjPoint:
    """Third point where the line PQ (the tangent when P == Q) meets the curve.

    On the line sP + tQ the cubic restricts to
    s^3 F(P) + s^2 t <grad F(P), Q> + s t^2 <grad F(Q), P> + t^3 F(Q);
    with both ends on the curve the remaining root is read off directly.
    """
    if P.p != Q.p:
        raise GroupLawError("points live over different fields")
    p = P.p
    c = F.coeffs
    x, y = P.coords, Q.coords
    if P != Q:
        beta = _dot(_grad_cubic(c, *x), y)
        gamma = _dot(_grad_cubic(c, *y), x)
        if p:
            beta, gamma = beta % p, gamma % p
        if beta == 0 and gamma == 0:
            raise GroupLawError(f"line through {P} and {Q} lies on the curve")
        raw = tuple(gamma * a - beta * b for a, b in zip(x, y))
        return normalize_point(raw, p)
    g = _grad_cubic(c, *x)
    if p:
        g = tuple(v % p for v in g)
    if not any(g):
        raise GroupLawError(f"{P} is a singular point")
    # second point T on the tangent line g . X = 0, not proportional to P
    for T in (_cross(g, x), _cross(g, (1, 0, 0)), _cross(g, (0, 1, 0)), _cross(g, (0, 0, 1))):
        if p:
            T = tuple(v % p for v in T)
        if any(T) and not _proportional(T, x, p):
            break
    else:  # pragma: no cover - the tangent line is 2-dimensional
        raise GroupLawError("degenerate tangent line")
    gamma = _dot(_grad_cubic(c, *T), x)
    delta = _eval_cubic(c, *T)
    if p:
        gamma, delta = gamma % p, delta % p
    if gamma == 0 and delta == 0:
        raise GroupLawError(f"tangent line at {P} lies on the curve")
    raw = tuple(delta * a - gamma * b for a, b in zip(x, T))
    return normalize_point(raw, p)


@dataclass(frozen=True)
class GroupContext:
    """A smooth cubic with a chosen origin; ``p`` selects F_p instead of Q."""

    form: CubicForm
    origin: ProjPoint
    p: int | None = None
    check: bool = True

    def __post_init__(self):
        if self.origin.p != self.p:
            object.__setattr__(self, "origin", normalize_point(self.origin.coords, self.p))
        if self.check:
            if evaluate(self.form, self.origin, self.p) != 0:
                raise GroupLawError(f"origin {self.origin} is not on the curve")
            if self.p is not None and not good_reduction(self.form, self.p):
                raise GroupLawError(f"{self.p} is a prime of bad reduction")

    @property
    def O(self) -> ProjPoint:
        return self.origin

    def point(self, coords) -> ProjPoint:
        P = normalize_point(coords, self.p)
        if evaluate(self.form, P) != 0:
            raise GroupLawError(f"{P} is not on the curve")
        return P

    def reduce(self, p: int) -> "GroupContext":
        if self.p is not None:
            raise GroupLawError("context is already over a finite field")
        return GroupContext(self.form, normalize_point(self.origin.coords, p), p)

    def with_origin(self, O: ProjPoint) -> "GroupContext":
        return GroupContext(self.form, O, self.p)


def add(ctx: GroupContext, P: ProjPoint, Q: ProjPoint) -> ProjPoint:
    """P + Q = O * (P * Q) where * is the third intersection."""
    F = ctx.form
    return third_intersection(F, ctx.origin, third_intersection(F, P, Q))


def negate(ctx: GroupContext, P: ProjPoint) -> ProjPoint:
    F = ctx.form
    return third_intersection(F, P, third_intersection(F, ctx.origin, ctx.origin))


def sub(ctx: GroupContext, P: ProjPoint, Q: ProjPoint) -> ProjPoint:
    return add(ctx, P, negate(ctx, Q))


def scalar_mul(ctx: GroupContext, m: int, P: ProjPoint) -> ProjPoint:
    """m-fold sum of P by double-and-add; negative m goes through negate."""
    if m < 0:
        return negate(ctx, scalar_mul(ctx, -m, P))
    result, base = ctx.origin, P
    while m:
        if m & 1:
            result = add(ctx, result, base)
        m >>= 1
        if m:
            base = add(ctx, base, base)
    return result


def check_divisor_relation(
    F: CubicForm, m: int, P: ProjPoint, Q: ProjPoint, R: ProjPoint, origin: ProjPoint | None = None
) -> bool:
    """Whether [P] = m[Q] - (m-1)[R] in the divisor class group.

    The coefficients sum to one, so the verdict does not depend on ``origin``
    (defaults to R).
    """
    if m < 1:
        raise ValueError("m must be a positive integer")
    ctx = GroupContext(F, origin if origin is not None else R, P.p, check=False)
    rhs = sub(ctx, scalar_mul(ctx, m, Q), scalar_mul(ctx, m - 1, R))
    return rhs == P


def divide_point(ctx: GroupContext, m: int, D: ProjPoint, candidates: Iterable[ProjPoint]) -> ProjPoint | None:
    """Some S among ``candidates`` with m*S = D, else None.

    This is a bounded search: None does not prove that D is not divisible by m.
    """
    for S in candidates:
        if scalar_mul(ctx, m, S) == D:
            return S
    return None
