"""Target functions for the L2 regression risk on an interval [a, b].

Two kinds are supported and share one duck-typed interface:

* ``PolyTarget`` wraps a continuous piecewise polynomial; every integral
  is exact through ``polyalg``.
* ``BenchmarkTarget`` is the Lipschitz three-piece function on [0, 1]
  (affine / algebraic / quadratic across [0, alpha], (alpha, beta],
  (beta, 1]) rescaled to [a, b].  Its running integrals of f and x*f have
  closed forms; only the integral of f**2 needs quadrature.

Both carry cumulative antiderivatives ``cum_int`` / ``cum_xint`` so that
risk and gradient evaluations stay closed-form and fast.
"""

from __future__ import annotations

import json
import math
from typing import Union

from .errors import DomainError
from .polyalg import PiecewisePolynomial, Polynomial
from .quadrature import adaptive_gauss_kronrod, adaptive_simpson

__all__ = [
    "BenchmarkTarget",
    "PolyTarget",
    "Target",
    "target_eval",
    "target_int",
    "target_xint",
    "target_sq_int",
    "scale_target",
    "parse_target_json",
    "target_to_json",
]

DEFAULT_SQ_TOL = 1e-12


class PolyTarget:
    """Continuous piecewise-polynomial target."""

    def __init__(self, pp: PiecewisePolynomial):
        if not pp.continuous:
            pp = PiecewisePolynomial(pp.breakpoints, pp.pieces, continuous=True)
        self.pp = pp
        # prefix antiderivative values at breakpoints, for O(log n) cum_int
        self._anti0 = [p.antiderivative() for p in pp.pieces]
        self._anti1 = [p.shift_up(1).antiderivative() for p in pp.pieces]
        self._prefix0 = [0.0]
        self._prefix1 = [0.0]
        for i, (a0, a1) in enumerate(zip(self._anti0, self._anti1)):
            x0, x1 = pp.breakpoints[i], pp.breakpoints[i + 1]
            self._prefix0.append(self._prefix0[-1] + a0(x1) - a0(x0))
            self._prefix1.append(self._prefix1[-1] + a1(x1) - a1(x0))

    @property
    def kind(self) -> str:
        return "piecewise_poly"

    @property
    def domain(self) -> tuple[float, float]:
        return self.pp.lo, self.pp.hi

    def breakpoints(self) -> tuple[float, ...]:
        return self.pp.breakpoints

    def _check(self, x: float) -> None:
        if x < self.pp.lo or x > self.pp.hi:
            raise DomainError(f"{x!r} outside target domain")

    def eval(self, x: float) -> float:
        return self.pp.eval(x)

    def cum_int(self, x: float) -> float:
        self._check(x)
        i = self.pp._piece_index(x)
        return self._prefix0[i] + self._anti0[i](x) - self._anti0[i](self.pp.breakpoints[i])

    def cum_xint(self, x: float) -> float:
        self._check(x)
        i = self.pp._piece_index(x)
        return self._prefix1[i] + self._anti1[i](x) - self._anti1[i](self.pp.breakpoints[i])

    def integral(self, lo: float, hi: float) -> float:
        return self.cum_int(hi) - self.cum_int(lo)

    def x_integral(self, lo: float, hi: float) -> float:
        return self.cum_xint(hi) - self.cum_xint(lo)

    def sq_integral(self, lo: float, hi: float, tol: float = DEFAULT_SQ_TOL,
                    method: str = "exact") -> float:
        # square each piece and integrate; exact regardless of method
        self._check(lo)
        self._check(hi)
        if lo > hi:
            raise DomainError("lo > hi")
        total = 0.0
        for i, p in enumerate(self.pp.pieces):
            a = max(lo, self.pp.breakpoints[i])
            b = min(hi, self.pp.breakpoints[i + 1])
            if a < b:
                total += (p * p).definite(a, b)
        return total

    def scaled(self, c: float) -> "PolyTarget":
        return PolyTarget(self.pp.scale(c))

    def __repr__(self) -> str:
        return f"PolyTarget({self.pp!r})"


def _mid_eval(u: float) -> float:
    return (3.0 * u * u - 1.0) / (4.0 * math.sqrt(1.0 - u) * (1.0 + 3.0 * u) ** 1.5)


def _mid_anti(u: float) -> float:
    # derivative is _mid_eval
    return -u * math.sqrt(1.0 - u) / (4.0 * math.sqrt(1.0 + 3.0 * u))


def _mid_xanti(u: float) -> float:
    # derivative is u * _mid_eval(u)
    return -(3.0 * u * u + 2.0 * u + 1.0) * math.sqrt(1.0 - u) / (24.0 * math.sqrt(1.0 + 3.0 * u))


class BenchmarkTarget:
    """The three-piece Lipschitz benchmark target rescaled from [0,1] to [a,b].

    ``scale`` is an optional scalar multiplier applied pointwise; it keeps
    the closed forms intact under target rescaling.
    """

    def __init__(self, alpha: float, beta: float, a: float = 0.0, b: float = 1.0,
                 scale: float = 1.0):
        if not (0.0 < alpha < beta < 1.0):
            raise DomainError("need 0 < alpha < beta < 1")
        if not b > a:
            raise DomainError("need b > a")
        self.alpha = float(alpha)
        self.beta = float(beta)
        self.a = float(a)
        self.b = float(b)
        self.scale = float(scale)

        al, be = self.alpha, self.beta
        d_left = 4.0 * math.sqrt(1.0 - al) * (1.0 + 3.0 * al) ** 1.5
        d_right = 4.0 * (1.0 - be) ** 2.5 * (1.0 + 3.0 * be) ** 1.5
        # polynomial pieces in the normalized coordinate u
        self._left = Polynomial([(3.0 * al * al - 4.0 * al - 1.0) / d_left, 4.0 / d_left])
        self._right = Polynomial([
            (3.0 * be ** 4 + 10.0 * be * be - 1.0) / d_right,
            -(18.0 * be * be + 8.0 * be - 2.0) / d_right,
            12.0 * be / d_right,
        ])
        for u0, lhs, rhs in ((al, self._left(al), _mid_eval(al)),
                             (be, _mid_eval(be), self._right(be))):
            if abs(lhs - rhs) > 1e-12 * (1.0 + abs(lhs) + abs(rhs)):
                raise DomainError(f"target discontinuous at u={u0!r}")

        la0 = self._left.antiderivative()
        la1 = self._left.shift_up(1).antiderivative()
        ra0 = self._right.antiderivative()
        ra1 = self._right.shift_up(1).antiderivative()
        self._left_anti = (la0, la1)
        self._right_anti = (ra0, ra1)
        # running integrals of f and u*f up to alpha and beta (unscaled)
        self._F_alpha = la0(al) - la0(0.0)
        self._G_alpha = la1(al) - la1(0.0)
        self._F_beta = self._F_alpha + _mid_anti(be) - _mid_anti(al)
        self._G_beta = self._G_alpha + _mid_xanti(be) - _mid_xanti(al)
        self._sq_cache: dict[tuple[float, str], float] = {}

    @property
    def kind(self) -> str:
        return "benchmark"

    @property
    def domain(self) -> tuple[float, float]:
        return self.a, self.b

    def breakpoints(self) -> tuple[float, ...]:
        w = self.b - self.a
        return (self.a, self.a + self.alpha * w, self.a + self.beta * w, self.b)

    def _to_u(self, x: float) -> float:
        if x < self.a or x > self.b:
            raise DomainError(f"{x!r} outside target domain [{self.a!r}, {self.b!r}]")
        u = (x - self.a) / (self.b - self.a)
        return min(max(u, 0.0), 1.0)

    def eval_normalized(self, u: float) -> float:
        """Unscaled value of the normalized target at u in [0, 1]."""
        if u <= self.alpha:
            return self._left(u)
        if u <= self.beta:
            return _mid_eval(u)
        return self._right(u)

    def eval(self, x: float) -> float:
        return self.scale * self.eval_normalized(self._to_u(x))

    def _cum01(self, u: float) -> float:
        if u <= self.alpha:
            a0 = self._left_anti[0]
            return a0(u) - a0(0.0)
        if u <= self.beta:
            return self._F_alpha + _mid_anti(u) - _mid_anti(self.alpha)
        a0 = self._right_anti[0]
        return self._F_beta + a0(u) - a0(self.beta)

    def _cum01_x(self, u: float) -> float:
        if u <= self.alpha:
            a1 = self._left_anti[1]
            return a1(u) - a1(0.0)
        if u <= self.beta:
            return self._G_alpha + _mid_xanti(u) - _mid_xanti(self.alpha)
        a1 = self._right_anti[1]
        return self._G_beta + a1(u) - a1(self.beta)

    def cum_int(self, x: float) -> float:
        w = self.b - self.a
        return self.scale * w * self._cum01(self._to_u(x))

    def cum_xint(self, x: float) -> float:
        w = self.b - self.a
        u = self._to_u(x)
        return self.scale * (self.a * w * self._cum01(u) + w * w * self._cum01_x(u))

    def integral(self, lo: float, hi: float) -> float:
        return self.cum_int(hi) - self.cum_int(lo)

    def x_integral(self, lo: float, hi: float) -> float:
        return self.cum_xint(hi) - self.cum_xint(lo)

    def sq_integral(self, lo: float, hi: float, tol: float = DEFAULT_SQ_TOL,
                    method: str = "gauss_kronrod") -> float:
        """Integral of f**2 over [lo, hi] by adaptive quadrature.

        The squared middle piece is a rational function without a closed
        form here, so this is the one quadrature-backed quantity.  Results
        for the full domain are cached per (tol, method).
        """
        ulo, uhi = self._to_u(lo), self._to_u(hi)
        full = ulo == 0.0 and uhi == 1.0
        key = (tol, method)
        if full and key in self._sq_cache:
            return self._sq_cache[key]
        g = self.eval_normalized
        utol = tol / max(self.scale * self.scale * (self.b - self.a), 1e-300)
        if method == "gauss_kronrod":
            val01 = adaptive_gauss_kronrod(lambda u: g(u) ** 2, ulo, uhi, utol,
                                           breakpoints=(self.alpha, self.beta))
        elif method == "simpson":
            val01 = adaptive_simpson(lambda u: g(u) ** 2, ulo, uhi, utol,
                                     breakpoints=(self.alpha, self.beta))
        else:
            raise ValueError(f"unknown quadrature method {method!r}")
        out = self.scale * self.scale * (self.b - self.a) * val01
        if full:
            self._sq_cache[key] = out
        return out

    def lipschitz_bound(self) -> float:
        """Finite upper bound for |f'| over the three pieces (unscaled)."""
        al, be = self.alpha, self.beta
        left = 1.0 / (math.sqrt(1.0 - al) * (1.0 + 3.0 * al) ** 1.5)
        mid = 1.0 / ((1.0 - be) ** 1.5 * (1.0 + 3.0 * al) ** 2.5)
        right_dv = self._right.derivative()
        right = max(abs(right_dv(be)), abs(right_dv(1.0)))
        return max(left, mid, right)

    def scaled(self, c: float) -> "BenchmarkTarget":
        return BenchmarkTarget(self.alpha, self.beta, self.a, self.b, self.scale * c)

    def __repr__(self) -> str:
        return (f"BenchmarkTarget(alpha={self.alpha!r}, beta={self.beta!r}, "
                f"a={self.a!r}, b={self.b!r}, scale={self.scale!r})")


Target = Union[PolyTarget, BenchmarkTarget]


def target_eval(t: Target, x: float) -> float:
    return t.eval(x)


def target_int(t: Target, lo: float, hi: float) -> float:
    return t.integral(lo, hi)


def target_xint(t: Target, lo: float, hi: float) -> float:
    return t.x_integral(lo, hi)


def target_sq_int(t: Target, lo: float, hi: float, tol: float = DEFAULT_SQ_TOL) -> float:
    if tol <= 0:
        raise ValueError("tol must be positive")
    return t.sq_integral(lo, hi, tol)


def scale_target(t: Target, c: float) -> Target:
    if not math.isfinite(c):
        raise ValueError("scale factor must be finite")
    return t.scaled(c)


def parse_target_json(text: str) -> Target:
    """Parse a target spec document.

    Accepted shapes:
      {"kind": "piecewise_poly", "breakpoints": [...], "pieces": [[c0, c1, ...], ...]}
      {"kind": "benchmark", "alpha": ..., "beta": ..., "a": ..., "b": ..., "scale": ...}
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DomainError(f"malformed target JSON: {exc}") from exc
    if not isinstance(doc, dict) or "kind" not in doc:
        raise DomainError("target spec must be an object with a 'kind' field")
    kind = doc["kind"]
    if kind == "piecewise_poly":
        try:
            bps = [float(x) for x in doc["breakpoints"]]
            pieces = [Polynomial([float(c) for c in cs]) for cs in doc["pieces"]]
        except (KeyError, TypeError, ValueError) as exc:
            raise DomainError(f"bad piecewise_poly spec: {exc}") from exc
        if any(x >= y for x, y in zip(bps, bps[1:])):
            raise DomainError("breakpoints must be strictly increasing")
        try:
            return PolyTarget(PiecewisePolynomial(bps, pieces, continuous=True))
        except ValueError as exc:
            raise DomainError(str(exc)) from exc
    if kind == "benchmark":
        try:
            return BenchmarkTarget(float(doc["alpha"]), float(doc["beta"]),
                                   float(doc.get("a", 0.0)), float(doc.get("b", 1.0)),
                                   float(doc.get("scale", 1.0)))
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, DomainError):
                raise
            raise DomainError(f"bad benchmark spec: {exc}") from exc
    raise DomainError(f"unknown target kind {kind!r}")


def target_to_json(t: Target) -> str:
    if isinstance(t, PolyTarget):
        doc = {"kind": "piecewise_poly",
               "breakpoints": list(t.pp.breakpoints),
               "pieces": [list(p.coeffs) for p in t.pp.pieces]}
    else:
        doc = {"kind": "benchmark", "alpha": t.alpha, "beta": t.beta,
               "a": t.a, "b": t.b, "scale": t.scale}
    return json.dumps(doc)
