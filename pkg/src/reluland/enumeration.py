"""Finite enumeration of critical realization functions for width-1 networks.

For a continuous piecewise-polynomial target on [a, b] the zeros of the
generalized gradient realize only finitely many functions, split into four
structural cases: constant, affine, single kink with positive inner weight
(flat left of the kink) and single kink with negative inner weight (flat
right of it).  The kink cases reduce to real roots of an explicit
polynomial in the normalized kink position q, assembled here coefficient-
exactly so that root isolation operates on a true polynomial.  A grid scan
of the defining residual serves as an independent cross-check oracle.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import (DegenerateEnumerationError, FinitenessError,
                     NonsmoothPointError)
from .landscape import CritClass, classify, grad, hessian_fd, risk
from .network import Params, Realization, canonical, l2_distance
from .polyalg import PiecewisePolynomial, Polynomial, reparametrize, roots_in
from .target import BenchmarkTarget, PolyTarget, Target

__all__ = [
    "KinkSolution",
    "CatalogEntry",
    "CriticalCatalog",
    "GridOracleReport",
    "enum_constant",
    "enum_affine",
    "enum_kink_increasing",
    "enum_kink_decreasing",
    "enumerate_all",
    "grid_oracle",
    "oracle_check",
]

RESIDUAL_TOL = 1e-9
VW_EXCLUSION_TOL = 1e-12
ROOT_TOL = 1e-12
DEDUP_DEFAULT = 1e-8


@dataclass(frozen=True)
class KinkSolution:
    """Normalized single-kink critical data: kink q in (0,1), flat-side
    level c, active-side slope vw != 0, and orientation of the inner
    weight ('increasing' = flat left of q, 'decreasing' = flat right)."""

    q: float
    c: float
    vw: float
    orientation: str
    residuals: tuple[float, float, float]


def _normalized01(t: PolyTarget) -> PiecewisePolynomial:
    a, b = t.domain
    pp = reparametrize(t.pp, b - a, a)
    bps = list(pp.breakpoints)
    bps[0], bps[-1] = 0.0, 1.0
    return PiecewisePolynomial(bps, pp.pieces, continuous=True)


def _reflect01(pp: PiecewisePolynomial) -> PiecewisePolynomial:
    out = reparametrize(pp, -1.0, 1.0)
    bps = list(out.breakpoints)
    bps[0], bps[-1] = 0.0, 1.0
    return PiecewisePolynomial(bps, out.pieces, continuous=True)


def enum_constant(t: Target) -> Realization:
    """The unique constant critical realization: the target's mean value."""
    a, b = t.domain
    mean = t.integral(a, b) / (b - a)
    return Realization(a, b, (), (0.0,), mean)


def enum_affine(t: Target) -> Realization:
    """The unique critical realization affine on the whole interval.

    Matching the zeroth and first moments of the target gives a 2x2 linear
    system for (slope, intercept) whose determinant -(b-a)^4/12 never
    vanishes.
    """
    a, b = t.domain
    m0 = b - a
    m1 = (b * b - a * a) / 2.0
    m2 = (b ** 3 - a ** 3) / 3.0
    f0 = t.integral(a, b)
    f1 = t.x_integral(a, b)
    det = m1 * m1 - m0 * m2  # = -(b-a)^4 / 12
    slope = (f0 * m1 - f1 * m0) / det
    intercept = (f1 * m1 - f0 * m2) / det
    return Realization(a, b, (), (slope,), slope * a + intercept)


def _kink_poly(f01: PiecewisePolynomial, j: int) -> Polynomial:
    """The defining polynomial D_j(q) on piece j of the normalized target:
    D(q) = (1-q)^2 * int_0^q f  -  2q * int_q^1 (q + 2 - 3x) f(x) dx,
    expanded coefficient-exactly in q."""
    x_lo = f01.breakpoints[j]
    piece = f01.pieces[j]
    C0 = f01.moment(0, 0.0, x_lo)
    C1 = f01.moment(1, 0.0, x_lo)
    T0 = f01.moment(0, 0.0, 1.0)
    T1 = f01.moment(1, 0.0, 1.0)
    anti0 = piece.antiderivative()
    anti1 = piece.shift_up(1).antiderivative()
    # int_0^q f and int_0^q x f as polynomials in q, valid on the piece
    p0 = anti0 + Polynomial([C0 - anti0(x_lo)])
    p1 = anti1 + Polynomial([C1 - anti1(x_lo)])
    int_q1 = Polynomial([T0]) - p0
    int_q1_x = Polynomial([T1]) - p1
    one_minus_q_sq = Polynomial([1.0, -2.0, 1.0])
    two_q = Polynomial([0.0, 2.0])
    inner = Polynomial([2.0, 1.0]) * int_q1 - int_q1_x.scale(3.0)
    return one_minus_q_sq * p0 - two_q * inner


def _vw_numerator(f01: PiecewisePolynomial, j: int) -> Polynomial:
    """q * (int_0^1 f - (1/q) int_0^q f) as a polynomial in q on piece j;
    its zeros are the kink positions with vanishing active-side slope."""
    x_lo = f01.breakpoints[j]
    piece = f01.pieces[j]
    C0 = f01.moment(0, 0.0, x_lo)
    T0 = f01.moment(0, 0.0, 1.0)
    anti0 = piece.antiderivative()
    p0 = anti0 + Polynomial([C0 - anti0(x_lo)])
    return Polynomial([0.0, T0]) - p0


def _deflate_linear(p: Polynomial, root: float, tol: float) -> Polynomial:
    """Divide p by (x - root) if the remainder is negligible, else return p."""
    quot: list[float] = []
    rem = 0.0
    for c in reversed(p.coeffs):
        rem = rem * root + c
        quot.append(rem)
    rem = quot.pop()
    if abs(rem) > tol:
        return p
    quot.reverse()
    return Polynomial(quot)


def _kink_roots(f01: PiecewisePolynomial):
    """Roots of the kink equation in (0,1), split into admissible kink
    positions and those excluded by a vanishing slope."""
    T0 = f01.moment(0, 0.0, 1.0)
    scale_ref = max(1.0, f01.coeff_scale())
    admissible: list[float] = []
    excluded: list[float] = []
    for j in range(len(f01.pieces)):
        D = _kink_poly(f01, j)
        if D.coeff_scale() <= 1e-11 * scale_ref:
            n = _vw_numerator(f01, j)
            if n.coeff_scale() <= 1e-11 * scale_ref:
                continue  # every q on the piece has vw = 0: nothing new
            raise DegenerateEnumerationError(
                f"kink equation vanished identically on piece {j} "
                "without the zero-slope degeneracy")
        # D always vanishes at q = 0 (first piece) and doubly at q = 1
        # (last piece); those structural roots are the constant/affine
        # cases in disguise and must not leak into the kink list.
        rem_tol = 1e-10 * max(D.coeff_scale(), 1.0)
        if f01.breakpoints[j] == 0.0:
            D = _deflate_linear(D, 0.0, rem_tol)
        if f01.breakpoints[j + 1] == 1.0:
            D = _deflate_linear(_deflate_linear(D, 1.0, rem_tol), 1.0, rem_tol)
        if D.is_zero or D.degree() == 0:
            continue
        lo = f01.breakpoints[j]
        hi = f01.breakpoints[j + 1]
        for q in roots_in(D, lo, hi, ROOT_TOL):
            if not (1e-9 < q < 1.0 - 1e-9):
                continue  # boundary kinks reduce to the affine/constant cases
            int0q = f01.moment(0, 0.0, q)
            if abs(T0 - int0q / q) <= VW_EXCLUSION_TOL:
                excluded.append(q)
            else:
                admissible.append(q)

    def dedup(xs):
        xs = sorted(xs)
        out = []
        for x in xs:
            if out and x - out[-1] < 1e-9:
                continue
            out.append(x)
        return out

    return dedup(admissible), dedup(excluded)


def _increasing_solution(f01: PiecewisePolynomial, q: float) -> KinkSolution:
    T0 = f01.moment(0, 0.0, 1.0)
    int0q = f01.moment(0, 0.0, q)
    c = int0q / q
    vw = 2.0 / (1.0 - q) ** 2 * (T0 - c)
    res1 = c * q - int0q
    res2 = (c * (1.0 - q) + vw * ((1.0 - q * q) / 2.0 - q * (1.0 - q))
            - f01.moment(0, q, 1.0))
    res3 = (c * (1.0 - q * q) / 2.0
            + vw * ((1.0 - q ** 3) / 3.0 - q * (1.0 - q * q) / 2.0)
            - f01.moment(1, q, 1.0))
    sol = KinkSolution(q=q, c=c, vw=vw, orientation="increasing",
                       residuals=(res1, res2, res3))
    _check_residuals(sol)
    return sol


def _check_residuals(sol: KinkSolution) -> None:
    worst = max(abs(r) for r in sol.residuals)
    if worst >= RESIDUAL_TOL:
        raise DegenerateEnumerationError(
            f"kink solution at q={sol.q!r} has residual {worst:g}")


def enum_kink_increasing(f01: PiecewisePolynomial) -> list[KinkSolution]:
    """All critical kinks with positive inner weight for a continuous
    piecewise-polynomial target normalized to [0, 1]."""
    roots, _ = _kink_roots(f01)
    return [_increasing_solution(f01, q) for q in roots]


def enum_kink_decreasing(f01: PiecewisePolynomial) -> list[KinkSolution]:
    """Negative-inner-weight kinks, via reflection to the increasing case:
    solve for the reflected target, then map q -> 1-q and negate the slope."""
    refl = _reflect01(f01)
    out = []
    for sol in enum_kink_increasing(refl):
        q = 1.0 - sol.q
        c = sol.c
        vw = -sol.vw
        res1 = c * (1.0 - q) - f01.moment(0, q, 1.0)
        res2 = c * q - vw * q * q / 2.0 - f01.moment(0, 0.0, q)
        res3 = c * q * q / 2.0 - vw * q ** 3 / 6.0 - f01.moment(1, 0.0, q)
        mapped = KinkSolution(q=q, c=c, vw=vw, orientation="decreasing",
                              residuals=(res1, res2, res3))
        _check_residuals(mapped)
        out.append(mapped)
    out.sort(key=lambda s: s.q)
    return out


@dataclass(frozen=True)
class CatalogEntry:
    kind: str  # constant | affine | kink_increasing | kink_decreasing
    realization: Realization
    theta: Params
    risk: float
    grad_norm: float
    crit_class: CritClass | None
    q: float | None = None
    c: float | None = None
    vw: float | None = None


@dataclass(frozen=True)
class CriticalCatalog:
    constant: Realization
    affine: Realization
    kinks: tuple[KinkSolution, ...]
    entries: tuple[CatalogEntry, ...]  # deduplicated, sorted by risk

    def min_risk(self) -> float:
        return self.entries[0].risk


def _lift_constant(t: Target, level: float) -> Params:
    a, b = t.domain
    # kink parked right of the domain: the neuron never activates
    return Params.from_parts([1.0], [-(b + 0.5 * (b - a))], [1.0], level)


def _lift_affine(t: Target, slope: float, intercept: float) -> Params:
    a, b = t.domain
    b0 = -a + (b - a)  # active on all of [a, b] with a one-width margin
    return Params.from_parts([1.0], [b0], [slope], intercept - slope * b0)


def _lift_kink(t: Target, sol: KinkSolution) -> Params:
    a, b = t.domain
    width = b - a
    kink = a + sol.q * width
    if sol.orientation == "increasing":
        return Params.from_parts([1.0], [-kink], [sol.vw / width], sol.c)
    return Params.from_parts([-1.0], [kink], [-sol.vw / width], sol.c)


def _entry(t: Target, kind: str, theta: Params,
           sol: KinkSolution | None = None) -> CatalogEntry:
    a, b = t.domain
    g = grad(theta, t)
    gn = g.max_norm()
    if gn >= RESIDUAL_TOL:
        raise DegenerateEnumerationError(
            f"{kind} catalog lift is not critical (|grad| = {gn:g})")
    # an interior-kink width-1 network has exactly one flat
    # reparameterization direction, (w, b, v) -> (lw, lb, v/l)
    expected_corank = 1 if sol is not None else None
    try:
        report = hessian_fd(theta, t, coords="all")
        label = classify(report, gn, expected_corank=expected_corank)
    except NonsmoothPointError:
        label = None
    return CatalogEntry(
        kind=kind,
        realization=canonical(theta, a, b),
        theta=theta,
        risk=risk(theta, t),
        grad_norm=gn,
        crit_class=label,
        q=None if sol is None else sol.q,
        c=None if sol is None else sol.c,
        vw=None if sol is None else sol.vw,
    )


def enumerate_all(t: Target, dedup: float = DEDUP_DEFAULT) -> CriticalCatalog:
    """Catalog of all critical realization functions for H = 1.

    Rejects the benchmark target: its middle piece is not polynomial, so
    the finiteness hypothesis behind the enumeration does not apply.
    """
    if isinstance(t, BenchmarkTarget):
        raise FinitenessError(
            "finiteness hypothesis violated: enumeration needs a piecewise-"
            "polynomial target")
    f01 = _normalized01(t)
    const_real = enum_constant(t)
    affine_real = enum_affine(t)
    inc = enum_kink_increasing(f01)
    dec = enum_kink_decreasing(f01)

    slope = affine_real.slopes[0]
    intercept = affine_real.offset - slope * t.domain[0]
    entries = [_entry(t, "constant", _lift_constant(t, const_real.offset)),
               _entry(t, "affine", _lift_affine(t, slope, intercept))]
    for sol in inc:
        entries.append(_entry(t, "kink_increasing", _lift_kink(t, sol), sol))
    for sol in dec:
        entries.append(_entry(t, "kink_decreasing", _lift_kink(t, sol), sol))

    kept: list[CatalogEntry] = []
    for e in entries:
        if all(l2_distance(e.realization, k.realization) >= dedup for k in kept):
            kept.append(e)
    kept.sort(key=lambda e: e.risk)
    return CriticalCatalog(constant=const_real, affine=affine_real,
                           kinks=tuple(inc + dec), entries=tuple(kept))


@dataclass(frozen=True)
class GridOracleReport:
    """Sign-change brackets of the kink residual D(q) on a uniform grid."""

    brackets: tuple[tuple[float, float], ...]
    degenerate_everywhere: bool
    resolution: float


def grid_oracle(t: Target, resolution: float = 1e-3,
                orientation: str = "increasing") -> GridOracleReport:
    """Independent bracketing oracle for the kink equation.

    Evaluates D(q) directly from target moments on a uniform grid of the
    given resolution and reports the sign-change brackets; makes no use of
    the coefficient-expansion route it is meant to check.
    """
    if resolution > 1e-3:
        raise ValueError("resolution must be <= 1e-3")
    if isinstance(t, BenchmarkTarget):
        raise FinitenessError("grid oracle needs a piecewise-polynomial target")
    f01 = _normalized01(t)
    if orientation == "decreasing":
        f01 = _reflect01(f01)
    elif orientation != "increasing":
        raise ValueError("orientation must be 'increasing' or 'decreasing'")

    def D(q: float) -> float:
        return ((1.0 - q) ** 2 * f01.moment(0, 0.0, q)
                - 2.0 * q * ((q + 2.0) * f01.moment(0, q, 1.0)
                             - 3.0 * f01.moment(1, q, 1.0)))

    m = int(round(1.0 / resolution))
    qs = [k / m for k in range(1, m)]
    vals = [D(q) for q in qs]
    scale = max(1.0, f01.coeff_scale())
    if max(abs(v) for v in vals) <= 1e-12 * scale:
        return GridOracleReport(brackets=(), degenerate_everywhere=True,
                                resolution=resolution)
    brackets = []
    for q0, q1, v0, v1 in zip(qs, qs[1:], vals, vals[1:]):
        if v0 == 0.0:
            continue
        if v0 * v1 < 0.0 or (v1 == 0.0 and q1 != qs[-1]):
            brackets.append((q0, q1))
    return GridOracleReport(brackets=tuple(brackets), degenerate_everywhere=False,
                            resolution=resolution)


def oracle_check(t: Target, resolution: float = 1e-3) -> bool:
    """True iff enumeration roots and grid-oracle brackets are in bijection
    (after zero-slope exclusions) for both kink orientations."""
    f01 = _normalized01(t)
    for orientation, pp in (("increasing", f01), ("decreasing", _reflect01(f01))):
        report = grid_oracle(t, resolution, orientation)
        if report.degenerate_everywhere:
            roots, excluded = [], []
            try:
                roots, excluded = _kink_roots(pp)
            except DegenerateEnumerationError:
                return False
            if roots:
                return False
            continue
        roots, excluded = _kink_roots(pp)
        candidates = sorted(roots + excluded)
        used = [False] * len(candidates)
        for lo, hi in report.brackets:
            inside = [i for i, q in enumerate(candidates)
                      if lo - resolution <= q <= hi + resolution and not used[i]]
            if not inside:
                return False
            used[inside[0]] = True
        def residual(x: float) -> float:
            return ((1.0 - x) ** 2 * pp.moment(0, 0.0, x)
                    - 2.0 * x * ((x + 2.0) * pp.moment(0, x, 1.0)
                                 - 3.0 * pp.moment(1, x, 1.0)))

        for i, q in enumerate(candidates):
            if used[i]:
                continue
            # an unbracketed root is fine only if the residual does not
            # change sign at scan resolution (tangential or boundary root)
            if q in roots and resolution < q < 1.0 - resolution:
                lo = max(q - resolution, 1e-9)
                hi = min(q + resolution, 1.0 - 1e-9)
                if residual(lo) * residual(hi) < 0.0:
                    return False
    return True
