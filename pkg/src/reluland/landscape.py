"""Risk, generalized gradient, Hessians and critical-point classification.

The exact risk and its generalized gradient never touch quadrature except
for the single scalar integral of f**2 (benchmark targets only): the
network part is piecewise linear, the targets supply closed-form running
integrals of f and x*f, so every gradient component is a finite closed
form.  The gradient formula is defined everywhere, including configurations
where the risk is not classically differentiable; it agrees with the
classical gradient wherever the latter exists.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from .errors import DomainError, NonsmoothPointError, NotCriticalError
from .network import Params
from .target import BenchmarkTarget, Target

__all__ = [
    "GradientVector",
    "HessianReport",
    "CritClass",
    "risk",
    "grad",
    "grad_theta",
    "risk_theta",
    "risk_smooth",
    "grad_smooth",
    "fd_gradient",
    "hessian_fd",
    "closed_hessian_M",
    "classify",
]

DEFAULT_RANK_TOL = 1e-6
DEFAULT_FD_STEP = 1e-5


@dataclass(frozen=True)
class GradientVector:
    """Generalized gradient, same layout as Params.theta."""

    values: tuple[float, ...]

    def max_norm(self) -> float:
        return max((abs(x) for x in self.values), default=0.0)

    def __iter__(self):
        return iter(self.values)

    def __len__(self):
        return len(self.values)

    def __getitem__(self, i):
        return self.values[i]


class _Geometry:
    """Piecewise-linear geometry of the network plus target antiderivatives.

    Supplies S0(l, r) = int_l^r (N - f) and S1(l, r) = int_l^r x (N - f)
    exactly, which is all the gradient and risk formulas need.
    """

    __slots__ = ("a", "b", "nodes", "vals", "slopes", "pre0", "pre1", "t")

    def __init__(self, theta: Sequence[float], H: int, t: Target):
        a, b = t.domain
        self.a = a
        self.b = b
        self.t = t
        c = theta[3 * H]
        base = 0.0
        events = []
        for j in range(H):
            w = theta[j]
            bj = theta[H + j]
            vw = theta[2 * H + j] * w
            if w == 0.0:
                continue
            q = -bj / w
            if w > 0.0:
                if q <= a:
                    base += vw
                elif q < b:
                    events.append(q)
            else:
                if q >= b:
                    base += vw
                elif q > a:
                    events.append(q)
        events.sort()
        nodes = [a]
        for q in events:
            if q > nodes[-1]:
                nodes.append(q)
        nodes.append(b)
        vals = []
        for x in nodes:
            acc = c
            for j in range(H):
                z = theta[H + j] + theta[j] * x
                if z > 0.0:
                    acc += theta[2 * H + j] * z
            vals.append(acc)
        slopes = []
        for i in range(len(nodes) - 1):
            slopes.append((vals[i + 1] - vals[i]) / (nodes[i + 1] - nodes[i]))
        pre0 = [0.0]
        pre1 = [0.0]
        for i in range(len(nodes) - 1):
            x0, x1 = nodes[i], nodes[i + 1]
            y0, y1 = vals[i], vals[i + 1]
            m = slopes[i]
            k = y0 - m * x0
            pre0.append(pre0[-1] + (x1 - x0) * (y0 + y1) * 0.5)
            pre1.append(pre1[-1] + m * (x1 ** 3 - x0 ** 3) / 3.0 + k * (x1 ** 2 - x0 ** 2) * 0.5)
        self.nodes = nodes
        self.vals = vals
        self.slopes = slopes
        self.pre0 = pre0
        self.pre1 = pre1

    def _locate(self, x: float) -> int:
        i = bisect.bisect_right(self.nodes, x) - 1
        return min(max(i, 0), len(self.slopes) - 1)

    def net_cum0(self, x: float) -> float:
        i = self._locate(x)
        x0 = self.nodes[i]
        y0 = self.vals[i]
        y = y0 + self.slopes[i] * (x - x0)
        return self.pre0[i] + (x - x0) * (y0 + y) * 0.5

    def net_cum1(self, x: float) -> float:
        i = self._locate(x)
        x0 = self.nodes[i]
        m = self.slopes[i]
        k = self.vals[i] - m * x0
        return self.pre1[i] + m * (x ** 3 - x0 ** 3) / 3.0 + k * (x ** 2 - x0 ** 2) * 0.5

    def s0(self, lo: float, hi: float) -> float:
        return (self.net_cum0(hi) - self.net_cum0(lo)) - (self.t.cum_int(hi) - self.t.cum_int(lo))

    def s1(self, lo: float, hi: float) -> float:
        return (self.net_cum1(hi) - self.net_cum1(lo)) - (self.t.cum_xint(hi) - self.t.cum_xint(lo))

    def net_sq_int(self) -> float:
        total = 0.0
        for i in range(len(self.slopes)):
            x0, x1 = self.nodes[i], self.nodes[i + 1]
            y0, y1 = self.vals[i], self.vals[i + 1]
            total += (x1 - x0) * (y0 * y0 + y0 * y1 + y1 * y1) / 3.0
        return total

    def net_f_int(self) -> float:
        total = 0.0
        F0 = self.t.cum_int(self.nodes[0])
        G0 = self.t.cum_xint(self.nodes[0])
        for i in range(len(self.slopes)):
            x0, x1 = self.nodes[i], self.nodes[i + 1]
            m = self.slopes[i]
            k = self.vals[i] - m * x0
            F1 = self.t.cum_int(x1)
            G1 = self.t.cum_xint(x1)
            total += m * (G1 - G0) + k * (F1 - F0)
            F0, G0 = F1, G1
        return total


def _active_interval(w: float, bj: float, a: float, b: float):
    """Intersection of {x : bj + w x > 0} with [a, b], or None."""
    if w > 0.0:
        q = -bj / w
        if q >= b:
            return None
        return (max(a, q), b)
    if w < 0.0:
        q = -bj / w
        if q <= a:
            return None
        return (a, min(b, q))
    return (a, b) if bj > 0.0 else None


def grad_theta(theta: Sequence[float], H: int, t: Target) -> list[float]:
    """Generalized gradient as a plain list (hot path for training loops)."""
    geo = _Geometry(theta, H, t)
    a, b = geo.a, geo.b
    g = [0.0] * (3 * H + 1)
    for j in range(H):
        w = theta[j]
        bj = theta[H + j]
        v = theta[2 * H + j]
        span = _active_interval(w, bj, a, b)
        if span is None:
            continue
        lo, hi = span
        s0 = geo.s0(lo, hi)
        s1 = geo.s1(lo, hi)
        g[j] = 2.0 * v * s1
        g[H + j] = 2.0 * v * s0
        g[2 * H + j] = 2.0 * (bj * s0 + w * s1)
    g[3 * H] = 2.0 * geo.s0(a, b)
    return g


def grad(p: Params, t: Target) -> GradientVector:
    """Generalized gradient of the risk at p.

    Componentwise: 2 v_j * int_{I_j} x (N - f), 2 v_j * int_{I_j} (N - f),
    2 * int max(b_j + w_j x, 0)(N - f), and 2 * int (N - f), with
    I_j = {x in [a,b] : b_j + w_j x > 0}.  Defined for every theta.
    """
    return GradientVector(tuple(grad_theta(p.theta, p.H, t)))


def risk_theta(theta: Sequence[float], H: int, t: Target,
               tol: float = 1e-12, method: str = "gauss_kronrod") -> float:
    geo = _Geometry(theta, H, t)
    val = geo.net_sq_int() - 2.0 * geo.net_f_int() + t.sq_integral(geo.a, geo.b, tol, method)
    return max(val, 0.0)


def risk(p: Params, t: Target, tol: float = 1e-12, method: str = "gauss_kronrod") -> float:
    """Exact L2 risk; the network and cross terms are closed-form, the
    f**2 term is exact for polynomial targets and quadrature otherwise."""
    return risk_theta(p.theta, p.H, t, tol, method)


# ---------------------------------------------------------------------------
# smoothed-activation risk and gradient
# ---------------------------------------------------------------------------

def _smooth_breakpoints(theta, H, t):
    a, b = t.domain
    pts = list(t.breakpoints())
    for j in range(H):
        w = theta[j]
        if w != 0.0:
            q = -theta[H + j] / w
            if a < q < b:
                pts.append(q)
    return pts


def risk_smooth(p: Params, t: Target, r: int, tol: float = 1e-10) -> float:
    """Risk with the ReLU replaced by the sharpness-r softplus surrogate."""
    if r < 1:
        raise ValueError("r must be >= 1")
    from .network import realize_smooth
    from .quadrature import adaptive_simpson

    a, b = t.domain

    def integrand(x: float) -> float:
        d = realize_smooth(p, x, r) - t.eval(x)
        return d * d

    return adaptive_simpson(integrand, a, b, tol,
                            breakpoints=_smooth_breakpoints(p.theta, p.H, t),
                            max_depth=55)


def grad_smooth(p: Params, t: Target, r: int, tol: float = 1e-10) -> GradientVector:
    """Gradient of the smoothed risk (chain rule through the C1 activation),
    integrated adaptively with a shared vector integrand."""
    if r < 1:
        raise ValueError("r must be >= 1")
    from .network import SmoothActivation
    from .quadrature import adaptive_simpson_vec

    act = SmoothActivation(r)
    H = p.H
    th = p.theta
    a, b = t.domain
    dim = 3 * H + 1

    def integrand(x: float) -> list[float]:
        acts = [act(th[H + j] + th[j] * x) for j in range(H)]
        ders = [act.deriv(th[H + j] + th[j] * x) for j in range(H)]
        net = th[3 * H] + sum(th[2 * H + j] * acts[j] for j in range(H))
        d = net - t.eval(x)
        out = [0.0] * dim
        for j in range(H):
            vd = th[2 * H + j] * ders[j]
            out[j] = 2.0 * vd * x * d
            out[H + j] = 2.0 * vd * d
            out[2 * H + j] = 2.0 * acts[j] * d
        out[3 * H] = 2.0 * d
        return out

    vals = adaptive_simpson_vec(integrand, a, b, dim, tol,
                                breakpoints=_smooth_breakpoints(th, H, t))
    return GradientVector(tuple(vals))


# ---------------------------------------------------------------------------
# Hessians
# ---------------------------------------------------------------------------

class CritClass(Enum):
    LOCAL_MIN = "local_min"
    LOCAL_MAX = "local_max"
    SADDLE = "saddle"
    DEGENERATE = "degenerate"


@dataclass(frozen=True)
class HessianReport:
    """Symmetric Hessian block with spectrum and numerical rank."""

    matrix: tuple[tuple[float, ...], ...]
    eigenvalues: tuple[float, ...]
    numerical_rank: int
    rank_tol: float

    @property
    def min_eigenvalue(self) -> float:
        return self.eigenvalues[0]

    @property
    def max_abs_eigenvalue(self) -> float:
        return max(abs(self.eigenvalues[0]), abs(self.eigenvalues[-1]))

    def to_json_dict(self) -> dict:
        return {
            "matrix": [list(row) for row in self.matrix],
            "eigenvalues": list(self.eigenvalues),
            "numerical_rank": self.numerical_rank,
            "rank_tol": self.rank_tol,
        }


def _report_from_matrix(mat: np.ndarray, rank_tol: float) -> HessianReport:
    sym = 0.5 * (mat + mat.T)
    eig = np.linalg.eigvalsh(sym)
    lam_max = float(np.max(np.abs(eig))) if eig.size else 0.0
    rank = int(np.sum(np.abs(eig) > rank_tol * lam_max)) if lam_max > 0.0 else 0
    return HessianReport(
        matrix=tuple(tuple(float(x) for x in row) for row in sym),
        eigenvalues=tuple(float(x) for x in eig),
        numerical_rank=rank,
        rank_tol=rank_tol,
    )


def _coord_indices(H: int, coords: str) -> list[int]:
    if coords == "all":
        return list(range(3 * H + 1))
    if coords == "restricted4":
        return [0, H, 2 * H, 3 * H]
    raise ValueError("coords must be 'all' or 'restricted4'")


def check_differentiable(p: Params, t: Target, margin: float = 0.0) -> None:
    """Raise NonsmoothPointError unless no kink sits on a domain endpoint
    (with the given safety margin) and no neuron has w = b = 0."""
    a, b = t.domain
    for j in range(p.H):
        w = p.w(j)
        bj = p.b(j)
        if w == 0.0 and bj == 0.0:
            raise NonsmoothPointError(f"neuron {j}: w = b = 0")
        if abs(w * a + bj) <= margin or abs(w * b + bj) <= margin:
            raise NonsmoothPointError(
                f"neuron {j}: kink too close to a domain endpoint")


def fd_gradient(p: Params, t: Target, h: float = 1e-6,
                tol: float = 1e-12) -> GradientVector:
    """Central finite differences of the exact risk (test oracle)."""
    th = list(p.theta)
    out = []
    for i in range(len(th)):
        orig = th[i]
        th[i] = orig + h
        rp = risk_theta(th, p.H, t, tol)
        th[i] = orig - h
        rm = risk_theta(th, p.H, t, tol)
        th[i] = orig
        out.append((rp - rm) / (2.0 * h))
    return GradientVector(tuple(out))


def hessian_fd(p: Params, t: Target, h: float = DEFAULT_FD_STEP,
               coords: str = "all", rank_tol: float = DEFAULT_RANK_TOL) -> HessianReport:
    """Symmetrized central differences of the exact gradient.

    Requires a twice-differentiable configuration: every w_j*a + b_j and
    w_j*b + b_j bounded away from zero relative to the step size.
    """
    if h <= 0:
        raise ValueError("h must be positive")
    a, b = t.domain
    check_differentiable(p, t, margin=2.0 * h * max(1.0, abs(a), abs(b)))
    idx = _coord_indices(p.H, coords)
    th = list(p.theta)
    n = len(idx)
    mat = np.empty((n, n))
    for row, i in enumerate(idx):
        orig = th[i]
        th[i] = orig + h
        gp = grad_theta(th, p.H, t)
        th[i] = orig - h
        gm = grad_theta(th, p.H, t)
        th[i] = orig
        for col, k in enumerate(idx):
            mat[row, col] = (gp[k] - gm[k]) / (2.0 * h)
    return _report_from_matrix(mat, rank_tol)


def closed_hessian_M(q: float, theta1: float, t: BenchmarkTarget,
                     rank_tol: float = DEFAULT_RANK_TOL) -> HessianReport:
    """Closed-form restricted 4x4 Hessian on the single-kink critical
    manifold, in the coordinates (w_1, b_1, v_1, c), kink at normalized
    position q with inner weight theta1 > 0."""
    if not (t.alpha < q < t.beta):
        raise DomainError("q must lie strictly inside (alpha, beta)")
    if theta1 <= 0.0:
        raise DomainError("theta1 must be positive")
    if t.scale != 1.0:
        raise DomainError("closed form is tabulated for the unscaled target")
    A, B = t.a, t.b
    L = B - A
    t1 = theta1
    om = 1.0 - q        # 1 - q
    op = 1.0 + 3.0 * q  # 1 + 3q
    sq_om = math.sqrt(om)
    sq_op = math.sqrt(op)

    h11 = (A * A * om * om + B * B * (1.0 + 2.0 * q) ** 2
           + A * B * (1.0 + 4.0 * q - 5.0 * q * q)) / (6.0 * t1 * t1 * L * om * om * op * op)
    h12 = (A * (1.0 - q * q) + B * (1.0 + 4.0 * q + q * q)) / (4.0 * t1 * t1 * L * om * om * op * op)
    h13 = L * sq_om * (A * om + B * (2.0 + q)) / (6.0 * sq_op)
    h14 = (A * om + B * (1.0 + q)) / (2.0 * t1 * sq_om * sq_op)
    h22 = (1.0 + 2.0 * q) / (2.0 * t1 * t1 * L * om * om * op * op)
    h23 = L * sq_om / (2.0 * sq_op)
    h24 = 1.0 / (t1 * sq_om * sq_op)
    h33 = (2.0 / 3.0) * t1 * t1 * L ** 3 * om ** 3
    h34 = t1 * L * L * om * om
    h44 = 2.0 * L

    mat = np.array([
        [h11, h12, h13, h14],
        [h12, h22, h23, h24],
        [h13, h23, h33, h34],
        [h14, h24, h34, h44],
    ])
    return _report_from_matrix(mat, rank_tol)


def classify(report: HessianReport, grad_norm: float,
             expected_corank: int | None = None) -> CritClass:
    """Heuristic critical-point label from the Hessian spectrum.

    Spectral test only: it cannot verify that the critical set is locally
    a manifold of the expected dimension, so for points outside the
    analytically known families the label is advisory.
    """
    if grad_norm >= 1e-6:
        raise NotCriticalError(f"gradient max-norm {grad_norm:g} is not critical")
    eig = report.eigenvalues
    lam_max = report.max_abs_eigenvalue
    if lam_max == 0.0:
        return CritClass.DEGENERATE
    thr = report.rank_tol * lam_max
    n_pos = sum(1 for x in eig if x > thr)
    n_neg = sum(1 for x in eig if x < -thr)
    n_zero = len(eig) - n_pos - n_neg
    if expected_corank is not None and n_zero != expected_corank:
        return CritClass.DEGENERATE
    if n_neg == 0 and n_pos > 0:
        return CritClass.LOCAL_MIN
    if n_pos == 0 and n_neg > 0:
        return CritClass.LOCAL_MAX
    if n_pos > 0 and n_neg > 0:
        return CritClass.SADDLE
    return CritClass.DEGENERATE
