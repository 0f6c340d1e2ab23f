"""One-hidden-layer ReLU networks on an interval.

Parameter layout for width H (vector length 3H+1, 0-based index j):
inner weights ``theta[j]``, inner biases ``theta[H+j]``, outer weights
``theta[2H+j]`` for j = 0..H-1, and the output offset ``theta[3H]``.

``canonical`` reduces a parameter vector to its realization: a continuous
piecewise-linear function given by sorted interior kinks, per-segment
slopes and the value at the left endpoint.  Distinct parameter vectors
with the same realization canonicalize identically, which is what the
L2 deduplication machinery relies on.
"""

from __future__ import annotations

import bisect
import csv
import json
import math
from dataclasses import dataclass
from typing import Sequence

from .errors import DomainError
from .polyalg import PiecewisePolynomial, Polynomial

__all__ = [
    "Params",
    "Realization",
    "SmoothActivation",
    "realize",
    "realize_smooth",
    "canonical",
    "l2_distance",
    "params_to_json",
    "params_from_json",
    "write_realization_csv",
]

KINK_MERGE_TOL = 1e-12


@dataclass(frozen=True)
class Params:
    """Network parameter vector theta of length 3H+1."""

    H: int
    theta: tuple[float, ...]

    def __post_init__(self):
        if self.H < 1:
            raise ValueError("H must be >= 1")
        if len(self.theta) != 3 * self.H + 1:
            raise ValueError(f"theta must have length {3 * self.H + 1}, "
                             f"got {len(self.theta)}")
        object.__setattr__(self, "theta", tuple(float(x) for x in self.theta))

    @classmethod
    def from_parts(cls, w: Sequence[float], b: Sequence[float],
                   v: Sequence[float], c: float) -> "Params":
        H = len(w)
        if not (len(b) == len(v) == H):
            raise ValueError("w, b, v must have equal length")
        return cls(H, tuple(w) + tuple(b) + tuple(v) + (float(c),))

    def w(self, j: int) -> float:
        return self.theta[j]

    def b(self, j: int) -> float:
        return self.theta[self.H + j]

    def v(self, j: int) -> float:
        return self.theta[2 * self.H + j]

    @property
    def c(self) -> float:
        return self.theta[3 * self.H]


def realize(p: Params, x: float) -> float:
    """Exact ReLU network output at x."""
    H = p.H
    th = p.theta
    acc = th[3 * H]
    for j in range(H):
        z = th[H + j] + th[j] * x
        if z > 0.0:
            acc += th[2 * H + j] * z
    return acc


def _softplus(t: float) -> float:
    if t > 36.0:
        return t + math.exp(-t)
    if t < -36.0:
        return math.exp(t)
    return math.log1p(math.exp(t))


def _sigmoid(t: float) -> float:
    if t >= 0.0:
        return 1.0 / (1.0 + math.exp(-t) if t < 36.0 else 1.0)
    if t < -36.0:
        return math.exp(t)
    e = math.exp(t)
    return e / (1.0 + e)


@dataclass(frozen=True)
class SmoothActivation:
    """Shifted-softplus C1 surrogate for the ReLU at sharpness r.

    A(z) = log(1 + exp(r z - sqrt(r))) / r.  Pointwise A -> max(z, 0) and
    A' -> the indicator of (0, inf) as r grows; the sqrt(r) shift makes
    A'(0) -> 0, matching the left-continuous limit required of the family.
    """

    r: int

    def __post_init__(self):
        if self.r < 1:
            raise ValueError("sharpness r must be a positive integer")

    def __call__(self, z: float) -> float:
        r = self.r
        return _softplus(r * z - math.sqrt(r)) / r

    def deriv(self, z: float) -> float:
        r = self.r
        return _sigmoid(r * z - math.sqrt(r))


def realize_smooth(p: Params, x: float, r: int) -> float:
    act = SmoothActivation(r)
    H = p.H
    th = p.theta
    acc = th[3 * H]
    for j in range(H):
        acc += th[2 * H + j] * act(th[H + j] + th[j] * x)
    return acc


@dataclass(frozen=True)
class Realization:
    """Canonical continuous piecewise-linear function on [a, b]."""

    a: float
    b: float
    kinks: tuple[float, ...]
    slopes: tuple[float, ...]
    offset: float

    def __post_init__(self):
        if not self.b > self.a:
            raise ValueError("need b > a")
        if len(self.slopes) != len(self.kinks) + 1:
            raise ValueError("need len(slopes) == len(kinks) + 1")
        if any(k2 <= k1 for k1, k2 in zip(self.kinks, self.kinks[1:])):
            raise ValueError("kinks must be strictly increasing")
        if self.kinks and (self.kinks[0] <= self.a or self.kinks[-1] >= self.b):
            raise ValueError("kinks must be interior")
        nodes = (self.a,) + self.kinks + (self.b,)
        vals = [self.offset]
        for i, s in enumerate(self.slopes):
            vals.append(vals[-1] + s * (nodes[i + 1] - nodes[i]))
        object.__setattr__(self, "_nodes", nodes)
        object.__setattr__(self, "_values", tuple(vals))

    def nodes(self) -> tuple[tuple[float, ...], tuple[float, ...]]:
        """(node positions, node values), endpoints included."""
        return self._nodes, self._values

    def eval(self, x: float) -> float:
        if x < self.a or x > self.b:
            raise DomainError(f"{x!r} outside [{self.a!r}, {self.b!r}]")
        i = bisect.bisect_right(self.kinks, x)
        return self._values[i] + self.slopes[i] * (x - self._nodes[i])

    __call__ = eval

    def to_piecewise(self) -> PiecewisePolynomial:
        pieces = []
        for i, s in enumerate(self.slopes):
            x0 = self._nodes[i]
            y0 = self._values[i]
            pieces.append(Polynomial([y0 - s * x0, s]))
        return PiecewisePolynomial(self._nodes, pieces, continuous=True)

    def sample(self, n: int) -> list[tuple[float, float]]:
        step = (self.b - self.a) / (n - 1)
        out = []
        for i in range(n):
            x = min(self.a + i * step, self.b)
            out.append((x, self.eval(x)))
        return out


def canonical(p: Params, a: float, b: float) -> Realization:
    """Canonical piecewise-linear form of the realization on [a, b].

    Sorts the active kinks -b_j/w_j that fall inside (a, b), accumulates
    slope contributions v_j*w_j on the active sides, merges kinks that
    coincide within 1e-12 and drops neurons with no effect on [a, b].
    """
    if not b > a:
        raise DomainError("need b > a")
    H = p.H
    th = p.theta
    base_slope = 0.0
    events: list[tuple[float, float]] = []
    slope_scale = 1.0
    for j in range(H):
        w = th[j]
        bj = th[H + j]
        v = th[2 * H + j]
        vw = v * w
        slope_scale += abs(vw)
        if w == 0.0:
            continue
        q = -bj / w
        if w > 0.0:
            if q <= a:
                base_slope += vw
            elif q < b:
                events.append((q, vw))
        else:
            if q >= b:
                base_slope += vw
            elif q > a:
                base_slope += vw
                events.append((q, -vw))
    events.sort()
    kinks: list[float] = []
    deltas: list[float] = []
    for q, d in events:
        if kinks and q - kinks[-1] <= KINK_MERGE_TOL:
            deltas[-1] += d
        else:
            kinks.append(q)
            deltas.append(d)
    # drop kinks with no slope change, merging the adjacent segments
    keep_k: list[float] = []
    keep_d: list[float] = []
    for q, d in zip(kinks, deltas):
        if abs(d) <= 1e-12 * slope_scale:
            continue
        keep_k.append(q)
        keep_d.append(d)
    slopes = [base_slope]
    for d in keep_d:
        slopes.append(slopes[-1] + d)
    return Realization(a, b, tuple(keep_k), tuple(slopes), realize(p, a))


def l2_distance(u: Realization, v: Realization) -> float:
    """Exact L2([a,b]) distance between two piecewise-linear functions."""
    if u.a != v.a or u.b != v.b:
        raise DomainError("realizations live on different domains")
    grid = sorted(set(u.kinks) | set(v.kinks))
    nodes = [u.a] + grid + [u.b]
    total = 0.0
    d0 = u.eval(nodes[0]) - v.eval(nodes[0])
    for x0, x1 in zip(nodes, nodes[1:]):
        d1 = u.eval(x1) - v.eval(x1)
        total += (x1 - x0) * (d0 * d0 + d0 * d1 + d1 * d1) / 3.0
        d0 = d1
    return math.sqrt(max(total, 0.0))


def params_to_json(p: Params) -> str:
    return json.dumps({"H": p.H, "theta": list(p.theta)})


def params_from_json(text: str) -> Params:
    doc = json.loads(text)
    return Params(int(doc["H"]), tuple(float(x) for x in doc["theta"]))


def write_realization_csv(r: Realization, path, grid: int = 256) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "y"])
        for x, y in r.sample(grid):
            writer.writerow([repr(x), repr(y)])
