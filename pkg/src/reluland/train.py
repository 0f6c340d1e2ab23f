"""Full-batch gradient descent on the exact risk, and gradient flow.

Training uses the closed-form generalized gradient, so there is no
sampling noise: a run is a deterministic function of its seed.  The
random number generator is the 64-bit counter-based Philox generator
(numpy's ``np.random.Philox``), chosen for cross-platform bit
reproducibility; draw order is documented on ``xavier_init``.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .landscape import grad_theta, risk_theta
from .network import Params, Realization, canonical, l2_distance
from .target import Target

__all__ = [
    "TrainConfig",
    "TrainRun",
    "Cluster",
    "EnsembleReport",
    "GFRun",
    "xavier_init",
    "gd_run",
    "ensemble",
    "gf_run",
]

DIVERGENCE_NORM = 1e8
NONSMOOTH_EPS = 1e-14


@dataclass(frozen=True)
class TrainConfig:
    H: int = 4
    lr: float = 1.0 / 20.0
    grad_tol: float = 1e-4
    max_iters: int = 10_000_000
    weight_var: float | None = None  # defaults to 2 / (1 + H)
    dedup_l2: float = 1e-4
    master_seed: int = 0
    runs: int = 50

    def __post_init__(self):
        if self.H < 1 or self.lr <= 0 or self.grad_tol <= 0 or self.max_iters <= 0:
            raise DomainError("H, lr, grad_tol, max_iters must be positive")
        if self.runs < 1 or self.dedup_l2 <= 0:
            raise DomainError("runs and dedup_l2 must be positive")
        if self.weight_var is not None and self.weight_var <= 0:
            raise DomainError("weight_var must be positive")

    @property
    def effective_weight_var(self) -> float:
        return self.weight_var if self.weight_var is not None else 2.0 / (1.0 + self.H)


def xavier_init(H: int, seed: int, weight_var: float | None = None) -> Params:
    """Zero-bias initialization with fan-scaled normal weights.

    Inner weights then outer weights are drawn i.i.d. N(0, weight_var)
    from Philox(seed), in that order; biases and the output offset start
    at zero.  weight_var defaults to 2/(1+H).
    """
    if H < 1:
        raise DomainError("H must be >= 1")
    var = weight_var if weight_var is not None else 2.0 / (1.0 + H)
    rng = np.random.Generator(np.random.Philox(key=seed))
    sd = math.sqrt(var)
    w = rng.normal(0.0, sd, H)
    v = rng.normal(0.0, sd, H)
    return Params.from_parts([float(x) for x in w], [0.0] * H,
                             [float(x) for x in v], 0.0)


@dataclass(frozen=True)
class TrainRun:
    seed: int | None
    iterations: int
    theta: Params
    grad_max_norm: float
    risk: float
    realization: Realization
    converged: bool
    diverged: bool = False
    nonsmooth_hits: int = 0


def _near_nonsmooth(theta, H, a, b) -> bool:
    for j in range(H):
        w = theta[j]
        bj = theta[H + j]
        if w == 0.0 and bj == 0.0:
            return True
        if abs(w * a + bj) < NONSMOOTH_EPS or abs(w * b + bj) < NONSMOOTH_EPS:
            return True
    return False


def gd_run(p0: Params, t: Target, cfg: TrainConfig, seed: int | None = None) -> TrainRun:
    """Plain gradient descent theta <- theta - lr * G(theta) until the
    gradient max-norm drops below grad_tol or the iteration cap is hit.

    Iterates that land (within 1e-14) on a nondifferentiable configuration
    are counted, not fatal: the generalized gradient is defined everywhere.
    """
    H = cfg.H
    if p0.H != H:
        raise DomainError("p0 width does not match config")
    a, b = t.domain
    theta = list(p0.theta)
    lr = cfg.lr
    iterations = 0
    nonsmooth = 0
    converged = False
    diverged = False
    gm = math.inf
    while True:
        g = grad_theta(theta, H, t)
        gm = max(abs(x) for x in g)
        if gm < cfg.grad_tol:
            converged = True
            break
        if iterations >= cfg.max_iters:
            break
        for i in range(len(theta)):
            theta[i] -= lr * g[i]
        iterations += 1
        if _near_nonsmooth(theta, H, a, b):
            nonsmooth += 1
        if max(abs(x) for x in theta) > DIVERGENCE_NORM:
            diverged = True
            break
    p = Params(H, tuple(theta))
    return TrainRun(seed=seed, iterations=iterations, theta=p,
                    grad_max_norm=gm, risk=risk_theta(theta, H, t),
                    realization=canonical(p, a, b), converged=converged,
                    diverged=diverged, nonsmooth_hits=nonsmooth)


@dataclass(frozen=True)
class Cluster:
    representative: Realization
    seeds: tuple[int, ...]
    risk: float


@dataclass(frozen=True)
class EnsembleReport:
    config: TrainConfig
    runs: tuple[TrainRun, ...]
    clusters: tuple[Cluster, ...]  # sorted by risk

    @property
    def all_co_clustered(self) -> bool:
        return len(self.clusters) == 1

    def risk_spread(self) -> float:
        if not self.clusters:
            return 0.0
        return self.clusters[-1].risk - self.clusters[0].risk


def _one_seeded_run(args) -> TrainRun:
    t, cfg, seed = args
    return gd_run(xavier_init(cfg.H, seed, cfg.effective_weight_var), t, cfg, seed=seed)


def ensemble(t: Target, cfg: TrainConfig, threads: int | None = None) -> EnsembleReport:
    """Train runs seeds master_seed..master_seed+runs-1, then greedily
    deduplicate realizations in run order at L2 distance dedup_l2.

    Diverged runs are reported but excluded from clustering.  Results are
    merged in seed order whatever the execution order, so the report is a
    pure function of (target, config).
    """
    if threads is None:
        threads = int(os.environ.get("RELULAND_THREADS", "1") or 1)
    seeds = list(range(cfg.master_seed, cfg.master_seed + cfg.runs))
    jobs = [(t, cfg, s) for s in seeds]
    if threads > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(max_workers=threads) as pool:
            runs = list(pool.map(_one_seeded_run, jobs))
    else:
        runs = [_one_seeded_run(job) for job in jobs]

    reps: list[Realization] = []
    members: list[list[int]] = []
    risks: list[float] = []
    for run in runs:
        if run.diverged:
            continue
        for i, rep in enumerate(reps):
            if l2_distance(run.realization, rep) < cfg.dedup_l2:
                members[i].append(run.seed)
                break
        else:
            reps.append(run.realization)
            members.append([run.seed])
            risks.append(run.risk)
    clusters = [Cluster(representative=r, seeds=tuple(m), risk=k)
                for r, m, k in zip(reps, members, risks)]
    clusters.sort(key=lambda cl: cl.risk)
    return EnsembleReport(config=cfg, runs=tuple(runs), clusters=tuple(clusters))


@dataclass(frozen=True)
class GFRun:
    t_end: float
    reached_t: float
    steps_accepted: int
    steps_rejected: int
    min_step: float
    max_step: float
    samples: tuple[tuple[float, float], ...]  # (time, risk)
    final_theta: Params
    final_risk: float
    step_underflow: bool = False


def gf_run(p0: Params, t: Target, t_end: float, rtol: float = 1e-8,
           max_samples: int = 2000) -> GFRun:
    """Integrate theta' = -G(theta) with classic RK4 and adaptive halving.

    A step is accepted when the full-step/two-half-steps discrepancy,
    relative to the iterate size, is below rtol; accepted steps may double
    the next step size.  Steps shrinking below 1e-12 abort with a partial
    result flagged ``step_underflow``.
    """
    if t_end <= 0 or rtol <= 0:
        raise DomainError("t_end and rtol must be positive")
    H = p0.H
    n = len(p0.theta)

    def rhs(y):
        g = grad_theta(y, H, t)
        return [-x for x in g]

    def rk4(y, h):
        k1 = rhs(y)
        k2 = rhs([y[i] + 0.5 * h * k1[i] for i in range(n)])
        k3 = rhs([y[i] + 0.5 * h * k2[i] for i in range(n)])
        k4 = rhs([y[i] + h * k3[i] for i in range(n)])
        return [y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
                for i in range(n)]

    y = list(p0.theta)
    t_now = 0.0
    h = min(1e-2, t_end)
    accepted = 0
    rejected = 0
    min_h = math.inf
    max_h = 0.0
    underflow = False
    samples = [(0.0, risk_theta(y, H, t))]
    while t_now < t_end:
        h = min(h, t_end - t_now)
        y_full = rk4(y, h)
        y_half = rk4(rk4(y, 0.5 * h), 0.5 * h)
        err = max(abs(y_full[i] - y_half[i]) for i in range(n))
        scale = 1.0 + max(abs(x) for x in y_half)
        if err <= rtol * scale:
            y = y_half
            t_now += h
            accepted += 1
            min_h = min(min_h, h)
            max_h = max(max_h, h)
            samples.append((t_now, risk_theta(y, H, t)))
            if err <= rtol * scale / 64.0:
                h *= 2.0
        else:
            rejected += 1
            h *= 0.5
            if h < 1e-12:
                underflow = True
                break
    if len(samples) > max_samples:
        stride = (len(samples) + max_samples - 1) // max_samples
        samples = samples[:-1:stride] + [samples[-1]]
    p = Params(H, tuple(y))
    return GFRun(t_end=t_end, reached_t=t_now, steps_accepted=accepted,
                 steps_rejected=rejected,
                 min_step=0.0 if math.isinf(min_h) else min_h, max_step=max_h,
                 samples=tuple(samples), final_theta=p,
                 final_risk=risk_theta(y, H, t), step_underflow=underflow)
