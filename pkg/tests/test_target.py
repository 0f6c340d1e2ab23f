import math

import pytest

from reluland import (BenchmarkTarget, PolyTarget, parse_target_json,
                      scale_target, target_eval, target_int, target_sq_int,
                      target_to_json, target_xint)
from reluland.errors import DomainError
from reluland.polyalg import PiecewisePolynomial, Polynomial

from conftest import poly_target, rng_for

# pinned by two independent quadratures (adaptive Simpson vs Gauss-Kronrod)
# and a high-precision cross-check during development
SQ_INT_F_13_23 = 0.024983326680593343
# int_0^{1/2} f = -1/(8 sqrt 5), from the closed-form running integral
INT_F_TO_HALF = -1.0 / (8.0 * math.sqrt(5.0))


def test_eval_middle_piece_value(bench):
    # substitute x = alpha into the middle piece: -sqrt(3)/24
    assert target_eval(bench, 1.0 / 3.0) == pytest.approx(-math.sqrt(3.0) / 24.0,
                                                          rel=1e-14)


def test_eval_left_right_limits_agree_at_alpha(bench):
    al = bench.alpha
    left = bench._left(al)
    mid = (3 * al ** 2 - 1) / (4 * math.sqrt(1 - al) * (1 + 3 * al) ** 1.5)
    assert abs(left - mid) < 1e-12


def test_eval_poly_target():
    t = poly_target([0.0, 1.0], [[0.0, 0.0, 1.0]])
    assert target_eval(t, 0.5) == 0.25


def test_eval_outside_domain(bench):
    with pytest.raises(DomainError):
        target_eval(bench, 1.5)


def test_benchmark_continuity_random_pairs():
    rng = rng_for(11)
    for _ in range(20):
        al = float(rng.uniform(0.05, 0.6))
        be = float(rng.uniform(al + 0.05, 0.95))
        t = BenchmarkTarget(al, be)
        for u in (al, be):
            lo = t.eval_normalized(u - 1e-15) if u > 1e-15 else t.eval_normalized(0.0)
            hi = t.eval_normalized(min(u + 1e-15, 1.0))
            assert abs(lo - hi) < 1e-12


def test_benchmark_validation():
    with pytest.raises(DomainError):
        BenchmarkTarget(0.7, 0.3)
    with pytest.raises(DomainError):
        BenchmarkTarget(0.0, 0.5)
    with pytest.raises(DomainError):
        BenchmarkTarget(1 / 3, 2 / 3, 1.0, 0.0)


def test_lipschitz_bound_finite(bench):
    assert math.isfinite(bench.lipschitz_bound())
    assert bench.lipschitz_bound() > 0


def test_antiderivatives_differentiate_to_f(bench):
    # central differences of cum_int / cum_xint at 50 interior points
    # (prime denominator keeps the stencil off the alpha/beta kinks)
    h = 1e-6
    for k in range(1, 51):
        x = k / 53.0
        df = (bench.cum_int(x + h) - bench.cum_int(x - h)) / (2 * h)
        dg = (bench.cum_xint(x + h) - bench.cum_xint(x - h)) / (2 * h)
        assert abs(df - bench.eval(x)) < 1e-8
        assert abs(dg - x * bench.eval(x)) < 1e-8


def test_int_frozen_value(bench):
    assert target_int(bench, 0.0, 0.5) == pytest.approx(INT_F_TO_HALF, rel=1e-13)
    # the full-interval integral of the benchmark target vanishes
    assert abs(target_int(bench, 0.0, 1.0)) < 1e-14


def test_int_poly_antiderivative():
    t = poly_target([0.0, 1.0], [[0.0, 0.0, 1.0]])
    assert target_int(t, 0.0, 1.0 / 3.0) == pytest.approx(1.0 / 81.0, rel=1e-14)


def test_xint_constant():
    t = poly_target([0.0, 1.0], [[2.0]])
    assert target_xint(t, 0.0, 1.0) == pytest.approx(1.0, rel=1e-15)


def test_int_additivity(bench):
    rng = rng_for(12)
    for _ in range(20):
        lo = float(rng.uniform(0.0, 0.3))
        mid = float(rng.uniform(0.3, 0.7))
        hi = float(rng.uniform(0.7, 1.0))
        for fn in (target_int, target_xint):
            assert (fn(bench, lo, mid) + fn(bench, mid, hi)
                    == pytest.approx(fn(bench, lo, hi), abs=1e-12))


def test_sq_int_examples():
    t = poly_target([0.0, 1.0], [[0.0, 1.0]])
    assert target_sq_int(t, 0.0, 1.0) == pytest.approx(1.0 / 3.0, rel=1e-15)
    z = poly_target([0.0, 1.0], [[0.0]])
    assert target_sq_int(z, 0.0, 1.0) == 0.0


def test_sq_int_benchmark_frozen(bench):
    gk = bench.sq_integral(0.0, 1.0, 1e-12, "gauss_kronrod")
    si = bench.sq_integral(0.0, 1.0, 1e-12, "simpson")
    assert gk == pytest.approx(SQ_INT_F_13_23, abs=5e-13)
    assert si == pytest.approx(SQ_INT_F_13_23, abs=5e-13)
    assert abs(gk - si) < 1e-10


def test_sq_int_poly_matches_squared_moment():
    rng = rng_for(13)
    for _ in range(10):
        coeffs = [float(c) for c in rng.uniform(-1, 1, 4)]
        t = poly_target([0.0, 1.0], [coeffs])
        p = Polynomial(coeffs)
        ref = PiecewisePolynomial([0.0, 1.0], [p * p]).moment(0, 0.0, 1.0)
        assert target_sq_int(t, 0.0, 1.0) == pytest.approx(ref, rel=1e-12, abs=1e-15)


def test_scale_target():
    t = poly_target([0.0, 1.0], [[0.0, 1.0]])
    assert target_eval(scale_target(t, 2.0), 0.5) == pytest.approx(1.0)
    assert target_eval(scale_target(t, 1.0), 0.3) == target_eval(t, 0.3)
    assert target_eval(scale_target(t, 0.0), 0.7) == 0.0


def test_scale_benchmark_pointwise(bench):
    s = scale_target(bench, -2.5)
    for x in (0.1, 0.45, 0.9):
        assert s.eval(x) == pytest.approx(-2.5 * bench.eval(x), rel=1e-15)


def test_json_roundtrip(bench):
    t2 = parse_target_json(target_to_json(bench))
    assert isinstance(t2, BenchmarkTarget)
    assert (t2.alpha, t2.beta, t2.a, t2.b, t2.scale) == (
        bench.alpha, bench.beta, bench.a, bench.b, bench.scale)
    t = poly_target([0.0, 0.5, 1.0], [[0.0, 1.0], [0.25, 0.5]])
    t3 = parse_target_json(target_to_json(t))
    assert isinstance(t3, PolyTarget)
    assert t3.pp.breakpoints == t.pp.breakpoints


def test_parser_rejects_bad_input():
    with pytest.raises(DomainError):
        parse_target_json("not json at all")
    with pytest.raises(DomainError):
        parse_target_json('{"kind": "mystery"}')
    with pytest.raises(DomainError):
        parse_target_json('{"kind":"piecewise_poly","breakpoints":[0,0],"pieces":[[1]]}')
    with pytest.raises(DomainError):
        parse_target_json('{"kind":"benchmark","alpha":0.9,"beta":0.1}')
