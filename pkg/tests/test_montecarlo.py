import math

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.optimize import brentq
from scipy.stats import norm

from rifields.errors import DiagnosticWarning, DomainError
from rifields.montecarlo import (ParametricIntegralProblem, clopper_pearson, confidence_region,
                                 coverage_experiment, estimate_integral)
from rifields.rispaces import RISpaceSpec

GRID = np.linspace(0, 2 * np.pi, 33)
L2 = RISpaceSpec.lp(2, np.full(33, 1 / 33))


def counting(problem):
    calls = {"draws": 0}
    base = problem.sampler

    def sampler(rng, k):
        calls["draws"] += k
        return base(rng, k)

    return ParametricIntegralProblem(problem.name, problem.grid, problem.integrand, sampler,
                                     problem.truth), calls


def test_constant_problem_is_exact():
    f = np.sin(GRID)
    p = ParametricIntegralProblem.constant(GRID, f)
    assert np.array_equal(estimate_integral(p, 7, 0).values, f)
    reg = confidence_region(p, 50, L2, 0.05, 1, 1000)
    assert reg.u0 == 0.0 and reg.radius == 0.0
    with pytest.warns(DiagnosticWarning):
        res = coverage_experiment(p, 50, L2, 0.05, 5, 2, 1000)
    assert res.coverage == 1.0


def test_single_draw_and_shared_stream():
    p, calls = counting(ParametricIntegralProblem.cos_tx(GRID))
    est = estimate_integral(p, 1, 3)
    assert calls["draws"] == 1
    x = ParametricIntegralProblem.cos_tx(GRID).sampler(np.random.default_rng(
        np.random.SeedSequence(3, spawn_key=(1, 0))), 1)
    np.testing.assert_allclose(est.values, np.cos(GRID * x[0]))
    calls["draws"] = 0
    estimate_integral(p, 5000, 4)
    assert calls["draws"] == 5000


def test_error_rate_is_root_n():
    p = ParametricIntegralProblem.cos_tx(GRID)
    truth = p.truth(GRID)
    err = {n: np.mean([np.max(np.abs(estimate_integral(p, n, s).values - truth)) for s in range(40)])
           for n in (100, 10_000)}
    assert 5 < err[100] / err[10_000] < 20


def test_truth_functions():
    assert ParametricIntegralProblem.cos_tx(np.array([0.0])).truth(np.array([0.0]))[0] == 1.0
    t = np.array([0.0, 1.0, 2.0])
    np.testing.assert_allclose(ParametricIntegralProblem.exp_tx(t).truth(t), [1.0, math.e - 1, (math.e ** 2 - 1) / 2])


def test_region_radius_and_quantile_monotonicity():
    p = ParametricIntegralProblem.cos_tx(GRID)
    reg = confidence_region(p, 4000, L2, 0.05, 9, 5000)
    assert reg.radius == reg.u0 / math.sqrt(4000)
    assert reg.quantile(0.01) >= reg.u0 >= reg.quantile(0.2)
    assert reg.reliability == 0.95
    assert any("certificate" in w for w in reg.warnings)


def test_region_argument_checks():
    p = ParametricIntegralProblem.cos_tx(GRID)
    with pytest.raises(DomainError):
        confidence_region(p, 100, L2, 0.6, 0)
    with pytest.raises(ValueError):
        confidence_region(p, 100, L2, 0.05, 0, limit_replicas=500)
    bare = ParametricIntegralProblem("x", GRID, p.integrand, p.sampler)
    with pytest.raises(ValueError):
        coverage_experiment(bare, 100, L2, 0.05, 2, 0)


def test_nonfinite_integrand_reported():
    p = ParametricIntegralProblem("bad", GRID, lambda t, x: np.log(np.outer(x - 0.5, t) ** 2),
                                  lambda rng, k: np.full(k, 0.5))
    with np.errstate(divide="ignore"), pytest.raises(DomainError, match="draw 0"):
        estimate_integral(p, 3, 0)


def test_independent_covariance_stream():
    p = ParametricIntegralProblem.cos_tx(GRID)
    a = confidence_region(p, 3000, L2, 0.05, 5, 2000)
    b = confidence_region(p, 3000, L2, 0.05, 5, 2000, covariance_source="independent")
    assert b.covariance_source == "independent"
    assert np.array_equal(a.center, b.center)
    assert b.u0 == pytest.approx(a.u0, rel=0.1)


def l2_quantile_two_points(cov, w, level):
    # ||ζ||_L2^2 = λ1 X1^2 + λ2 X2^2 for the eigenvalues of W^(1/2) R W^(1/2)
    s = np.sqrt(w)
    lam = np.linalg.eigvalsh(s[:, None] * cov * s[None, :])
    l1, l2 = lam[1], lam[0]

    def cdf(c):
        top = math.sqrt(c / l1)
        f = lambda z: norm.pdf(z) * (2 * norm.cdf(math.sqrt(max(c - l1 * z * z, 0.0) / l2)) - 1)
        return quad(f, -top, top, epsabs=1e-12)[0]

    c = brentq(lambda c: cdf(c) - level, 1e-9, 100.0)
    return math.sqrt(c)


def test_quantile_against_numerical_law_on_two_points():
    grid = np.array([1.0, 3.0])
    p = ParametricIntegralProblem.cos_tx(grid)
    # exact covariance of cos(t x), x uniform on [0, 1]
    m = lambda a: 1.0 if a == 0 else math.sin(a) / a
    mean = np.array([m(t) for t in grid])
    second = np.array([[0.5 * (m(a - b) + m(a + b)) for b in grid] for a in grid])
    cov = second - np.outer(mean, mean)
    w = np.array([0.5, 0.5])
    spec = RISpaceSpec.lp(2, w)
    reg = confidence_region(p, 1000, spec, 0.05, 3, 40_000, covariance=cov)
    assert reg.u0 == pytest.approx(l2_quantile_two_points(cov, w, 0.95), rel=0.02)


def test_clopper_pearson():
    lo, hi = clopper_pearson(95, 100)
    assert lo == pytest.approx(0.8872, abs=1e-4) and hi == pytest.approx(0.9836, abs=1e-4)
    assert clopper_pearson(0, 10)[0] == 0.0 and clopper_pearson(10, 10)[1] == 1.0


def test_coverage_small_run():
    p = ParametricIntegralProblem.cos_tx(GRID)
    res = coverage_experiment(p, 2000, L2, 0.1, 40, 1, 2000)
    assert res.ci_low <= 0.9 <= res.ci_high or 0.7 < res.coverage <= 1.0
    again = coverage_experiment(p, 2000, L2, 0.1, 40, 1, 2000)
    assert np.array_equal(res.distances, again.distances)
