"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line."""
import itertools
import json
import math
import time
from pathlib import Path

import numpy as np
import pytest
import yaml
from scipy.special import zeta
from scipy.stats import beta as beta_dist

from conftest import ACCEPTANCE_LINES
from rifields.certify import EntropyModel, certify_series, minimize_sigma
from rifields.cli import main
from rifields.entropy import MetricMeasureSpace, covering_number, exact_covering_number
from rifields.montecarlo import ParametricIntegralProblem, coverage_experiment
from rifields.process import rosenthal_check
from rifields.psi import MomentCurve, PsiFunction, gls_norm
from rifields.rispaces import RISpaceSpec, fundamental_function
from rifields.scenario import deterministic_view, run_data
from rifields.transforms import ScalarFunctionGrid, conjugate_grid, tail_bound, young_fenchel

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"


def record(k, ok, detail):
    line = f"ACCEPTANCE {k}: {'PASS' if ok else 'FAIL'} {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def scenario(name, **updates):
    data = yaml.safe_load((SCENARIOS / name).read_text())
    for block, vals in updates.items():
        data.setdefault(block, {}).update(vals)
    data.pop("output", None)
    return data


def test_power_law_optimum():
    t0 = time.perf_counter()
    m = minimize_sigma(EntropyModel.power_law(1, 1))
    lam = 1.0
    oracle = lam ** -lam * (1 + lam) ** (1 + lam)
    ok = abs(m.q0 - 0.5) <= 1e-6 and abs(m.value - oracle) <= 1e-6
    rng = np.random.default_rng(101)
    worst = 0.0
    for _ in range(20):
        s = rng.uniform(0.2, 3.0)
        kappa = rng.uniform(0.1, 0.95) * (1 + s)
        gap = 1 + s - kappa
        q0 = (kappa / (kappa + gap)) ** (1 / gap)
        worst = max(worst, abs(minimize_sigma(EntropyModel.power_law(kappa, s)).q0 - q0))
    rep = certify_series(EntropyModel.power_law(1, 1), PsiFunction.power(2))
    flagged = "power-law-optimum-closed-form" in rep.flags
    elapsed = time.perf_counter() - t0
    record(1, ok and worst <= 1e-6 and flagged and elapsed < 1.0,
           f"q0={m.q0:.9f} sigma={m.value:.9f} random-q0-err={worst:.1e} flag={flagged} t={elapsed:.2f}s")


def test_log_corrected_optimum():
    t0 = time.perf_counter()
    beta, kappa = 2.0, 2.0
    m = minimize_sigma(EntropyModel.log_corrected(kappa - 1, beta))
    oracle = math.e ** beta * beta ** -beta * kappa ** beta * zeta(beta)
    rel = abs(m.value - oracle) / oracle
    elapsed = time.perf_counter() - t0
    record(2, abs(m.q0 - math.exp(-1)) <= 1e-6 and rel <= 1e-8 and elapsed < 1.0,
           f"q0={m.q0:.9f} sigma={m.value:.12f} oracle={oracle:.12f} rel={rel:.1e} t={elapsed:.2f}s")


def test_covering_bracket_against_exhaustive_cover():
    t0 = time.perf_counter()
    rng = np.random.default_rng(202)
    inside = exact_hits = 0
    for _ in range(200):
        n = int(rng.integers(2, 13))
        dim = int(rng.integers(1, 4))
        space = MetricMeasureSpace.from_coords(rng.random((n, dim)))
        d = space.dist[space.dist > 0]
        eps = float(rng.uniform(0.5, 1.5) * rng.choice(d))
        b = covering_number(space, eps)
        exact = exact_covering_number(space, eps)
        inside += b.lower <= exact <= b.upper
        exact_hits += b.upper == exact
    elapsed = time.perf_counter() - t0
    record(3, inside == 200 and elapsed < 60.0,
           f"bracket={inside}/200 upper=exact {exact_hits}/200 (informational, target 60%) t={elapsed:.1f}s")


def test_convex_duality_suite():
    rng = np.random.default_rng(303)
    worst = 0.0
    for _ in range(50):
        k = int(rng.integers(5, 200))
        y = np.sort(rng.uniform(-5, 5, k))
        y = np.unique(y)
        slopes = np.cumsum(rng.exponential(1.0, len(y) - 1)) - rng.uniform(0, 20)
        f = rng.normal() + np.concatenate([[0.0], np.cumsum(slopes * np.diff(y))])
        g = ScalarFunctionGrid(y, f, "linear")
        back = young_fenchel(conjugate_grid(g), y, refine=False)
        tol = 2 * 1e-9 * max(1.0, float(np.max(np.abs(f))))
        worst = max(worst, float(np.max(np.abs(back - f))) / tol)
    q = ScalarFunctionGrid.sample(lambda t: 0.5 * t ** 2, np.linspace(-10, 10, 201))
    u = np.linspace(-4, 4, 17)
    q_err = float(np.max(np.abs(young_fenchel(q, u) - 0.5 * u ** 2)))
    a = ScalarFunctionGrid(np.linspace(-1, 1, 21), np.abs(np.linspace(-1, 1, 21)), "linear")
    inner = young_fenchel(a, np.linspace(-1, 1, 9))
    outer = young_fenchel(a, np.array([-1.5, 1.5]))
    a_err = float(np.max(np.abs(inner)))
    ok = worst <= 1.0 and q_err <= 1e-9 and a_err <= 1e-9 and np.all(np.isinf(outer))
    record(4, ok, f"biconjugate err/tol={worst:.2e} quadratic={q_err:.1e} abs-indicator={a_err:.1e}")


def test_gaussian_tail_domination():
    t0 = time.perf_counter()
    psi = PsiFunction.power(2)
    norm = gls_norm(MomentCurve.gaussian(), psi)
    xs = np.array([4.0, 5.0, 6.0]) * norm
    bound = tail_bound(psi, norm, xs)
    a = np.abs(np.random.default_rng(505).standard_normal(1_000_000))
    ok_tail = True
    parts = []
    for x, b in zip(xs, bound):
        k = int(np.sum(a > x))
        lower = 0.0 if k == 0 else float(beta_dist.ppf(0.01, k, a.size - k + 1))
        ok_tail &= lower <= b
        parts.append(f"x={x:.3f}:{k / a.size:.2e}<={b:.2e}")
    fit_x = np.array([4.0, 5.0, 6.0, 8.0, 12.0, 20.0]) * norm
    slope = np.polyfit(np.log(fit_x), np.log(tail_bound(psi, norm, fit_x, log=True)), 1)[0]
    elapsed = time.perf_counter() - t0
    record(5, ok_tail and abs(slope - 2) <= 0.2 and elapsed < 30.0,
           f"norm={norm:.6f} {' '.join(parts)} exponent={slope:.4f} t={elapsed:.1f}s")


def test_fundamental_function_identity():
    w = np.full(10, 0.1)
    worst = 0.0
    for p, delta in itertools.product([1.5, 2.0, 3.0], [0.1, 0.5, 0.9]):
        a = fundamental_function(RISpaceSpec.lp(p, w), delta)
        b = fundamental_function(RISpaceSpec.lp(p / (p - 1), w), delta)
        worst = max(worst, abs(a * b - delta))
    record(6, worst <= 1e-12, f"max |phi*phi' - delta| = {worst:.1e}")


def test_rosenthal_property():
    rows = rosenthal_check(lambda rng, shape: rng.uniform(-1.0, 1.0, shape),
                           lambda p: (1.0 / (p + 1.0)) ** (1.0 / p),
                           [3, 4, 6], [2, 8, 32], 100_000, seed=707)
    ok = all(r["holds"] for r in rows)
    margin = min(r["bound"] / r["upper"] for r in rows)
    record(7, ok, f"{sum(r['holds'] for r in rows)}/{len(rows)} cells hold, min bound/upper={margin:.2f}")


def test_clt_check_bounded_field():
    t0 = time.perf_counter()
    data = scenario("bounded_clt.yaml", clt_check={"n": [4, 256], "replicas": 2000})
    _, report, _ = run_data(data, "clt-check", write=False)
    ks = {r["n"]: r["ks"] for r in report["result"]["rows"]}
    elapsed = time.perf_counter() - t0
    record(8, ks[256] < 0.05 and ks[256] < ks[4] and elapsed < 300,
           f"KS(4)={ks[4]:.4f} KS(256)={ks[256]:.4f} t={elapsed:.1f}s")


def test_monte_carlo_coverage():
    t0 = time.perf_counter()
    grid = np.linspace(0.0, 2 * math.pi, 33)
    problem = ParametricIntegralProblem.cos_tx(grid)
    spec = RISpaceSpec.lp(2.0, np.full(33, 1.0 / 33))
    res = coverage_experiment(problem, 10_000, spec, 0.05, 500, seed=909)
    elapsed = time.perf_counter() - t0
    record(9, 0.92 <= res.coverage <= 0.98 and elapsed < 300,
           f"coverage={res.coverage:.3f} ({res.covered}/500, CI95 [{res.ci_low:.3f}, {res.ci_high:.3f}]) t={elapsed:.1f}s")


def test_mixed_norm_below_certificate():
    data = scenario("brownian_mixed_norm.yaml")
    _, report, _ = run_data(data, "mixed-norm", write=False)
    res = report["result"]
    bound = res["certificate"]["mixed_norm_bound"]
    finite = isinstance(bound, float) and math.isfinite(bound)
    lower = res["value"] - 2.326 * res["stderr"]
    record(10, finite and lower <= bound,
           f"mixed norm {res['value']:.4f} (se {res['stderr']:.4f}) vs certified {bound}")


STOCHASTIC = {
    "mc-estimate": ("mc_cos.yaml", {"mc": {"n": 2000, "limit_replicas": 1000}}),
    "mc-coverage": ("mc_coverage.yaml", {"mc": {"n": 500, "repetitions": 10, "limit_replicas": 1000}}),
    "clt-check": ("bounded_clt.yaml", {"clt_check": {"n": [4, 16], "replicas": 300}}),
    "mixed-norm": ("brownian_mixed_norm.yaml", {"mixed_norm": {"replicas": 500}}),
    "demo-lacunary": ("lacunary_demo.yaml", {"lacunary": {"replicas": 200}}),
}


def test_determinism(tmp_path):
    mismatched = []
    for cmd, (name, updates) in STOCHASTIC.items():
        path = tmp_path / f"{cmd}.yaml"
        path.write_text(yaml.safe_dump(scenario(name, **updates)))
        outs = []
        for run in ("a", "b"):
            out = tmp_path / cmd / run
            assert main([cmd, str(path), "--out-dir", str(out)]) == 0
            rep = json.loads((out / f"{cmd}-report.json").read_text())
            tables = {f.name: f.read_bytes() for f in sorted(out.glob("*.dat"))}
            outs.append((json.dumps(deterministic_view(rep), sort_keys=True), tables))
        if outs[0] != outs[1]:
            mismatched.append(cmd)
    record(11, not mismatched,
           f"{len(STOCHASTIC) - len(mismatched)}/{len(STOCHASTIC)} commands byte-identical across runs"
           + (f" (differ: {', '.join(mismatched)})" if mismatched else ""))
