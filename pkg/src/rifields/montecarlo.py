"""Depending-trials Monte Carlo for parametric integrals I(t) = E g(t, η).

One stream of η_1..η_n serves every grid point t. Confidence regions in an
r.i. norm come from the Gaussian limit of √n (I_n - I), simulated with the
plug-in covariance of the same draws.
"""
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional

import numpy as np
from scipy.stats import beta as beta_dist

from .errors import DiagnosticWarning, DomainError
from .process import _psd_factor, block_rng, path_norms

DEFAULT_LIMIT_REPLICAS = 10_000
MIN_LIMIT_REPLICAS = 1000
CLT_REGIME_N = 100
BLOCK_BUDGET = 1 << 21
_SAMPLE_STREAM = 1
_LIMIT_STREAM = 2
_COVARIANCE_STREAM = 3
_REPETITION_STREAM = 4


@dataclass(frozen=True)
class ParametricIntegralProblem:
    """g(t, x) on a grid of t with x drawn from a probability law.

    ``integrand(t, x)`` maps the grid (m,) and draws (k,) to a (k, m) array;
    ``sampler(rng, k)`` returns k draws; ``truth(t)`` is optional.
    """

    name: str
    grid: np.ndarray
    integrand: Callable = field(repr=False)
    sampler: Callable = field(repr=False)
    truth: Optional[Callable] = field(default=None, repr=False)
    params: dict = field(default_factory=dict)

    @classmethod
    def cos_tx(cls, grid):
        """g = cos(t x), x uniform on [0, 1], I(t) = sin(t)/t."""
        return cls("cos-tx", np.asarray(grid, dtype=float),
                   lambda t, x: np.cos(np.outer(x, t)),
                   lambda rng, k: rng.random(k),
                   lambda t: np.sinc(np.asarray(t) / np.pi))

    @classmethod
    def exp_tx(cls, grid):
        """g = exp(t x), x uniform on [0, 1], I(t) = (e^t - 1)/t."""
        def truth(t):
            t = np.asarray(t, dtype=float)
            safe = np.where(t == 0, 1.0, t)
            return np.where(t == 0, 1.0, np.expm1(safe) / safe)

        return cls("exp-tx", np.asarray(grid, dtype=float),
                   lambda t, x: np.exp(np.outer(x, t)),
                   lambda rng, k: rng.random(k), truth)

    @classmethod
    def constant(cls, grid, values):
        """g(t, x) = f(t): zero variance, I_n = f for every n."""
        f = np.asarray(values, dtype=float)
        return cls("constant", np.asarray(grid, dtype=float),
                   lambda t, x: np.broadcast_to(f, (len(x), len(f))).copy(),
                   lambda rng, k: rng.random(k),
                   lambda t: f.copy())

    @classmethod
    def builtin(cls, name, grid, **kw):
        if name == "cos-tx":
            return cls.cos_tx(grid)
        if name == "exp-tx":
            return cls.exp_tx(grid)
        if name == "constant":
            return cls.constant(grid, kw.get("values", np.ones(len(grid))))
        raise ValueError(f"unknown built-in problem {name!r}")


def _draw_values(problem, n, seed, stream=_SAMPLE_STREAM):
    """(n, m) matrix of g(t_j, η_i) with one η stream for all t."""
    m = len(problem.grid)
    bs = max(1, BLOCK_BUDGET // m)
    out = np.empty((n, m))
    for b in range(-(-n // bs)):
        k = min(bs, n - b * bs)
        x = problem.sampler(block_rng(seed, stream, b), k)
        g = np.asarray(problem.integrand(problem.grid, x), dtype=float)
        if not np.all(np.isfinite(g)):
            bad = b * bs + int(np.argwhere(~np.isfinite(g))[0][0])
            raise DomainError(f"integrand not finite at draw {bad} (seed {seed})")
        out[b * bs: b * bs + k] = g
    return out


def _mean(G):
    # shifted by the first draw, so zero-variance columns are reproduced exactly
    return G[0] + (G - G[0]).mean(axis=0)


def _covariance(G):
    if len(G) < 2:
        return np.zeros((G.shape[1], G.shape[1]))
    # shifting by the first draw keeps zero-variance columns exactly zero
    return np.atleast_2d(np.cov(G - G[0], rowvar=False))


class IntegralEstimate(NamedTuple):
    grid: np.ndarray
    values: np.ndarray
    n: int


def estimate_integral(problem, n, seed):
    """I_n(t) = n^-1 Σ_{i<=n} g(t, η_i) on the grid."""
    if n < 1:
        raise ValueError("n must be at least 1")
    return IntegralEstimate(problem.grid, _mean(_draw_values(problem, n, seed)), n)


@dataclass(frozen=True)
class ConfidenceRegion:
    """{I : ||I - I_n||_L <= u0 / √n} with reliability 1 - δ."""

    grid: np.ndarray
    center: np.ndarray
    n: int
    u0: float
    radius: float
    reliability: float
    covariance_source: str
    limit_norms: np.ndarray = field(repr=False)
    certificate: Optional[dict] = None
    warnings: tuple = ()

    def distance(self, values, spec):
        diff = np.asarray(values, dtype=float) - self.center
        return float(path_norms(diff[None, :], spec)[0])

    def contains(self, values, spec):
        return self.distance(values, spec) <= self.radius

    def quantile(self, delta):
        """u0 for another δ from the same simulated limit norms."""
        return float(np.quantile(self.limit_norms, 1.0 - delta))

    def to_record(self):
        return {"n": self.n, "u0": self.u0, "radius": self.radius,
                "reliability": self.reliability, "covariance_source": self.covariance_source,
                "grid": self.grid.tolist(), "center": self.center.tolist(),
                "certificate": self.certificate, "warnings": list(self.warnings)}


def confidence_region(problem, n, spec, delta, seed, limit_replicas=DEFAULT_LIMIT_REPLICAS,
                      covariance=None, covariance_source="plug-in", certificate=None):
    """CLT confidence region for I in the norm of ``spec``.

    The covariance of g(t, η) is estimated from the same n draws
    (``covariance_source="independent"`` uses a fresh stream); ``covariance``
    overrides both. u0 is the (1 - δ)-quantile of ||ζ||_L over
    ``limit_replicas`` simulated Gaussian paths.
    """
    if not 0 < delta <= 0.5:
        raise DomainError("δ must lie in (0, 0.5]")
    if limit_replicas < MIN_LIMIT_REPLICAS:
        raise ValueError(f"limit_replicas below {MIN_LIMIT_REPLICAS}: quantile too noisy")
    G = _draw_values(problem, n, seed)
    center = _mean(G)
    notes = []
    if covariance is not None:
        R, source = np.asarray(covariance, dtype=float), "given"
    elif covariance_source == "independent":
        R, source = _covariance(_draw_values(problem, n, seed, _COVARIANCE_STREAM)), "independent"
    else:
        R, source = _covariance(G), "plug-in"
    F = _psd_factor(R)
    m = len(center)
    bs = max(1, BLOCK_BUDGET // m)
    norms = np.empty(limit_replicas)
    for b in range(-(-limit_replicas // bs)):
        k = min(bs, limit_replicas - b * bs)
        z = block_rng(seed, _LIMIT_STREAM, b).standard_normal((k, F.shape[1])) @ F.T
        norms[b * bs: b * bs + k] = path_norms(z, spec)
    u0 = float(np.quantile(norms, 1.0 - delta))
    if n < CLT_REGIME_N:
        notes.append(f"n = {n} is below the asymptotic regime; coverage is not guaranteed")
    if certificate is None:
        notes.append("no CLT certificate attached to this field")
    return ConfidenceRegion(problem.grid, center, n, u0, u0 / math.sqrt(n), 1.0 - delta,
                            source, norms, certificate, tuple(notes))


class CoverageResult(NamedTuple):
    coverage: float
    covered: int
    repetitions: int
    ci_low: float
    ci_high: float
    distances: np.ndarray
    radii: np.ndarray


def clopper_pearson(k, n, level=0.95):
    a = 1.0 - level
    lo = 0.0 if k == 0 else float(beta_dist.ppf(a / 2, k, n - k + 1))
    hi = 1.0 if k == n else float(beta_dist.ppf(1 - a / 2, k + 1, n - k))
    return lo, hi


def repetition_seed(seed, r):
    return int(np.random.SeedSequence(int(seed), spawn_key=(_REPETITION_STREAM, r)).generate_state(1)[0])


def coverage_experiment(problem, n, spec, delta, repetitions, seed,
                        limit_replicas=DEFAULT_LIMIT_REPLICAS):
    """Fraction of independent repetitions whose region contains the truth."""
    if problem.truth is None:
        raise ValueError("coverage experiments need the exact integral")
    if n < CLT_REGIME_N:
        warnings.warn(f"n = {n} is below the asymptotic regime; coverage is informational",
                      DiagnosticWarning, stacklevel=2)
    truth = np.asarray(problem.truth(problem.grid), dtype=float)
    dist = np.empty(repetitions)
    radii = np.empty(repetitions)
    for r in range(repetitions):
        reg = confidence_region(problem, n, spec, delta, repetition_seed(seed, r), limit_replicas)
        dist[r] = reg.distance(truth, spec)
        radii[r] = reg.radius
    covered = int(np.sum(dist <= radii))
    lo, hi = clopper_pearson(covered, repetitions)
    return CoverageResult(covered / repetitions, covered, repetitions, lo, hi, dist, radii)
