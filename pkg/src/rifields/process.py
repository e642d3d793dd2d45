"""Random fields on finite parameter sets, their distances and sums.

Every draw goes through :func:`block_rng`: a block of replicas of S_n uses
the generator seeded by ``SeedSequence(seed, spawn_key=(n, block))``, so
results do not depend on the thread count. Plain samples are S_1.
"""
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional

import numpy as np
from scipy.stats import ks_2samp

from .errors import CovarianceError, DomainError
from .psi import (ROSENTHAL_CONSTANT, ROSENTHAL_CONSTANT_SYMMETRIC, MomentCurve, gls_norm,
                  rosenthal_transform)
from .rispaces import ri_norm

BLOCK_BUDGET = 1 << 21  # doubles drawn per block
BOOTSTRAP = 64
MIN_MIXED_REPLICAS = 100
PSD_TOL = 1e-8
_LIMIT_STREAM = 0
_BOOT_STREAM = 1 << 30


def block_rng(seed, *key):
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key)))


def _psd_factor(cov):
    """Symmetric square root with clipped negative eigenvalues."""
    c = np.asarray(cov, dtype=float)
    if c.ndim != 2 or c.shape[0] != c.shape[1]:
        raise CovarianceError("covariance must be square")
    if not np.allclose(c, c.T, rtol=0, atol=1e-12 * max(1.0, float(np.abs(c).max()))):
        raise CovarianceError("covariance must be symmetric")
    c = 0.5 * (c + c.T)
    vals, vecs = np.linalg.eigh(c)
    if vals.min() < -PSD_TOL * max(float(np.trace(c)), 1e-300):
        raise CovarianceError(f"covariance is not positive semidefinite (min eigenvalue {vals.min():.3g})")
    return vecs * np.sqrt(np.clip(vals, 0.0, None))


@dataclass(frozen=True)
class ProcessModel:
    """Law of a field ξ(t) on points t = 0..n_points-1.

    ``sampler(rng, k)`` returns a (k, n_points) array of independent copies.
    ``marginal`` and ``increment`` optionally give exact moment curves of
    ξ(t) and ξ(t) - ξ(s).
    """

    kind: str
    n_points: int
    sampler: Callable = field(repr=False)
    covariance: Optional[np.ndarray] = field(default=None, repr=False)
    mean_zero: bool = True
    marginal: Optional[Callable] = field(default=None, repr=False)
    increment: Optional[Callable] = field(default=None, repr=False)
    params: dict = field(default_factory=dict)

    @classmethod
    def gaussian_field(cls, cov, params=None):
        cov = np.asarray(cov, dtype=float)
        F = _psd_factor(cov)
        d = np.diag(cov)

        def sampler(rng, k):
            return rng.standard_normal((k, F.shape[1])) @ F.T

        def marginal(t):
            return MomentCurve.gaussian(math.sqrt(max(d[t], 0.0)))

        def increment(t, s):
            return MomentCurve.gaussian(math.sqrt(max(d[t] - 2 * cov[t, s] + d[s], 0.0)))

        return cls("gaussian-field", cov.shape[0], sampler, cov, True, marginal, increment,
                   dict(params or {}))

    @classmethod
    def brownian(cls, t):
        t = np.asarray(t, dtype=float)
        if np.any(t < 0):
            raise ValueError("Brownian times must be nonnegative")
        return cls.gaussian_field(np.minimum.outer(t, t), {"family": "brownian"})

    @classmethod
    def squared_exponential(cls, t, length=1.0, variance=1.0):
        t = np.asarray(t, dtype=float)
        cov = variance * np.exp(-0.5 * ((t[:, None] - t[None, :]) / length) ** 2)
        return cls.gaussian_field(cov, {"family": "squared-exponential", "length": length})

    @classmethod
    def bounded_field(cls, basis, distribution="rademacher", params=None):
        """ξ = Σ_k U_k b_k with i.i.d. bounded U_k of mean 0 and variance 1."""
        B = np.atleast_2d(np.asarray(basis, dtype=float))
        if distribution == "rademacher":
            def draw(rng, shape):
                return 2.0 * rng.integers(0, 2, size=shape) - 1.0
        elif distribution == "uniform":
            root3 = math.sqrt(3.0)

            def draw(rng, shape):
                return rng.uniform(-root3, root3, size=shape)
        else:
            raise ValueError(f"unknown coefficient distribution {distribution!r}")

        def sampler(rng, k):
            return draw(rng, (k, B.shape[0])) @ B

        p = {"distribution": distribution, "terms": B.shape[0]}
        p.update(params or {})
        return cls("bounded-field", B.shape[1], sampler, B.T @ B, True, None, None, p)

    @classmethod
    def lacunary(cls, t, coefficients, ratio=2):
        """Σ_k a_k (ε_k cos(n_k t) + ε'_k sin(n_k t)), n_k = ratio**k, Rademacher ε."""
        if not ratio > 1:
            raise ValueError("lacunary frequencies need a ratio above 1")
        a = np.asarray(coefficients, dtype=float)
        t = np.asarray(t, dtype=float)
        freq = float(ratio) ** np.arange(1, len(a) + 1)
        rows = np.concatenate([a[:, None] * np.cos(np.outer(freq, t)),
                               a[:, None] * np.sin(np.outer(freq, t))])
        m = cls.bounded_field(rows, "rademacher", {"family": "lacunary", "ratio": ratio})
        return ProcessModel("lacunary", m.n_points, m.sampler, m.covariance, True,
                            None, None, m.params)

    @classmethod
    def deterministic(cls, values):
        """ξ ≡ values on every draw."""
        v = np.asarray(values, dtype=float)

        def sampler(rng, k):
            return np.broadcast_to(v, (k, len(v))).copy()

        return cls("deterministic", len(v), sampler, np.zeros((len(v), len(v))), False,
                   lambda t: MomentCurve.constant(v[t]),
                   lambda t, s: MomentCurve.constant(v[t] - v[s]), {"values": v.tolist()})

    @classmethod
    def from_sampler(cls, sampler, n_points, covariance=None, mean_zero=False, params=None):
        cov = None if covariance is None else np.asarray(covariance, dtype=float)
        return cls("user-sampler", int(n_points), sampler, cov, mean_zero, None, None,
                   dict(params or {}))

    def sample(self, seed):
        return sample_sn(self, 1, seed)


class DistanceEstimate(NamedTuple):
    value: float
    stderr: float
    method: str


class NormalizedSum(NamedTuple):
    n: int
    values: np.ndarray


def _block_size(model, n):
    return max(1, BLOCK_BUDGET // (n * model.n_points))


def sample_sn_many(model, n, replicas, seed, threads=1):
    """Independent replicas of S_n = n^(-1/2) Σ_{i<=n} ξ_i, shape (replicas, points)."""
    if n < 1:
        raise ValueError("n must be at least 1")
    if n > 1 and not model.mean_zero:
        raise ValueError("normalized sums need a mean-zero field")
    bs = _block_size(model, n)
    nblocks = -(-replicas // bs)
    out = np.empty((replicas, model.n_points))

    def run(b):
        k = min(bs, replicas - b * bs)
        x = np.asarray(model.sampler(block_rng(seed, n, b), k * n), dtype=float)
        if x.shape != (k * n, model.n_points):
            raise ValueError(f"sampler returned shape {x.shape}, expected {(k * n, model.n_points)}")
        if n > 1:
            x = x.reshape(k, n, model.n_points).sum(axis=1) / math.sqrt(n)
        out[b * bs: b * bs + k] = x

    if threads > 1 and nblocks > 1:
        with ThreadPoolExecutor(threads) as ex:
            list(ex.map(run, range(nblocks)))
    else:
        for b in range(nblocks):
            run(b)
    return out


def sample_sn(model, n, seed):
    """One path of S_n; n = 1 is a plain sample of the field."""
    return NormalizedSum(n, sample_sn_many(model, n, 1, seed)[0])


def sample_paths(model, replicas, seed, threads=1):
    return sample_sn_many(model, 1, replicas, seed, threads)


def _limit_model(model):
    if model.covariance is None:
        raise CovarianceError("the Gaussian limit needs a covariance")
    return ProcessModel.gaussian_field(model.covariance)


def _p_cap(replicas):
    return math.log(replicas)


def _empirical_gls(values, psi, seed, stream, bootstrap=BOOTSTRAP):
    """G(ψ)-norm of the empirical law with p capped at ln(replicas) and a bootstrap error."""
    x = np.asarray(values, dtype=float)
    cap = _p_cap(len(x))
    if not cap > psi.a:
        raise DomainError(f"{len(x)} replicas cap p at {cap:.3g}, below the ψ support")
    support = (psi.a, min(cap, psi.b))
    value = gls_norm(MomentCurve.from_samples(x, support=support), psi)
    if bootstrap <= 1:
        return value, math.nan
    rng = block_rng(seed, _BOOT_STREAM, stream)
    boots = [gls_norm(MomentCurve.from_samples(x[rng.integers(0, len(x), len(x))], support=support), psi)
             for _ in range(bootstrap)]
    return value, float(np.std(boots, ddof=1))


def natural_distance(model, psi, t, s, replicas=None, seed=None):
    """d_ψ(t, s) = ||ξ(t) - ξ(s)||_Gψ, exact when the model has increment curves."""
    if t == s:
        return DistanceEstimate(0.0, 0.0, "exact")
    if model.increment is not None:
        return DistanceEstimate(gls_norm(model.increment(t, s), psi), 0.0, "oracle")
    if replicas is None or seed is None:
        raise DomainError("no exact moments for this model; pass replicas and seed")
    x = sample_paths(model, replicas, seed)
    v, se = _empirical_gls(x[:, t] - x[:, s], psi, seed, t * model.n_points + s)
    return DistanceEstimate(v, se, "monte-carlo")


def natural_distance_matrix(model, psi, replicas=None, seed=None):
    """Matrix of d_ψ over all point pairs (zero diagonal, exactly symmetric)."""
    n = model.n_points
    D = np.zeros((n, n))
    if model.kind == "gaussian-field":
        # ||σZ||_Gψ = σ ||Z||_Gψ, so one norm evaluation serves every pair
        unit = gls_norm(MomentCurve.gaussian(1.0), psi)
        c, d = model.covariance, np.diag(model.covariance)
        sd = np.sqrt(np.clip(d[:, None] - 2 * c + d[None, :], 0.0, None))
        D = unit * np.maximum(sd, sd.T)
        np.fill_diagonal(D, 0.0)
        return D
    if model.increment is None:
        if replicas is None or seed is None:
            raise DomainError("no exact moments for this model; pass replicas and seed")
        x = sample_paths(model, replicas, seed)
    for i in range(n):
        for j in range(i + 1, n):
            if model.increment is not None:
                v = gls_norm(model.increment(i, j), psi)
            else:
                v = _empirical_gls(x[:, i] - x[:, j], psi, seed, 0, bootstrap=0)[0]
            D[i, j] = D[j, i] = v
    return D


def _rosenthal_parts(psi):
    if psi.name == "rosenthal" and psi.base is not None:
        return psi.base, psi
    return psi, rosenthal_transform(psi)


def rho_estimates(model, psi, t, s, n_values=(1, 4, 16), replicas=10_000, seed=0):
    """Monte Carlo ||S_n(t) - S_n(s)||_GψR for each n, p capped at ln(replicas)."""
    if not model.mean_zero:
        raise ValueError("the Rosenthal distance needs a mean-zero field")
    _, psi_r = _rosenthal_parts(psi)
    out = {}
    for n in n_values:
        x = sample_sn_many(model, n, replicas, seed)
        v, se = _empirical_gls(x[:, t] - x[:, s], psi_r, seed, n)
        out[n] = DistanceEstimate(v, se, "monte-carlo")
    return out


def rho_distance(model, psi, t, s, n_values=(1, 4, 16), replicas=None, seed=None):
    """ρ(t, s) = sup_n ||S_n(t) - S_n(s)||_GψR.

    With exact increment curves the Rosenthal bound ||ξ(t) - ξ(s)||_GψR
    (computed from the base ψ restricted to p >= 2) is returned; otherwise
    the maximum Monte Carlo estimate over ``n_values`` (a lower estimate).
    """
    if not model.mean_zero:
        raise ValueError("the Rosenthal distance needs a mean-zero field")
    if t == s:
        return DistanceEstimate(0.0, 0.0, "exact")
    base, _ = _rosenthal_parts(psi)
    if model.increment is not None:
        c = model.increment(t, s)
        v = gls_norm(MomentCurve(c.func, (2.0, c.support[1]), c.label), base)
        return DistanceEstimate(v, 0.0, "rosenthal-bound")
    if replicas is None or seed is None:
        raise DomainError("no exact moments for this model; pass replicas and seed")
    est = rho_estimates(model, psi, t, s, n_values, replicas, seed)
    best = max(est.values(), key=lambda e: e.value)
    return DistanceEstimate(best.value, best.stderr, "lower-estimate")


class MixedNormEstimate(NamedTuple):
    value: float
    stderr: float
    replicas: int
    p_cap: float
    norms: np.ndarray


def path_norms(paths, spec):
    """ri_norm of every row of ``paths``; vectorized for Lp."""
    paths = np.asarray(paths, dtype=float)
    if not np.all(np.isfinite(paths)):
        raise DomainError("non-finite path values")
    if spec.kind == "Lp":
        a = np.abs(paths)
        if math.isinf(spec.p):
            return a[:, spec.weights > 0].max(axis=1)
        m = a.max(axis=1)
        safe = np.where(m > 0, m, 1.0)
        return m * (((a / safe[:, None]) ** spec.p) @ spec.weights) ** (1.0 / spec.p)
    return np.array([ri_norm(row, spec) for row in paths])


def empirical_mixed_norm(model, spec, psi, replicas, seed, threads=1):
    """|| ||ξ||_L ||_Gψ from ``replicas`` sampled paths, p capped at ln(replicas)."""
    if replicas < MIN_MIXED_REPLICAS:
        raise ValueError(f"mixed-norm estimates need at least {MIN_MIXED_REPLICAS} replicas")
    paths = sample_paths(model, replicas, seed, threads)
    try:
        norms = path_norms(paths, spec)
    except DomainError as exc:
        raise DomainError(f"{exc} (seed {seed})") from None
    v, se = _empirical_gls(norms, psi, seed, 0)
    return MixedNormEstimate(v, se, replicas, _p_cap(replicas), norms)


def clt_empirical_check(model, spec, n_values, replicas, seed, threads=1):
    """Two-sample KS distance between ||S_n||_L and ||S_∞||_L for each n.

    S_∞ is the centered Gaussian field with the model covariance; one sample
    of it serves as the common reference.
    """
    if not model.mean_zero:
        raise ValueError("the CLT check needs a mean-zero field")
    limit = _limit_model(model)
    ref = path_norms(_limit_sample(limit, replicas, seed, threads), spec)
    rows = []
    for n in n_values:
        sn = path_norms(sample_sn_many(model, n, replicas, seed, threads), spec)
        res = ks_2samp(sn, ref)
        rows.append({"n": int(n), "ks": float(res.statistic), "pvalue": float(res.pvalue),
                     "replicas": int(replicas)})
    return rows


def _limit_sample(limit, replicas, seed, threads):
    bs = _block_size(limit, 1)
    out = np.empty((replicas, limit.n_points))
    for b in range(-(-replicas // bs)):
        k = min(bs, replicas - b * bs)
        out[b * bs: b * bs + k] = limit.sampler(block_rng(seed, _LIMIT_STREAM, b), k)
    return out


def rosenthal_check(increment_sampler, increment_moment, p_values, n_values, replicas, seed,
                    symmetric=False, z=2.326):
    """Empirical |S_n|_p against (C_R p / ln p) |ζ|_p for i.i.d. centered ζ.

    ``increment_sampler(rng, shape)`` draws ζ; ``increment_moment(p)`` is the
    exact |ζ|_p. Each row carries the upper confidence limit of |S_n|_p
    (normal approximation for the mean of |S_n|^p at quantile ``z``).
    """
    c = ROSENTHAL_CONSTANT_SYMMETRIC if symmetric else ROSENTHAL_CONSTANT
    rows = []
    for n in n_values:
        s = increment_sampler(block_rng(seed, n, 0), (replicas, n)).sum(axis=1) / math.sqrt(n)
        a = np.abs(s)
        for p in p_values:
            m = a ** p
            mean, se = float(m.mean()), float(m.std(ddof=1) / math.sqrt(replicas))
            bound = c * p / math.log(p) * increment_moment(p)
            upper = (mean + z * se) ** (1.0 / p)
            rows.append({"n": int(n), "p": float(p), "empirical": mean ** (1.0 / p),
                         "upper": upper, "bound": bound, "holds": bool(upper <= bound)})
    return rows


def functional_apply(paths, g, weights):
    """l_g(ξ) = Σ_i μ_i ξ(t_i) g_i for one path or a stack of paths."""
    paths = np.asarray(paths, dtype=float)
    g = np.asarray(g, dtype=float)
    w = np.asarray(weights, dtype=float)
    if g.shape != w.shape or paths.shape[-1] != g.shape[0]:
        raise ValueError("path, functional and weights must share the point count")
    return paths @ (w * g)
