"""Norms of rearrangement-invariant spaces over a finite measure.

Three families are supported: Lp (including p = inf), Grand Lebesgue spaces
G(ψ), and Orlicz spaces with the Luxemburg norm. Dual families are finite
lists of functions on the same points; certificates built on them are
relative to the declared family.
"""
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .entropy import MetricMeasureSpace
from .errors import ClosedFormFallback, DiagnosticWarning, DomainError
from .psi import MomentCurve, PsiFunction, gls_norm

GAUGE_RTOL = 1e-10
ATOM_TOL = 1e-12


@dataclass(frozen=True)
class RISpaceSpec:
    kind: str
    weights: np.ndarray
    p: float = 2.0
    psi: Optional[PsiFunction] = None
    young: Optional[Callable] = field(default=None, repr=False)
    dual_family: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        object.__setattr__(self, "weights", w)
        if np.any(w < 0):
            raise ValueError("measure weights must be nonnegative")
        if self.kind == "Lp":
            if not self.p >= 1:
                raise ValueError("Lp needs p >= 1")
        elif self.kind == "GLS":
            if self.psi is None:
                raise ValueError("GLS space needs a ψ-function")
        elif self.kind == "Orlicz":
            if self.young is None:
                raise ValueError("Orlicz space needs a Young function N")
            _check_young(self.young)
        else:
            raise ValueError(f"unknown r.i. space kind {self.kind!r}")
        if self.dual_family is not None:
            g = np.atleast_2d(np.asarray(self.dual_family, dtype=float))
            if g.shape[1] != len(w):
                raise ValueError("dual family functions must live on the same points")
            object.__setattr__(self, "dual_family", g)

    @classmethod
    def lp(cls, p, weights, dual_family=None):
        return cls("Lp", weights, p=float(p), dual_family=dual_family)

    @classmethod
    def gls(cls, psi, weights, dual_family=None):
        return cls("GLS", weights, psi=psi, dual_family=dual_family)

    @classmethod
    def orlicz(cls, young, weights, dual_family=None):
        return cls("Orlicz", weights, young=young, dual_family=dual_family)

    @property
    def total_measure(self):
        return math.fsum(self.weights)

    @property
    def dual_exponent(self):
        if self.kind != "Lp":
            raise ValueError("dual exponent is defined for Lp only")
        if self.p == 1:
            return math.inf
        if math.isinf(self.p):
            return 1.0
        return self.p / (self.p - 1.0)

    def with_dual_family(self, family):
        return RISpaceSpec(self.kind, self.weights, self.p, self.psi, self.young, family)


def _check_young(N):
    u = np.linspace(0.0, 4.0, 41)
    v = np.asarray(N(u), dtype=float)
    if v[0] != 0:
        raise ValueError("Young function must vanish at 0")
    fin = np.isfinite(v)
    vf = v[fin]
    if np.any(np.diff(vf) < -1e-12 * max(1.0, float(np.abs(vf).max()))):
        raise ValueError("Young function must be nondecreasing")
    if len(vf) >= 3 and np.any(np.diff(vf, 2) < -1e-9 * max(1.0, float(np.abs(vf).max()))):
        raise ValueError("Young function must be convex")


def _canonical(f, w):
    """Sort (|f_i|, μ_i) pairs so every norm is independent of point order."""
    a = np.abs(np.asarray(f, dtype=float))
    order = np.lexsort((w, a))
    return a[order], w[order]


def _lp(a, w, p):
    if math.isinf(p):
        live = a[w > 0]
        return float(live.max()) if live.size else 0.0
    m = float(a.max()) if a.size else 0.0
    if m == 0:
        return 0.0
    return m * math.fsum((w * (a / m) ** p).tolist()) ** (1.0 / p)


def _luxemburg(a, w, N):
    m = float(a.max()) if a.size else 0.0
    if m == 0:
        return 0.0

    def load(lam):
        with np.errstate(over="ignore"):
            vals = np.asarray(N(a / lam), dtype=float)
        return math.fsum((w * vals).tolist()) if np.all(np.isfinite(vals)) else math.inf

    hi = m
    for _ in range(2000):
        if load(hi) <= 1.0:
            break
        hi *= 2.0
    else:
        raise DomainError("Orlicz gauge unbounded: Σ μ N(|f|/λ) stays above 1")
    lo = hi
    for _ in range(2000):
        lo *= 0.5
        if load(lo) > 1.0:
            break
        if lo < 1e-300 * m:
            raise DomainError("Orlicz gauge degenerate: N too flat near the origin")
        hi = lo
    while hi - lo > GAUGE_RTOL * hi:
        mid = 0.5 * (lo + hi)
        if load(mid) <= 1.0:
            hi = mid
        else:
            lo = mid
    return hi


def ri_norm(f, spec):
    """Norm of the point-function ``f`` in the space described by ``spec``."""
    f = np.asarray(f, dtype=float)
    if f.shape != spec.weights.shape:
        raise ValueError("function and measure must have the same length")
    if not np.all(np.isfinite(f)):
        raise DomainError("function values must be finite")
    a, w = _canonical(f, spec.weights)
    if spec.kind == "Lp":
        return _lp(a, w, spec.p)
    if spec.kind == "GLS":
        if not np.any(a > 0):
            return 0.0
        return gls_norm(MomentCurve.from_samples(a, w), spec.psi)
    return _luxemburg(a, w, spec.young)


def assemble_indicator(weights, delta):
    """Greedy set of atoms (heaviest first, then by id) with total weight δ.

    Returns the 0/1 indicator, or None when the atoms cannot hit δ within
    the atom tolerance.
    """
    w = np.asarray(weights, dtype=float)
    order = np.lexsort((np.arange(len(w)), -w))
    ind = np.zeros(len(w))
    acc = 0.0
    for i in order:
        if w[i] > 0 and acc + w[i] <= delta + ATOM_TOL:
            acc += w[i]
            ind[i] = 1.0
    return ind if abs(acc - delta) <= ATOM_TOL else None


def fundamental_function(spec, delta):
    """φ(L, δ): norm of the indicator of a set of measure δ.

    When the atoms cannot realize δ, the closed form for the space family is
    used and a :class:`ClosedFormFallback` warning is raised.
    """
    total = spec.total_measure
    if not 0 < delta <= total * (1 + ATOM_TOL):
        raise DomainError(f"δ must lie in (0, μ(T)] = (0, {total:g}]")
    ind = assemble_indicator(spec.weights, delta)
    if ind is not None:
        return ri_norm(ind, spec)
    warnings.warn(f"atoms cannot realize δ={delta:g}; using the closed form",
                  ClosedFormFallback, stacklevel=2)
    if spec.kind == "Lp":
        return 1.0 if math.isinf(spec.p) else delta ** (1.0 / spec.p)
    if spec.kind == "GLS":
        curve = MomentCurve(lambda p: delta ** (1.0 / np.asarray(p)), label="indicator")
        return gls_norm(curve, spec.psi)
    # Luxemburg norm of an indicator is 1 / N^{-1}(1 / δ)
    target = 1.0 / delta
    lo, hi = 0.0, 1.0
    while spec.young(hi) < target:
        hi *= 2.0
    while hi - lo > GAUGE_RTOL * hi:
        mid = 0.5 * (lo + hi)
        if spec.young(mid) < target:
            lo = mid
        else:
            hi = mid
    return 1.0 / hi


@dataclass(frozen=True)
class DualFamilyGeometry:
    """Pairwise L1(μ) distances of a dual family and its diameter."""

    distances: np.ndarray
    diameter: float
    family: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)

    def as_space(self):
        k = len(self.family)
        return MetricMeasureSpace(self.distances, np.full(k, 1.0 / k), check=False)


def dual_geometry(spec, symmetrize=False):
    """ρ(g1, g2) = ||g1 - g2||_{L1(μ)} over the declared dual family.

    ``symmetrize`` adds -g for every member. Members of an Lp dual family
    whose associate norm is not 1 trigger a :class:`DiagnosticWarning`.
    """
    if spec.dual_family is None or len(spec.dual_family) == 0:
        raise ValueError("space spec has no dual family")
    g = spec.dual_family
    if symmetrize:
        g = np.vstack([g, -g])
    w = spec.weights
    if spec.kind == "Lp":
        q = spec.dual_exponent
        for i, gi in enumerate(spec.dual_family):
            nrm = _lp(np.abs(gi), w, q)
            if abs(nrm - 1.0) > 1e-8:
                warnings.warn(f"dual member {i} has associate norm {nrm:.6g}, not 1",
                              DiagnosticWarning, stacklevel=2)
    k = len(g)
    dist = np.zeros((k, k))
    for i in range(k):
        for j in range(i + 1, k):
            dist[i, j] = dist[j, i] = math.fsum((w * np.abs(g[i] - g[j])).tolist())
    return DualFamilyGeometry(dist, float(dist.max()), g, w)


def functional_sup(f, spec):
    """max over the dual family of l_g(f) = Σ μ_i f_i g_i."""
    if spec.dual_family is None:
        raise ValueError("space spec has no dual family")
    return float(np.max(spec.dual_family @ (spec.weights * np.asarray(f, dtype=float))))
