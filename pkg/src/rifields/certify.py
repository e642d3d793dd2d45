"""Entropy-series and entropy-integral certificates.

Two sufficient conditions are evaluated here. The series condition sums
q^n N(q^(n+1)) r(q^n) over the scales q^n and minimizes over q; the integral
condition integrates exp(v_*(2 + ln N(ε))) over (0, D] with v(y) = ln ψ(1/y).
Their CLT variants replace ψ by its Rosenthal transform. Covering numbers
come either from a closed-form model (power law, log-corrected power law,
constant) or from a finite space, where N and the ball function are step
functions of the radius and the series is summed exactly.
"""
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple, Optional

import numpy as np
from scipy.special import expit, zeta

from . import kernels
from ._search import golden_min
from .entropy import MetricMeasureSpace, ball_function, covering_number
from .errors import DomainError
from .psi import PsiFunction, rosenthal_transform
from .rispaces import DualFamilyGeometry
from .transforms import INF, ScalarFunctionGrid, TailBoundCurve, co_transform

SCAN_POINTS = 64
SCAN_LOGIT = 12.0
Q_TOL = 1e-8
MIXED_NORM_FACTOR = 9.0
_P_HI = 1e12
_V_NODES = 512
_GL_ORDER = 16
_MAX_LEVELS = 1000
_DIVERGENCE_LEVELS = 8


@dataclass(frozen=True)
class EntropyModel:
    """Covering numbers N(ε) and ball function r(δ) of the parameter set.

    Kinds: ``power-law`` (N = ε^-κ, r = δ^s), ``log-corrected``
    (N = ε^-(1+s) |ln ε|^-β, r = δ^s), ``constant`` (N ≡ count,
    r ≡ measure) and ``empirical`` (a finite space; ``ball_space`` may carry
    a different distance for r).
    """

    kind: str
    kappa: Optional[float] = None
    s: Optional[float] = None
    beta: Optional[float] = None
    count: float = 1.0
    measure: float = 1.0
    space: Optional[MetricMeasureSpace] = field(default=None, repr=False)
    ball_space: Optional[MetricMeasureSpace] = field(default=None, repr=False)

    @classmethod
    def power_law(cls, kappa, s, strict=True):
        if not kappa > 0 or not s > 0:
            raise ValueError("power-law model needs κ > 0 and s > 0")
        if strict and not kappa < 1 + s:
            raise ValueError(f"power-law model needs κ < 1 + s (got κ={kappa}, s={s})")
        return cls("power-law", kappa=float(kappa), s=float(s))

    @classmethod
    def log_corrected(cls, s, beta):
        if not s > 0:
            raise ValueError("log-corrected model needs s > 0")
        if not beta > 1:
            raise ValueError(f"log-corrected model needs β > 1 (got β={beta})")
        return cls("log-corrected", kappa=1.0 + float(s), s=float(s), beta=float(beta))

    @classmethod
    def constant(cls, count=1.0, measure=1.0):
        return cls("constant", count=float(count), measure=float(measure))

    @classmethod
    def empirical(cls, space, ball_space=None):
        return cls("empirical", space=space, ball_space=ball_space or space)

    @property
    def gap(self):
        """Δ = 1 + s - κ."""
        return 1.0 + self.s - self.kappa

    @property
    def ratio(self):
        """λ = κ / Δ."""
        return self.kappa / self.gap

    # -- step functions for finite spaces --------------------------------

    @cached_property
    def _steps(self):
        sp, bs = self.space, self.ball_space
        nd = np.unique(sp.dist[sp.dist > 0])
        rd = np.unique(bs.dist[bs.dist > 0])
        tiny_n = nd[0] / 2 if nd.size else 1.0
        tiny_r = rd[0] / 2 if rd.size else 1.0
        n_vals = np.array([covering_number(sp, tiny_n).upper] +
                          [covering_number(sp, e).upper for e in nd], dtype=float)
        r_vals = np.array([ball_function(bs, tiny_r)] +
                          [ball_function(bs, e) for e in rd], dtype=float)
        return nd, n_vals, rd, r_vals

    def N(self, eps):
        eps = np.asarray(eps, dtype=float)
        if self.kind == "power-law":
            out = eps ** -self.kappa
        elif self.kind == "log-corrected":
            out = eps ** -self.kappa * np.abs(np.log(eps)) ** -self.beta
        elif self.kind == "constant":
            out = np.full(eps.shape, self.count)
        else:
            nd, n_vals, _, _ = self._steps
            out = n_vals[np.searchsorted(nd, eps, side="right")]
        return out if out.ndim else float(out)

    def r(self, delta):
        delta = np.asarray(delta, dtype=float)
        if self.kind in ("power-law", "log-corrected"):
            out = np.minimum(delta, 1.0) ** self.s
        elif self.kind == "constant":
            out = np.full(delta.shape, self.measure)
        else:
            _, _, rd, r_vals = self._steps
            out = r_vals[np.searchsorted(rd, delta, side="right")]
        return out if out.ndim else float(out)

    def breakpoints(self):
        """Radii at which the empirical N or r may change."""
        nd, _, rd, _ = self._steps
        return np.union1d(nd, rd)

    def to_record(self):
        rec = {"kind": self.kind}
        if self.kind == "power-law":
            rec.update(kappa=self.kappa, s=self.s)
        elif self.kind == "log-corrected":
            rec.update(s=self.s, beta=self.beta)
        elif self.kind == "constant":
            rec.update(count=self.count, measure=self.measure)
        else:
            rec.update(points=self.space.n)
        return rec


# -- series -------------------------------------------------------------------


def _sigma_empirical(model, q):
    lq = math.log(q)
    cuts = set()
    for b in model.breakpoints():
        k = int(math.floor(math.log(b) / lq))
        cuts.update(range(max(k - 2, 0), k + 3))
    cuts.add(0)
    starts = sorted(cuts)
    total = 0.0
    for a, nxt in zip(starts, starts[1:] + [None]):
        n_term = model.N(q ** (a + 1)) * model.r(q ** a)
        span = q ** a - (q ** nxt if nxt is not None else 0.0)
        total += n_term * span / (1.0 - q)
    return total


def _log_term(model, q, n):
    # ln of q^n N(q^(n+1)) r(q^n) for the analytic kinds, safe for large n
    lq = math.log(q)
    out = n * lq - model.kappa * (n + 1) * lq + model.s * n * lq
    if model.kind == "log-corrected":
        out -= model.beta * math.log((n + 1) * -lq)
    return out


def _sigma_numeric(model, q, tol):
    total, n = 0.0, 0
    while True:
        term = math.exp(_log_term(model, q, n))
        total += term
        n += 1
        if model.kind == "power-law":
            rho = q ** model.gap
            rem = term * rho / (1.0 - rho)
            done = rem <= tol * total
        else:
            # Euler-Maclaurin tail of c Σ_{k>n} k^-β, k = n + 1 is the next index
            c = q ** -model.kappa * abs(math.log(q)) ** -model.beta
            k, b = n + 1, model.beta
            rem = c * (k ** (1 - b) / (b - 1) + 0.5 * k ** -b + b * k ** (-b - 1) / 12.0)
            done = n >= 2000
        if done or n > 200_000:
            return total + rem


def sigma_series(model, q, tol=1e-12, method="auto"):
    """σ(q) = Σ_{n>=0} q^n N(q^(n+1)) r(q^n).

    ``method`` is ``"closed"`` (closed forms of the analytic kinds),
    ``"numeric"`` (term-by-term with a remainder bound) or ``"auto"``.
    Divergent analytic series return ``inf``.
    """
    if not 0 < q < 1:
        raise DomainError("q must lie in (0, 1)")
    if model.kind == "empirical":
        return _sigma_empirical(model, q)
    if model.kind == "constant":
        return model.count * model.measure / (1.0 - q)
    if model.kind == "power-law" and model.gap <= 0:
        return INF
    if method == "numeric":
        return _sigma_numeric(model, q, tol)
    if model.kind == "power-law":
        return q ** -model.kappa / (1.0 - q ** model.gap)
    return q ** -model.kappa * abs(math.log(q)) ** -model.beta * float(zeta(model.beta))


class SigmaMinimum(NamedTuple):
    q0: float
    value: float
    boundary: bool
    status: str


def minimize_sigma(model, tol=Q_TOL, series=sigma_series):
    """Coarse logit-spaced scan over q, then golden-section refinement."""
    qs = expit(np.linspace(-SCAN_LOGIT, SCAN_LOGIT, SCAN_POINTS))
    vals = np.array([series(model, float(q)) for q in qs])
    if not np.any(np.isfinite(vals)):
        return SigmaMinimum(math.nan, INF, False, "diverged")
    k = int(np.nanargmin(np.where(np.isfinite(vals), vals, np.inf)))
    lo = qs[max(k - 1, 0)]
    hi = qs[min(k + 1, SCAN_POINTS - 1)]
    if k == 0:
        lo = qs[0] * 0.5
    q0, v0 = golden_min(lambda q: series(model, q), lo, hi, xtol=tol)
    if vals[k] < v0:
        q0, v0 = float(qs[k]), float(vals[k])
    boundary = k in (0, SCAN_POINTS - 1)
    return SigmaMinimum(float(q0), float(v0), boundary, "certified")


# -- integral -------------------------------------------------------------------


def _v_grid(psi):
    """v(y) = ln ψ(1/y) sampled on y in (1/b, 1/a)."""
    p = np.geomspace(psi.a * (1 + 1e-9),
                     psi.b * (1 - 1e-9) if math.isfinite(psi.b) else _P_HI, _V_NODES)
    y = (1.0 / p)[::-1]
    y_lo, y_hi = y[0], y[-1]

    def v(z):
        return np.log(psi(1.0 / np.clip(z, y_lo, y_hi)))

    return ScalarFunctionGrid(y, v(y), "forbid", v, "v")


class IntegralValue(NamedTuple):
    value: float
    converged: bool
    levels: int


def _integrand_factory(psi):
    vg = _v_grid(psi)

    def integrand(log_n):
        return np.exp(co_transform(vg, 2.0 + np.asarray(log_n, dtype=float)))

    return integrand


def _empirical_integral(integrand, nd, n_vals, D):
    edges = np.concatenate([[0.0], nd[nd < D], [D]])
    counts = np.asarray(n_vals[: len(edges) - 1], dtype=float)
    widths = np.diff(edges)
    return float(np.sum(widths * integrand(np.log(counts))))


def _dyadic_integral(integrand, N, D, tol):
    x, w = np.polynomial.legendre.leggauss(_GL_ORDER)
    total, prev, growing = 0.0, None, 0
    level = 0
    while level < _MAX_LEVELS:
        ks = np.arange(level, min(level + 8, _MAX_LEVELS))
        hi = D * 2.0 ** -ks
        lo = hi / 2.0
        mid = 0.5 * (hi + lo)
        half = 0.5 * (hi - lo)
        eps = mid[:, None] + half[:, None] * x[None, :]
        n_eps = np.maximum(np.asarray(N(eps), dtype=float), 1.0)
        f = integrand(np.log(n_eps).ravel()).reshape(eps.shape)
        pieces = half * (f @ w)
        for c in pieces:
            level += 1
            if not np.isfinite(c):
                return IntegralValue(INF, False, level)
            total += c
            if prev is not None and c >= prev:
                growing += 1
                if growing >= _DIVERGENCE_LEVELS:
                    return IntegralValue(INF, False, level)
            else:
                growing = 0
            if prev is not None and c < prev:
                rate = c / prev
                if c * rate / (1.0 - rate) <= tol * total:
                    return IntegralValue(total, True, level)
            prev = c
    return IntegralValue(total, False, level)


def entropy_integral(source, psi, diameter=None, tol=1e-10):
    """∫_0^D exp(v_*(2 + ln N(ε))) dε with v(y) = ln ψ(1/y).

    ``source`` is a :class:`DualFamilyGeometry` (N counts ρ-balls of the dual
    family, D its diameter) or an :class:`EntropyModel` with an explicit
    ``diameter``. Divergence returns ``inf``.
    """
    return _entropy_integral(source, psi, diameter, tol).value


def _entropy_integral(source, psi, diameter, tol):
    integrand = _integrand_factory(psi)
    if isinstance(source, DualFamilyGeometry):
        D = source.diameter if diameter is None else diameter
        if not D > 0:
            raise DomainError("dual family has zero diameter; the integral is degenerate")
        model = EntropyModel.empirical(source.as_space())
    else:
        model = source
        D = diameter if diameter is not None else (
            model.space.diameter if model.kind == "empirical" else None)
        if D is None:
            raise ValueError("an analytic entropy model needs an explicit diameter")
        if not D > 0:
            raise DomainError("diameter must be positive")
    if model.kind == "empirical":
        nd, n_vals, _, _ = model._steps
        return IntegralValue(_empirical_integral(integrand, nd, n_vals, D), True, 0)
    if model.kind == "constant":
        return IntegralValue(D * float(integrand(math.log(max(model.count, 1.0)))), True, 0)
    return _dyadic_integral(integrand, model.N, D, tol)


# -- certificates ---------------------------------------------------------------


@dataclass
class CertificateReport:
    """Outcome of one certificate evaluation.

    ``theorem`` is one of ``series``, ``integral``, ``clt-series``,
    ``clt-integral``. ``value`` is the minimized series or the integral;
    ``mixed_norm_bound`` bounds the G(ψ)-norm of the path L-norm.
    """

    theorem: str
    value: float
    status: str
    mixed_norm_bound: float
    psi: PsiFunction
    optimal_q: Optional[float] = None
    tail_curve: Optional[TailBoundCurve] = None
    flags: list = field(default_factory=list)
    notes: dict = field(default_factory=dict)

    @property
    def certified(self):
        return self.status == "certified"

    def to_record(self):
        rec = {
            "theorem": self.theorem,
            "value": _num(self.value),
            "status": self.status,
            "optimal_q": _num(self.optimal_q),
            "mixed_norm_bound": _num(self.mixed_norm_bound),
            "psi": self.psi.to_record(),
            "flags": list(self.flags),
            "notes": dict(self.notes),
        }
        if self.tail_curve is not None:
            x, b = self.tail_curve.table()
            rec["tail_curve"] = {"x": [float(v) for v in x], "bound": [float(v) for v in b]}
        return rec


def _num(v):
    if v is None:
        return None
    v = float(v)
    if math.isinf(v):
        return "inf"
    if math.isnan(v):
        return "nan"
    return v


def _closed_form_flags(model, flags, notes):
    if model.kind == "power-law":
        lam = model.ratio
        flags.append("power-law-optimum-closed-form")
        notes["closed_form_optimum"] = lam ** -lam * (1 + lam) ** (1 + lam)
        notes["alternative_closed_form"] = lam ** -lam * (1 + lam) ** (-1 - lam)
        notes["closed_form_note"] = (
            "direct minimization of q^-κ/(1-q^Δ) gives λ^-λ (1+λ)^(1+λ); the form "
            "λ^-λ (1+λ)^(-1-λ) is below 1 and cannot bound a series whose terms exceed 1")
        notes["closed_form_q0"] = (lam / (1 + lam)) ** (1 / model.gap)
    elif model.kind == "log-corrected":
        b, k = model.beta, model.kappa
        flags.append("log-corrected-optimum-closed-form")
        notes["closed_form_optimum"] = math.e ** b * b ** -b * k ** b * float(zeta(b))
        notes["alternative_closed_form"] = math.e ** -b * b ** b * k ** -b * (float(zeta(b)) - 1)
        notes["closed_form_note"] = (
            "direct summation gives e^β β^-β κ^β ζ(β) with Σ_{n>=0} (n+1)^-β = ζ(β); the form "
            "e^-β β^β κ^-β (ζ(β) - 1) has the exponents' signs reversed and drops the n = 0 term")
        notes["closed_form_q0"] = math.exp(-b / k)


def _series_report(theorem, model, psi, extra_flags=(), extra_notes=None):
    flags, notes = list(extra_flags), dict(extra_notes or {})
    _closed_form_flags(model, flags, notes)
    res = minimize_sigma(model)
    if res.boundary:
        flags.append("boundary-infimum")
    if res.status == "diverged":
        return CertificateReport(theorem, INF, "diverged", INF, psi, None, None, flags, notes)
    status = "resolution-limited" if model.kind == "empirical" else "certified"
    tail = TailBoundCurve(psi, res.value) if status == "certified" else None
    return CertificateReport(theorem, res.value, status, res.value, psi, res.q0, tail, flags, notes)


def certify_series(model, psi):
    """Path-regularity certificate from the entropy series.

    ``psi`` is the ψ with sup_t ||ξ(t)||_Gψ = 1 whose natural distance built
    the model; the minimized series bounds the mixed norm.
    """
    return _series_report("series", model, psi)


def _integral_report(theorem, source, psi, diameter, flags, notes):
    res = _entropy_integral(source, psi, diameter, 1e-10)
    if not res.converged:
        flags.append("integral-not-converged")
    if math.isinf(res.value):
        return CertificateReport(theorem, INF, "diverged", INF, psi, None, None, flags, notes)
    bound = MIXED_NORM_FACTOR * res.value
    notes["levels"] = res.levels
    return CertificateReport(theorem, res.value, "certified", bound, psi, None,
                             TailBoundCurve(psi, bound), flags, notes)


def certify_integral(source, psi, diameter=None):
    """Path-regularity certificate from the entropy integral; bound 9 I."""
    notes = {}
    if isinstance(source, DualFamilyGeometry):
        notes["relative_to"] = "declared dual family"
    return _integral_report("integral", source, psi, diameter, [], notes)


def _clt_psi(psi, mean_zero):
    if not mean_zero:
        raise ValueError("CLT certificates need a mean-zero field")
    if psi.b <= 2.0:
        raise DomainError("CLT certificates need ψ support beyond p = 2")
    if math.isfinite(psi.b):
        used = psi if psi.a >= 2 else PsiFunction(
            support=(2.0, psi.b), raw=psi.raw, kind=psi.kind, name=psi.name,
            params=psi.params, scale=psi.scale, table=psi.table, base=psi.base)
        return used, ["bounded-support-psi"], {
            "psi_note": "finite upper exponent: ψ is equivalent to its Rosenthal transform and is used directly"}
    return rosenthal_transform(psi), [], {}


def clt_certify_series(model, psi, mean_zero=True):
    """CLT certificate from the entropy series in the Rosenthal distance.

    ``model`` must describe covering numbers in the distance
    ρ(t, s) = sup_n ||S_n(t) - S_n(s)||_GψR. The value bounds
    sup_n || ||S_n||_L ||_GψR uniformly in n.
    """
    used, flags, notes = _clt_psi(psi, mean_zero)
    return _series_report("clt-series", model, used, flags, notes)


def clt_certify_integral(source, psi, mean_zero=True, diameter=None):
    """CLT certificate from the entropy integral with ψ_R; bound 9 J."""
    used, flags, notes = _clt_psi(psi, mean_zero)
    if isinstance(source, DualFamilyGeometry):
        notes["relative_to"] = "declared dual family"
    notes["meaning"] = "finite J: the normalized sums satisfy the CLT in L"
    return _integral_report("clt-integral", source, used, diameter, flags, notes)
