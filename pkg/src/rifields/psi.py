"""ψ-functions, moment curves and Grand Lebesgue Space norms.

A :class:`PsiFunction` is a positive function on an open exponent interval
``(a, b)``, ``1 <= a < b <= inf``. The GLS norm of a random variable (or of a
function on a measure space) is the supremum over that interval of its p-th
moment root divided by ψ(p). Everything in this module works on logarithmic
exponent grids with a local golden-section refinement around the grid
maximizer.
"""
import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.special import gammaln

from ._search import golden_max
from .errors import DiagnosticWarning, DomainError

log = logging.getLogger(__name__)

DEFAULT_NODES = 128
DEFAULT_P_MAX = 400.0
MIN_NODES = 32
NORMALIZE_TOL = 1e-9

ROSENTHAL_CONSTANT = 1.77638
ROSENTHAL_CONSTANT_SYMMETRIC = 1.53573

_EDGE = 1e-9


def exponent_grid(lo, hi, n=DEFAULT_NODES, p_max=DEFAULT_P_MAX):
    """Log-spaced exponents strictly inside the open interval (lo, hi).

    An infinite upper end is replaced by ``p_max``.
    """
    if n < 2:
        raise ValueError("exponent grid needs at least two nodes")
    left = lo * (1.0 + _EDGE)
    right = hi * (1.0 - _EDGE) if math.isfinite(hi) else max(p_max, left * 2.0)
    if not right > left:
        raise DomainError(f"empty exponent interval ({lo}, {hi})")
    return np.geomspace(left, right, n)


def _fmt_hi(b):
    return "inf" if math.isinf(b) else float(b)


def _parse_hi(b):
    return math.inf if b in ("inf", None) else float(b)


@dataclass(frozen=True)
class PsiFunction:
    """A ψ-function on the open interval ``support``.

    ``raw`` is the underlying vectorized evaluator; the public value is
    ``scale * raw(p)``. ``scale`` is the normalization factor applied at
    construction so that inf ψ = 1 on the evaluation grid (1.0 when no
    rescaling was needed or requested).
    """

    support: tuple
    raw: Callable = field(repr=False, compare=False)
    kind: str = "analytic"
    name: str = "custom"
    params: dict = field(default_factory=dict)
    scale: float = 1.0
    table: Optional[tuple] = field(default=None, repr=False, compare=False)
    base: Optional["PsiFunction"] = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        a, b = self.support
        if not (a >= 1.0 and b > a):
            raise DomainError(f"ψ support must satisfy 1 <= a < b, got ({a}, {b})")

    @property
    def a(self):
        return self.support[0]

    @property
    def b(self):
        return self.support[1]

    def __call__(self, p):
        p_arr = np.asarray(p, dtype=float)
        if np.any(p_arr <= self.a) or np.any(p_arr >= self.b):
            raise DomainError(f"exponent outside the open support {self.support}")
        out = self.scale * np.asarray(self.raw(p_arr), dtype=float)
        return out if out.ndim else float(out)

    def grid(self, n=DEFAULT_NODES, p_max=DEFAULT_P_MAX):
        return exponent_grid(self.a, self.b, n, p_max)

    # -- constructors -----------------------------------------------------

    @classmethod
    def _build(cls, support, raw, normalize, **kw):
        psi = cls(support=tuple(support), raw=raw, **kw)
        vals = psi(psi.grid())
        if not np.all(np.isfinite(vals)) or np.any(vals <= 0):
            raise DomainError("ψ must be finite and positive on its support")
        if normalize:
            low = float(vals.min())
            if low < 1.0 - NORMALIZE_TOL:
                kw["scale"] = kw.get("scale", 1.0) / low
                psi = cls(support=tuple(support), raw=raw, **kw)
                log.debug("ψ %s rescaled by %g to enforce inf ψ = 1", psi.name, 1.0 / low)
        return psi

    @classmethod
    def power(cls, m):
        """ψ_m(p) = p**(1/m) on (1, inf); m = 2 is the subgaussian case."""
        if m <= 0:
            raise ValueError("m must be positive")
        return cls._build((1.0, math.inf), lambda p: p ** (1.0 / m), True,
                          name="power", params={"m": float(m)})

    @classmethod
    def constant(cls, c=1.0, support=(1.0, math.inf), normalize=False):
        return cls._build(support, lambda p: np.full_like(p, c, dtype=float), normalize,
                          name="constant", params={"c": float(c)})

    @classmethod
    def from_callable(cls, func, support, normalize=True, name="custom"):
        return cls._build(support, func, normalize, name=name)

    @classmethod
    def tabulated(cls, p, values, support=None, normalize=True):
        """Table interpolated linearly in (ln p, ln ψ).

        Inside ``support`` but outside the tabulated range the end segments
        are extended log-linearly.
        """
        p = np.asarray(p, dtype=float)
        v = np.asarray(values, dtype=float)
        if p.ndim != 1 or p.shape != v.shape or len(p) < 2:
            raise ValueError("table needs matching 1-D arrays with at least two nodes")
        if np.any(np.diff(p) <= 0):
            raise ValueError("table exponents must be strictly increasing")
        if not np.all(np.isfinite(v)) or np.any(v <= 0):
            raise ValueError("table values must be finite and positive")
        if support is None:
            support = (p[0] * (1 - 1e-12), p[-1] * (1 + 1e-12))
        lp, lv = np.log(p), np.log(v)

        def raw(q):
            lq = np.log(q)
            out = np.interp(lq, lp, lv)
            lo_slope = (lv[1] - lv[0]) / (lp[1] - lp[0])
            hi_slope = (lv[-1] - lv[-2]) / (lp[-1] - lp[-2])
            out = np.where(lq < lp[0], lv[0] + lo_slope * (lq - lp[0]), out)
            out = np.where(lq > lp[-1], lv[-1] + hi_slope * (lq - lp[-1]), out)
            return np.exp(out)

        return cls._build(support, raw, normalize, kind="tabulated", name="table",
                          table=(p, v))

    # -- serialization ----------------------------------------------------

    def to_record(self, n=DEFAULT_NODES):
        rec = {"kind": self.kind, "support": [float(self.a), _fmt_hi(self.b)],
               "scale": float(self.scale)}
        if self.name in ("power", "constant"):
            rec["family"] = {"name": self.name, "params": dict(self.params)}
        elif self.name == "rosenthal" and self.base is not None:
            rec["family"] = {"name": "rosenthal", "params": dict(self.params),
                             "base": self.base.to_record(n)}
        else:
            if self.table is not None:
                p, _ = self.table
            else:
                p = self.grid(n)
            rec["kind"] = "tabulated"
            rec["table"] = [[float(x), float(y)] for x, y in zip(p, self(p) / self.scale)]
        return rec

    @classmethod
    def from_record(cls, rec):
        support = (float(rec["support"][0]), _parse_hi(rec["support"][1]))
        fam = rec.get("family")
        if fam is not None:
            name, params = fam["name"], fam.get("params", {})
            if name == "power":
                psi = cls.power(params["m"])
            elif name == "constant":
                psi = cls.constant(params.get("c", 1.0), support=support)
            elif name == "rosenthal":
                psi = rosenthal_transform(cls.from_record(fam["base"]),
                                          symmetric=params.get("symmetric", False))
            else:
                raise ValueError(f"unknown ψ family {name!r}")
        else:
            table = np.asarray(rec["table"], dtype=float)
            psi = cls.tabulated(table[:, 0], table[:, 1], support=support, normalize=False)
        scale = float(rec.get("scale", psi.scale))
        if scale != psi.scale:
            psi = cls(support=psi.support, raw=psi.raw, kind=psi.kind, name=psi.name,
                      params=psi.params, scale=scale, table=psi.table, base=psi.base)
        return psi


def gaussian_moment_root(p, sigma=1.0):
    """(E|σZ|^p)^(1/p) for a standard normal Z, via the Gamma-function formula."""
    p = np.asarray(p, dtype=float)
    logm = (p / 2.0) * math.log(2.0) + gammaln((p + 1.0) / 2.0) - 0.5 * math.log(math.pi)
    return abs(sigma) * np.exp(logm / p)


@dataclass(frozen=True)
class MomentCurve:
    """p -> |f|_p on the open interval ``support``."""

    func: Callable = field(repr=False)
    support: tuple = (1.0, math.inf)
    label: str = ""

    def __call__(self, p):
        out = np.asarray(self.func(np.asarray(p, dtype=float)), dtype=float)
        return out if out.ndim else float(out)

    def scaled(self, c):
        f = self.func
        return MomentCurve(lambda p: abs(c) * f(p), self.support, f"{c}*{self.label}")

    @classmethod
    def zero(cls):
        return cls(lambda p: np.zeros_like(p, dtype=float), label="zero")

    @classmethod
    def constant(cls, c):
        """|f|_p ≡ |c|, e.g. f ≡ c on a probability space or a Rademacher sign."""
        return cls(lambda p: np.full_like(p, abs(c), dtype=float), label=f"const({c})")

    @classmethod
    def gaussian(cls, sigma=1.0):
        return cls(lambda p: gaussian_moment_root(p, sigma), label=f"gauss({sigma})")

    @classmethod
    def from_samples(cls, values, weights=None, support=(1.0, math.inf)):
        """Weighted moment roots (Σ w_i |x_i|^p)^(1/p).

        Without weights the x_i are treated as equally likely samples.
        """
        x = np.abs(np.asarray(values, dtype=float)).ravel()
        if not np.all(np.isfinite(x)):
            raise DomainError("non-finite sample values")
        if weights is None:
            w = np.full(x.shape, 1.0 / len(x))
        else:
            w = np.asarray(weights, dtype=float).ravel()
            if w.shape != x.shape or np.any(w < 0):
                raise ValueError("weights must be nonnegative and match the values")
        keep = (x > 0) & (w > 0)
        if not np.any(keep):
            return cls.zero()
        lx, wk = np.log(x[keep]), w[keep]
        top = lx.max()
        z = lx - top  # <= 0, the largest atom keeps the sum away from 0

        def func(p):
            p = np.asarray(p, dtype=float)
            flat = p.ravel()
            s = np.exp(flat[:, None] * z[None, :]) @ wk
            return np.exp(top + np.log(s) / flat).reshape(p.shape)

        return cls(func, support, label="empirical")


def _domain(curve, psi):
    lo = max(curve.support[0], psi.a)
    hi = min(curve.support[1], psi.b)
    if not hi > lo:
        raise DomainError(f"curve support {curve.support} and ψ support {psi.support} do not overlap")
    return lo, hi


def gls_norm(curve, psi, n=DEFAULT_NODES, p_max=DEFAULT_P_MAX):
    """sup_p |f|_p / ψ(p) over the common support.

    Returns ``math.inf`` (with a :class:`DiagnosticWarning`) when the ratio
    increases over the last quarter of an unbounded grid and ends above ten
    times its median.
    """
    if n < MIN_NODES:
        raise ValueError(f"exponent grid needs at least {MIN_NODES} nodes")
    lo, hi = _domain(curve, psi)
    grid = exponent_grid(lo, hi, n, p_max)
    num = np.asarray(curve(grid), dtype=float)
    if not np.all(np.isfinite(num)):
        raise DomainError("moment curve is not finite on the exponent grid")
    ratio = num / psi(grid)
    if not np.any(ratio > 0):
        return 0.0
    if math.isinf(hi):
        tail = ratio[-max(2, n // 4):]
        if np.all(np.diff(tail) > 0) and ratio[-1] > 10.0 * np.median(ratio):
            warnings.warn(f"GLS norm diverges: ratio grows to {ratio[-1]:.3g} at p={grid[-1]:.3g}",
                          DiagnosticWarning, stacklevel=2)
            return math.inf
    k = int(np.argmax(ratio))
    best = float(ratio[k])
    left = grid[max(k - 1, 0)]
    right = grid[min(k + 1, len(grid) - 1)]
    if right > left:
        def r(lp):
            p = math.exp(lp)
            return float(curve(p)) / float(psi(p))
        _, val = golden_max(r, math.log(left), math.log(right), xtol=1e-12)
        best = max(best, val)
    return best


def natural_function(family: Sequence[MomentCurve], n=DEFAULT_NODES, p_max=DEFAULT_P_MAX):
    """ψ_F(p) = max over the family of |f_α|_p.

    The result is the smallest ψ giving every member a GLS norm <= 1, so it is
    deliberately not rescaled to inf ψ = 1.
    """
    family = list(family)
    if not family:
        raise ValueError("empty family")
    lo = max(c.support[0] for c in family)
    hi = min(c.support[1] for c in family)
    if not hi > lo:
        raise DomainError("family members share no common exponent interval")
    grid = exponent_grid(lo, hi, n, p_max)
    vals = np.vstack([np.asarray(c(grid), dtype=float) for c in family])
    if not np.all(np.isfinite(vals)):
        bad = grid[~np.all(np.isfinite(vals), axis=0)][0]
        raise DomainError(f"family moments unbounded at p={bad:.4g}")
    if np.any(vals.max(axis=0) <= 0):
        raise DomainError("natural function vanishes: every member is zero")
    funcs = [c.func for c in family]

    def raw(p):
        return np.max(np.stack([np.asarray(f(p), dtype=float) for f in funcs]), axis=0)

    return PsiFunction._build((lo, hi), raw, False, name="natural",
                              params={"members": len(family)})


def rosenthal_transform(psi, symmetric=False):
    """ψ_R(p) = C p / ln p · ψ(p) on (max(a, 2), b).

    ``symmetric`` selects the smaller constant valid for symmetric
    distributions.
    """
    if psi.b <= 2.0:
        raise DomainError("Rosenthal transform needs ψ support extending beyond p = 2")
    c = ROSENTHAL_CONSTANT_SYMMETRIC if symmetric else ROSENTHAL_CONSTANT
    lo = max(psi.a, 2.0)

    def raw(p):
        return c * p / np.log(p) * psi(p)

    return PsiFunction(support=(lo, psi.b), raw=raw, name="rosenthal",
                       params={"symmetric": bool(symmetric), "C": c}, base=psi)
