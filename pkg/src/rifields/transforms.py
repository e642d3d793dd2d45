"""Young–Fenchel transforms on grids and the dualities built from them.

Transforms are grid-based: the discrete sup is computed exactly by the
lower-hull kernel, then refined by golden-section search on the exact
function when the grid carries one. ``math.inf`` is the extended-real
sentinel throughout; IEEE arithmetic saturates on it.
"""
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import kernels
from ._search import golden_min_vec
from .errors import ConvexityError, DomainError
from .psi import DEFAULT_P_MAX, PsiFunction, exponent_grid

INF = math.inf
DEFAULT_GRID = 512
REL_TOL = 1e-9
SLOPE_RTOL = 1e-12
_P_CEILING = 1e9


@dataclass(frozen=True)
class ScalarFunctionGrid:
    """Values of a scalar function on strictly increasing nodes.

    ``extrapolation`` is ``"forbid"`` (the function is +inf off the grid) or
    ``"linear"`` (end segments continue). ``func``, when given, is the exact
    function and is used to refine extrema between nodes.
    """

    nodes: np.ndarray
    values: np.ndarray
    extrapolation: str = "forbid"
    func: Optional[Callable] = field(default=None, repr=False, compare=False)
    tag: str = "f"

    def __post_init__(self):
        y = np.asarray(self.nodes, dtype=float)
        v = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "nodes", y)
        object.__setattr__(self, "values", v)
        if y.ndim != 1 or y.shape != v.shape:
            raise ValueError("nodes and values must be matching 1-D arrays")
        if len(y) == 0:
            raise DomainError("empty grid")
        if np.any(np.diff(y) <= 0):
            raise ValueError("grid nodes must be strictly increasing")
        if not np.all(np.isfinite(v)):
            raise ValueError("grid values must be finite")
        if self.extrapolation not in ("forbid", "linear"):
            raise ValueError(f"unknown extrapolation {self.extrapolation!r}")

    @classmethod
    def sample(cls, func, nodes, extrapolation="forbid", tag="f"):
        nodes = np.asarray(nodes, dtype=float)
        return cls(nodes, np.asarray(func(nodes), dtype=float), extrapolation, func, tag)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        y, v = self.nodes, self.values
        out = np.interp(x, y, v)
        if self.extrapolation == "linear" and len(y) > 1:
            sl = (v[1] - v[0]) / (y[1] - y[0])
            sr = (v[-1] - v[-2]) / (y[-1] - y[-2])
            out = np.where(x < y[0], v[0] + sl * (x - y[0]), out)
            out = np.where(x > y[-1], v[-1] + sr * (x - y[-1]), out)
        else:
            out = np.where((x < y[0]) | (x > y[-1]), INF, out)
        return out if out.ndim else float(out)

    def end_slopes(self):
        y, v = self.nodes, self.values
        if len(y) < 2:
            return -INF, INF
        return (v[1] - v[0]) / (y[1] - y[0]), (v[-1] - v[-2]) / (y[-1] - y[-2])

    def second_differences(self):
        y, v = self.nodes, self.values
        s = np.diff(v) / np.diff(y)
        return np.diff(s)

    def is_convex(self, tol=1e-9):
        if len(self.nodes) < 3:
            return True
        scale = max(1.0, float(np.max(np.abs(np.diff(self.values) / np.diff(self.nodes)))))
        return bool(np.all(self.second_differences() >= -tol * scale))

    def is_nondecreasing(self, tol=1e-12):
        return bool(np.all(np.diff(self.values) >= -tol * max(1.0, float(np.max(np.abs(self.values))))))

    def to_text(self):
        lines = [f"# rifields-grid {self.tag} extrapolation={self.extrapolation}"]
        lines += [f"{a!r} {b!r}" for a, b in zip(self.nodes.tolist(), self.values.tolist())]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text):
        lines = text.strip().splitlines()
        head = lines[0].split()
        if len(head) < 3 or head[:2] != ["#", "rifields-grid"]:
            raise ValueError("missing rifields-grid header")
        extrap = "forbid"
        for tok in head[3:]:
            if tok.startswith("extrapolation="):
                extrap = tok.split("=", 1)[1]
        data = np.array([[float(t) for t in ln.split()] for ln in lines[1:] if ln.strip()])
        return cls(data[:, 0], data[:, 1], extrap, None, head[2])


def _conjugate(f, u, refine=True):
    """sup_y (u y - f(y)) and the index of the maximizing node."""
    u = np.atleast_1d(np.asarray(u, dtype=float))
    vals, arg = kernels.legendre_max(f.nodes, f.values, u)
    vals = vals.copy()
    if f.extrapolation == "linear" and len(f.nodes) > 1:
        sl, sr = f.end_slopes()
        # end slopes carry rounding from the node differences
        vals[(u > sr + SLOPE_RTOL * max(1.0, abs(sr))) | (u < sl - SLOPE_RTOL * max(1.0, abs(sl)))] = INF
    if refine and f.func is not None and len(f.nodes) > 1:
        ok = np.isfinite(vals)
        if np.any(ok):
            y = f.nodes
            i = arg[ok]
            lo = y[np.maximum(i - 1, 0)]
            hi = y[np.minimum(i + 1, len(y) - 1)]
            uu = u[ok]

            def neg(z):
                return -(uu * z - np.asarray(f.func(z), dtype=float))

            _, best = golden_min_vec(neg, lo, hi)
            with np.errstate(invalid="ignore"):
                vals[ok] = np.maximum(vals[ok], -best)
    return vals, arg


def young_fenchel(f, u, refine=True):
    """Convex conjugate f*(u) = sup_y (u y - f(y)) over the grid.

    Returns ``inf`` where u lies outside the end slopes of a linearly
    extrapolated grid.
    """
    scalar = np.ndim(u) == 0
    vals, _ = _conjugate(f, u, refine)
    return float(vals[0]) if scalar else vals


def conjugate_grid(f):
    """Exact conjugate of the piecewise-linear interpolant of ``f``.

    The result lives on the hull slopes, padded with one node on each side
    so that its linear extrapolation reproduces the end behaviour.
    """
    hull = kernels.lower_hull(f.nodes, f.values)
    y, v = f.nodes[hull], f.values[hull]
    if len(hull) < 2:
        raise DomainError("conjugate grid needs at least two hull nodes")
    s = np.diff(v) / np.diff(y)
    fs = s * y[:-1] - v[:-1]
    u = np.concatenate([[s[0] - 1.0], s, [s[-1] + 1.0]])
    vals = np.concatenate([[fs[0] - y[0]], fs, [fs[-1] + y[-1]]])
    return ScalarFunctionGrid(u, vals, "linear", tag=f"{f.tag}*")


def co_transform(f, x, refine=True):
    """f_*(x) = inf_{y >= 0} (x y + f(y)); nondecreasing and concave in x."""
    scalar = np.ndim(x) == 0
    x = np.atleast_1d(np.asarray(x, dtype=float))
    keep = f.nodes >= 0
    if not np.any(keep):
        raise DomainError("co-transform needs grid nodes with y >= 0")
    g = ScalarFunctionGrid(f.nodes[keep], f.values[keep], "forbid", f.func, f.tag)
    vals, _ = _conjugate(g, -x, refine)
    out = -vals
    if f.extrapolation == "linear" and np.sum(keep) > 1:
        _, sr = g.end_slopes()
        out[x < -sr] = -INF
    return float(out[0]) if scalar else out


# -- tail bounds --------------------------------------------------------------


def _log_moment_grid(psi, n, p_max):
    p = exponent_grid(psi.a, psi.b, n, p_max)

    def g(q):
        return q * np.log(psi(np.clip(q, p[0], p[-1])))

    return ScalarFunctionGrid(p, p * np.log(psi(p)), "forbid", g, "p ln psi")


def tail_bound(psi, norm_value, x, n=DEFAULT_GRID, p_max=DEFAULT_P_MAX, log=False):
    """Upper bound exp(-g*(ln(x / norm))) on the two-sided tail, g(p) = p ln ψ(p).

    Valid for x >= 2 * norm. For unbounded ψ support the exponent range is
    widened until the optimal exponent is interior, so that large thresholds
    are not penalized by the grid cap. With ``log=True`` the exponent
    -ln(bound) is returned instead, which does not underflow.
    """
    if not norm_value > 0:
        raise DomainError("norm value must be positive")
    scalar = np.ndim(x) == 0
    x = np.atleast_1d(np.asarray(x, dtype=float))
    threshold = 2.0 * norm_value
    if np.any(x < threshold * (1 - 1e-12)):
        raise DomainError(f"tail bound valid only for x >= 2*norm = {threshold:g}")
    z = np.log(x / norm_value)
    cap = p_max
    while True:
        g = _log_moment_grid(psi, n, cap)
        vals, arg = _conjugate(g, z)
        if math.isfinite(psi.b) or np.all(arg < len(g.nodes) - 1) or cap >= _P_CEILING:
            break
        cap *= 4.0
    out = np.maximum(vals, 0.0) if log else np.minimum(1.0, np.exp(-vals))
    return float(out[0]) if scalar else out


@dataclass(frozen=True)
class TailBoundCurve:
    """x -> bound on P(|ξ| > x) for x >= 2 * norm_value."""

    psi: PsiFunction
    norm_value: float

    @property
    def threshold(self):
        return 2.0 * self.norm_value

    def __call__(self, x):
        return tail_bound(self.psi, self.norm_value, x)

    def table(self, factors=(2, 3, 4, 5, 6, 8, 10)):
        x = self.threshold / 2.0 * np.asarray(factors, dtype=float)
        return x, self(x)


# -- ψ <-> Orlicz <-> tail ----------------------------------------------------


def _invert_increasing(func, y, lo, hi, rtol=1e-10):
    """Vectorized bisection for func(p) = y on [lo, hi]; func increasing."""
    y = np.asarray(y, dtype=float)
    a = np.full(y.shape, lo, dtype=float)
    b = np.full(y.shape, hi, dtype=float)
    for _ in range(200):
        mid = 0.5 * (a + b)
        above = func(mid) >= y
        b = np.where(above, mid, b)
        a = np.where(above, a, mid)
        if np.all(b - a <= rtol * b):
            break
    return 0.5 * (a + b)


def orlicz_from_psi(psi, n=DEFAULT_GRID, u_max=10.0, p_max=DEFAULT_P_MAX):
    """Exponential Orlicz–Young function N(u) = exp(φ*(u)) - 1 attached to ψ.

    φ is the functional inverse of χ(p) = p / ψ(p) on [χ(2), ∞), continued by
    the quadratic 2 (y / χ(2))² on [0, χ(2)], and made even. The returned grid
    covers u in [0, min(u_max, largest finite slope)]; N is +inf beyond.
    """
    if not (psi.a <= 2.0 < psi.b):
        raise DomainError("Orlicz construction needs ψ support containing [2, b)")
    p_lo = 2.0 if psi.a < 2.0 else 2.0 * (1 + 1e-9)
    p_hi = psi.b * (1 - 1e-9) if math.isfinite(psi.b) else p_max
    p = np.geomspace(p_lo, p_hi, n)

    def chi(q):
        return q / psi(q)

    c = chi(p)
    bad = np.nonzero(np.diff(c) <= 0)[0]
    if len(bad):
        raise ConvexityError(
            f"χ(p) = p/ψ(p) is not increasing on [{p[bad[0]]:.4g}, {p[bad[-1] + 1]:.4g}]")
    y2, y_top = float(c[0]), float(c[-1])

    def phi(y):
        y = np.abs(np.asarray(y, dtype=float))
        inner = 2.0 * (y / y2) ** 2
        upper = _invert_increasing(chi, np.clip(y, y2, y_top), p_lo, p_hi)
        return np.where(y <= y2, inner, upper)

    half = np.concatenate([np.linspace(0.0, y2, n // 4, endpoint=False),
                           np.geomspace(y2, y_top, n - n // 4)])
    ys = np.concatenate([-half[:0:-1], half])
    phi_grid = ScalarFunctionGrid(ys, phi(ys), "linear", phi, "phi")
    _, slope_top = phi_grid.end_slopes()
    top = min(u_max, float(slope_top))
    u = np.linspace(0.0, top, n)
    fstar = young_fenchel(phi_grid, u)
    return ScalarFunctionGrid(u, np.expm1(fstar), "forbid", None, "N")


def psi_from_tail(h, n=DEFAULT_GRID, p_max=DEFAULT_P_MAX):
    """ψ(p) = exp(h*(p) / p) for a tail bound exp(-h(ln x)), x >= 2.

    ``h`` must be positive, convex, strictly increasing on its grid.
    """
    if len(h.nodes) < 3:
        raise DomainError("tail function grid needs at least three nodes")
    if np.any(h.values <= 0):
        raise ConvexityError("h must be positive")
    if np.any(np.diff(h.values) <= 0):
        raise ConvexityError("h must be strictly increasing")
    if not h.is_convex(tol=1e-7):
        raise ConvexityError("h must be convex")
    p = exponent_grid(1.0, math.inf, n, p_max)
    hstar = young_fenchel(h, p)
    ok = np.isfinite(hstar)
    if np.sum(ok) < 2:
        raise DomainError("h* is infinite on the exponent grid")
    return PsiFunction.tabulated(p[ok], np.exp(hstar[ok] / p[ok]), support=(1.0, math.inf))
