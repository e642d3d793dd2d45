"""Finite metric-measure spaces, covering numbers and net hierarchies."""
import itertools
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np
from scipy.spatial.distance import cdist

from . import kernels

TRIANGLE_TOL = 1e-12
EXHAUSTIVE_TRIANGLE_MAX = 200
SAMPLED_TRIPLES = 10_000


@dataclass(frozen=True)
class MetricMeasureSpace:
    """Finite carrier T with point weights μ_i and a distance matrix."""

    dist: np.ndarray
    weights: np.ndarray
    coords: Optional[np.ndarray] = field(default=None, repr=False)
    ids: Optional[tuple] = None
    check: bool = field(default=True, repr=False, compare=False)

    def __post_init__(self):
        d = np.ascontiguousarray(self.dist, dtype=np.float64)
        w = np.ascontiguousarray(self.weights, dtype=np.float64)
        object.__setattr__(self, "dist", d)
        object.__setattr__(self, "weights", w)
        n = d.shape[0]
        if d.ndim != 2 or d.shape != (n, n) or n == 0:
            raise ValueError("distance matrix must be square and non-empty")
        if w.shape != (n,):
            raise ValueError("one weight per point required")
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite and nonnegative")
        if not np.all(np.isfinite(d)) or np.any(d < 0):
            raise ValueError("distances must be finite and nonnegative")
        if np.any(np.diag(d) != 0):
            raise ValueError("d(t, t) must be 0")
        if not np.array_equal(d, d.T):
            raise ValueError("distance matrix must be exactly symmetric")
        if self.ids is None:
            object.__setattr__(self, "ids", tuple(range(n)))
        if self.check:
            self._check_triangle()

    def _check_triangle(self):
        d = self.dist
        n = d.shape[0]
        tol = TRIANGLE_TOL * max(1.0, float(d.max()))
        if n <= EXHAUSTIVE_TRIANGLE_MAX:
            for k in range(n):
                if np.any(d > d[:, k][:, None] + d[k, :][None, :] + tol):
                    raise ValueError("triangle inequality violated")
        else:
            rng = np.random.default_rng(0)
            i, j, k = rng.integers(0, n, size=(3, SAMPLED_TRIPLES))
            if np.any(d[i, j] > d[i, k] + d[k, j] + tol):
                raise ValueError("triangle inequality violated on sampled triples")

    @classmethod
    def from_coords(cls, coords, weights=None, metric="euclidean"):
        x = np.asarray(coords, dtype=float)
        if x.ndim == 1:
            x = x[:, None]
        d = cdist(x, x, metric=metric)
        d = np.maximum(d, d.T)  # enforce exact symmetry
        np.fill_diagonal(d, 0.0)
        if weights is None:
            weights = np.full(len(x), 1.0 / len(x))
        return cls(d, weights, coords=x)

    @classmethod
    def uniform_grid(cls, n, start=0.0, stop=1.0):
        """n equally spaced points on [start, stop] with probability weights."""
        return cls.from_coords(np.linspace(start, stop, n))

    @classmethod
    def from_matrix(cls, matrix, weights=None):
        d = np.asarray(matrix, dtype=float)
        if weights is None:
            weights = np.full(d.shape[0], 1.0 / d.shape[0])
        return cls(d, weights)

    @property
    def n(self):
        return self.dist.shape[0]

    @property
    def total_measure(self):
        # same left-to-right order as the ball kernel, so large balls match exactly
        return float(sum(self.weights.tolist()))

    @property
    def diameter(self):
        return float(self.dist.max())

    @property
    def resolution(self):
        """Smallest nonzero pairwise distance (inf when there is none)."""
        pos = self.dist[self.dist > 0]
        return float(pos.min()) if pos.size else math.inf

    def with_distance(self, dist):
        return MetricMeasureSpace(dist, self.weights, self.coords, self.ids)

    def to_record(self):
        rec = {"weights": self.weights.tolist()}
        if self.coords is not None:
            rec["points"] = self.coords.tolist()
        else:
            rec["distance_matrix"] = self.dist.tolist()
        return rec


class CoveringBracket(NamedTuple):
    upper: int
    lower: int


def ball_function(space, delta):
    """Largest weight of a closed δ-ball, max_t μ(B(t, δ))."""
    if not delta > 0:
        raise ValueError("δ must be positive")
    best, _ = kernels.ball_max(space.dist, space.weights, float(delta))
    return best


def _cover_seed(space, eps):
    _, arg = kernels.ball_max(space.dist, space.weights, float(eps))
    return int(arg)


def greedy_net(space, eps):
    """Centers of the farthest-point-first ε-cover, sorted by point id."""
    centers = kernels.greedy_cover(space.dist, float(eps), _cover_seed(space, eps))
    return np.sort(centers)


def covering_number(space, eps):
    """Bracket lower <= N(T, d, ε) <= upper.

    ``upper`` counts a farthest-point-first cover seeded at the heaviest
    ε-ball; ``lower`` is a maximal set of points pairwise more than 2ε apart,
    each of which needs its own ball.
    """
    if not eps > 0:
        raise ValueError("ε must be positive")
    upper = len(greedy_net(space, eps))
    lower = len(kernels.greedy_packing(space.dist, 2.0 * float(eps)))
    return CoveringBracket(upper, lower)


def exact_covering_number(space, eps):
    """Minimal number of closed ε-balls centered in T, by exhaustive search.

    Exponential in the number of points; meant for spaces of a dozen points.
    """
    n = space.n
    if n > 20:
        raise ValueError("exhaustive set cover is limited to 20 points")
    masks = [sum(1 << j for j in range(n) if space.dist[i, j] <= eps) for i in range(n)]
    full = (1 << n) - 1
    for k in range(1, n + 1):
        for combo in itertools.combinations(masks, k):
            acc = 0
            for m in combo:
                acc |= m
            if acc == full:
                return k
    return n


def entropy(space, eps):
    """ln of the covering upper bound."""
    return math.log(covering_number(space, eps).upper)


def entropy_bracket(space, eps):
    b = covering_number(space, eps)
    return math.log(b.upper), math.log(b.lower)


@dataclass(frozen=True)
class NetLevel:
    radius: float
    net: np.ndarray
    projection: np.ndarray
    bracket: CoveringBracket
    next_bracket: CoveringBracket


@dataclass(frozen=True)
class NetHierarchy:
    """Nets T_n with deterministic projections θ_n, d(t, θ_n(t)) <= radius_n."""

    q: float
    base_radius: float
    root: int
    levels: list
    resolution_limited: bool

    def cardinalities(self):
        return [len(lv.net) for lv in self.levels]


def build_net_hierarchy(space, q, max_levels=64):
    """Level 0 is the single center t0; level n is a greedy q**n-net.

    Radii are ``base_radius * q**n`` with ``base_radius = max(1, ecc(t0))`` so
    the level-0 bound holds on spaces wider than 1. Each level records the
    covering bracket at its own radius and at the next one.
    """
    if not 0 < q < 1:
        raise ValueError("q must lie in (0, 1)")
    d = space.dist
    ecc = d.max(axis=1)
    root = int(np.argmin(ecc))
    base = max(1.0, float(ecc[root]))
    res = space.resolution
    all_pts = np.arange(space.n)
    levels = [NetLevel(base, np.array([root]), np.full(space.n, root),
                       CoveringBracket(1, 1), covering_number(space, base * q))]
    limited = False
    for n in range(1, max_levels + 1):
        r = base * q ** n
        if r < res:
            levels.append(NetLevel(r, all_pts, all_pts.copy(), CoveringBracket(space.n, space.n),
                                   CoveringBracket(space.n, space.n)))
            limited = True
            break
        net = greedy_net(space, r)
        proj = kernels.nearest(d, net)
        levels.append(NetLevel(r, net, proj, covering_number(space, r),
                               covering_number(space, r * q)))
    return NetHierarchy(q, base, root, levels, limited)
