"""Pure-Python reference versions of the hot kernels.

Each function here has a twin with the same name and signature in the
compiled ``_ckernels`` extension. The two must agree bit for bit on every
input; ``tests/test_kernels.py`` checks that.
"""
import numpy as np


def lower_hull(y, f):
    """Indices of the lower convex hull of the points (y[i], f[i]).

    ``y`` must be strictly increasing.
    """
    hull = []
    for i in range(len(y)):
        while len(hull) >= 2:
            a, b = hull[-2], hull[-1]
            # drop b if it lies on or above the chord a -> i
            cross = (y[b] - y[a]) * (f[i] - f[a]) - (f[b] - f[a]) * (y[i] - y[a])
            if cross <= 0.0:
                hull.pop()
            else:
                break
        hull.append(i)
    return np.asarray(hull, dtype=np.intp)


def legendre_max(y, f, u):
    """max_i (u[j] * y[i] - f[i]) for every j, with the maximizing index.

    Runs in O(N + M log N): the maximizer always sits on the lower hull and
    is found by bisection on the hull edge slopes. Ties go to the leftmost
    node.
    """
    y = np.ascontiguousarray(y, dtype=np.float64)
    f = np.ascontiguousarray(f, dtype=np.float64)
    u = np.ascontiguousarray(u, dtype=np.float64)
    hull = lower_hull(y, f)
    k = len(hull)
    slopes = []
    for j in range(k - 1):
        a, b = hull[j], hull[j + 1]
        slopes.append((f[b] - f[a]) / (y[b] - y[a]))
    values = np.empty(len(u))
    arg = np.empty(len(u), dtype=np.intp)
    for j in range(len(u)):
        lo, hi = 0, k - 1
        uj = u[j]
        # first edge whose slope is >= u
        while lo < hi:
            mid = (lo + hi) // 2
            if slopes[mid] < uj:
                lo = mid + 1
            else:
                hi = mid
        i = hull[lo]
        arg[j] = i
        values[j] = uj * y[i] - f[i]
    return values, arg


def greedy_cover(dist, eps, start):
    """Farthest-point-first cover: centers until every point is within eps."""
    n = dist.shape[0]
    mind = [float(dist[start, j]) for j in range(n)]
    centers = [start]
    while True:
        far, j_far = -1.0, -1
        for j in range(n):
            if mind[j] > far:
                far, j_far = mind[j], j
        if far <= eps:
            break
        centers.append(j_far)
        row = dist[j_far]
        for j in range(n):
            if row[j] < mind[j]:
                mind[j] = float(row[j])
    return np.asarray(centers, dtype=np.intp)


def greedy_packing(dist, sep):
    """Maximal set in id order whose pairwise distances all exceed sep."""
    chosen = []
    for i in range(dist.shape[0]):
        ok = True
        for c in chosen:
            if dist[i, c] <= sep:
                ok = False
                break
        if ok:
            chosen.append(i)
    return np.asarray(chosen, dtype=np.intp)


def ball_max(dist, weights, delta):
    """Largest closed-ball weight and its lowest-id center."""
    n = dist.shape[0]
    best, arg = -1.0, 0
    for i in range(n):
        s = 0.0
        for j in range(n):
            if dist[i, j] <= delta:
                s += weights[j]
        if s > best:
            best, arg = s, i
    return best, arg


def nearest(dist, net):
    """Projection of every point onto its nearest net point (lowest id on ties).

    ``net`` must be sorted ascending.
    """
    n = dist.shape[0]
    out = np.empty(n, dtype=np.intp)
    for i in range(n):
        best, arg = np.inf, -1
        for c in net:
            d = dist[i, c]
            if d < best:
                best, arg = d, c
        out[i] = arg
    return out
