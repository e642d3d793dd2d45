"""One-dimensional search helpers used by the sup/inf computations."""
import math

import numpy as np

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def golden_min(func, lo, hi, xtol=1e-10, maxiter=200):
    """Golden-section minimization of a unimodal ``func`` on [lo, hi].

    Returns (x, func(x)).
    """
    a, b = float(lo), float(hi)
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = func(c), func(d)
    for _ in range(maxiter):
        if abs(b - a) <= xtol * max(1.0, abs(a) + abs(b)) * 0.5:
            break
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = func(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = func(d)
    x = c if fc <= fd else d
    return x, min(fc, fd)


def golden_max(func, lo, hi, xtol=1e-10, maxiter=200):
    x, v = golden_min(lambda z: -func(z), lo, hi, xtol=xtol, maxiter=maxiter)
    return x, -v


def golden_min_vec(func, lo, hi, iters=80):
    """Vectorized golden-section: ``func`` maps an array of abscissae (one per
    problem) to values, and every bracket [lo[k], hi[k]] shrinks in lockstep."""
    a = np.array(lo, dtype=float)
    b = np.array(hi, dtype=float)
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = func(c), func(d)
    for _ in range(iters):
        left = fc <= fd
        # left: keep [a, d]; right: keep [c, b]
        b = np.where(left, d, b)
        a = np.where(left, a, c)
        new_c = b - _INVPHI * (b - a)
        new_d = a + _INVPHI * (b - a)
        c_next = np.where(left, new_c, d)
        d_next = np.where(left, c, new_d)
        probe = np.where(left, c_next, d_next)
        fp = func(probe)
        fc, fd = np.where(left, fp, fd), np.where(left, fc, fp)
        c, d = c_next, d_next
    x = np.where(fc <= fd, c, d)
    return x, np.minimum(fc, fd)
