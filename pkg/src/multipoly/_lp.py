"""Small helpers for p-norms on R^d, 1 <= p <= inf."""

import math

import numpy as np

INF = math.inf


def parse_p(p):
    if isinstance(p, str):
        p = p.strip().lower()
        p = INF if p in ("inf", "infinity", "oo") else float(p)
    p = float(p)
    if not (p >= 1.0):
        raise ValueError(f"norm exponent must lie in [1, inf], got {p}")
    return p


def dual_exponent(p):
    if p == 1.0:
        return INF
    if p == INF:
        return 1.0
    return p / (p - 1.0)


def pnorm(x, p, axis=-1):
    x = np.asarray(x, dtype=np.float64)
    if x.shape[axis] == 0:
        out = np.zeros(np.delete(x.shape, axis))
        return float(out) if out.ndim == 0 else out
    if x.shape[axis] == 1:
        # (|c|^p)^(1/p) need not round back to |c|
        out = np.abs(np.take(x, 0, axis=axis))
        return float(out) if out.ndim == 0 else out
    return np.linalg.norm(x, ord=p, axis=axis)


def normalize(x, p):
    """Scale ``x`` onto the unit p-sphere; ``None`` for the zero vector."""
    n = float(pnorm(x, p))
    if n == 0.0:
        return None
    y = x / n
    # rounding can leave the norm a hair above 1
    if float(pnorm(y, p)) > 1.0:
        y = y / np.nextafter(float(pnorm(y, p)), INF)
    return y


def dual_maximizer(g, p):
    """A point of the unit p-ball maximizing ``<g, x>``; ``None`` if ``g == 0``.

    For p = 1 the mass goes to the first coordinate of largest ``|g_j|``; for
    p = inf zero coordinates of ``g`` get +1.  Ties are therefore broken the
    same way on every run.
    """
    g = np.asarray(g, dtype=np.float64)
    if not np.any(g):
        return None
    if p == 1.0:
        j = int(np.argmax(np.abs(g)))
        x = np.zeros_like(g)
        x[j] = 1.0 if g[j] > 0 else -1.0
        return x
    if p == INF:
        return np.where(g < 0, -1.0, 1.0)
    if p == 2.0:
        return normalize(g, 2.0)
    r = dual_exponent(p)
    scaled = g / np.max(np.abs(g))
    x = np.sign(scaled) * np.abs(scaled) ** (r - 1.0)
    return normalize(x, p)
