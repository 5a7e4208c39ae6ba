"""Finite differences and rank decisions shared by all modules."""
import numpy as np

EPS = np.finfo(float).eps
RANK_RTOL = 1e-9


def fd_step(u):
    """Central-difference step cbrt(eps) * (1 + |u|)."""
    return np.cbrt(EPS) * (1.0 + np.linalg.norm(np.atleast_1d(u)))


def directional(fun, x0, direction, h, richardson=True):
    """Derivative of ``fun`` at ``x0`` along ``direction`` by central differences.

    With ``richardson`` the steps h and h/2 are combined, cancelling the h^2 term.
    ``fun`` may return scalars or arrays.
    """
    x0 = np.asarray(x0, dtype=float)
    d = np.asarray(direction, dtype=float)

    def central(step):
        return (np.asarray(fun(x0 + step * d)) - np.asarray(fun(x0 - step * d))) / (2 * step)

    if not richardson:
        return central(h)
    return (4.0 * central(h / 2) - central(h)) / 3.0


def gradient(fun, x0, h, richardson=True):
    x0 = np.asarray(x0, dtype=float)
    out = np.empty(x0.size)
    for i in range(x0.size):
        e = np.zeros(x0.size)
        e[i] = 1.0
        out[i] = directional(fun, x0, e, h, richardson)
    return out


def jacobian(fun, x0, h, richardson=True):
    x0 = np.asarray(x0, dtype=float)
    cols = []
    for i in range(x0.size):
        e = np.zeros(x0.size)
        e[i] = 1.0
        cols.append(np.atleast_1d(directional(fun, x0, e, h, richardson)))
    return np.column_stack(cols)


class RankInfo:
    """Singular values split at a relative threshold.

    ``kept_min`` is the smallest singular value counted as nonzero and
    ``dropped_max`` the largest counted as zero, both relative to the largest.
    """

    def __init__(self, sigma, rtol=RANK_RTOL):
        sigma = np.asarray(sigma, dtype=float)
        top = sigma.max() if sigma.size else 0.0
        self.sigma = sigma
        self.threshold = rtol * top
        self.rank = int(np.sum(sigma > self.threshold)) if top > 0 else 0
        rel = sigma / top if top > 0 else np.zeros_like(sigma)
        kept = rel[: self.rank]
        dropped = rel[self.rank:]
        self.kept_min = float(kept.min()) if kept.size else 1.0
        self.dropped_max = float(dropped.max()) if dropped.size else 0.0

    def margin_ok(self, margin=1e-6):
        return self.kept_min >= margin and self.dropped_max <= RANK_RTOL


def null_space(M, rtol=RANK_RTOL):
    """Orthonormal kernel basis of ``M`` (columns) and the rank split used."""
    M = np.atleast_2d(np.asarray(M, dtype=float))
    ncols = M.shape[1]
    if M.size == 0 or M.shape[0] == 0:
        return np.eye(ncols), RankInfo(np.zeros(0), rtol)
    _, s, vt = np.linalg.svd(M)
    full = np.zeros(ncols)
    full[: s.size] = s
    info = RankInfo(full, rtol)
    return vt[info.rank:].T.copy(), info


def range_space(M, rtol=RANK_RTOL):
    """Orthonormal basis of the column space of ``M``."""
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if M.size == 0:
        return np.zeros((M.shape[0], 0)), RankInfo(np.zeros(0), rtol)
    u, s, _ = np.linalg.svd(M, full_matrices=False)
    info = RankInfo(s, rtol)
    return u[:, : info.rank].copy(), info
