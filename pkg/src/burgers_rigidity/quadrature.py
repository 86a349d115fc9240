"""Composite Simpson quadrature with dyadic refinement.

``integrate_curve`` handles one scalar integral; ``integrate_batch`` runs the
same refinement for many independent intervals at once, retiring each one as
soon as its own successive estimates agree.
"""

import numpy as np

DEFAULT_TOL = 1e-10
_CHUNK = 2_000_000


class QuadratureError(ArithmeticError):
    """Refinement failed. ``best`` and ``gap`` hold the last estimate and the
    last difference between successive estimates; ``where`` is the offending
    abscissa (or ``(index, s)`` for batches) when a non-finite value stopped it."""

    def __init__(self, message, best=np.nan, gap=np.inf, where=None):
        super().__init__(message)
        self.best = best
        self.gap = gap
        self.where = where


def _nodes(lo, hi, nudge):
    # sample positions of the endpoints, pulled inward by a relative nudge
    d = hi - lo
    return lo + nudge * d, hi - nudge * d


def integrate_curve(f, s_lo, s_hi, tol=DEFAULT_TOL, max_depth=20, min_depth=2, endpoint_nudge=0.0):
    """Signed integral of ``f`` over ``[s_lo, s_hi]``.

    ``f`` must accept a 1-D array of abscissae. Refinement doubles the panel
    count until two successive Simpson sums differ by less than ``tol``.
    """
    s_lo = float(s_lo)
    s_hi = float(s_hi)
    if s_lo == s_hi:
        return 0.0

    def ev(s):
        v = np.asarray(f(np.asarray(s, dtype=float)), dtype=float)
        v = np.broadcast_to(v, np.shape(s))
        bad = ~np.isfinite(v)
        if bad.any():
            k = int(np.argmax(bad))
            at = float(np.asarray(s).ravel()[k])
            raise QuadratureError(f"integrand not finite at s={at!r}", where=at)
        return v

    a_eval, b_eval = _nodes(s_lo, s_hi, endpoint_nudge)
    ends = float(np.sum(ev(np.array([a_eval, b_eval]))))
    n = 2
    h = (s_hi - s_lo) / n
    odd = float(np.sum(ev(np.array([s_lo + h]))))
    even = 0.0
    prev = h / 3.0 * (ends + 4.0 * odd + 2.0 * even)
    gap = np.inf
    for depth in range(1, max_depth + 1):
        even += odd
        n *= 2
        h = (s_hi - s_lo) / n
        odd = float(np.sum(ev(s_lo + h * np.arange(1, n, 2))))
        cur = h / 3.0 * (ends + 4.0 * odd + 2.0 * even)
        gap = abs(cur - prev)
        if depth >= min_depth and gap < tol:
            return cur
        prev = cur
    raise QuadratureError(f"no convergence after {max_depth} refinements (gap {gap:.3e})", best=prev, gap=gap)


def integrate_batch(f, lo, hi, tol=DEFAULT_TOL, max_depth=16, min_depth=2, endpoint_nudge=0.0):
    """Vector of signed integrals ``int_{lo[k]}^{hi[k]} f(k, s) ds``.

    ``f(idx, s)`` receives an integer index array of shape ``(m,)`` and
    abscissae of shape ``(m, q)`` and returns values of shape ``(m, q)``.
    """
    lo = np.asarray(lo, dtype=float).ravel()
    hi = np.asarray(hi, dtype=float).ravel()
    npts = lo.size
    out = np.zeros(npts)
    if npts == 0:
        return out
    span = hi - lo

    def ev(idx, s):
        vals = np.empty(s.shape)
        rows = max(1, _CHUNK // max(1, s.shape[1]))
        for start in range(0, idx.size, rows):
            sl = slice(start, start + rows)
            v = np.asarray(f(idx[sl], s[sl]), dtype=float)
            vals[sl] = np.broadcast_to(v, s[sl].shape)
        bad = ~np.isfinite(vals)
        if bad.any():
            r, c = np.argwhere(bad)[0]
            k = int(idx[r])
            at = float(s[r, c])
            raise QuadratureError(f"integrand not finite at point {k}, s={at!r}", where=(k, at))
        return vals

    idx = np.flatnonzero(span != 0.0)
    if idx.size == 0:
        return out
    a_eval, b_eval = _nodes(lo[idx], hi[idx], endpoint_nudge)
    ends = ev(idx, np.stack([a_eval, b_eval], axis=1)).sum(axis=1)
    n = 2
    h = span[idx] / n
    odd = ev(idx, (lo[idx] + h)[:, None]).sum(axis=1)
    even = np.zeros(idx.size)
    prev = h / 3.0 * (ends + 4.0 * odd + 2.0 * even)
    gap = np.full(idx.size, np.inf)
    for depth in range(1, max_depth + 1):
        even = even + odd
        n *= 2
        h = span[idx] / n
        k = np.arange(1, n, 2, dtype=float)
        odd = ev(idx, lo[idx][:, None] + h[:, None] * k[None, :]).sum(axis=1)
        cur = h / 3.0 * (ends + 4.0 * odd + 2.0 * even)
        gap = np.abs(cur - prev)
        if depth >= min_depth:
            done = gap < tol
            out[idx[done]] = cur[done]
            keep = ~done
            idx, ends, odd, even, cur, gap = idx[keep], ends[keep], odd[keep], even[keep], cur[keep], gap[keep]
            if idx.size == 0:
                return out
        prev = cur
    worst = int(np.argmax(gap))
    raise QuadratureError(
        f"{idx.size} integrals did not converge after {max_depth} refinements (worst gap {gap[worst]:.3e})",
        best=float(prev[worst]), gap=float(gap[worst]), where=(int(idx[worst]), None))
