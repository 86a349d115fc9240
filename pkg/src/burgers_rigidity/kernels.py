"""Array kernels behind the grid operations.

Every kernel exists twice: a scalar-loop version compiled with numba and a
vectorised numpy version. ``IMPL`` picks one at import time (see
:mod:`burgers_rigidity._accel`); both are kept importable so tests and the
benchmark can compare them directly.
"""

import warnings

import numpy as np

from ._accel import njit, use_numba

# ---------------------------------------------------------------------------
# finite differences along axis 0 with invalid-cell poisoning


def _fd_axis0_loop(values, valid, h):
    n0, n1 = values.shape
    out = np.zeros((n0, n1))
    ok = np.zeros((n0, n1), dtype=np.bool_)
    inv2h = 1.0 / (2.0 * h)
    for j in range(n1):
        for i in range(n0):
            if not valid[i, j]:
                continue
            if 0 < i < n0 - 1 and valid[i - 1, j] and valid[i + 1, j]:
                out[i, j] = (values[i + 1, j] - values[i - 1, j]) * inv2h
                ok[i, j] = True
            elif i + 2 < n0 and valid[i + 1, j] and valid[i + 2, j]:
                out[i, j] = (-3.0 * values[i, j] + 4.0 * values[i + 1, j] - values[i + 2, j]) * inv2h
                ok[i, j] = True
            elif i - 2 >= 0 and valid[i - 1, j] and valid[i - 2, j]:
                out[i, j] = (3.0 * values[i, j] - 4.0 * values[i - 1, j] + values[i - 2, j]) * inv2h
                ok[i, j] = True
    return out, ok


def _fd_axis0_numpy(values, valid, h):
    n0 = values.shape[0]
    out = np.zeros(values.shape)
    inv2h = 1.0 / (2.0 * h)
    v = np.where(valid, values, 0.0)

    central = np.zeros(values.shape, dtype=bool)
    central[1:-1] = valid[1:-1] & valid[:-2] & valid[2:]
    cval = np.zeros(values.shape)
    cval[1:-1] = (v[2:] - v[:-2]) * inv2h

    fwd = np.zeros(values.shape, dtype=bool)
    fval = np.zeros(values.shape)
    if n0 >= 3:
        fwd[:-2] = valid[:-2] & valid[1:-1] & valid[2:]
        fval[:-2] = (-3.0 * v[:-2] + 4.0 * v[1:-1] - v[2:]) * inv2h

    bwd = np.zeros(values.shape, dtype=bool)
    bval = np.zeros(values.shape)
    if n0 >= 3:
        bwd[2:] = valid[2:] & valid[1:-1] & valid[:-2]
        bval[2:] = (3.0 * v[2:] - 4.0 * v[1:-1] + v[:-2]) * inv2h

    take_b = bwd & ~central & ~fwd
    take_f = fwd & ~central
    out[take_b] = bval[take_b]
    out[take_f] = fval[take_f]
    out[central] = cval[central]
    ok = central | fwd | bwd
    return out, ok


# ---------------------------------------------------------------------------
# Godunov update for f(u) = u^2 / 2 with outflow ghosts


def _godunov_loop(u, lam):
    n = u.shape[0]
    flux = np.empty(n + 1)
    for k in range(n + 1):
        ul = u[k - 1] if k > 0 else u[0]
        ur = u[k] if k < n else u[n - 1]
        a = ul if ul > 0.0 else 0.0
        b = ur if ur < 0.0 else 0.0
        fa = 0.5 * a * a
        fb = 0.5 * b * b
        flux[k] = fa if fa > fb else fb
    unew = np.empty(n)
    for i in range(n):
        unew[i] = u[i] - lam * (flux[i + 1] - flux[i])
    return unew, flux[0], flux[n]


def _godunov_numpy(u, lam):
    padded = np.concatenate((u[:1], u, u[-1:]))
    ul = padded[:-1]
    ur = padded[1:]
    a = np.maximum(ul, 0.0)
    b = np.minimum(ur, 0.0)
    flux = np.maximum(0.5 * a * a, 0.5 * b * b)
    unew = u - lam * (flux[1:] - flux[:-1])
    return unew, flux[0], flux[-1]


# ---------------------------------------------------------------------------
# one-sided difference quotients (u[i+k] - u[i]) / (k dx)


def _forward_quotients_loop(u, dx, ks):
    n = u.shape[0]
    best = np.full(ks.shape[0], -np.inf)
    where = np.zeros(ks.shape[0], dtype=np.int64)
    for m in range(ks.shape[0]):
        k = ks[m]
        scale = 1.0 / (k * dx)
        for i in range(n - k):
            q = (u[i + k] - u[i]) * scale
            if q > best[m]:
                best[m] = q
                where[m] = i
    return best, where


def _forward_quotients_numpy(u, dx, ks):
    best = np.full(ks.shape[0], -np.inf)
    where = np.zeros(ks.shape[0], dtype=np.int64)
    for m, k in enumerate(ks):
        if k >= u.shape[0]:
            continue
        q = (u[k:] - u[:-k]) * (1.0 / (k * dx))
        i = int(np.argmax(q))
        best[m] = q[i]
        where[m] = i
    return best, where


# ---------------------------------------------------------------------------
# jump flags along axis 0: |d_i| > factor * (median of valid |d| in i-2..i+2 + floor)


def _jump_flags_loop(values, valid, factor, floor):
    n0, n1 = values.shape
    nd = n0 - 1
    flags = np.zeros((nd, n1), dtype=np.bool_)
    d = np.zeros((nd, n1))
    dok = np.zeros((nd, n1), dtype=np.bool_)
    for i in range(nd):
        for j in range(n1):
            if valid[i, j] and valid[i + 1, j]:
                dok[i, j] = True
                d[i, j] = abs(values[i + 1, j] - values[i, j])
    window = np.empty(5)
    for i in range(nd):
        for j in range(n1):
            if not dok[i, j]:
                continue
            m = 0
            for k in range(max(0, i - 2), min(nd, i + 3)):
                if dok[k, j]:
                    # insertion sort into window[:m]
                    v = d[k, j]
                    q = m
                    while q > 0 and window[q - 1] > v:
                        window[q] = window[q - 1]
                        q -= 1
                    window[q] = v
                    m += 1
            if m % 2 == 1:
                med = window[m // 2]
            else:
                med = 0.5 * (window[m // 2 - 1] + window[m // 2])
            if d[i, j] > factor * (med + floor):
                flags[i, j] = True
    return flags


def _jump_flags_numpy(values, valid, factor, floor):
    n0, n1 = values.shape
    nd = n0 - 1
    dok = valid[:-1] & valid[1:]
    d = np.where(dok, np.abs(np.where(dok, values[1:] - values[:-1], 0.0)), 0.0)
    stack = np.full((5, nd, n1), np.nan)
    for off in range(-2, 3):
        lo = max(0, -off)
        hi = min(nd, nd - off)
        src = np.where(dok, d, np.nan)
        stack[off + 2, lo:hi] = src[lo + off:hi + off]
    with warnings.catch_warnings():
        # columns where dok is False are all-NaN; they are masked out below
        warnings.simplefilter("ignore", RuntimeWarning)
        med = np.nanmedian(stack, axis=0)
    med = np.where(dok, med, 0.0)
    return dok & (d > factor * (med + floor))


# ---------------------------------------------------------------------------

NUMPY = {
    "fd_axis0": _fd_axis0_numpy,
    "godunov": _godunov_numpy,
    "forward_quotients": _forward_quotients_numpy,
    "jump_flags": _jump_flags_numpy,
}

if use_numba():
    NUMBA = {
        "fd_axis0": njit(_fd_axis0_loop),
        "godunov": njit(_godunov_loop),
        "forward_quotients": njit(_forward_quotients_loop),
        "jump_flags": njit(_jump_flags_loop),
    }
    IMPL = NUMBA
else:
    NUMBA = None
    IMPL = NUMPY


def fd_axis0(values, valid, h):
    values = np.ascontiguousarray(values, dtype=np.float64)
    valid = np.ascontiguousarray(valid, dtype=np.bool_)
    return IMPL["fd_axis0"](values, valid, float(h))


def godunov(u, lam):
    return IMPL["godunov"](np.ascontiguousarray(u, dtype=np.float64), float(lam))


def forward_quotients(u, dx, ks):
    u = np.ascontiguousarray(u, dtype=np.float64)
    ks = np.ascontiguousarray(ks, dtype=np.int64)
    return IMPL["forward_quotients"](u, float(dx), ks)


def jump_flags(values, valid, factor, floor):
    values = np.ascontiguousarray(values, dtype=np.float64)
    valid = np.ascontiguousarray(valid, dtype=np.bool_)
    if values.shape[0] < 2:
        return np.zeros((0, values.shape[1]), dtype=bool)
    return IMPL["jump_flags"](values, valid, float(factor), float(floor))
