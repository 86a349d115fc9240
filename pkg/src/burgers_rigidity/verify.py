"""Pass/fail checkers, characteristic tracing and the affine/cone classifier."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import least_squares
from scipy.spatial.distance import directed_hausdorff

from . import kernels
from .fields import Domain, GridField, SolutionField, diff_t, diff_x, sample, sample_exact_partials
from .transform import EikonalField, GluedEikonalField


@dataclass
class ResidualReport:
    check: str
    max_abs: float
    l2: float
    n_points: int
    tolerance: float
    passed: bool
    worst_point: Optional[tuple] = None
    children: list = field(default_factory=list)
    details: dict = field(default_factory=dict)

    def to_dict(self):
        d = {
            "check": self.check,
            "max_abs": self.max_abs,
            "l2": self.l2,
            "n_points": self.n_points,
            "tolerance": self.tolerance,
            "passed": self.passed,
            "worst_point": list(self.worst_point) if self.worst_point is not None else None,
        }
        if self.children:
            d["children"] = [c.to_dict() for c in self.children]
        if self.details:
            d["details"] = self.details
        return d

    @classmethod
    def from_residuals(cls, check, residual, x, t, tolerance, **details):
        """``l2`` is the root-mean-square of the residual over the points."""
        r = np.abs(np.asarray(residual, dtype=float).ravel())
        x = np.asarray(x, dtype=float).ravel()
        t = np.asarray(t, dtype=float).ravel()
        if r.size == 0:
            return cls(check, 0.0, 0.0, 0, tolerance, True, None, details=details)
        k = int(np.argmax(r))
        max_abs = float(r[k])
        return cls(check, max_abs, float(np.sqrt(np.mean(r * r))), int(r.size), float(tolerance),
                   bool(max_abs <= tolerance), (float(x[k]), float(t[k])), details=details)

    @classmethod
    def combine(cls, check, children, **details):
        worst = max(children, key=lambda c: c.max_abs / c.tolerance if c.tolerance else c.max_abs)
        return cls(check, max(c.max_abs for c in children), max(c.l2 for c in children),
                   max(c.n_points for c in children), worst.tolerance, all(c.passed for c in children),
                   worst.worst_point, list(children), details)


# -- residuals ------------------------------------------------------------------

def burgers_residual(h: SolutionField, domain: Domain, use_exact=True, tolerance=None) -> ResidualReport:
    """``h_t + h h_x`` over the valid grid points."""
    grid = sample(h, domain)
    exact = use_exact and h.has_exact_partials
    if exact:
        gx, gt = sample_exact_partials(h, domain)
    else:
        gx, gt = diff_x(grid), diff_t(grid)
    ok = grid.validity & gx.validity & gt.validity
    res = gt.values + grid.values * gx.values
    X, T = domain.mesh()
    if tolerance is None:
        tolerance = 1e-10 if exact else 1e-6
    return ResidualReport.from_residuals("burgers_residual", res[ok], X[ok], T[ok], tolerance,
                                         partials="exact" if exact else "finite_difference")


def _grid_of(u, domain):
    if isinstance(u, GridField):
        return u
    return u.assemble(domain)


def eikonal_residual(u, domain: Domain = None, gradients="fd", tolerance=1e-6) -> ResidualReport:
    """``u_x^2 + u_t^2 - 1``; ``gradients="fd"`` differentiates the assembled grid,
    ``"exact"`` uses the field's own gradient evaluators."""
    domain = domain or (u.domain if isinstance(u, GridField) else Domain.default())
    X, T = domain.mesh()
    if gradients == "exact":
        if isinstance(u, GridField):
            raise ValueError("exact gradients need an EikonalField")
        ok = u.valid(X, T)
        ux, ut = u.u_x(X[ok], T[ok]), u.u_t(X[ok], T[ok])
        res = ux * ux + ut * ut - 1.0
        return ResidualReport.from_residuals("eikonal_residual", res, X[ok], T[ok], tolerance, gradients="exact")
    grid = _grid_of(u, domain)
    gx, gt = diff_x(grid), diff_t(grid)
    ok = gx.validity & gt.validity
    res = gx.values**2 + gt.values**2 - 1.0
    return ResidualReport.from_residuals("eikonal_residual", res[ok], X[ok], T[ok], tolerance,
                                         gradients="finite_difference")


def check_gradient_identities(u: EikonalField, domain: Domain = None, tolerance=1e-6) -> ResidualReport:
    """Finite-difference gradient of the assembled ``u`` against
    ``(h, 1) / sqrt(h^2 + 1)`` computed from the source field."""
    if u.source is None:
        raise ValueError("gradient identities need the source Burgers field")
    domain = domain or Domain.default()
    grid = u.assemble(domain)
    gx, gt = diff_x(grid), diff_t(grid)
    hg = sample(u.source, domain)
    ok = gx.validity & gt.validity & hg.validity
    X, T = domain.mesh()
    hv = hg.values
    root = np.sqrt(hv * hv + 1.0)
    rx = (gx.values - hv / root)[ok]
    rt = (gt.values - 1.0 / root)[ok]
    cx = ResidualReport.from_residuals("gradient_identity_x", rx, X[ok], T[ok], tolerance)
    ct = ResidualReport.from_residuals("gradient_identity_t", rt, X[ok], T[ok], tolerance)
    return ResidualReport.combine("gradient_identities", [cx, ct])


def check_graph_matching(u: GluedEikonalField, xs, graph_index=None, eta=2e-3, tol_fd=1e-6) -> ResidualReport:
    """Compare the gradients of the two unshifted primitives meeting on ``p_k``.

    ``u_t`` is a one-sided 3-point difference taken from each primitive's own
    side; the tangential derivative is a central difference along the graph;
    ``u_x`` follows from the two.
    """
    strips = u.strips
    if graph_index is None:
        graph_index = strips.graphs[0].label if strips.n_up == 0 else 1
    g = strips.graph(graph_index)
    inner = graph_index - 1 if graph_index > 0 else graph_index + 1
    outer = graph_index
    # sign of the step that moves off the graph into each primitive's strip
    s_in, s_out = (-1.0, 1.0) if graph_index > 0 else (1.0, -1.0)
    xs = np.asarray(xs, dtype=float)
    p = g(xs)
    slope = g.slope(xs)

    def grad(r, side):
        tang = (u.primitive(r, xs + eta, g(xs + eta)) - u.primitive(r, xs - eta, g(xs - eta))) / (2 * eta)
        f0 = u.primitive(r, xs, p)
        f1 = u.primitive(r, xs, p + side * eta)
        f2 = u.primitive(r, xs, p + 2 * side * eta)
        ut = side * (-3.0 * f0 + 4.0 * f1 - f2) / (2 * eta)
        return tang - ut * slope, ut

    ux_i, ut_i = grad(inner, s_in)
    ux_o, ut_o = grad(outer, s_out)
    tol = 10.0 * tol_fd
    cx = ResidualReport.from_residuals("graph_matching_x", ux_i - ux_o, xs, p, tol)
    ct = ResidualReport.from_residuals("graph_matching_t", ut_i - ut_o, xs, p, tol)
    return ResidualReport.combine("graph_matching", [cx, ct], graph=int(graph_index), eta=eta)


def delta_constancy(u: GluedEikonalField, xs, tolerance=1e-8) -> ResidualReport:
    """Range of each ``Delta_k`` over ``xs``."""
    xs = np.asarray(xs, dtype=float)
    children = []
    for g in u.strips.graphs:
        d = u.delta(g.label, xs)
        xw = float(xs[int(np.argmax(np.abs(d - np.median(d))))])
        r = ResidualReport.from_residuals(f"delta_range[{g.label}]", np.array([np.ptp(d)]),
                                          [xw], [float(g(np.array([xw]))[0])], tolerance,
                                          delta_median=float(np.median(d)),
                                          graph_discrepancy=float(np.max(u.graph_discrepancy(g.label, xs))))
        children.append(r)
    if not children:
        return ResidualReport("delta_constancy", 0.0, 0.0, 0, tolerance, True)
    return ResidualReport.combine("delta_constancy", children)


# -- Oleinik one-sided estimate -------------------------------------------------

@dataclass(frozen=True)
class OleinikParams:
    E: float = 1.05
    M: float = 0.0
    a_offsets: tuple = (0.01, 0.05, 0.1, 0.5, 1.0)
    t_samples: tuple = (0.5, 1.0, 2.0, 4.0)
    # Discrete data only: skip offsets shorter than this many cells. First-order
    # schemes leave a step of a cell or two at sonic points, which adds roughly
    # 2 dx / a to the scaled quotient t * q; 0 keeps every offset.
    min_offset_cells: float = 0.0

    def __post_init__(self):
        if not self.E > 0 or self.M < 0 or self.min_offset_cells < 0:
            raise ValueError("need E > 0, M >= 0 and min_offset_cells >= 0")
        if any(a <= 0 for a in self.a_offsets) or any(t <= 0 for t in self.t_samples):
            raise ValueError("offsets and times must be positive")


def _quotients_on_array(u, x, dx, offsets, a_min=0.0):
    ks = np.unique(np.maximum(1, np.rint(np.asarray(offsets) / dx).astype(np.int64)))
    ks = ks[(ks < u.size) & (ks * dx >= a_min)]
    if ks.size == 0:
        return np.empty(0), np.empty(0), np.empty(0)
    best, where = kernels.forward_quotients(u, dx, ks)
    return best, x[where], ks * dx


def check_oleinik(h, params: OleinikParams = OleinikParams(), xs=None) -> ResidualReport:
    """Every quotient ``(h(x + a, t) - h(x, t)) / a`` must be strictly below ``E / t``.

    ``h`` may be a :class:`SolutionField` (evaluated at ``xs``), a
    :class:`GridField` (columns nearest to ``params.t_samples``) or a sequence
    of finite-volume states (each at its own time).
    ``max_abs`` is the largest excess ``q - E/t`` clipped at 0, ``tolerance`` is 0.
    """
    rows = []  # (t, quotient, x, a)
    skipped = 0

    def discrete(u, x, dx):
        nonlocal skipped
        a_min = params.min_offset_cells * dx * (1 - 1e-9)
        out = _quotients_on_array(u, x, dx, params.a_offsets, a_min)
        skipped += sum(a < a_min for a in params.a_offsets)
        return out

    if isinstance(h, SolutionField):
        if xs is None:
            xs = np.linspace(-5.0, 5.0, 1001)
        xs = np.asarray(xs, dtype=float)
        for t in params.t_samples:
            base = h(xs, t)
            for a in params.a_offsets:
                q = (h(xs + a, t) - base) / a
                q = np.where(np.isfinite(q), q, -np.inf)
                k = int(np.argmax(q))
                rows.append((t, q[k], xs[k], a))
    elif isinstance(h, GridField):
        d = h.domain
        for t in params.t_samples:
            j = int(round((t - d.t_min) / d.dt))
            if not 0 <= j < d.nt or abs(d.ts[j] - t) > 0.5 * d.dt:
                raise ValueError(f"t = {t} is not on the grid")
            col = np.where(h.validity[:, j], h.values[:, j], np.nan)
            best, bx, aa = discrete(col, d.xs, d.dx)
            rows.extend((d.ts[j], q, x, a) for q, x, a in zip(best, bx, aa) if np.isfinite(q))
    else:
        for st in h:
            if st.t <= 0:
                continue
            best, bx, aa = discrete(st.u, st.x, st.dx)
            rows.extend((st.t, q, x, a) for q, x, a in zip(best, bx, aa))
    if not rows:
        return ResidualReport("oleinik", 0.0, 0.0, 0, 0.0, True,
                              details={"E": params.E, "M": params.M, "skipped_offsets": skipped})
    t, q, x, a = (np.array(c, dtype=float) for c in zip(*rows))
    excess = q - params.E / t
    k = int(np.argmax(excess))
    worst = float(excess[k])
    passed = worst < 0
    max_abs = max(worst, 0.0)
    if worst == 0.0:
        # equality violates the strict bound; keep passed <=> max_abs <= tolerance
        max_abs = float(np.nextafter(0.0, 1.0))
    pos = np.maximum(excess, 0.0)
    return ResidualReport("oleinik", max_abs, float(np.sqrt(np.mean(pos * pos))), int(len(rows)), 0.0,
                          passed, (float(x[k]), float(t[k])),
                          details={"E": params.E, "M": params.M, "worst_margin": -worst,
                                   "worst_quotient": float(q[k]), "worst_offset": float(a[k]),
                                   "worst_scaled_quotient": float(q[k] * t[k]), "skipped_offsets": skipped})


# -- characteristics ---------------------------------------------------------------

@dataclass
class CharacteristicTrace:
    seed: tuple
    taus: np.ndarray
    states: np.ndarray  # (n, 2) columns x, t
    system: str
    truncated: bool = False
    richardson_error: float = np.nan

    @property
    def arclength(self):
        return float(np.sum(np.hypot(*np.diff(self.states, axis=0).T))) if len(self.states) > 1 else 0.0


def _velocity(field, system):
    if system == "burgers":
        if not isinstance(field, SolutionField):
            raise ValueError("the Burgers system needs a SolutionField")

        def v(x, t):
            return field(x, t), np.ones_like(t)
        return v
    if isinstance(field, EikonalField):
        return lambda x, t: (field.u_x(x, t), field.u_t(x, t))

    def v(x, t):
        hv = field(x, t)
        root = np.sqrt(hv * hv + 1.0)
        return hv / root, 1.0 / root
    return v


def _rk4(field, seeds, tau_span, n_steps, system, spacing):
    src = field.source if isinstance(field, EikonalField) else field
    vel = _velocity(field, system)
    seeds = np.asarray(seeds, dtype=float).reshape(-1, 2)
    ns = seeds.shape[0]
    d = tau_span / n_steps
    out = np.full((n_steps + 1, ns, 2), np.nan)
    out[0] = seeds
    alive = np.ones(ns, dtype=bool)
    last = np.full(ns, n_steps, dtype=np.int64)

    def blocked(x, t):
        if src is None:
            return ~np.isfinite(x) | ~np.isfinite(t)
        bad = src.mask(x, t) | ~np.isfinite(x) | ~np.isfinite(t)
        if src.singular_distance is not None and spacing:
            with np.errstate(all="ignore"):
                bad |= ~(src.singular_distance(x, t) >= spacing)
        return bad

    start_bad = blocked(seeds[:, 0], seeds[:, 1])
    if start_bad.any():
        raise ValueError(f"seed {tuple(seeds[np.argmax(start_bad)])} lies on or next to the singular set")
    y = seeds.copy()
    with np.errstate(all="ignore"):
        for n in range(1, n_steps + 1):
            x, t = y[:, 0], y[:, 1]
            k1 = np.stack(vel(x, t), axis=1)
            k2 = np.stack(vel(x + 0.5 * d * k1[:, 0], t + 0.5 * d * k1[:, 1]), axis=1)
            k3 = np.stack(vel(x + 0.5 * d * k2[:, 0], t + 0.5 * d * k2[:, 1]), axis=1)
            k4 = np.stack(vel(x + d * k3[:, 0], t + d * k3[:, 1]), axis=1)
            ynew = y + d / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
            bad = alive & (blocked(ynew[:, 0], ynew[:, 1]) | ~np.all(np.isfinite(ynew), axis=1))
            last[bad] = n - 1
            alive &= ~bad
            y = np.where(alive[:, None], ynew, y)
            out[n, alive] = ynew[alive]
            if not alive.any():
                break
    return out, last


def trace_characteristics(field, seeds, tau_span, n_steps=None, system=None, spacing=None, richardson=True):
    """Vectorised RK4 over many seeds; see :func:`trace_characteristic`."""
    if system is None:
        system = "eikonal" if isinstance(field, EikonalField) else "burgers"
    if system not in ("burgers", "eikonal"):
        raise ValueError(f"unknown system {system!r}")
    if n_steps is None:
        n_steps = max(1, int(round(1000 * abs(tau_span))))
    if spacing is None:
        spacing = Domain.default().dx
    out, last = _rk4(field, seeds, tau_span, n_steps, system, spacing)
    err = np.full(out.shape[1], np.nan)
    if richardson:
        fine, flast = _rk4(field, seeds, tau_span, 2 * n_steps, system, spacing)
        ok = (last == n_steps) & (flast == 2 * n_steps)
        err[ok] = np.hypot(*(fine[-1, ok] - out[-1, ok]).T)
    taus = np.linspace(0.0, tau_span, n_steps + 1)
    traces = []
    for s in range(out.shape[1]):
        n = last[s]
        traces.append(CharacteristicTrace(tuple(map(float, out[0, s])), taus[:n + 1], out[:n + 1, s].copy(),
                                          system, bool(n < n_steps), float(err[s])))
    return traces


def trace_characteristic(field, seed, tau_span, n_steps=None, system=None, spacing=None) -> CharacteristicTrace:
    """Integrate ``(dx, dt)/dtau = (h, 1)`` (Burgers) or ``(u_x, u_t)`` (eikonal)
    from ``seed``. The trace stops short, flagged ``truncated``, when a step
    would land on S or within ``spacing`` of it."""
    return trace_characteristics(field, [seed], tau_span, n_steps, system, spacing)[0]


def _resample(states, lengths, n):
    seg = np.hypot(*np.diff(states, axis=0).T)
    s = np.concatenate(([0.0], np.cumsum(seg)))
    return np.stack([np.interp(lengths, s, states[:, 0]), np.interp(lengths, s, states[:, 1])], axis=1)


def trace_distance(a: CharacteristicTrace, b: CharacteristicTrace, n=2001) -> float:
    """Hausdorff distance between the two paths over their common arclength,
    each resampled at ``n`` equally spaced arclength positions."""
    length = min(a.arclength, b.arclength)
    grid = np.linspace(0.0, length, n)
    pa = _resample(a.states, grid, n)
    pb = _resample(b.states, grid, n)
    return float(max(directed_hausdorff(pa, pb)[0], directed_hausdorff(pb, pa)[0]))


# -- classification ------------------------------------------------------------------

class DegenerateSamplesError(ValueError):
    pass


@dataclass
class ClassificationResult:
    kind: str  # "Affine" | "Cone" | "Unclassified"
    affine: Optional[tuple]  # (a, b, gamma), a^2 + b^2 = 1
    cone: Optional[tuple]  # (x0, t0, c, sign)
    fit_residual: float
    threshold: float
    affine_residual: float
    cone_residual: float
    implied_h: Optional[float] = None

    def to_dict(self):
        return {
            "kind": self.kind,
            "affine": list(self.affine) if self.affine else None,
            "cone": list(self.cone) if self.cone else None,
            "fit_residual": self.fit_residual,
            "threshold": self.threshold,
            "affine_residual": self.affine_residual,
            "cone_residual": self.cone_residual,
            "implied_h": self.implied_h,
        }


def _samples(u, domain, max_points, seed):
    if isinstance(u, GridField):
        x, t, v = u.valid_points()
    elif isinstance(u, EikonalField):
        domain = domain or Domain.default()
        g = u.assemble(domain)
        x, t, v = g.valid_points()
    else:
        x, t, v = (np.asarray(c, dtype=float).ravel() for c in u)
    if x.size > max_points:
        rng = np.random.default_rng(seed)
        keep = np.sort(rng.choice(x.size, max_points, replace=False))
        x, t, v = x[keep], t[keep], v[keep]
    return x, t, v


def fit_affine(x, t, v):
    A = np.stack([x, t, np.ones_like(x)], axis=1)
    (a, b, _), *_ = np.linalg.lstsq(A, v, rcond=None)
    norm = np.hypot(a, b)
    if norm == 0:
        a, b = 0.0, 1.0
    else:
        a, b = a / norm, b / norm
    gamma = float(np.mean(v - a * x - b * t))
    res = float(np.max(np.abs(v - a * x - b * t - gamma)))
    return (float(a), float(b), gamma), res


def fit_cone(x, t, v, domain_box, starts=5):
    """Multistart least squares for ``c + sign * |(x, t) - (x0, t0)|`` with ``c``
    eliminated; centres start on a ``starts x starts`` grid over ``domain_box``."""
    x_lo, x_hi, t_lo, t_hi = domain_box
    best = None
    for sign in (1.0, -1.0):
        def resid(z):
            r = np.hypot(x - z[0], t - z[1])
            m = v - sign * r
            return m - np.mean(m)

        for cx in np.linspace(x_lo, x_hi, starts):
            for ct in np.linspace(t_lo, t_hi, starts):
                sol = least_squares(resid, np.array([cx, ct]), method="lm", xtol=1e-15, ftol=1e-15, gtol=1e-15,
                                    max_nfev=2000)
                res = float(np.max(np.abs(sol.fun)))
                if best is None or res < best[1] - 1e-15:
                    z = sol.x
                    c = float(np.mean(v - sign * np.hypot(x - z[0], t - z[1])))
                    best = ((float(z[0]), float(z[1]), c, sign), res)
    return best


def classify(u, domain: Domain = None, threshold=None, seed=0, max_points=4096) -> ClassificationResult:
    """Fit the affine family first, then cones; the first fit under the threshold
    wins (ties go to Affine). ``threshold`` defaults to ``1e-6 * diameter``."""
    x, t, v = _samples(u, domain, max_points, seed)
    if x.size < 6:
        raise DegenerateSamplesError(f"need at least 6 valid samples, got {x.size}")
    centred = np.stack([x - x.mean(), t - t.mean()], axis=1)
    if np.linalg.matrix_rank(centred, tol=1e-12 * max(1.0, np.abs(centred).max())) < 2:
        raise DegenerateSamplesError("sample points are collinear")
    box = (float(x.min()), float(x.max()), float(t.min()), float(t.max()))
    diameter = float(np.hypot(box[1] - box[0], box[3] - box[2]))
    if threshold is None:
        threshold = 1e-6 * diameter
    aff, aff_res = fit_affine(x, t, v)
    if aff_res <= threshold:
        implied = aff[0] / aff[1] if aff[1] != 0 else None
        return ClassificationResult("Affine", aff, None, aff_res, threshold, aff_res, np.nan, implied)
    cone, cone_res = fit_cone(x, t, v, box)
    if cone_res <= threshold:
        return ClassificationResult("Cone", None, cone, cone_res, threshold, aff_res, cone_res)
    return ClassificationResult("Unclassified", None, None, min(aff_res, cone_res), threshold, aff_res, cone_res)
