"""Burgers-to-eikonal change of variables with gluing across singular graphs.

For a Burgers field ``h`` and a separator curve ``t = a(x)`` the primitive

    U(x, t) = int_{a(x)}^{t} ds / sqrt(h(x, s)^2 + 1) + G(x),
    G(x)    = int_{x_ref}^{x} (h(s, a(s)) + a'(s)) / sqrt(h(s, a(s))^2 + 1) ds

has gradient ``(h, 1) / sqrt(h^2 + 1)`` wherever ``h`` is classical, so it
solves the eikonal equation there. The plane is cut into strips by ordered
graphs ``p_k``; each strip gets its own separator and primitive, and the
primitives are shifted by offsets ``Delta_k(x)`` so the assembled ``u`` is
continuous across every graph. The offsets should come out constant in ``x``;
they are computed pointwise so that this can be checked rather than assumed.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .fields import Domain, GridField, SolutionField
from .quadrature import DEFAULT_TOL, QuadratureError, integrate_batch

# endpoint samples sit this fraction of the interval inside it, so integrals
# ending on a graph see the one-sided limit of h rather than its value on S
ENDPOINT_NUDGE = 1e-12


class TransformError(ValueError):
    def __init__(self, message, point=None):
        self.point = point
        super().__init__(message)


class StripError(ValueError):
    pass


@dataclass(frozen=True)
class GraphCurve:
    p: Callable
    p_prime: Callable
    label: int = 1
    flat: bool = False

    @classmethod
    def horizontal(cls, level: float, label: int = 0):
        level = float(level)
        return cls(lambda x: np.full(np.shape(x), level), lambda x: np.zeros(np.shape(x)), label, True)

    @classmethod
    def sine(cls, offset: float, amplitude: float = 0.1, label: int = 1, frequency: float = 1.0):
        return cls(lambda x: offset + amplitude * np.sin(frequency * np.asarray(x, dtype=float)),
                   lambda x: amplitude * frequency * np.cos(frequency * np.asarray(x, dtype=float)),
                   label)

    def __call__(self, x):
        return np.asarray(self.p(np.asarray(x, dtype=float)), dtype=float)

    def slope(self, x):
        return np.asarray(self.p_prime(np.asarray(x, dtype=float)), dtype=float)


@dataclass(frozen=True)
class StripDecomposition:
    """Graphs ``p_{-m} < ... < p_{-1} < p_1 < ... < p_n`` and separators
    ``a_{-m}, ..., a_n`` interleaved as
    ``a_{-m} < p_{-m} < ... < p_{-1} < a_0 < p_1 < a_1 < ... < p_n < a_n``."""

    graphs: tuple
    separators: tuple

    def __post_init__(self):
        graphs = tuple(sorted(self.graphs, key=lambda g: g.label))
        seps = tuple(sorted(self.separators, key=lambda g: g.label))
        object.__setattr__(self, "graphs", graphs)
        object.__setattr__(self, "separators", seps)
        labels = [g.label for g in graphs]
        if 0 in labels or len(set(labels)) != len(labels):
            raise StripError(f"graph labels must be distinct and nonzero, got {labels}")
        n = sum(1 for k in labels if k > 0)
        m = len(labels) - n
        if sorted(labels) != list(range(-m, 0)) + list(range(1, n + 1)):
            raise StripError(f"graph labels must be -{m}..-1 and 1..{n}, got {labels}")
        want = list(range(-m, n + 1))
        if [s.label for s in seps] != want:
            raise StripError(f"separator labels must be {want}, got {[s.label for s in seps]}")

    @property
    def n_up(self):
        return sum(1 for g in self.graphs if g.label > 0)

    @property
    def n_down(self):
        return sum(1 for g in self.graphs if g.label < 0)

    def graph(self, k) -> GraphCurve:
        for g in self.graphs:
            if g.label == k:
                return g
        raise KeyError(f"no graph labelled {k}")

    def separator(self, r) -> GraphCurve:
        return self.separators[r + self.n_down]

    def ordered(self):
        """Curves bottom to top as ``(name, curve)`` pairs."""
        out = []
        for r in range(-self.n_down, self.n_up + 1):
            if r < 0:
                out.append((f"a_{r}", self.separator(r)))
                out.append((f"p_{r}", self.graph(r)))
            elif r == 0:
                out.append(("a_0", self.separator(0)))
            else:
                out.append((f"p_{r}", self.graph(r)))
                out.append((f"a_{r}", self.separator(r)))
        return out

    def validate(self, xs):
        xs = np.asarray(xs, dtype=float)
        curves = self.ordered()
        for (n1, c1), (n2, c2) in zip(curves, curves[1:]):
            bad = ~(c1(xs) < c2(xs))
            if bad.any():
                x = float(xs[np.argmax(bad)])
                raise StripError(f"interleaving violated: {n1} >= {n2} at x = {x!r}")

    def region(self, x, t):
        """Strip index ``r``: 0 between ``p_{-1}`` and ``p_1``, ``r > 0`` above
        ``p_r``, ``r < 0`` below ``p_{-|r|}``. Points on a graph go to the strip
        nearer ``a_0``."""
        x = np.asarray(x, dtype=float)
        t = np.asarray(t, dtype=float)
        r = np.zeros(np.broadcast(x, t).shape, dtype=np.int64)
        for g in self.graphs:
            pv = g(x)
            if g.label > 0:
                r += (t > pv).astype(np.int64)
            else:
                r -= (t < pv).astype(np.int64)
        return r

    def piece_labels(self, x, t):
        x, t = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(t, dtype=float))
        r = self.region(x, t)
        m, n = self.n_down, self.n_up
        out = np.empty(x.shape, dtype=object)
        if m == 0 and n == 0:
            out[...] = "0"
            return out
        for rr in np.unique(r):
            sel = r == rr
            above = t[sel] >= self.separator(int(rr))(x[sel])
            if rr == 0:
                if n and m:
                    lab = np.where(above, "1+", "-1+")
                else:
                    lab = np.full(above.shape, "1+" if n else "-1+", dtype=object)
            elif rr > 0:
                lab = np.where(~above | (rr == n), f"{rr}-", f"{rr + 1}+")
            else:
                k = -rr
                lab = np.where(above | (k == m), f"-{k}-", f"-{k + 1}+")
            out[sel] = lab
        return out


def midline_separators(graphs: Sequence[GraphCurve], margin: float = 0.5):
    """Separators halfway between neighbouring graphs, plus outer ones at
    ``margin`` beyond the extreme graphs."""
    graphs = sorted(graphs, key=lambda g: g.label)
    lows = [g for g in graphs if g.label < 0]
    ups = [g for g in graphs if g.label > 0]

    def mid(g1, g2, label):
        return GraphCurve(lambda x: 0.5 * (g1(x) + g2(x)), lambda x: 0.5 * (g1.slope(x) + g2.slope(x)), label)

    def shifted(g, d, label):
        return GraphCurve(lambda x: g(x) + d, g.slope, label)

    seps = []
    m = len(lows)
    for k in range(m, 0, -1):  # a_{-k} sits below p_{-k}
        g = lows[m - k]
        if k == m:
            seps.append(shifted(g, -margin, -k))
        else:
            seps.append(mid(lows[m - k - 1], g, -k))
    if lows and ups:
        seps.append(mid(lows[-1], ups[0], 0))
    elif ups:
        seps.append(shifted(ups[0], -margin, 0))
    elif lows:
        seps.append(shifted(lows[-1], margin, 0))
    else:
        seps.append(GraphCurve.horizontal(0.0, 0))
    for k in range(1, len(ups) + 1):
        g = ups[k - 1]
        if k == len(ups):
            seps.append(shifted(g, margin, k))
        else:
            seps.append(mid(g, ups[k], k))
    return seps


def sine_strips(amplitude=0.1, levels=(-1.0, 0.0, 1.0), first_label=-1):
    """Sine-perturbed graphs at ``levels`` (labels from ``first_label`` up,
    skipping 0) with midline separators."""
    labels = []
    k = first_label
    for _ in levels:
        if k == 0:
            k = 1
        labels.append(k)
        k += 1
    graphs = [GraphCurve.sine(lv, amplitude, lab) for lv, lab in zip(levels, labels)]
    return StripDecomposition(tuple(graphs), tuple(midline_separators(graphs)))


class EikonalField:
    """A candidate eikonal solution ``u`` with gradient evaluators.

    Fields produced by :func:`transform_simple` / :func:`transform_multistrip`
    are :class:`GluedEikonalField`; this base class also wraps arbitrary
    functions so the verifiers can be pointed at hand-made data.
    """

    def __init__(self, u, u_x=None, u_t=None, source: Optional[SolutionField] = None, name="u"):
        self._u = u
        self._u_x = u_x
        self._u_t = u_t
        self.source = source
        self.name = name

    @classmethod
    def from_function(cls, u, u_x=None, u_t=None, name="u"):
        return cls(u, u_x, u_t, None, name)

    def u(self, x, t):
        x, t = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(t, dtype=float))
        return np.asarray(self._u(x, t), dtype=float)

    def u_x(self, x, t):
        if self._u_x is None:
            raise ValueError(f"{self.name} has no gradient evaluator")
        return np.asarray(self._u_x(*np.broadcast_arrays(x, t)), dtype=float)

    def u_t(self, x, t):
        if self._u_t is None:
            raise ValueError(f"{self.name} has no gradient evaluator")
        return np.asarray(self._u_t(*np.broadcast_arrays(x, t)), dtype=float)

    def valid(self, x, t):
        if self.source is None:
            return np.ones(np.broadcast(x, t).shape, dtype=bool)
        return ~self.source.mask(x, t)

    def pieces(self, x, t):
        return None

    def assemble(self, domain: Domain) -> GridField:
        X, T = domain.mesh()
        ok = self.valid(X, T)
        vals = np.full(X.shape, np.nan)
        if ok.any():
            vals[ok] = self.u(X[ok], T[ok])
        ok &= np.isfinite(vals)
        pieces = self.pieces(X, T)
        return GridField(domain, np.where(ok, vals, 0.0), ok, pieces)


class GluedEikonalField(EikonalField):
    def __init__(self, source: SolutionField, strips: StripDecomposition, x_ref=0.0, tol=DEFAULT_TOL):
        super().__init__(None, source=source, name=f"eikonal[{source.name}]")
        self.strips = strips
        self.x_ref = float(x_ref)
        self.tol = float(tol)
        # memo tables: (separator r, x) -> G_r(x); (strip r, x) -> offset; results only, no ordering effects
        self._g_cache = {}
        self._off_cache = {}

    # gradient identities: the transform is built so these hold off S
    def u_x(self, x, t):
        h = self.source(x, t)
        return h / np.sqrt(h * h + 1.0)

    def u_t(self, x, t):
        h = self.source(x, t)
        return 1.0 / np.sqrt(h * h + 1.0)

    def pieces(self, x, t):
        return self.strips.piece_labels(x, t)

    # -- quadrature pieces -------------------------------------------------

    def _t_integrals(self, x, lo, hi):
        x = np.asarray(x, dtype=float).ravel()
        h = self.source

        def f(idx, s):
            hv = h(x[idx][:, None], s)
            return 1.0 / np.sqrt(hv * hv + 1.0)

        try:
            out = integrate_batch(f, lo, hi, tol=self.tol, endpoint_nudge=ENDPOINT_NUDGE)
        except QuadratureError as err:
            if err.where and err.where[1] is not None:
                k, s = err.where
                raise TransformError(f"{h.name} is singular at (x, s) = ({x[k]!r}, {s!r}) off the declared graphs",
                                     (float(x[k]), float(s))) from err
            raise TransformError(f"t-quadrature failed for {h.name}: {err}") from err
        # integrand is bounded by 1
        if np.any(np.abs(out) > np.abs(np.asarray(hi) - np.asarray(lo)) * (1 + 1e-12) + self.tol):
            raise TransformError("t-integral exceeds interval length; integrand bound violated")
        return out

    def _g(self, r, xs):
        """``G_r`` at each of ``xs``."""
        xs = np.asarray(xs, dtype=float).ravel()
        uniq, inv = np.unique(xs, return_inverse=True)
        missing = [x for x in uniq if (r, x) not in self._g_cache]
        if missing:
            sep = self.strips.separator(r)
            h = self.source
            miss = np.array(missing)

            if sep.flat:
                def f(idx, s):
                    hv = h(s, sep(s))
                    return hv / np.sqrt(hv * hv + 1.0)
            else:
                def f(idx, s):
                    hv = h(s, sep(s))
                    return (hv + sep.slope(s)) / np.sqrt(hv * hv + 1.0)

            try:
                vals = integrate_batch(f, np.full(miss.size, self.x_ref), miss, tol=self.tol,
                                       endpoint_nudge=ENDPOINT_NUDGE)
            except QuadratureError as err:
                if err.where and err.where[1] is not None:
                    s = err.where[1]
                    pt = (float(s), float(sep(np.array([s]))[0]))
                    raise TransformError(f"{h.name} is singular on separator a_{r} at (x, t) = {pt}", pt) from err
                raise TransformError(f"x-quadrature along a_{r} failed: {err}") from err
            for x, v in zip(miss, vals):
                self._g_cache[(r, float(x))] = float(v)
        return np.array([self._g_cache[(r, float(x))] for x in uniq])[inv]

    def primitive(self, r, x, t):
        """Unshifted primitive ``U_r(x, t)`` built on separator ``a_r``."""
        x, t = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(t, dtype=float))
        shape = x.shape
        x = x.ravel()
        t = t.ravel()
        lo = self.strips.separator(r)(x)
        return (self._t_integrals(x, lo, t) + self._g(r, x)).reshape(shape)

    def offset(self, r, xs):
        """Total shift applied to strip ``r``; the cumulative ``Delta`` of the
        graph crossed last on the way out from strip 0."""
        xs = np.asarray(xs, dtype=float).ravel()
        if r == 0:
            return np.zeros(xs.size)
        uniq, inv = np.unique(xs, return_inverse=True)
        missing = np.array([x for x in uniq if (r, x) not in self._off_cache])
        if missing.size:
            inner = r - 1 if r > 0 else r + 1
            p = self.strips.graph(r)(missing)
            prev = self.offset(inner, missing)
            vals = prev + self.primitive(inner, missing, p) - self.primitive(r, missing, p)
            for x, v in zip(missing, vals):
                self._off_cache[(r, float(x))] = float(v)
        return np.array([self._off_cache[(r, float(x))] for x in uniq])[inv]

    def delta(self, k, xs):
        """``Delta_k(x)``: the offset carried by the strip on the far side of ``p_k``."""
        self.strips.graph(k)
        return self.offset(k, xs)

    def graph_discrepancy(self, k, xs):
        """``|inner branch - outer branch|`` on ``p_k``; zero by construction of
        ``Delta_k`` up to rounding. Reported, never used to pick a branch."""
        xs = np.asarray(xs, dtype=float).ravel()
        inner = k - 1 if k > 0 else k + 1
        p = self.strips.graph(k)(xs)
        a = self.primitive(inner, xs, p) + self.offset(inner, xs)
        b = self.primitive(k, xs, p) + self.offset(k, xs)
        return np.abs(a - b)

    def u(self, x, t):
        x, t = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(t, dtype=float))
        shape = x.shape
        x = x.ravel()
        t = t.ravel()
        r = self.strips.region(x, t)
        lo = np.empty(x.size)
        g = np.empty(x.size)
        off = np.empty(x.size)
        for rr in np.unique(r):
            sel = r == rr
            lo[sel] = self.strips.separator(int(rr))(x[sel])
            g[sel] = self._g(int(rr), x[sel])
            off[sel] = self.offset(int(rr), x[sel])
        return (self._t_integrals(x, lo, t) + g + off).reshape(shape)


def _check_xs(h: SolutionField, check_xs):
    if check_xs is not None:
        return np.asarray(check_xs, dtype=float)
    d = h.domain or Domain.default()
    return np.linspace(d.x_min, d.x_max, 201)


def transform_simple(h: SolutionField, graph: GraphCurve, base_lo=0.0, base_hi=1.0, x_ref=0.0,
                     tol=DEFAULT_TOL, check_xs=None) -> GluedEikonalField:
    """One graph inside the strip ``base_lo < p(x) < base_hi``: ``u+`` is built
    from the line ``t = base_lo``, ``u-`` from ``t = base_hi``, glued by ``Delta``."""
    if not base_lo < base_hi:
        raise StripError("need base_lo < base_hi")
    g = GraphCurve(graph.p, graph.p_prime, 1, graph.flat)
    strips = StripDecomposition((g,), (GraphCurve.horizontal(base_lo, 0), GraphCurve.horizontal(base_hi, 1)))
    strips.validate(_check_xs(h, check_xs))
    return GluedEikonalField(h, strips, x_ref, tol)


def transform_multistrip(h: SolutionField, strips: StripDecomposition, x_ref=0.0, tol=DEFAULT_TOL,
                         check_xs=None) -> GluedEikonalField:
    strips.validate(_check_xs(h, check_xs))
    return GluedEikonalField(h, strips, x_ref, tol)


def delta_profile(field: GluedEikonalField, graph_index: int, xs) -> np.ndarray:
    return field.delta(graph_index, xs)


def delta_csv(xs, deltas):
    lines = ["x,delta"] + [f"{float(x)!r},{float(d)!r}" for x, d in zip(xs, deltas)]
    return "\n".join(lines) + "\n"
