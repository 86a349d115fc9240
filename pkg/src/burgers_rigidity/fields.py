"""Sampling grids, scalar fields and masked finite differences."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from . import kernels

Evaluator = Callable[[np.ndarray, np.ndarray], np.ndarray]


class FieldEvaluationError(ValueError):
    """A field produced a non-finite value at a point it claimed was valid."""

    def __init__(self, name, point, value):
        self.point = point
        self.value = value
        super().__init__(f"field {name!r} is not finite at (x, t) = ({point[0]!r}, {point[1]!r}): {value!r}")


@dataclass(frozen=True)
class Domain:
    x_min: float
    x_max: float
    t_min: float
    t_max: float
    nx: int = 401
    nt: int = 401

    def __post_init__(self):
        if not (self.x_min < self.x_max and self.t_min < self.t_max):
            raise ValueError(f"empty domain: {self}")
        if self.nx < 3 or self.nt < 3:
            raise ValueError(f"need at least 3 samples per axis, got nx={self.nx}, nt={self.nt}")
        if not all(np.isfinite([self.x_min, self.x_max, self.t_min, self.t_max])):
            raise ValueError("domain bounds must be finite")

    @classmethod
    def default(cls):
        return cls(-5.0, 5.0, -5.0, 5.0, 401, 401)

    @property
    def dx(self):
        return (self.x_max - self.x_min) / (self.nx - 1)

    @property
    def dt(self):
        return (self.t_max - self.t_min) / (self.nt - 1)

    @property
    def xs(self):
        return np.linspace(self.x_min, self.x_max, self.nx)

    @property
    def ts(self):
        return np.linspace(self.t_min, self.t_max, self.nt)

    @property
    def diameter(self):
        return float(np.hypot(self.x_max - self.x_min, self.t_max - self.t_min))

    def mesh(self):
        """``(X, T)`` arrays of shape ``(nx, nt)``, ``X[i, j] = xs[i]``."""
        return np.meshgrid(self.xs, self.ts, indexing="ij")

    def contains(self, other: "Domain") -> bool:
        return (self.x_min <= other.x_min and other.x_max <= self.x_max
                and self.t_min <= other.t_min and other.t_max <= self.t_max)

    def with_counts(self, nx, nt):
        return replace(self, nx=nx, nt=nt)


def _never(x, t):
    return np.zeros(np.broadcast(x, t).shape, dtype=bool)


@dataclass(frozen=True)
class SolutionField:
    """A Burgers unknown ``h(x, t)`` given by a vectorised rule.

    ``singular_mask`` marks points where ``rule`` is undefined (the set S, or
    anywhere the field is not meant to be evaluated). ``domain`` is the region
    of definition; ``None`` means the whole plane. ``singular_distance`` is
    optional and lets the characteristic tracer stop before reaching S.
    """

    rule: Evaluator
    name: str = "field"
    h_x: Optional[Evaluator] = None
    h_t: Optional[Evaluator] = None
    domain: Optional[Domain] = None
    singular_mask: Evaluator = _never
    singular_distance: Optional[Evaluator] = None
    params: dict = field(default_factory=dict)

    @property
    def has_exact_partials(self):
        return self.h_x is not None and self.h_t is not None

    def mask(self, x, t):
        x, t = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(t, dtype=float))
        return np.asarray(self.singular_mask(x, t), dtype=bool) | ~np.isfinite(x) | ~np.isfinite(t)

    def __call__(self, x, t):
        """Evaluate the rule; masked points come back as NaN."""
        x, t = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(t, dtype=float))
        bad = self.mask(x, t)
        with np.errstate(all="ignore"):
            out = np.asarray(self.rule(x, t), dtype=float)
        out = np.broadcast_to(out, x.shape).copy()
        out[bad] = np.nan
        return out

    def partials(self, x, t):
        if not self.has_exact_partials:
            raise ValueError(f"field {self.name!r} carries no exact partials")
        x, t = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(t, dtype=float))
        bad = self.mask(x, t)
        with np.errstate(all="ignore"):
            hx = np.broadcast_to(np.asarray(self.h_x(x, t), dtype=float), x.shape).copy()
            ht = np.broadcast_to(np.asarray(self.h_t(x, t), dtype=float), x.shape).copy()
        hx[bad] = np.nan
        ht[bad] = np.nan
        return hx, ht


@dataclass(frozen=True)
class GridField:
    domain: Domain
    values: np.ndarray
    validity: np.ndarray
    pieces: Optional[np.ndarray] = None  # labels such as "1+" for eikonal assemblies

    def __post_init__(self):
        shape = (self.domain.nx, self.domain.nt)
        if self.values.shape != shape or self.validity.shape != shape:
            raise ValueError(f"grid arrays must have shape {shape}")
        if not np.all(np.isfinite(self.values[self.validity])):
            raise ValueError("grid values must be finite wherever valid")

    def at(self, x, t):
        """Value at the grid node nearest to ``(x, t)``."""
        d = self.domain
        i = int(round((x - d.x_min) / d.dx))
        j = int(round((t - d.t_min) / d.dt))
        return float(self.values[i, j]), bool(self.validity[i, j])

    def valid_points(self):
        X, T = self.domain.mesh()
        m = self.validity
        return X[m], T[m], self.values[m]

    def to_csv(self, path=None):
        """CSV with header ``x,t,value,valid`` (plus ``piece`` if labelled),
        ordered by t, then by x within each t."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        header = ["x", "t", "value", "valid"] + (["piece"] if self.pieces is not None else [])
        w.writerow(header)
        xs, ts = self.domain.xs, self.domain.ts
        for j, t in enumerate(ts):
            for i, x in enumerate(xs):
                ok = bool(self.validity[i, j])
                row = [repr(float(x)), repr(float(t)), repr(float(self.values[i, j])) if ok else "nan", int(ok)]
                if self.pieces is not None:
                    row.append(self.pieces[i, j])
                w.writerow(row)
        text = buf.getvalue()
        if path is not None:
            from .io import atomic_write_text

            atomic_write_text(path, text)
        return text

    @classmethod
    def from_csv(cls, text, domain: Domain):
        rows = list(csv.DictReader(io.StringIO(text)))
        if len(rows) != domain.nx * domain.nt:
            raise ValueError(f"expected {domain.nx * domain.nt} records, got {len(rows)}")
        values = np.zeros((domain.nx, domain.nt))
        validity = np.zeros((domain.nx, domain.nt), dtype=bool)
        pieces = None
        if rows and "piece" in rows[0]:
            pieces = np.empty((domain.nx, domain.nt), dtype=object)
        for k, row in enumerate(rows):
            j, i = divmod(k, domain.nx)
            validity[i, j] = row["valid"] == "1"
            values[i, j] = float(row["value"]) if validity[i, j] else 0.0
            if pieces is not None:
                pieces[i, j] = row["piece"]
        return cls(domain, values, validity, pieces)


def sample(field: SolutionField, domain: Domain) -> GridField:
    if field.domain is not None and not field.domain.contains(domain):
        raise ValueError(f"sampling domain {domain} lies outside the field domain {field.domain}")
    X, T = domain.mesh()
    bad = field.mask(X, T)
    vals = field(X, T)
    nonfinite = ~bad & ~np.isfinite(vals)
    if nonfinite.any():
        i, j = np.argwhere(nonfinite)[0]
        raise FieldEvaluationError(field.name, (float(X[i, j]), float(T[i, j])), float(vals[i, j]))
    vals = np.where(bad, 0.0, vals)
    return GridField(domain, vals, ~bad)


def sample_exact_partials(field: SolutionField, domain: Domain):
    X, T = domain.mesh()
    hx, ht = field.partials(X, T)
    ok = np.isfinite(hx) & np.isfinite(ht)
    return (GridField(domain, np.where(ok, hx, 0.0), ok.copy()),
            GridField(domain, np.where(ok, ht, 0.0), ok.copy()))


def diff_x(grid: GridField) -> GridField:
    out, ok = kernels.fd_axis0(grid.values, grid.validity, grid.domain.dx)
    return GridField(grid.domain, out, ok)


def diff_t(grid: GridField) -> GridField:
    out, ok = kernels.fd_axis0(grid.values.T, grid.validity.T, grid.domain.dt)
    return GridField(grid.domain, np.ascontiguousarray(out.T), np.ascontiguousarray(ok.T))
