"""Closed-form Burgers solutions, a few deliberate near-solutions, and the
general-flux lift ``h = c(v)``."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .fields import Domain, SolutionField, sample


def _full(x, t, value):
    return np.full(np.broadcast(x, t).shape, float(value))


def _zeros(x, t):
    return np.zeros(np.broadcast(x, t).shape)


def constant_solution(c: float) -> SolutionField:
    c = float(c)
    if not np.isfinite(c):
        raise ValueError("constant must be finite")
    return SolutionField(
        rule=lambda x, t: _full(x, t, c),
        name=f"constant:c={c:g}",
        h_x=_zeros,
        h_t=_zeros,
        params={"c": c},
    )


@dataclass(frozen=True)
class ConeInducedParams:
    x0: float = 0.0
    t0: float = 0.0


def cone_induced_solution(p: ConeInducedParams) -> SolutionField:
    """``h = (x - x0) / (t - t0)``, the field a cone ``c +- |(x, t) - (x0, t0)|``
    induces; undefined on the whole line ``t = t0``."""
    x0, t0 = float(p.x0), float(p.t0)
    return SolutionField(
        rule=lambda x, t: (x - x0) / (t - t0),
        name=f"cone:x0={x0:g},t0={t0:g}",
        h_x=lambda x, t: 1.0 / (t - t0) + 0.0 * x,
        h_t=lambda x, t: -(x - x0) / (t - t0) ** 2,
        singular_mask=lambda x, t: t == t0,
        singular_distance=lambda x, t: np.abs(t - t0) + 0.0 * x,
        params={"x0": x0, "t0": t0},
    )


def rarefaction_solution(t_floor: float, extend: bool = False) -> SolutionField:
    """The centred fan ``h = x / t`` restricted to ``t >= t_floor``.

    ``extend=True`` drops the restriction and keeps only the genuine
    singularity at ``t = 0``; that is the failed whole-plane extension.
    """
    t_floor = float(t_floor)
    if not t_floor > 0:
        raise ValueError("t_floor must be positive")
    if extend:
        mask = lambda x, t: t == 0.0  # noqa: E731
        dist = lambda x, t: np.abs(t) + 0.0 * x  # noqa: E731
    else:
        mask = lambda x, t: t < t_floor  # noqa: E731
        dist = lambda x, t: t - t_floor + 0.0 * x  # noqa: E731
    return SolutionField(
        rule=lambda x, t: x / t,
        name=f"rarefaction:tfloor={t_floor:g}" + (",extend=1" if extend else ""),
        h_x=lambda x, t: 1.0 / t + 0.0 * x,
        h_t=lambda x, t: -x / t**2,
        singular_mask=mask,
        singular_distance=dist,
        params={"tfloor": t_floor, "extend": bool(extend)},
    )


@dataclass(frozen=True)
class RiemannData:
    u_left: float
    u_right: float

    def __post_init__(self):
        if not (np.isfinite(self.u_left) and np.isfinite(self.u_right)):
            raise ValueError("Riemann states must be finite")


def riemann_entropy_solution(d: RiemannData) -> SolutionField:
    ul, ur = float(d.u_left), float(d.u_right)
    name = f"riemann:ul={ul:g},ur={ur:g}"
    params = {"ul": ul, "ur": ur}
    if ul == ur:
        base = constant_solution(ul)
        return SolutionField(base.rule, name, base.h_x, base.h_t,
                             singular_mask=lambda x, t: t <= 0,
                             singular_distance=lambda x, t: t + 0.0 * x, params=params)
    if ul > ur:
        s = 0.5 * (ul + ur)
        norm = np.hypot(1.0, s)
        return SolutionField(
            rule=lambda x, t: np.where(x < s * t, ul, ur),
            name=name,
            h_x=_zeros,
            h_t=_zeros,
            singular_mask=lambda x, t: (t <= 0) | np.isclose(x, s * t, rtol=0.0, atol=1e-12),
            singular_distance=lambda x, t: np.minimum(t, np.abs(x - s * t) / norm),
            params={**params, "shock_speed": s},
        )

    def inside(x, t):
        return (x > ul * t) & (x < ur * t)

    return SolutionField(
        rule=lambda x, t: np.clip(x / t, ul, ur),
        name=name,
        h_x=lambda x, t: np.where(inside(x, t), 1.0 / t, 0.0),
        h_t=lambda x, t: np.where(inside(x, t), -x / t**2, 0.0),
        singular_mask=lambda x, t: t <= 0,
        singular_distance=lambda x, t: t + 0.0 * x,
        params=params,
    )


# -- near-solutions used as negative controls ---------------------------------

def linear_profile() -> SolutionField:
    """``h = x``; not a Burgers solution (residual equals ``x``)."""
    return SolutionField(lambda x, t: x + 0.0 * t, "linear", lambda x, t: _full(x, t, 1.0), _zeros)


def expansion_jump(left=-1.0, right=1.0) -> SolutionField:
    """Steady jump from ``left`` to ``right`` at ``x = 0``; classical on each
    side but not an entropy solution when ``left < right``."""
    return SolutionField(lambda x, t: np.where(x < 0, left, right) + 0.0 * t,
                         f"jump:ul={left:g},ur={right:g}", _zeros, _zeros,
                         params={"ul": left, "ur": right})


def graph_jump(below: float, above: float, p: Callable) -> SolutionField:
    """Constant ``below`` on ``t <= p(x)`` and ``above`` on ``t > p(x)``."""
    return SolutionField(lambda x, t: np.where(t <= p(x), below, above),
                         f"graphjump:below={below:g},above={above:g}", _zeros, _zeros,
                         params={"below": below, "above": above})


def log_ratio_field() -> SolutionField:
    """``v = ln(x / t)`` on the open quadrant; solves ``v_t + e^v v_x = 0``."""
    return SolutionField(
        rule=lambda x, t: np.log(x / t),
        name="logratio",
        h_x=lambda x, t: 1.0 / x + 0.0 * t,
        h_t=lambda x, t: -1.0 / t + 0.0 * x,
        singular_mask=lambda x, t: (x <= 0) | (t <= 0),
        singular_distance=lambda x, t: np.minimum(x, t),
    )


# -- general flux --------------------------------------------------------------

@dataclass(frozen=True)
class FluxSpec:
    """Characteristic speed ``c`` with derivative ``c_prime`` and flux ``C`` (``C' = c``)."""

    c: Callable
    c_prime: Callable
    C: Callable
    name: str = "flux"


FLUXES = {
    "identity": FluxSpec(lambda v: v, lambda v: np.ones_like(v), lambda v: 0.5 * v * v, "identity"),
    "exp": FluxSpec(np.exp, np.exp, np.exp, "exp"),
    "cubic": FluxSpec(lambda v: v**3, lambda v: 3.0 * v**2, lambda v: 0.25 * v**4, "cubic"),
}


class FluxDegeneracyError(ValueError):
    def __init__(self, v):
        self.v = v
        super().__init__(f"c'(v) vanishes or changes sign near v = {v!r}")


def transport_residual(v_field: SolutionField, flux: FluxSpec, x, t):
    """Pointwise ``v_t + c(v) v_x`` using exact partials."""
    vx, vt = v_field.partials(x, t)
    return vt + flux.c(v_field(x, t)) * vx


def lift_flux(v_field: SolutionField, flux: FluxSpec, check_domain: Domain | None = None) -> SolutionField:
    """``h = c(v)``; turns a solution of ``v_t + c(v) v_x = 0`` into a Burgers solution.

    ``c'`` is sampled on the range ``v`` takes over ``check_domain`` and must be
    nonzero and of one sign there.
    """
    dom = check_domain or v_field.domain or Domain(-5.0, 5.0, -5.0, 5.0, 81, 81)
    grid = sample(v_field, dom)
    vs = np.unique(grid.values[grid.validity])
    if vs.size:
        cp = np.asarray(flux.c_prime(vs), dtype=float)
        zero = np.abs(cp) <= 1e-12
        if zero.any():
            raise FluxDegeneracyError(float(vs[np.argmax(zero)]))
        if cp.min() < 0 < cp.max():
            raise FluxDegeneracyError(float(vs[np.argmin(np.abs(cp))]))

    def rule(x, t):
        return flux.c(v_field.rule(x, t))

    def h_x(x, t):
        return flux.c_prime(v_field.rule(x, t)) * v_field.h_x(x, t)

    def h_t(x, t):
        return flux.c_prime(v_field.rule(x, t)) * v_field.h_t(x, t)

    return SolutionField(
        rule=rule,
        name=f"lifted:flux={flux.name},base={v_field.name}",
        h_x=h_x if v_field.has_exact_partials else None,
        h_t=h_t if v_field.has_exact_partials else None,
        domain=v_field.domain,
        singular_mask=v_field.singular_mask,
        singular_distance=v_field.singular_distance,
        params={"flux": flux.name, "base": v_field.name},
    )


# -- name:key=value specs --------------------------------------------------------

def parse_spec(text: str):
    """Split ``name:k=v,k=v`` into ``(name, {k: v})`` with string values."""
    text = text.strip()
    if not text:
        raise ValueError("empty field spec")
    name, _, rest = text.partition(":")
    opts = {}
    for item in filter(None, (s.strip() for s in rest.split(","))):
        key, eq, val = item.partition("=")
        if not eq or not key:
            raise ValueError(f"malformed option {item!r} in spec {text!r}")
        opts[key.strip()] = val.strip()
    return name.strip(), opts


def _floats(opts, spec, **defaults):
    out = {}
    for key, default in defaults.items():
        raw = opts.pop(key, None)
        if raw is None:
            if default is None:
                raise ValueError(f"spec {spec!r} needs {key}=...")
            out[key] = default
        else:
            try:
                out[key] = float(raw)
            except ValueError:
                raise ValueError(f"spec {spec!r}: {key}={raw!r} is not a number") from None
    return out


def field_from_spec(spec: str) -> SolutionField:
    """Build a catalog field from e.g. ``cone:x0=0,t0=0`` or ``lifted:flux=exp,base=logratio``."""
    name, opts = parse_spec(spec)
    if name == "constant":
        f = constant_solution(**_floats(opts, spec, c=None))
    elif name == "cone":
        f = cone_induced_solution(ConeInducedParams(**_floats(opts, spec, x0=0.0, t0=0.0)))
    elif name == "rarefaction":
        v = _floats(opts, spec, tfloor=None, extend=0.0)
        f = rarefaction_solution(v["tfloor"], extend=bool(v["extend"]))
    elif name == "riemann":
        v = _floats(opts, spec, ul=None, ur=None)
        f = riemann_entropy_solution(RiemannData(v["ul"], v["ur"]))
    elif name == "linear":
        f = linear_profile()
    elif name == "lifted":
        flux_name = opts.pop("flux", "exp")
        if flux_name not in FLUXES:
            raise ValueError(f"unknown flux {flux_name!r}; choose from {sorted(FLUXES)}")
        base = opts.pop("base", "logratio")
        if base == "logratio":
            v_field = log_ratio_field()
            check = Domain(0.1, 5.0, 0.1, 5.0, 41, 41)
        elif base == "constant":
            k = _floats(opts, spec, k=0.0)["k"]
            v_field = constant_solution(k)
            check = None
        else:
            raise ValueError(f"unknown lift base {base!r}")
        f = lift_flux(v_field, FLUXES[flux_name], check)
    else:
        raise ValueError(f"unknown field {name!r}")
    if opts:
        raise ValueError(f"unused options {sorted(opts)} in spec {spec!r}")
    return f
