"""First-order Godunov solver for ``u_t + (u^2/2)_x = 0`` and the experiments
built on it: Oleinik decay under long evolution, shock tracking, convergence."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Sequence, Union

import numpy as np

from . import kernels
from .fields import Domain, GridField
from .solutions import parse_spec

EPS_SPEED = 1e-12

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(5)


class InstabilityError(ArithmeticError):
    pass


@dataclass(frozen=True)
class FVState:
    u: np.ndarray
    x: np.ndarray  # cell centres
    t: float
    dx: float
    cfl: float = 0.9
    window: slice = slice(None)
    boundary_flux: float = 0.0  # int (F_right - F_left) dt so far

    def __post_init__(self):
        if not 0 < self.cfl < 1:
            raise ValueError("cfl must lie in (0, 1)")

    @property
    def mass(self):
        return float(np.sum(self.u)) * self.dx

    @property
    def window_x(self):
        return self.x[self.window]

    @property
    def window_u(self):
        return self.u[self.window]

    def windowed(self):
        """This state cut down to the reported window."""
        return replace(self, u=self.window_u.copy(), x=self.window_x.copy(), window=slice(None))


def godunov_step(state: FVState, dt_max: float = np.inf) -> FVState:
    speed = float(np.max(np.abs(state.u)))
    dt = min(state.cfl * state.dx / max(speed, EPS_SPEED), dt_max)
    unew, f_left, f_right = kernels.godunov(state.u, dt / state.dx)
    if not np.all(np.isfinite(unew)):
        i = int(np.argmax(~np.isfinite(unew)))
        raise InstabilityError(f"non-finite cell value at x = {state.x[i]!r}, t = {state.t + dt!r}")
    return replace(state, u=unew, t=state.t + dt, boundary_flux=state.boundary_flux + dt * (f_right - f_left))


# -- initial data -------------------------------------------------------------------

def initial_profile(spec: Union[str, Callable]):
    """Pointwise ``u0`` from a name (``riemann:ul=1,ur=0``, ``constant:c=2``,
    ``sine[:amp=1,k=1]``, ``bump[:amp=1,width=1]``) or a callable."""
    if callable(spec):
        return spec
    name, opts = parse_spec(spec)
    f = {k: float(v) for k, v in opts.items()}
    if name == "riemann":
        ul, ur = f.pop("ul"), f.pop("ur")
        x0 = f.pop("x0", 0.0)
        prof = lambda x: np.where(x < x0, ul, ur)  # noqa: E731
    elif name == "constant":
        c = f.pop("c")
        prof = lambda x: np.full(np.shape(x), c)  # noqa: E731
    elif name == "sine":
        amp, k = f.pop("amp", 1.0), f.pop("k", 1.0)
        prof = lambda x: amp * np.sin(k * x)  # noqa: E731
    elif name == "bump":
        amp, w = f.pop("amp", 1.0), f.pop("width", 1.0)
        prof = lambda x: amp * np.exp(-(x / w) ** 2)  # noqa: E731
    else:
        raise ValueError(f"unknown initial profile {name!r}")
    if f:
        raise ValueError(f"unused options {sorted(f)} in {spec!r}")
    return prof


def cell_averages(profile: Callable, edges: np.ndarray) -> np.ndarray:
    """5-point Gauss-Legendre average of ``profile`` over each cell."""
    lo, hi = edges[:-1], edges[1:]
    mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
    pts = mid[:, None] + half[:, None] * _GL_NODES[None, :]
    return 0.5 * np.asarray(profile(pts), dtype=float) @ _GL_WEIGHTS


@dataclass(frozen=True)
class IVPConfig:
    initial: Union[str, Callable, np.ndarray]
    x_extent: tuple = (-5.0, 5.0)
    n_cells: int = 400
    t_end: float = 1.0
    snapshot_times: tuple = ()
    cfl: float = 0.9
    boundary: str = "outflow"

    def __post_init__(self):
        if self.n_cells < 16:
            raise ValueError("n_cells must be at least 16")
        if not self.t_end > 0:
            raise ValueError("t_end must be positive")
        if self.boundary != "outflow":
            raise ValueError("only outflow boundaries are supported")
        if not self.x_extent[0] < self.x_extent[1]:
            raise ValueError("empty x extent")
        if any(not 0 <= s <= self.t_end for s in self.snapshot_times):
            raise ValueError("snapshot times must lie in [0, t_end]")

    @property
    def dx(self):
        return (self.x_extent[1] - self.x_extent[0]) / self.n_cells

    @property
    def times(self):
        return tuple(sorted(set(self.snapshot_times) | {self.t_end}))


def initial_state(cfg: IVPConfig) -> FVState:
    """Window cells plus ``2 * t_end * M`` of padding on each side."""
    xl, xr = cfg.x_extent
    dx = cfg.dx
    win_edges = xl + dx * np.arange(cfg.n_cells + 1)
    if isinstance(cfg.initial, np.ndarray):
        tab = np.asarray(cfg.initial, dtype=float)
        if tab.shape != (cfg.n_cells,):
            raise ValueError(f"tabulated data must have {cfg.n_cells} cells")
        M = float(np.max(np.abs(tab)))
        pad = int(np.ceil(2.0 * cfg.t_end * M / dx)) + 2
        u = np.concatenate((np.full(pad, tab[0]), tab, np.full(pad, tab[-1])))
    else:
        prof = initial_profile(cfg.initial)
        M = float(np.max(np.abs(cell_averages(prof, win_edges))))
        pad = int(np.ceil(2.0 * cfg.t_end * M / dx)) + 2
        edges = xl + dx * np.arange(-pad, cfg.n_cells + pad + 1)
        u = cell_averages(prof, edges)
    x = xl + dx * (np.arange(-pad, cfg.n_cells + pad) + 0.5)
    return FVState(u, x, 0.0, dx, cfg.cfl, slice(pad, pad + cfg.n_cells))


@dataclass
class Trajectory:
    config: IVPConfig
    snapshots: list
    steps: int = 0
    max_principle_violation: float = 0.0
    conservation_error: float = 0.0

    def at(self, t):
        for s in self.snapshots:
            if abs(s.t - t) <= 1e-12 * max(1.0, abs(t)):
                return s
        raise KeyError(f"no snapshot at t = {t}")

    @property
    def times(self):
        return [s.t for s in self.snapshots]


def solve_ivp(cfg: IVPConfig) -> Trajectory:
    state = initial_state(cfg)
    lo, hi = float(state.u.min()), float(state.u.max())
    mass0 = state.mass
    scale = max(1.0, abs(mass0), float(np.sum(np.abs(state.u))) * state.dx)
    traj = Trajectory(cfg, [])
    times = cfg.times
    if times and times[0] == 0.0:
        traj.snapshots.append(state)
        times = times[1:]
    for target in times:
        while state.t < target:
            state = godunov_step(state, dt_max=target - state.t)
            traj.steps += 1
            over = max(float(state.u.max()) - hi, lo - float(state.u.min()), 0.0)
            traj.max_principle_violation = max(traj.max_principle_violation, over)
            err = abs(state.mass + state.boundary_flux - mass0) / scale
            traj.conservation_error = max(traj.conservation_error, err)
            if target - state.t <= 1e-14 * max(1.0, target):
                state = replace(state, t=target)
        traj.snapshots.append(state)
    return traj


# -- diagnostics -------------------------------------------------------------------

def total_variation(u):
    return float(np.sum(np.abs(np.diff(u))))


def shock_position(state: FVState, level: float) -> float:
    """First crossing of ``level`` going left to right in the window, linearly interpolated."""
    x, u = state.window_x, state.window_u
    s = u - level
    idx = np.flatnonzero((s[:-1] > 0) & (s[1:] <= 0))
    if idx.size == 0:
        raise ValueError(f"profile never drops through {level}")
    i = int(idx[0])
    return float(x[i] + (x[i + 1] - x[i]) * s[i] / (s[i] - s[i + 1]))


def l1_error(state: FVState, exact: Callable) -> float:
    """``sum |u_i - avg_i(exact)| dx`` over the window; ``exact(x, t)``."""
    x, u, dx = state.window_x, state.window_u, state.dx
    edges = np.concatenate((x - 0.5 * dx, [x[-1] + 0.5 * dx]))
    ref = cell_averages(lambda y: exact(y, state.t), edges)
    return float(np.sum(np.abs(u - ref)) * dx)


def coarsen(u: np.ndarray) -> np.ndarray:
    return 0.5 * (u[0::2] + u[1::2])


def self_convergence(initial, x_extent, t_end, cells: Sequence[int], cfl=0.9):
    """L1 differences between consecutive refinements (each fine run averaged
    onto the coarser cells) and the ratios between successive differences."""
    finals = []
    for n in cells:
        traj = solve_ivp(IVPConfig(initial, x_extent, n, t_end, cfl=cfl))
        finals.append(traj.snapshots[-1])
    diffs = []
    for a, b in zip(finals, finals[1:]):
        if b.window_u.size != 2 * a.window_u.size:
            raise ValueError("refinements must double the cell count")
        diffs.append(float(np.sum(np.abs(coarsen(b.window_u) - a.window_u)) * a.dx))
    ratios = [d0 / d1 for d0, d1 in zip(diffs, diffs[1:])]
    return diffs, ratios


def spacetime_grid(cfg: IVPConfig, t_lo: float, t_hi: float, nt: int) -> GridField:
    """Window cell values at ``nt`` uniform times in ``[t_lo, t_hi]`` as a grid."""
    times = np.linspace(t_lo, t_hi, nt)
    traj = solve_ivp(replace(cfg, t_end=t_hi, snapshot_times=tuple(times)))
    x = traj.snapshots[0].window_x
    dom = Domain(float(x[0]), float(x[-1]), float(t_lo), float(t_hi), x.size, nt)
    vals = np.stack([traj.at(t).window_u for t in times], axis=1)
    return GridField(dom, vals, np.ones(vals.shape, dtype=bool))


MIN_OFFSET_CELLS = 50


def max_positive_quotient(state: FVState, ks=None, min_cells=1):
    """``max_a (u(x + a) - u(x)) / a`` over the window, ``a = k dx``.

    The default offsets are 12 geometric steps from ``min_cells`` to half the window.
    """
    u = state.window_u
    if ks is None:
        lo = max(1, min(int(min_cells), u.size // 2))
        ks = np.unique(np.rint(np.geomspace(lo, max(lo, u.size // 2), 12)).astype(np.int64))
    best, _ = kernels.forward_quotients(u, state.dx, ks)
    return max(0.0, float(np.max(best)))


@dataclass
class BackshiftReport:
    profile: str
    shifts: list
    max_quotient: list
    bound: list
    passed: list
    shock_detected: list
    E: float
    notes: str = ("Evolution from time 0 stands in for shifting the time origin to -infinity; "
                  "the table shows the decay trend, not the limit itself.")

    @property
    def all_passed(self):
        return all(self.passed)

    def to_dict(self):
        return {
            "profile": self.profile,
            "E": self.E,
            "rows": [
                {"T": T, "max_quotient": q, "bound": b, "passed": p, "shock_detected": s}
                for T, q, b, p, s in zip(self.shifts, self.max_quotient, self.bound, self.passed, self.shock_detected)
            ],
            "passed": self.all_passed,
            "notes": self.notes,
        }


def backshift_experiment(u0_name: str, shifts: Sequence[float], x_extent=(-2 * np.pi, 2 * np.pi), n_cells=400,
                         E=1.05, cfl=0.9, min_offset_cells=MIN_OFFSET_CELLS) -> BackshiftReport:
    """Evolve ``u0`` for each shift ``T`` and record the largest positive
    difference quotient at the end; it should stay below ``E / T``.

    Offsets shorter than ``min_offset_cells`` are ignored because the scheme's
    sonic-point step dominates them.
    """
    shifts = [float(s) for s in shifts]
    if any(s <= 0 for s in shifts) or any(b <= a for a, b in zip(shifts, shifts[1:])):
        raise ValueError("shifts must be positive and increasing")
    from .singular import detect_jumps_1d

    cfg = IVPConfig(u0_name if isinstance(u0_name, str) else u0_name, x_extent, n_cells, shifts[-1],
                    snapshot_times=tuple(shifts), cfl=cfl)
    traj = solve_ivp(cfg)
    qs, bounds, ok, shocks = [], [], [], []
    for T in shifts:
        st = traj.at(T)
        q = max_positive_quotient(st, min_cells=min_offset_cells)
        qs.append(q)
        bounds.append(E / T)
        ok.append(q < E / T)
        shocks.append(bool(detect_jumps_1d(st.window_u).any()))
    name = u0_name if isinstance(u0_name, str) else getattr(u0_name, "__name__", "profile")
    return BackshiftReport(name, shifts, qs, bounds, ok, shocks, E)


def snapshots_csv(state: FVState) -> str:
    lines = ["x,u"] + [f"{float(x)!r},{float(u)!r}" for x, u in zip(state.window_x, state.window_u)]
    return "\n".join(lines) + "\n"
