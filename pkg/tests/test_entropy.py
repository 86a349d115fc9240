import numpy as np
import pytest
from hypothesis import given, strategies as st

from burgers_rigidity.entropy import (FVState, InstabilityError, IVPConfig, backshift_experiment, godunov_step,
                                      initial_state, l1_error, max_positive_quotient, self_convergence,
                                      shock_position, snapshots_csv, solve_ivp, total_variation)
from burgers_rigidity.solutions import RiemannData, riemann_entropy_solution


def exact(ul, ur):
    f = riemann_entropy_solution(RiemannData(ul, ur))
    return lambda x, t: f.rule(x, t)


def test_constant_data_is_unchanged():
    traj = solve_ivp(IVPConfig("constant:c=2", (-5, 5), 200, 5.0))
    s = traj.snapshots[-1]
    assert s.t == 5.0 and np.all(s.window_u == 2.0)


@pytest.mark.parametrize("n", [200, 400, 800])
def test_shock_position(n):
    s = solve_ivp(IVPConfig("riemann:ul=1,ur=0", (-5, 5), n, 1.0)).at(1.0)
    assert abs(shock_position(s, 0.5) - 0.5) <= 2 * s.dx


def test_rarefaction_l1_rate():
    ns = np.array([1600, 3200, 6400, 12800])
    errs = [l1_error(solve_ivp(IVPConfig("riemann:ul=0,ur=1", (-5, 5), int(n), 1.0)).at(1.0), exact(0, 1))
            for n in ns]
    slope = np.polyfit(np.log(10.0 / ns), np.log(errs), 1)[0]
    assert slope >= 0.8


def test_total_variation_nonincreasing():
    cfg = IVPConfig("bump", (-5, 5), 400, 3.0, snapshot_times=tuple(np.linspace(0, 3, 13)))
    tv = [total_variation(s.u) for s in solve_ivp(cfg).snapshots]
    assert all(b <= a + 1e-12 for a, b in zip(tv, tv[1:]))


@given(st.lists(st.floats(-2, 2), min_size=16, max_size=40))
def test_monotone_data_stays_monotone(vals):
    u0 = np.sort(np.asarray(vals))[::-1].copy()
    s = solve_ivp(IVPConfig(u0, (0, 1), u0.size, 0.3)).snapshots[-1]
    assert np.all(np.diff(s.u) <= 1e-12)


@given(st.lists(st.floats(-3, 3), min_size=16, max_size=40))
def test_max_principle_and_conservation(vals):
    u0 = np.asarray(vals)
    traj = solve_ivp(IVPConfig(u0, (-1, 1), u0.size, 0.5))
    s = traj.snapshots[-1]
    assert s.u.max() <= u0.max() + 1e-12 and s.u.min() >= u0.min() - 1e-12
    assert traj.max_principle_violation <= 1e-12
    assert traj.conservation_error <= 1e-10


def test_backshift_sine_and_constant():
    r = backshift_experiment("sine", [1, 2, 4, 8])
    assert r.all_passed and len(r.to_dict()["rows"]) == 4
    assert all(b < a for a, b in zip(r.max_quotient, r.max_quotient[1:]))
    c = backshift_experiment("constant:c=1", [1, 2])
    assert c.max_quotient == [0.0, 0.0] and c.all_passed
    with pytest.raises(ValueError):
        backshift_experiment("sine", [2, 1])


def test_max_positive_quotient_linear():
    x = np.linspace(0, 1, 101)
    s = FVState(2.0 * x, x, 1.0, 0.01)
    assert max_positive_quotient(s) == pytest.approx(2.0)
    assert max_positive_quotient(FVState(-x, x, 1.0, 0.01)) == 0.0


def test_instability_error():
    s = FVState(np.array([0.0, np.inf, 0.0, 0.0]), np.arange(4.0), 0.0, 1.0)
    with pytest.raises(InstabilityError):
        godunov_step(s)


def test_config_validation():
    with pytest.raises(ValueError):
        IVPConfig("sine", n_cells=8)
    with pytest.raises(ValueError):
        IVPConfig("sine", t_end=0)
    with pytest.raises(ValueError):
        IVPConfig("sine", boundary="periodic")
    with pytest.raises(ValueError):
        IVPConfig("sine", t_end=1, snapshot_times=(2.0,))
    with pytest.raises(ValueError):
        solve_ivp(IVPConfig("wave:c=1"))
    with pytest.raises(ValueError):
        FVState(np.zeros(3), np.zeros(3), 0.0, 1.0, cfl=1.0)


def test_padding_keeps_window_clean():
    cfg = IVPConfig("riemann:ul=1,ur=0,x0=-4.9", (-5, 5), 100, 1.0)
    s0 = initial_state(cfg)
    assert s0.window_u.size == 100 and s0.u.size > 100
    s = solve_ivp(cfg).at(1.0)
    assert abs(shock_position(s, 0.5) - (-4.4)) <= 2 * s.dx


def test_self_convergence_requires_doubling():
    with pytest.raises(ValueError):
        self_convergence("sine", (-1, 1), 0.1, [32, 48])


def test_snapshots_csv_round_trip():
    s = solve_ivp(IVPConfig("sine", (-1, 1), 16, 0.1)).at(0.1)
    rows = snapshots_csv(s).splitlines()
    assert rows[0] == "x,u" and len(rows) == 17
    assert float(rows[1].split(",")[1]) == s.window_u[0]
