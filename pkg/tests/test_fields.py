import numpy as np
import pytest
from hypothesis import given, strategies as st

from burgers_rigidity.fields import (Domain, FieldEvaluationError, GridField, SolutionField, diff_t, diff_x, sample,
                                     sample_exact_partials)
from burgers_rigidity.solutions import ConeInducedParams, cone_induced_solution, constant_solution


def test_domain_spacing_and_validation():
    d = Domain(-1.0, 1.0, 0.0, 2.0, 5, 9)
    assert d.dx == 0.5 and d.dt == 0.25
    assert d.mesh()[0].shape == (5, 9)
    with pytest.raises(ValueError):
        Domain(1.0, 1.0, 0.0, 1.0)
    with pytest.raises(ValueError):
        Domain(0.0, 1.0, 0.0, 1.0, 2, 5)
    assert Domain.default() == Domain(-5, 5, -5, 5, 401, 401)


def test_sample_constant_all_valid():
    g = sample(constant_solution(5.0), Domain(-3, 3, -2, 2, 11, 7))
    assert np.all(g.values == 5.0) and g.validity.all()


def test_sample_cone_value_and_singular_row():
    h = cone_induced_solution(ConeInducedParams(1.0, 2.0))
    assert h(np.array(3.0), np.array(4.0)) == 1.0
    d = Domain(-2, 2, 0, 4, 5, 5)  # ts = 0, 1, 2, 3, 4
    g = sample(h, d)
    assert not g.validity[:, 2].any()
    assert g.validity[:, [0, 1, 3, 4]].all()


def test_sample_names_nonfinite_point():
    bad = SolutionField(lambda x, t: 1.0 / x, "inv")
    with pytest.raises(FieldEvaluationError) as exc:
        sample(bad, Domain(-1, 1, 0, 1, 3, 3))
    assert exc.value.point[0] == 0.0


def test_sample_outside_field_domain():
    f = SolutionField(lambda x, t: x, "x", domain=Domain(0, 1, 0, 1, 3, 3))
    with pytest.raises(ValueError):
        sample(f, Domain(0, 2, 0, 1, 3, 3))


def test_diff_exact_on_affine_and_quadratic():
    d = Domain(-3, 3, -1, 1, 61, 5)
    X, T = d.mesh()
    g = GridField(d, X.copy(), np.ones_like(X, dtype=bool))
    gx = diff_x(g)
    assert np.allclose(gx.values, 1.0, atol=1e-12) and gx.validity.all()
    q = diff_x(GridField(d, X**2, np.ones_like(X, dtype=bool)))
    i = int(np.argmin(np.abs(d.xs - 2.0)))
    assert abs(q.values[i, 0] - 4.0) < 1e-10
    # one-sided 3-point stencils are exact on quadratics at the edges too
    assert np.allclose(q.values[[0, -1], 0], 2 * d.xs[[0, -1]], atol=1e-10)


def test_diff_sine_taylor_bound():
    d = Domain(-1, 1, 0, 1, 201, 3)
    X, T = d.mesh()
    gx = diff_x(GridField(d, np.sin(X), np.ones_like(X, dtype=bool)))
    i = int(np.argmin(np.abs(d.xs)))
    assert abs(gx.values[i, 0] - 1.0) <= 1e-4


def test_diff_t_matches_transposed_diff_x():
    d = Domain(0, 1, 0, 2, 11, 21)
    X, T = d.mesh()
    gt = diff_t(GridField(d, T**2 * X, np.ones_like(X, dtype=bool)))
    assert np.allclose(gt.values, 2 * T * X, atol=1e-10)


def test_invalid_cells_poison_and_fallback():
    d = Domain(0, 1, 0, 1, 7, 3)
    X, _ = d.mesh()
    valid = np.ones_like(X, dtype=bool)
    valid[3, :] = False
    gx = diff_x(GridField(d, X.copy(), valid))
    assert not gx.validity[3].any()
    # neighbours of the hole switch to one-sided stencils
    assert gx.validity[[0, 1, 2, 4, 5, 6]].all()
    assert np.allclose(gx.values[gx.validity], 1.0)
    lonely = np.zeros_like(valid)
    lonely[2:4] = True
    assert not diff_x(GridField(d, X.copy(), lonely)).validity.any()


def test_fd_order_on_smooth_field():
    errs, hs = [], []
    for n in (41, 81, 161, 321):
        d = Domain(0, 2, 0, 1, n, 3)
        X, T = d.mesh()
        gx = diff_x(GridField(d, np.exp(X) * np.cos(X), np.ones_like(X, dtype=bool)))
        exact = np.exp(X) * (np.cos(X) - np.sin(X))
        errs.append(np.max(np.abs(gx.values - exact)))
        hs.append(d.dx)
    slope = np.polyfit(np.log(hs), np.log(errs), 1)[0]
    assert slope >= 1.9


def test_exact_partials_agree_with_fd_to_second_order():
    h = cone_induced_solution(ConeInducedParams(0.0, -1.0))
    errs, hs = [], []
    for n in (21, 41, 81):
        d = Domain(-1, 1, 0, 1, n, n)
        hx, ht = sample_exact_partials(h, d)
        g = sample(h, d)
        errs.append(max(np.max(np.abs(diff_x(g).values - hx.values)), np.max(np.abs(diff_t(g).values - ht.values))))
        hs.append(d.dx)
    assert np.polyfit(np.log(hs), np.log(errs), 1)[0] >= 1.9


def test_csv_round_trip_order_and_header():
    d = Domain(0, 1, 0, 2, 3, 3)
    X, T = d.mesh()
    valid = np.ones_like(X, dtype=bool)
    valid[1, 1] = False
    g = GridField(d, np.where(valid, X + 10 * T, 0.0), valid)
    text = g.to_csv()
    lines = text.splitlines()
    assert lines[0] == "x,t,value,valid"
    assert lines[1].startswith("0.0,0.0") and lines[2].startswith("0.5,0.0")  # x varies fastest
    back = GridField.from_csv(text, d)
    assert np.array_equal(back.validity, g.validity)
    assert np.array_equal(back.values[valid], g.values[valid])


@given(st.floats(-100, 100, allow_nan=False), st.floats(-100, 100, allow_nan=False))
def test_constant_field_any_point(c, x):
    assert constant_solution(c)(np.array(x), np.array(-x)) == c
