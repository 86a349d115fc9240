import numpy as np
import pytest
from hypothesis import given, strategies as st

from burgers_rigidity.quadrature import QuadratureError, integrate_batch, integrate_curve


def test_constant_and_orientation():
    one = lambda s: np.ones_like(s)  # noqa: E731
    assert integrate_curve(one, 0.0, 1.0) == pytest.approx(1.0, abs=1e-15)
    assert integrate_curve(one, 1.0, 0.0) == pytest.approx(-1.0, abs=1e-15)
    assert integrate_curve(one, 2.0, 2.0) == 0.0


def test_asinh_oracle():
    v = integrate_curve(lambda s: 1.0 / np.sqrt(s * s + 1.0), 0.0, 1.0, tol=1e-12)
    assert abs(v - np.arcsinh(1.0)) < 1e-11
    assert abs(v - 0.881373587) < 1e-9


def test_nonfinite_integrand_reports_point():
    with pytest.raises(QuadratureError) as exc, np.errstate(divide="ignore"):
        integrate_curve(lambda s: 1.0 / (s - 0.5), 0.0, 1.0)
    assert exc.value.where == 0.5


def test_nonconvergence_carries_best_and_gap():
    with pytest.raises(QuadratureError) as exc:
        integrate_curve(lambda s: np.sin(1.0 / (s + 1e-3)), 0.0, 1.0, tol=1e-14, max_depth=6)
    assert np.isfinite(exc.value.best) and exc.value.gap > 0


def test_endpoint_nudge_sees_one_sided_limit():
    step = lambda s: np.where(s < 1.0, 1.0, np.nan)  # noqa: E731
    with pytest.raises(QuadratureError):
        integrate_curve(step, 0.0, 1.0)
    assert integrate_curve(step, 0.0, 1.0, endpoint_nudge=1e-12) == pytest.approx(1.0, abs=1e-10)


def test_batch_matches_scalar():
    lo = np.array([0.0, 1.0, -2.0, 3.0])
    hi = np.array([1.0, 0.0, 2.0, 3.0])
    f = lambda idx, s: np.cos(s) * (1 + idx[:, None])  # noqa: E731
    got = integrate_batch(f, lo, hi)
    for k in range(4):
        want = integrate_curve(lambda s: np.cos(s) * (1 + k), lo[k], hi[k])
        assert abs(got[k] - want) < 1e-10


def test_batch_reports_index():
    f = lambda idx, s: np.where(idx[:, None] == 2, np.nan, 1.0) + 0 * s  # noqa: E731
    with pytest.raises(QuadratureError) as exc:
        integrate_batch(f, np.zeros(4), np.ones(4))
    assert exc.value.where[0] == 2


@given(st.floats(-3, 3), st.floats(-3, 3), st.floats(-3, 3))
def test_additivity(a, b, c):
    f = lambda s: 1.0 / np.sqrt(np.sin(s) ** 2 + 1.0)  # noqa: E731
    tol = 1e-10
    lhs = integrate_curve(f, a, b, tol) + integrate_curve(f, b, c, tol)
    assert abs(lhs - integrate_curve(f, a, c, tol)) <= 2 * tol + 1e-12


@given(st.floats(-5, 5), st.floats(-5, 5))
def test_swap_negates(a, b):
    f = lambda s: np.exp(-s * s)  # noqa: E731
    assert integrate_curve(f, a, b) == pytest.approx(-integrate_curve(f, b, a), abs=1e-12)
