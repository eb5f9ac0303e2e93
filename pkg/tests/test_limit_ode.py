import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fhn_meanfield.core import ModelParams
from fhn_meanfield.limit_ode import (LimitState, brute_force_root_count,
                                     equilibria, equilibrium_cubic_coeffs,
                                     limit_rhs, real_cubic_roots, residual,
                                     rk4_integrate)

params_strategy = st.builds(
    ModelParams,
    a=st.floats(0.05, 2.0),
    b=st.floats(0.0, 1.0),
    lam=st.floats(1.5, 8.0),
    i_ext=st.floats(-5.0, 8.0),
)


def test_rhs_vanishes_at_equilibria():
    p = ModelParams(a=0.3, b=0.1, lam=4.0, i_ext=0.0)
    for v, x in equilibria(p):
        d = limit_rhs(LimitState(0.0, v, x), p)
        assert abs(d[0]) < 1e-10 and abs(d[1]) < 1e-10


def test_factored_roots_without_recovery_feedback():
    p = ModelParams(a=0.3, b=0.0, lam=4.0, i_ext=0.0)
    vs = [v for v, _ in equilibria(p)]
    assert vs == pytest.approx([0.0, 1.0, 4.0], abs=1e-12)


def test_equilibria_bistable_quadratic_formula():
    # roots of v (v^2 - 5v + 13/3): quadratic formula for the outer pair
    p = ModelParams(a=0.3, b=0.1, lam=4.0, i_ext=0.0)
    vs = [v for v, _ in equilibria(p)]
    disc = math.sqrt(25.0 - 4.0 * 13.0 / 3.0)
    assert vs == pytest.approx([0.0, (5 - disc) / 2, (5 + disc) / 2], abs=1e-10)


def test_equilibria_exact_factorization_single_root():
    # (v - 3)(v^2 - 2v + 4/3): the quadratic pair is complex
    p = ModelParams(a=0.03, b=0.1, lam=4.0, i_ext=4.0)
    eqs = equilibria(p)
    assert len(eqs) == 1
    assert eqs[0][0] == pytest.approx(3.0, abs=1e-12)
    assert eqs[0][1] == pytest.approx(10.0, abs=1e-10)


def test_rhs_hand_value_at_single_equilibrium():
    p = ModelParams(a=0.03, b=0.1, lam=4.0, i_ext=4.0)
    d = limit_rhs(LimitState(0.0, 3.0, 10.0), p)
    assert d == pytest.approx((0.0, 0.0), abs=1e-12)


@given(params_strategy)
@settings(max_examples=120, deadline=None)
def test_equilibria_residuals_and_count(p):
    eqs = equilibria(p)
    assert 1 <= len(eqs) <= 3
    for v, x in eqs:
        assert abs(residual(v, p)) < 1e-12 * max(1.0, abs(p.i_ext), p.lam ** 3)
        assert x == pytest.approx(p.b / p.a * v)
    assert len(eqs) == brute_force_root_count(p)


@given(st.floats(-4, 4), st.floats(-6, 6), st.floats(-8, 8))
@settings(max_examples=150)
def test_cubic_solver_against_numpy_roots(c2, c1, c0):
    ours = real_cubic_roots(c2, c1, c0)
    ref = sorted(r.real for r in np.roots([1.0, c2, c1, c0])
                 if abs(r.imag) < 1e-9)
    # collapse near-equal reference roots the way the solver reports them
    dedup = []
    for r in ref:
        if not dedup or abs(r - dedup[-1]) > 1e-6 * max(1.0, abs(r)):
            dedup.append(r)
    if len(ours) != len(dedup):
        # borderline discriminant, both answers are defensible
        coeffs_scale = max(1.0, abs(c2), abs(c1), abs(c0))
        pp = c1 - c2 * c2 / 3.0
        qq = c0 + c2 * (2.0 * c2 * c2 - 9.0 * c1) / 27.0
        assert abs(-4.0 * pp ** 3 - 27.0 * qq ** 2) < 1e-6 * coeffs_scale ** 2
    else:
        # near-multiple roots carry cube-root conditioning, hence the band
        assert ours == pytest.approx(dedup, abs=2e-5)


def test_rk4_stationary_at_equilibrium():
    p = ModelParams(a=0.3, b=0.1, lam=4.0, i_ext=0.0)
    v, x = equilibria(p)[-1]
    traj = rk4_integrate(LimitState(0.0, v, x), p, 0.01, 10.0)
    assert np.max(np.abs(traj.alpha - v)) < 1e-10
    assert np.max(np.abs(traj.beta - x)) < 1e-10


def test_rk4_fourth_order_by_step_halving():
    p = ModelParams(a=0.3, b=0.1, lam=4.0, i_ext=0.0)
    s0 = LimitState(0.0, 2.0, 0.5)
    ref = rk4_integrate(s0, p, 1e-4, 1.0)
    errs = []
    for dt in (0.02, 0.01):
        traj = rk4_integrate(s0, p, dt, 1.0)
        errs.append(abs(traj.alpha[-1] - ref.alpha[-1]))
    ratio = errs[0] / errs[1]
    assert 12.0 < ratio < 20.0  # observed order >= 3.8


def test_rk4_validation():
    p = ModelParams()
    with pytest.raises(ValueError):
        rk4_integrate(LimitState(0, 0, 0), p, -0.1, 1.0)


def test_interp_matches_nodes():
    p = ModelParams(a=0.3, b=0.1, lam=4.0)
    traj = rk4_integrate(LimitState(0.0, 1.5, 0.0), p, 0.01, 2.0)
    al, be = traj.interp(traj.t[5])
    assert al == traj.alpha[5] and be == traj.beta[5]


def test_monic_coefficients():
    p = ModelParams(a=0.5, b=0.25, lam=3.0, i_ext=1.5)
    assert equilibrium_cubic_coeffs(p) == pytest.approx((-4.0, 3.5, -1.5))


def test_a_zero_rejected_at_construction():
    with pytest.raises(ValueError):
        ModelParams(a=0.0)
