import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from fhn_meanfield.core import (BlowUpError, EnsembleState, InitCondition,
                                ModelParams)
from fhn_meanfield.limit_ode import LimitState, equilibria, rk4_integrate
from fhn_meanfield.particle import (NoiseStream, SimConfig, coupling_mean,
                                    default_dt, em_step, empirical_moments,
                                    quantiles, simulate)


def test_coupling_mean_constant():
    assert coupling_mean(np.full(7, 3.2)) == pytest.approx(3.2)


def test_coupling_mean_simple():
    assert coupling_mean(np.array([1.0, 2.0, 3.0])) == 2.0


def test_coupling_mean_empty():
    with pytest.raises(ValueError):
        coupling_mean(np.array([]))


@given(hnp.arrays(np.float64, st.integers(2, 100),
                  elements=st.floats(-50, 50, allow_nan=False)))
@settings(max_examples=50)
def test_coupling_identity_against_pairwise_sum(v):
    # (1/n) sum_j (v_j - v_i) == vbar - v_i, against the O(n^2) double loop
    n = v.size
    vbar = coupling_mean(v)
    pairwise = np.array([sum(v[j] - v[i] for j in range(n)) / n for i in range(n)])
    scale = max(1.0, np.abs(v).max())
    assert np.max(np.abs(pairwise - (vbar - v))) < 1e-12 * scale


def test_quantile_edges_and_median():
    vals = np.array([5.0, 1.0, 3.0, 2.0, 4.0])
    assert quantiles(vals, [0.0])[0] == 1.0
    assert quantiles(vals, [1.0])[0] == 5.0
    assert quantiles(vals, [0.5])[0] == 3.0


def test_quantile_interpolation_rule():
    # position 0.25*(4-1) = 0.75 between the first two order statistics
    assert quantiles(np.array([1.0, 2.0, 3.0, 4.0]), [0.25])[0] == pytest.approx(1.75)


def test_quantile_validation():
    with pytest.raises(ValueError):
        quantiles(np.array([1.0]), [1.5])
    with pytest.raises(ValueError):
        quantiles(np.array([]), [0.5])


@given(hnp.arrays(np.float64, st.integers(1, 60),
                  elements=st.floats(-10, 10, allow_nan=False)))
@settings(max_examples=50)
def test_quantiles_nondecreasing(values):
    qs = [0.1, 0.25, 0.75, 0.9]
    out = quantiles(values, qs)
    assert np.all(np.diff(out) >= 0)


def test_moments_degenerate():
    st8 = EnsembleState(0.0, np.full(8, 2.0), np.full(8, -1.0))
    m = empirical_moments(st8)
    assert (m.mean_v, m.var_v, m.m4_v) == (2.0, 0.0, 16.0)
    assert m.m4_x == 1.0


def test_moments_two_point():
    m = empirical_moments(EnsembleState(0.0, np.array([-1.0, 1.0]),
                                        np.array([0.0, 0.0])))
    assert (m.mean_v, m.var_v, m.m4_v) == (0.0, 1.0, 1.0)


def test_moments_match_gaussian_cluster():
    p = ModelParams(a=1.0, epsilon=0.01)
    cond = InitCondition(concentration=1.0)
    from fhn_meanfield.core import sample_initial
    state = sample_initial(cond, 100_000, p, np.random.default_rng(3))
    assert empirical_moments(state).var_v == pytest.approx(0.01, rel=0.05)


def test_noise_stream_blocks_are_stable_and_distinct():
    stream = NoiseStream(99)
    a = stream.block(4).standard_normal(6)
    b = stream.block(4).standard_normal(6)
    c = stream.block(5).standard_normal(6)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_simulate_is_bitwise_deterministic():
    p = ModelParams(epsilon=0.05)
    cfg = SimConfig(n=64, t_end=0.5, seed=7, record_stride=5)
    init = InitCondition(mean_v=0.5, mean_x=0.2)
    r1 = simulate(cfg, p, init)
    r2 = simulate(cfg, p, init)
    assert np.array_equal(r1.mean_v, r2.mean_v)
    assert np.array_equal(r1.quantiles_x, r2.quantiles_x)
    assert np.array_equal(r1.final_state.v, r2.final_state.v)


def test_em_step_reduces_to_explicit_euler_for_single_neuron():
    p = ModelParams(sigma=0.0, adaptation_noise=False, epsilon=0.01,
                    lam=4.0, i_ext=0.5)
    cfg = SimConfig(n=1, t_end=1.0, dt=1e-3)
    state = EnsembleState(0.0, np.array([1.3]), np.array([0.2]))
    stepped = em_step(state, p, cfg, NoiseStream(0).block(1))
    # coupling vanishes exactly when vbar == v
    v, x = 1.3, 0.2
    dv = -(v * (v - 4.0) * (v - 1.0)) + 0.5 - x
    dx = -p.a * x + p.b * v
    assert stepped.v[0] == pytest.approx(v + 1e-3 * dv, rel=1e-15)
    assert stepped.x[0] == pytest.approx(x + 1e-3 * dx, rel=1e-15)


def test_em_step_blowup_reports_time_and_index():
    p = ModelParams(epsilon=1e-4, sigma=0.0, adaptation_noise=False)
    cfg = SimConfig(n=4, t_end=1.0, dt=50.0)  # absurd step for the stiffness
    state = EnsembleState(0.0, np.array([0.0, 1e150, 0.0, 0.0]),
                          np.zeros(4))
    with pytest.raises(BlowUpError) as info:
        em_step(state, p, cfg, NoiseStream(0).block(1))
    assert info.value.index == 1
    assert info.value.t == pytest.approx(50.0)


def test_noiseless_ensemble_stays_near_stable_equilibrium():
    p = ModelParams(a=0.3, b=0.1, lam=4.0, sigma=0.0, adaptation_noise=False,
                    epsilon=0.01)
    vstar, xstar = equilibria(p)[-1]
    cfg = SimConfig(n=16, t_end=0.0, dt=1e-3)
    state = EnsembleState(0.0, np.full(16, vstar), np.full(16, xstar))
    for k in range(100):
        state = em_step(state, p, cfg, NoiseStream(1).block(k + 1))
    assert np.max(np.abs(state.v - vstar)) < 1e-10


class _PermutedDraws:
    """Generator stand-in that replays another stream's draws permuted."""

    def __init__(self, rng, perm):
        self.rng = rng
        self.perm = perm

    def standard_normal(self, n):
        return self.rng.standard_normal(n)[self.perm]


def test_permutation_equivariance():
    p = ModelParams(epsilon=0.05)
    cfg = SimConfig(n=32, t_end=1.0, dt=1e-3)
    rng0 = np.random.default_rng(11)
    v0, x0 = rng0.standard_normal(32), rng0.standard_normal(32)
    perm = np.random.default_rng(12).permutation(32)

    a = EnsembleState(0.0, v0.copy(), x0.copy())
    b = EnsembleState(0.0, v0[perm], x0[perm])
    for k in range(40):
        a = em_step(a, p, cfg, NoiseStream(5).block(k + 1))
        b = em_step(b, p, cfg, _PermutedDraws(NoiseStream(5).block(k + 1), perm))
    # equivariant up to the roundoff of re-ordering the vbar reduction
    assert np.allclose(a.v[perm], b.v, rtol=0, atol=1e-10)
    assert np.allclose(a.x[perm], b.x, rtol=0, atol=1e-10)
    ma, mb = empirical_moments(a), empirical_moments(b)
    assert ma.mean_v == pytest.approx(mb.mean_v, rel=1e-12, abs=1e-12)
    assert ma.var_x == pytest.approx(mb.var_x, rel=1e-12, abs=1e-12)


def test_simulate_zero_horizon_records_initial_stats():
    p = ModelParams()
    rec = simulate(SimConfig(n=50, t_end=0.0, seed=1), p, InitCondition())
    assert len(rec) == 1 and rec.t[0] == 0.0


def test_simulate_record_times_strictly_increase():
    p = ModelParams(epsilon=0.1)
    rec = simulate(SimConfig(n=10, t_end=0.05, dt=1e-3, seed=2, record_stride=7),
                   p, InitCondition())
    assert np.all(np.diff(rec.t) > 0)
    assert rec.t[-1] == pytest.approx(0.05)


def test_default_dt_tracks_stiffness():
    assert default_dt(ModelParams(epsilon=0.004)) == pytest.approx(0.0004)
    assert default_dt(ModelParams(epsilon=0.5)) == pytest.approx(1e-3)


def test_clamped_ensemble_tracks_limit_system():
    # sigma=0, identical initial conditions: vbar(t) equals the limit flow
    # up to O(dt), and the error halves when dt halves
    p = ModelParams(a=0.3, b=0.1, lam=4.0, sigma=0.0, adaptation_noise=False,
                    epsilon=0.02)
    init = InitCondition(mean_v=2.0, mean_x=0.5, kind="point")
    errs = []
    for dt in (2e-3, 1e-3):
        cfg = SimConfig(n=4, t_end=10.0, dt=dt, seed=0, record_stride=50)
        rec = simulate(cfg, p, init)
        ref = rk4_integrate(LimitState(0.0, 2.0, 0.5), p, dt / 10.0, 10.0,
                            record_stride=500)
        assert np.allclose(ref.t, rec.t)
        errs.append(np.max(np.abs(rec.mean_v - ref.alpha)))
    assert errs[0] < 0.2
    assert errs[0] / errs[1] == pytest.approx(2.0, abs=0.3)


def test_mean_adaptation_dynamics_identity():
    # without adaptation noise the mean recovery update is exactly linear
    p = ModelParams(epsilon=0.05, adaptation_noise=False)
    cfg = SimConfig(n=40, t_end=0.2, dt=1e-3, seed=9, record_stride=1)
    rec = simulate(cfg, p, InitCondition(mean_v=1.0, mean_x=0.3))
    lhs = np.diff(rec.mean_x) / 1e-3
    rhs = -p.a * rec.mean_x[:-1] + p.b * rec.mean_v[:-1]
    assert np.max(np.abs(lhs - rhs)) < 1e-9


def test_mean_adaptation_dynamics_with_noise():
    p = ModelParams(epsilon=0.05, adaptation_noise=True)
    cfg = SimConfig(n=4000, t_end=0.5, dt=1e-3, seed=9, record_stride=1)
    rec = simulate(cfg, p, InitCondition(mean_v=1.0, mean_x=0.3))
    lhs = np.diff(rec.mean_x) / 1e-3
    rhs = -p.a * rec.mean_x[:-1] + p.b * rec.mean_v[:-1]
    # per-step Monte Carlo error of the mean increment
    mc = 4.0 * np.sqrt(2.0 * p.epsilon / 1e-3 / 4000)
    assert np.max(np.abs(lhs - rhs)) < mc
