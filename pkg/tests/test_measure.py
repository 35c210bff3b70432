"""Tests for the trace-distance measurement layer.

Synthetic oracles: d(t) = 0.5 + 0.4 cos(t) e^(-t/5) has one backflow
interval on [0, 6.5] with endpoints pi - atan(0.2) and that plus pi and
gain 0.33380590806595178 (mpmath, frozen before implementation). The
analytic weak-coupling model provides the periodicity cross-oracle.
"""
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from backflow.analytic import (
    analytic_trajectory,
    resummed_nonmarkovianity,
    trace_distance_analytic,
    weak_coupling_params,
)
from backflow.errors import DomainError, ShapeError
from backflow.measure import (
    BackflowInterval,
    BlochTrajectory,
    NonMarkovianityReport,
    TraceDistanceSeries,
    detect_intervals,
    mirror_bloch,
    nonmarkovianity,
    trace_distance_pair,
    trace_distance_sigma_z,
)

# oracle: mpmath; sigma > 0 interval of 0.5 + 0.4 cos(t) exp(-t/5)
SYN_T_START = 2.9441970937399125
SYN_T_END = 6.0857897473297057
SYN_GAIN = 0.33380590806595178


def synthetic_series(t_max=6.5, dt=1e-3):
    t = np.arange(int(round(t_max / dt)) + 1) * dt
    d = 0.5 + 0.4 * np.cos(t) * np.exp(-t / 5)
    sigma = np.exp(-t / 5) * (-0.4 * np.sin(t) - 0.08 * np.cos(t))
    return TraceDistanceSeries(t=t, d=d, sigma=sigma)


def free_spin_trajectory(t_max=5.0, dt=1e-3, up=True):
    t = np.arange(int(round(t_max / dt)) + 1) * dt
    sign = 1.0 if up else -1.0
    return BlochTrajectory(
        t=t,
        sx=np.zeros_like(t),
        sy=-sign * np.sin(2 * t),
        sz=sign * np.cos(2 * t),
        meta={"solver": "free"},
    )


class TestBlochTrajectory:
    def test_requires_uniform_grid(self):
        t = np.array([0.0, 0.1, 0.25])
        with pytest.raises(ShapeError):
            BlochTrajectory(t=t, sx=t * 0, sy=t * 0, sz=t * 0)

    def test_requires_matching_shapes(self):
        t = np.linspace(0, 1, 11)
        with pytest.raises(ShapeError):
            BlochTrajectory(t=t, sx=t[:-1] * 0, sy=t * 0, sz=t * 0)

    def test_arrays_read_only(self):
        traj = free_spin_trajectory(1.0)
        with pytest.raises(ValueError):
            traj.sz[0] = 5.0

    def test_bloch_lengths(self):
        traj = free_spin_trajectory(3.0)
        assert np.max(np.abs(traj.bloch_lengths() - 1.0)) < 1e-14


class TestMirrorBloch:
    def test_direct_relation(self):
        t = np.array([0.0, 1.0])
        traj = BlochTrajectory(
            t=t,
            sx=np.array([0.3, 0.3]),
            sy=np.array([-0.2, -0.2]),
            sz=np.array([0.5, 0.5]),
        )
        m = mirror_bloch(traj)
        assert m.sx[0] == 0.3 and m.sy[0] == 0.2 and m.sz[0] == -0.5

    def test_double_application_is_identity(self):
        traj = free_spin_trajectory(2.0)
        mm = mirror_bloch(mirror_bloch(traj))
        assert np.array_equal(mm.sx, traj.sx)
        assert np.array_equal(mm.sy, traj.sy)
        assert np.array_equal(mm.sz, traj.sz)
        assert mm.meta.get("mirrored") is False

    def test_meta_records_mirroring(self):
        assert mirror_bloch(free_spin_trajectory(1.0)).meta["mirrored"] is True

    def test_free_spin_mirror_equals_down_propagation(self):
        up = free_spin_trajectory(4.0, up=True)
        down = free_spin_trajectory(4.0, up=False)
        m = mirror_bloch(up)
        assert np.allclose(m.sz, down.sz, atol=1e-15)
        assert np.allclose(m.sy, down.sy, atol=1e-15)


class TestTraceDistancePair:
    def test_antipodal_start(self):
        up = free_spin_trajectory(2.0)
        s = trace_distance_pair(up, mirror_bloch(up))
        assert s.d[0] == pytest.approx(1.0, abs=1e-15)

    def test_identical_trajectories(self):
        up = free_spin_trajectory(2.0)
        s = trace_distance_pair(up, up)
        assert np.all(s.d == 0.0)

    def test_orthogonal_axes_point(self):
        t = np.array([0.0, 1.0])
        a = BlochTrajectory(t=t, sx=np.ones(2), sy=np.zeros(2), sz=np.zeros(2))
        b = BlochTrajectory(t=t, sx=np.zeros(2), sy=np.ones(2), sz=np.zeros(2))
        s = trace_distance_pair(a, b)
        assert s.d[0] == pytest.approx(math.sqrt(2) / 2, rel=1e-15)

    def test_grid_mismatch_rejected(self):
        a = free_spin_trajectory(2.0, dt=1e-2)
        b = free_spin_trajectory(2.0, dt=2e-2)
        with pytest.raises(ShapeError):
            trace_distance_pair(a, b)

    def test_free_spin_distance_constant(self):
        up = free_spin_trajectory(5.0)
        s = trace_distance_pair(up, mirror_bloch(up))
        assert np.max(np.abs(s.d - 1.0)) < 1e-14


class TestTraceDistanceSigmaZ:
    def test_initial_point(self):
        up = free_spin_trajectory(2.0)
        s, _ = trace_distance_sigma_z(up, delta=1.0)
        assert s.d[0] == pytest.approx(1.0, abs=1e-15)

    def test_free_spin_constant_one(self):
        up = free_spin_trajectory(5.0)
        s, diag = trace_distance_sigma_z(up, delta=1.0)
        assert np.max(np.abs(s.d - 1.0)) < 1e-14
        # one-sided endpoint differences dominate: O(dt) at dt=1e-3
        assert diag < 5e-4

    def test_matches_pair_route_on_analytic_model(self):
        p = weak_coupling_params(0.1, 20.0)
        traj = analytic_trajectory(p, dt=1e-3, t_max=10.0)
        s_z, diag = trace_distance_sigma_z(traj, delta=1.0)
        s_pair = trace_distance_pair(traj, mirror_bloch(traj))
        assert np.max(np.abs(s_z.d - s_pair.d)) < 1e-12
        assert diag < 5e-4

    def test_matches_analytic_closed_form(self):
        p = weak_coupling_params(0.3, 20.0)
        traj = analytic_trajectory(p, dt=1e-3, t_max=8.0)
        s, _ = trace_distance_sigma_z(traj, delta=1.0)
        assert np.max(np.abs(s.d - trace_distance_analytic(s.t, p))) < 1e-12


class TestDetectIntervals:
    def test_monotone_decay_empty(self):
        t = np.linspace(0, 10, 1001)
        d = np.exp(-t)
        s = TraceDistanceSeries(t=t, d=d, sigma=-np.exp(-t))
        assert detect_intervals(s) == []

    def test_piecewise_linear_rise(self):
        # D falls 1 -> 0.3 on [0,1], rises to 0.5 on [1,2], falls after
        dt = 0.01
        t = np.arange(0, 301) * dt
        d = np.piecewise(
            t,
            [t < 1.0, (t >= 1.0) & (t < 2.0), t >= 2.0],
            [lambda x: 1.0 - 0.7 * x, lambda x: 0.3 + 0.2 * (x - 1.0),
             lambda x: 0.5 - 0.1 * (x - 2.0)],
        )
        sigma = np.piecewise(
            t, [t < 1.0, (t >= 1.0) & (t < 2.0), t >= 2.0], [-0.7, 0.2, -0.1]
        )
        ivs = detect_intervals(TraceDistanceSeries(t=t, d=d, sigma=sigma))
        assert len(ivs) == 1
        assert ivs[0].gain == pytest.approx(0.2, abs=5e-3)
        assert ivs[0].t_start == pytest.approx(1.0, abs=2 * dt)
        assert ivs[0].t_end == pytest.approx(2.0, abs=2 * dt)

    def test_synthetic_frozen_interval(self):
        ivs = detect_intervals(synthetic_series())
        assert len(ivs) == 1
        iv = ivs[0]
        assert iv.t_start == pytest.approx(SYN_T_START, abs=1e-5)
        assert iv.t_end == pytest.approx(SYN_T_END, abs=1e-5)
        assert iv.gain == pytest.approx(SYN_GAIN, abs=1e-6)

    def test_analytic_three_periods_geometric_gains(self):
        p = weak_coupling_params(0.1, 20.0)
        t = np.arange(int(round(3 * p.period / 1e-4)) + 1) * 1e-4
        d = trace_distance_analytic(t, p)
        s = TraceDistanceSeries(t=t, d=d, sigma=np.gradient(d, t))
        ivs = detect_intervals(s, eps=1e-10)
        assert len(ivs) == 3
        r = p.decay_per_period
        assert ivs[1].gain / ivs[0].gain == pytest.approx(r, rel=1e-4)
        assert ivs[2].gain / ivs[1].gain == pytest.approx(r, rel=1e-4)

    def test_single_point_runs_discarded(self):
        t = np.arange(0, 11) * 0.1
        d = np.ones(11)
        sigma = np.zeros(11)
        sigma[5] = 1.0
        assert detect_intervals(TraceDistanceSeries(t=t, d=d, sigma=sigma)) == []

    def test_runs_split_by_single_dip_merged(self):
        t = np.arange(0, 11) * 0.1
        d = np.linspace(1, 0.9, 11)
        sigma = np.array([-1, 1, 1, 1, 0, 1, 1, 1, -1, -1, -1], dtype=float)
        ivs = detect_intervals(TraceDistanceSeries(t=t, d=d, sigma=sigma))
        assert len(ivs) == 1

    def test_negative_eps_rejected(self):
        with pytest.raises(DomainError):
            detect_intervals(synthetic_series(), eps=-1.0)


class TestNonmarkovianity:
    def test_monotone_series_zero_converged(self):
        t = np.linspace(0, 30, 3001)
        d = np.exp(-t)
        s = TraceDistanceSeries(t=t, d=d, sigma=-np.exp(-t))
        rep = nonmarkovianity(s)
        assert rep.n_value == 0.0
        assert rep.intervals == ()
        assert rep.converged is True
        assert rep.horizon == pytest.approx(30.0)

    def test_synthetic_gain(self):
        rep = nonmarkovianity(synthetic_series())
        assert rep.n_value == pytest.approx(SYN_GAIN, abs=1e-6)
        assert rep.n_value == pytest.approx(
            math.fsum(iv.gain for iv in rep.intervals), abs=1e-15
        )

    def test_analytic_long_horizon_matches_resummed(self):
        p = weak_coupling_params(0.1, 20.0)
        horizon = 60.0 / p.gamma
        dt = 2e-3
        t = np.arange(int(round(horizon / dt)) + 1) * dt
        d = trace_distance_analytic(t, p)
        s = TraceDistanceSeries(t=t, d=d, sigma=np.gradient(d, t))
        rep = nonmarkovianity(s, tail_model=(p.gamma, p.delta_tilde))
        n_res, _ = resummed_nonmarkovianity(p)
        assert rep.n_value == pytest.approx(n_res, abs=1e-3)
        assert rep.converged is True

    def test_tail_estimate_geometric(self):
        p = weak_coupling_params(0.1, 20.0)
        dt = 1e-3
        # two full periods: two intervals detected
        t = np.arange(int(round(2 * p.period / dt)) + 1) * dt
        d = trace_distance_analytic(t, p)
        s = TraceDistanceSeries(t=t, d=d, sigma=np.gradient(d, t))
        rep = nonmarkovianity(s, tail_model=(p.gamma, p.delta_tilde))
        r = p.decay_per_period
        expected_tail = rep.intervals[-1].gain * r / (1 - r)
        assert rep.tail_estimate == pytest.approx(expected_tail, rel=1e-12)
        assert rep.converged is False  # tail still above 1e-3 after 2 periods

    def test_tail_defaults_to_horizon_distance(self):
        s = synthetic_series()
        rep = nonmarkovianity(s)
        assert rep.tail_estimate == pytest.approx(float(s.d[-1]), rel=1e-12)

    def test_gain_sum_matches_positive_part_quadrature(self):
        s = synthetic_series(dt=1e-4)
        rep = nonmarkovianity(s)
        quad = np.trapezoid(np.clip(s.sigma, 0, None), s.t)
        assert rep.n_value == pytest.approx(float(quad), abs=1e-6)


class TestStationaryPointCorrespondence:
    def test_sigma_small_where_sz_derivative_small(self):
        p = weak_coupling_params(0.1, 20.0)
        traj = analytic_trajectory(p, dt=1e-3, t_max=12.0)
        s, _ = trace_distance_sigma_z(traj, delta=1.0)
        dz = np.gradient(traj.sz, traj.t)
        dy = np.gradient(traj.sy, traj.t)
        eps = 1e-3
        mask = (np.abs(dz) < eps) & (s.d > 0.05)
        assert np.any(mask)
        # chain rule: |sigma| <= (|sz| + |dsy|/(2 delta)) eps / D
        c = (np.abs(traj.sz[mask]) + np.abs(dy[mask]) / 2.0) / s.d[mask] + 1.0
        assert np.all(np.abs(s.sigma[mask]) < c * eps)


class TestContraction:
    @given(alpha=st.floats(0.02, 0.45), omega_c=st.floats(5.0, 60.0))
    @settings(max_examples=25, deadline=None)
    def test_distance_never_exceeds_initial(self, alpha, omega_c):
        p = weak_coupling_params(alpha, omega_c)
        traj = analytic_trajectory(p, dt=5e-3, t_max=15.0)
        s, _ = trace_distance_sigma_z(traj, delta=1.0)
        assert np.all(s.d <= s.d[0] + 1e-8)


class TestReportInvariants:
    def test_interval_validation(self):
        with pytest.raises(DomainError):
            BackflowInterval(t_start=2.0, t_end=1.0, gain=0.1)
        with pytest.raises(DomainError):
            BackflowInterval(t_start=1.0, t_end=2.0, gain=-0.1)

    def test_report_fields(self):
        rep = NonMarkovianityReport(
            n_value=0.1,
            intervals=(BackflowInterval(1.0, 2.0, 0.1),),
            horizon=10.0,
            tail_estimate=1e-5,
            converged=True,
        )
        assert rep.n_value == 0.1
