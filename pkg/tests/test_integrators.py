import csv
import warnings

import numpy as np
import pytest
from scipy.optimize import brentq

from levysymp import (ConfigError, JumpEvent, LevyConfig, SchemeConfig, SolverError, State, StepSizeWarning,
                      apply_jump, eem_drift_step, integrate, make_linear_oscillator, one_step_jacobian,
                      sample_path, ses_drift_step)
from levysymp.hamiltonian import HamiltonianSystem, NoiseChannel
from levysymp.integrators import symplectic_form

from systems import ALL_ADDITIVE, coupled, nonseparable, rotation_field

OSC = make_linear_oscillator(1.0)


class TestDriftSteps:
    def test_ses_from_rest(self):
        s = ses_drift_step(OSC, State(0.0, 1.0), 0.08)
        assert s.P[0] == pytest.approx(-0.08, abs=1e-16)
        assert s.Q[0] == pytest.approx(0.9936, abs=1e-15)

    def test_ses_from_unit_momentum(self):
        s = ses_drift_step(OSC, State(1.0, 0.0), 0.1)
        assert (s.P[0], s.Q[0]) == (1.0, 0.1)

    def test_eem(self):
        s = eem_drift_step(OSC, State(0.0, 1.0), 0.08)
        assert (s.P[0], s.Q[0]) == (-0.08, 1.0)
        s = eem_drift_step(OSC, State(1.0, 0.0), 0.1)
        assert (s.P[0], s.Q[0]) == (1.0, 0.1)

    @pytest.mark.parametrize("factory", [lambda: OSC] + ALL_ADDITIVE)
    def test_zero_step_is_identity(self, factory, rng):
        sys = factory()
        s = State(rng.normal(size=sys.n), rng.normal(size=sys.n))
        for step in (ses_drift_step, eem_drift_step):
            np.testing.assert_array_equal(step(sys, s, 0.0).as_vector(), s.as_vector())

    def test_implicit_momentum_solves_the_equation(self, rng):
        sys = nonseparable(eps=0.5)
        for _ in range(20):
            P, Q, dt = rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(0.01, 0.2)
            out = ses_drift_step(sys, State(P, Q), dt)
            root = brentq(lambda x: x - P + sys.sigma0(np.array([x]), np.array([Q]))[0] * dt,
                          -10, 10, xtol=1e-15)
            assert out.P[0] == pytest.approx(root, abs=1e-11)
            assert out.Q[0] == pytest.approx(Q + sys.gamma0(np.array([root]), np.array([Q]))[0] * dt,
                                             abs=1e-11)

    def test_nonconvergence_raises_solver_error(self):
        stiff = HamiltonianSystem(n=1, sigma0=lambda P, Q: 5.0 * P, gamma0=lambda P, Q: 0 * P)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", StepSizeWarning)
            with pytest.raises(SolverError) as info:
                ses_drift_step(stiff, State(1.0, 0.0), 1.0, max_iters=20)
        assert info.value.iterations == 20
        assert info.value.residual > 1.0

    def test_warns_above_step_bound(self):
        with pytest.warns(StepSizeWarning):
            ses_drift_step(OSC, State(0.0, 1.0), 0.3)


class TestJacobian:
    @pytest.mark.parametrize("dt", [0.0, 0.01, 0.08, 0.2])
    def test_oscillator_analytic(self, dt):
        J = one_step_jacobian(OSC, State(0.3, -0.2), dt, "ses")
        np.testing.assert_array_equal(J, [[1, -dt], [dt, 1 - dt * dt]])
        assert np.linalg.det(J) == pytest.approx(1.0, abs=1e-15)
        J = one_step_jacobian(OSC, State(0.3, -0.2), dt, "eem")
        np.testing.assert_array_equal(J, [[1, -dt], [dt, 1]])
        assert np.linalg.det(J) == pytest.approx(1 + dt * dt, abs=1e-15)

    def test_zero_step_identity(self):
        for sys in (OSC, nonseparable(), coupled()):
            s = State(np.full(sys.n, 0.3), np.full(sys.n, 0.1))
            np.testing.assert_allclose(one_step_jacobian(sys, s, 0.0, "ses", method="fd"),
                                       np.eye(2 * sys.n), atol=1e-9)

    def test_finite_differences_match_analytic(self, rng):
        for _ in range(10):
            s = State(rng.normal(), rng.normal())
            for scheme in ("ses", "eem"):
                np.testing.assert_allclose(one_step_jacobian(OSC, s, 0.08, scheme, method="fd"),
                                           one_step_jacobian(OSC, s, 0.08, scheme), atol=1e-9)

    @pytest.mark.parametrize("factory", ALL_ADDITIVE)
    @pytest.mark.parametrize("dt", [0.01, 0.08, 0.2])
    def test_ses_preserves_symplectic_form(self, factory, dt, rng):
        sys = factory()
        omega = symplectic_form(sys.n)
        for _ in range(25):
            s = State(rng.uniform(-1, 1, sys.n), rng.uniform(-1, 1, sys.n))
            J = one_step_jacobian(sys, s, dt, "ses")
            assert np.max(np.abs(J.T @ omega @ J - omega)) <= 1e-6

    @pytest.mark.parametrize("factory", ALL_ADDITIVE)
    def test_eem_breaks_symplectic_form(self, factory, rng):
        sys = factory()
        omega = symplectic_form(sys.n)
        s = State(rng.uniform(-1, 1, sys.n), rng.uniform(-1, 1, sys.n))
        J = one_step_jacobian(sys, s, 0.2, "eem")
        assert np.max(np.abs(J.T @ omega @ J - omega)) > 1e-3

    def test_drift_then_jump_is_symplectic(self, rng):
        h = 1e-6
        for _ in range(20):
            x = rng.normal(size=2)
            dt, l = rng.uniform(0.01, 0.2), rng.normal(scale=0.2)

            def update(v):
                s = ses_drift_step(OSC, State.from_vector(v), dt)
                return apply_jump(OSC, s, JumpEvent(0, 1.0, l)).as_vector()

            J = np.column_stack([(update(x + h * e) - update(x - h * e)) / (2 * h) for e in np.eye(2)])
            assert abs(np.linalg.det(J) - 1) <= 1e-6


def _manual_ses(sys, x, grid, t0=0.0):
    t = t0
    for g in grid:
        x = ses_drift_step(sys, x, g - t)
        t = g
    return x


class TestIntegrate:
    def test_single_jump_composition(self, make_path):
        beta, R, tau = 1.0, 0.37, 0.5
        sys = make_linear_oscillator(beta)
        cfg = SchemeConfig(dt=0.08, t_end=1.0)
        rec = integrate(sys, State(0.0, 1.0), make_path([(tau, R)], horizon=1.0), cfg)

        before = _manual_ses(sys, State(0.0, 1.0), [k * 0.08 for k in range(1, 7)] + [tau])
        after = State(before.P + beta * R, before.Q)
        end = _manual_ses(sys, after, [k * 0.08 for k in range(7, 13)] + [1.0], t0=tau)

        i = int(np.flatnonzero(rec.jump_flags)[0])
        assert rec.times[i] == rec.times[i - 1] == tau
        np.testing.assert_array_equal(rec.state(i - 1).as_vector(), before.as_vector())
        np.testing.assert_array_equal(rec.state(i).as_vector(), after.as_vector())
        np.testing.assert_array_equal(rec.final_state.as_vector(), end.as_vector())

    def test_end_before_first_jump(self, make_path):
        cfg = SchemeConfig(dt=0.08, t_end=1.0)
        a = integrate(OSC, State(0.0, 1.0), make_path([(1.5, 0.3)], horizon=2.0), cfg)
        b = integrate(OSC, State(0.0, 1.0), make_path([], horizon=2.0), cfg)
        np.testing.assert_array_equal(a.P, b.P)
        np.testing.assert_array_equal(a.times, b.times)
        assert not a.jump_flags.any()

    def test_beta_zero_is_deterministic_ses(self, make_path):
        path = sample_path(LevyConfig(seed=21))
        cfg = SchemeConfig(dt=0.08, t_end=20.0)
        a = integrate(make_linear_oscillator(0.0), State(0.0, 1.0), path, cfg)
        b = integrate(make_linear_oscillator(0.0), State(0.0, 1.0), make_path([]), cfg)
        np.testing.assert_array_equal(a.P, b.P)
        np.testing.assert_array_equal(a.Q, b.Q)

    def test_deterministic_energy_bounded(self, make_path):
        dt = 0.08
        rec = integrate(make_linear_oscillator(0.0), State(0.0, 1.0), make_path([]),
                        SchemeConfig(dt=dt, t_end=20.0))
        assert rec.hamiltonians.max() <= 0.5 * (1 + 2 * dt)
        assert np.max(np.abs(rec.hamiltonians - 0.5)) <= 0.05

    def test_deterministic_eem_energy_grows_geometrically(self, make_path):
        dt, T = 0.08, 20.0
        rec = integrate(make_linear_oscillator(0.0), State(0.0, 1.0), make_path([]),
                        SchemeConfig(scheme="eem", dt=dt, t_end=T))
        assert rec.hamiltonians[-1] >= 0.5 * (1 + dt**2) ** (T / dt) * (1 - 0.1)
        assert np.all(np.diff(rec.hamiltonians) > 0)

    def test_record_structure(self):
        path = sample_path(LevyConfig(seed=2))
        rec = integrate(OSC, State(0.0, 1.0), path, SchemeConfig(dt=0.08, t_end=20.0, record_every=5))
        assert rec.times[0] == 0.0 and rec.times[-1] == 20.0
        assert np.all(np.diff(rec.times) >= 0)
        assert rec.jump_flags.sum() == path.num_jumps()
        # repeated times occur only around jumps
        dup = np.flatnonzero(np.diff(rec.times) == 0)
        assert np.all(rec.jump_flags[dup + 1])
        np.testing.assert_array_equal(rec.times[rec.jump_flags], path.times[0])
        assert len(rec.P) == len(rec.Q) == len(rec.hamiltonians) == len(rec)

    def test_thinning_keeps_endpoint(self):
        path = sample_path(LevyConfig(seed=2))
        full = integrate(OSC, State(0.0, 1.0), path, SchemeConfig(dt=0.08))
        thin = integrate(OSC, State(0.0, 1.0), path, SchemeConfig(dt=0.08, record_every=10**6))
        assert len(thin) == 2 + 2 * path.num_jumps()
        np.testing.assert_array_equal(full.final_state.as_vector(), thin.final_state.as_vector())

    def test_t_end_not_a_multiple_of_dt(self, make_path):
        rec = integrate(OSC, State(0.0, 1.0), make_path([], horizon=1.0), SchemeConfig(dt=0.28, t_end=1.0))
        np.testing.assert_allclose(rec.times, [0.0, 0.28, 0.56, 0.84, 1.0], atol=1e-15)
        assert rec.times[-1] == 1.0

    def test_multichannel_system(self):
        sys = coupled()
        path = sample_path(LevyConfig(channels=2, seed=6, horizon=5.0))
        rec = integrate(sys, State([0.1, 0.2], [0.3, 0.4]), path, SchemeConfig(dt=0.05, t_end=5.0))
        assert rec.jump_flags.sum() == path.num_jumps()
        assert rec.P.shape[1] == 2

    def test_warns_when_dt_exceeds_bound(self, make_path):
        with pytest.warns(StepSizeWarning):
            integrate(OSC, State(0.0, 1.0), make_path([], horizon=1.0), SchemeConfig(dt=0.3, t_end=1.0))

    def test_rejects_state_dependent_noise(self, make_path):
        with pytest.raises(ConfigError):
            integrate(rotation_field(), State(0.0, 1.0), make_path([]), SchemeConfig())

    def test_rejects_short_path(self, make_path):
        with pytest.raises(ConfigError):
            integrate(OSC, State(0.0, 1.0), make_path([], horizon=5.0), SchemeConfig(t_end=10.0))

    def test_solver_error_carries_time(self, make_path):
        stiff = HamiltonianSystem(n=1, sigma0=lambda P, Q: 5.0 * P * (Q > 0.5), gamma0=lambda P, Q: 0 * P + 1,
                                  noise=(NoiseChannel(lambda t: np.zeros(1), lambda t: np.zeros(1)),))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", StepSizeWarning)
            with pytest.raises(SolverError) as info:
                integrate(stiff, State(1.0, 0.0), make_path([], horizon=2.0), SchemeConfig(dt=1.0, t_end=2.0))
        assert info.value.time == 1.0

    def test_csv(self, tmp_path):
        rec = integrate(OSC, State(0.0, 1.0), sample_path(LevyConfig(seed=3, horizon=2.0)),
                        SchemeConfig(t_end=2.0))
        rec.to_csv(tmp_path / "t.csv")
        with open(tmp_path / "t.csv") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["t", "P_1", "Q_1", "H0", "jump_flag"]
        assert len(rows) == len(rec) + 1
        assert float(rows[-1][0]) == 2.0
        np.testing.assert_array_equal([float(r[1]) for r in rows[1:]], rec.P[:, 0])
