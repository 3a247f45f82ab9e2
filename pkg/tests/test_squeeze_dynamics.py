import contextlib
import math

import numpy as np
import pytest

from sqspec.background import BackgroundParams, CouplingCoefficients
from sqspec.config import SweepConfig
from sqspec.squeeze_dynamics import (
    CappedGrowthWarning,
    SqueezeState,
    StepSizeUnderflowError,
    evolve_grid,
    integrate,
    rhs_closed_reference,
    rhs_conformal,
    rhs_transformed,
    wrap_angle,
)

PI4 = math.pi / 4.0


class TestRhsPointwise:
    def test_quarter_pi_is_fixed_point_of_r(self):
        # cos(2 phi) = 0 kills the only surviving numerator term at mu2' = 0
        cc = CouplingCoefficients(mu2=0.0, coupling=1.0)
        for r in (1e-6, 0.1, 2.0):
            state = SqueezeState(r=r, phi=PI4, x=3.0)
            dr, _ = rhs_conformal(state, 1.0, couplings=cc)
            assert abs(dr) < 1e-12
            dr_t, _ = rhs_transformed(state, 1.0, couplings=cc)
            assert abs(dr_t) < 1e-12

    def test_large_r_saturation(self):
        # sinh 2r / (sinh 2r + ...) -> 1 at mu2 = 0
        cc = CouplingCoefficients(mu2=0.0, coupling=1.0)
        state = SqueezeState(r=25.0, phi=0.4, x=2.0)
        dr, _ = rhs_conformal(state, 1.0, couplings=cc)
        assert dr == pytest.approx(-1.0 * math.cos(0.8), rel=1e-10)
        state_t = SqueezeState(r=40.0, phi=0.0, x=2.0)
        dr_t, _ = rhs_transformed(state_t, 1.0, couplings=cc)
        assert dr_t == pytest.approx(-1.0, rel=1e-12)

    def test_conformal_frozen_oracle(self):
        # independent 50-digit evaluation of the printed expressions at
        # r=1, phi=0.3, eta=-1, k=1, M_P=1 (A = 1, mu2 = 1)
        state = SqueezeState(r=1.0, phi=0.3, x=1.0)
        dr, dp = rhs_conformal(state, 1.0)
        assert dr == pytest.approx(-0.35681929285030654, rel=1e-14)
        assert dp == pytest.approx(-0.22492441159015873, rel=1e-14)

    def test_transformed_frozen_oracle(self):
        # r=0.5, phi=1.0, mu2=0.2, |1-mu1^2| = 4 (coupling 2), M_P=1
        cc = CouplingCoefficients(mu2=0.2, coupling=2.0)
        state = SqueezeState(r=0.5, phi=1.0, x=1.0)
        dr, dp = rhs_transformed(state, 1.0, couplings=cc)
        assert dr == pytest.approx(1.1617798511896459, rel=1e-14)
        assert dp == pytest.approx(1.6440707015465308, rel=1e-14)

    def test_conformal_equals_transformed(self):
        # the two printed forms are algebraically identical
        rng = np.random.RandomState(11)
        for _ in range(200):
            state = SqueezeState(
                r=rng.uniform(1e-5, 4.0),
                phi=rng.uniform(-3.0, 3.0),
                x=rng.uniform(0.05, 50.0),
            )
            cc = CouplingCoefficients(
                mu2=rng.uniform(0.0, 2.0),
                coupling=rng.uniform(0.01, 3.0),
                mu2_rate=rng.uniform(-0.5, 0.5),
            )
            a = rhs_conformal(state, 1.0, couplings=cc)
            b = rhs_transformed(state, 1.0, couplings=cc)
            np.testing.assert_allclose(a, b, rtol=1e-12)

    def test_closed_reference_is_analytic_limit(self):
        cc0 = CouplingCoefficients(mu2=0.0, coupling=0.7)
        state = SqueezeState(r=0.9, phi=1.1, x=4.0)
        closed = rhs_closed_reference(state, 1.0, couplings=cc0)
        conformal = rhs_conformal(state, 1.0, couplings=cc0)
        np.testing.assert_allclose(closed, conformal, rtol=1e-14)

    def test_coupling_power_modes_differ(self):
        state = SqueezeState(r=0.5, phi=0.3, x=10.0)
        lit = rhs_conformal(state, 0.5, coupling_power="literal")
        ham = rhs_conformal(state, 0.5, coupling_power="hamiltonian-consistent")
        assert lit[0] != ham[0]

    def test_singular_angle_term_is_not_a_crash(self):
        # r = 0 with sin(2 phi) != 0: the angle rate is unbounded but must
        # come back as a value, not an exception
        state = SqueezeState(r=0.0, phi=0.3, x=2.0)
        dr, dp = rhs_conformal(state, 1.0)
        assert dr == 0.0
        assert math.isinf(dp)


class TestIntegrate:
    def test_zero_coupling_freezes_r(self):
        # with the coupling frozen to zero the r equation vanishes identically
        for form in ("conformal", "transformed"):
            traj = integrate(
                0.5, 10.0, 0.1, init=(0.3, PI4), form=form, zero_coupling=True
            )
            np.testing.assert_allclose(traj.r, 0.3, rtol=1e-12)

    def test_dual_integrator_agreement(self):
        ref = integrate(0.8, 5.0, 0.5, init=(0.05, PI4), samples=[5.0, 0.5])
        fix = integrate(
            0.8, 5.0, 0.5, init=(0.05, PI4), samples=[5.0, 0.5],
            method="fixed", h_fixed=1e-3,
        )
        assert abs(ref.samples[-1].r - fix.samples[-1].r) < 1e-8
        assert abs(ref.samples[-1].phi - fix.samples[-1].phi) < 1e-8

    def test_fixed_step_order_four(self):
        ref = integrate(
            0.8, 5.0, 0.5, init=(0.05, PI4), samples=[5.0, 0.5],
            rtol=1e-13, atol=1e-13,
        ).samples[-1]
        errs = []
        for h in (0.02, 0.01, 0.005, 0.0025):
            end = integrate(
                0.8, 5.0, 0.5, init=(0.05, PI4), samples=[5.0, 0.5],
                method="fixed", h_fixed=h,
            ).samples[-1]
            errs.append(max(abs(end.r - ref.r), abs(end.phi - ref.phi)))
        orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
        assert np.all(orders > 3.5) and np.all(orders < 4.5)

    @pytest.mark.parametrize(
        "k,r1,phi1,rend",
        [
            # frozen reference values from a stiff multistep integrator
            # (LSODA, rtol 3e-13, atol 1e-15) on the default configuration
            (1e-4, 2.647266164373679e-06, 1.57079632653017, 0.009088521883382855),
            (0.05, 2.691143801220748e-06, 1.5707961922377425, 4.135726438122061),
            (1.0, 2.6912302755608675e-06, 1.5707936355791066, 43.43111840013585),
        ],
    )
    def test_stiff_window_against_frozen_reference(self, k, r1, phi1, rend):
        with pytest.warns(CappedGrowthWarning) if k == 1.0 else contextlib.nullcontext():
            traj = integrate(k, 100.0, 0.01, samples=[100.0, 1.0, 0.01])
        s1 = traj.state_at(1.0)
        assert abs(s1.r - r1) < 2e-9
        assert abs(s1.phi - phi1) < 1e-9
        assert traj.state_at(0.01).r == pytest.approx(rend, rel=1e-5)

    def test_singularity_seed_never_non_finite(self):
        traj = integrate(0.1, 20.0, 0.5, init=(1e-8, PI4))
        assert np.all(np.isfinite(traj.r))
        assert np.all(np.isfinite(traj.phi))

    def test_finite_and_subcap_through_crossing(self):
        for k in (1e-4, 0.05, 1.0):
            traj = _quiet_default_traj(k)
            assert np.all(np.isfinite(traj.r))
            pre_crossing = traj.r[traj.x >= 1.0]
            assert np.all(pre_crossing < 30.0)

    def test_determinism_bitwise(self):
        a = integrate(0.3, 50.0, 0.05)
        b = integrate(0.3, 50.0, 0.05)
        assert a.samples == b.samples

    def test_sample_structure(self):
        traj = integrate(0.7, 30.0, 0.2, samples=24)
        x = traj.x
        assert x[0] == 30.0 and x[-1] == 0.2
        assert np.all(np.diff(x) < 0)
        assert 1.0 in x  # horizon crossing always recorded
        assert traj.samples[0].r == 1e-6 and traj.samples[0].phi == PI4

    def test_cap_warning_and_flag(self):
        with pytest.warns(CappedGrowthWarning):
            traj = integrate(1.0, 100.0, 0.01, r_cap=30.0)
        assert traj.integrator_stats.capped

    def test_underflow_diagnostic_keeps_last_state(self):
        with pytest.raises(StepSizeUnderflowError) as excinfo:
            integrate(0.5, 10.0, 1.0, init=(0.0, 0.3), stiff_mode="off", max_steps=100000)
        traj = excinfo.value.trajectory
        assert len(traj.samples) >= 1
        assert traj.integrator_stats.status == "step-underflow"

    def test_validation(self):
        with pytest.raises(ValueError, match="x_start"):
            integrate(1.0, 0.5, 2.0)
        with pytest.raises(ValueError, match="form"):
            integrate(1.0, 5.0, 0.5, form="nope")
        with pytest.raises(ValueError, match="tolerances"):
            integrate(1.0, 5.0, 0.5, rtol=0.0)

    def test_closed_reference_oracle_convergence(self):
        # the dissipation-free form approximates the open flow to first
        # order in mu2 = k: halving k halves the angle deviation and
        # quarters the amplitude deviation
        devs = []
        for k in (1e-3, 5e-4, 2.5e-4):
            op = integrate(k, 5.0, 0.5, init=(0.2, PI4), samples=[5.0, 0.5])
            cl = integrate(
                k, 5.0, 0.5, init=(0.2, PI4), form="closed-reference",
                samples=[5.0, 0.5],
            )
            devs.append(
                (
                    abs(op.samples[-1].r - cl.samples[-1].r),
                    abs(op.samples[-1].phi - cl.samples[-1].phi),
                )
            )
        for (r1, p1), (r2, p2) in zip(devs, devs[1:]):
            assert 0.45 <= p2 / p1 <= 0.55
            assert 0.20 <= r2 / r1 <= 0.30

    def test_stiff_bypass_matches_plain_where_affordable(self):
        # non-stiff window: auto mode must not engage the fast path, and the
        # result must match a forced plain run bit for bit
        auto = integrate(0.8, 5.0, 0.5, init=(0.05, PI4))
        off = integrate(0.8, 5.0, 0.5, init=(0.05, PI4), stiff_mode="off")
        assert auto.integrator_stats.n_slaved_steps == 0
        assert auto.samples == off.samples


def _quiet_default_traj(k):
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", CappedGrowthWarning)
        return integrate(k, 100.0, 0.01)


class TestEvolveGrid:
    def test_single_k_matches_integrate(self):
        cfg = SweepConfig()
        res = evolve_grid([0.5], cfg)
        assert len(res) == 1 and res[0].error is None
        traj = integrate(
            0.5, cfg.x_start, cfg.x_end,
            init=(cfg.init_r, cfg.init_phi),
            samples=[cfg.x_start, 1.0, cfg.x_end],
        )
        assert res[0].state == traj.state_at(1.0)

    def test_duplicate_entries_bitwise_identical(self):
        res = evolve_grid([0.2, 0.2], SweepConfig())
        assert res[0].state == res[1].state

    def test_super_horizon_eval(self):
        cfg = SweepConfig()
        res = evolve_grid([0.01], cfg, eval_point="super-horizon")
        assert res[0].state.x == cfg.x_end

    def test_failures_flagged_not_raised(self):
        # r = 0 exactly is the angle singularity; both modes must be
        # reported, not raised
        cfg = SweepConfig(init_r=0.0)
        res = evolve_grid([0.3, 0.6], cfg)
        assert all(m.state is None and m.error for m in res)

    def test_rejects_descending_grid(self):
        with pytest.raises(ValueError, match="ascending"):
            evolve_grid([1.0, 0.5], SweepConfig())


class TestWrapAngle:
    def test_range(self):
        for phi in np.linspace(-20, 20, 101):
            w = wrap_angle(phi)
            assert -math.pi < w <= math.pi

    def test_identity_inside(self):
        assert wrap_angle(1.2) == 1.2
        assert wrap_angle(math.pi) == math.pi

    def test_winding_removed(self):
        assert wrap_angle(1.0 + 6 * math.pi) == pytest.approx(1.0, abs=1e-12)
