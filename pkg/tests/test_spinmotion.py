import math

import numpy as np
import pytest

from squeezeamp import Displacement, FockSpace, SqueezeParam, coherent_state, squeezed_vacuum
from squeezeamp.errors import DimensionMismatchError
from squeezeamp.spinmotion import (
    BSB,
    CARRIER,
    RSB,
    JointState,
    SidebandPulse,
    apply_pulse,
    bsb_signal,
    f_alpha,
    lift_carrier,
    psrsb_contrast,
    psrsb_exact_pdown,
    psrsb_pdown_series,
    rsb_direct_signal,
    u_carrier,
    u_sideband,
)

SP = FockSpace(64)


def down_fock(space, n=0):
    amps = np.zeros(2 * space.dim, dtype=complex)
    amps[n] = 1.0
    return JointState(space, amps)


class TestJointState:
    def test_blocks_and_probabilities(self):
        st = JointState.from_motional(coherent_state(Displacement(0.5), SP), "down")
        assert st.p_down == pytest.approx(1.0, abs=1e-12)
        assert st.p_up == 0.0
        up = JointState.from_motional(coherent_state(Displacement(0.5), SP), "up")
        assert up.p_up == pytest.approx(1.0, abs=1e-12)

    def test_motional_populations_merge_spin(self):
        amps = np.zeros(2 * SP.dim, dtype=complex)
        amps[0] = amps[SP.dim + 1] = 1 / math.sqrt(2)
        st = JointState(SP, amps)
        pops = st.motional_populations()
        assert pops[0] == pytest.approx(0.5)
        assert pops[1] == pytest.approx(0.5)

    def test_rejects_wrong_length(self):
        with pytest.raises(DimensionMismatchError):
            JointState(SP, np.zeros(SP.dim))


class TestCarrier:
    def test_zero_angle_is_identity(self):
        assert np.allclose(u_carrier(0.7, 0.0), np.eye(2))

    def test_two_half_pulses_compose_to_pi(self):
        half = u_carrier(0.3, math.pi / 2)
        assert np.allclose(half @ half, u_carrier(0.3, math.pi), atol=1e-14)

    def test_pi_pulse_flips(self):
        st = down_fock(SP)
        out = JointState(SP, lift_carrier(0.0, math.pi, SP) @ st.amps)
        assert out.p_up == pytest.approx(1.0, abs=1e-12)

    def test_unitary(self):
        U = u_carrier(1.1, 0.9)
        assert np.allclose(U @ U.conj().T, np.eye(2), atol=1e-14)


class TestSidebandPulse:
    def test_pi_pulse_area(self):
        p = SidebandPulse.pi_pulse(RSB, 2 * math.pi * 1.1e3)
        assert p.area == pytest.approx(math.pi / 2, rel=1e-15)

    def test_rejects_unknown_kind(self):
        with pytest.raises(ValueError):
            SidebandPulse("purple", 1.0, 1.0)


class TestSidebandUnitaries:
    def test_rsb_leaves_down_ground_invariant(self):
        st = down_fock(SP)
        for duration in (0.3, 1.7, 9.2):
            out = apply_pulse(SidebandPulse(RSB, 1.0, duration), st)
            assert abs(out.amps[0]) == pytest.approx(1.0, abs=1e-12)

    def test_bsb_pi_pulse_transfers_to_up_one(self):
        out = apply_pulse(SidebandPulse(BSB, 1.0, math.pi), down_fock(SP))
        assert abs(out.amps[SP.dim + 1]) == pytest.approx(1.0, abs=1e-12)

    def test_rsb_rabi_rate_scales_as_sqrt_n(self):
        # |down,4> completes a full flop in half the time of |down,1>
        t1 = 2 * math.pi  # full period on n=1 at Omega=1 (rate Omega*sqrt(1))
        out1 = apply_pulse(SidebandPulse(RSB, 1.0, t1), down_fock(SP, 1))
        out4 = apply_pulse(SidebandPulse(RSB, 1.0, t1 / 2), down_fock(SP, 4))
        assert abs(out1.amps[1]) == pytest.approx(1.0, abs=1e-12)
        assert abs(out4.amps[4]) == pytest.approx(1.0, abs=1e-12)

    def test_unitarity(self):
        U = u_sideband(BSB, SidebandPulse(BSB, 1.3, 0.8, phase=0.4), FockSpace(16))
        assert np.allclose(U.conj().T @ U, np.eye(32), atol=1e-12)

    def test_carrier_kind_routes_to_rotation(self):
        p = SidebandPulse(CARRIER, 1.0, math.pi, phase=0.0)
        out = apply_pulse(p, down_fock(SP))
        assert out.p_up == pytest.approx(1.0, abs=1e-12)


class TestBsbSignal:
    def test_ground_state_undamped(self):
        t = np.linspace(0, 5, 40)
        sig = bsb_signal([1.0], 1.0, 0.0, t)
        assert np.allclose(sig, 0.5 * (1 + np.cos(t)), atol=1e-14)

    def test_t_zero_is_one(self):
        pops = coherent_state(Displacement(1.2), SP).populations()
        assert bsb_signal(pops, 2 * math.pi * 1.1e3, 500.0, [0.0])[0] == pytest.approx(1.0)

    def test_decay_rates_scale_with_sqrt(self):
        # single n=1 component decays with gamma*sqrt(2)
        pops = np.zeros(4)
        pops[1] = 1.0
        g, om = 100.0, 2 * math.pi * 1e3
        t = 3e-3
        sig = bsb_signal(pops, om, g, [t])[0]
        expect = 0.5 * (1 + math.exp(-g * math.sqrt(2) * t) * math.cos(om * math.sqrt(2) * t))
        assert sig == pytest.approx(expect, abs=1e-14)

    def test_rejects_bad_populations(self):
        with pytest.raises(ValueError):
            bsb_signal([-0.1, 1.1], 1.0, 0.0, [0.0])
        with pytest.raises(ValueError):
            bsb_signal([0.8, 0.8], 1.0, 0.0, [0.0])

    def test_matches_joint_unitary_evolution(self):
        # gamma=0 signal equals projective BSB dynamics on the same distribution
        sp = FockSpace(96)
        st = JointState.from_motional(squeezed_vacuum(SqueezeParam(1.0), sp), "down")
        om = 2 * math.pi * 1.1e3
        for t in (0.1e-3, 0.37e-3):
            out = apply_pulse(SidebandPulse(BSB, om, t), st)
            ref = bsb_signal(st.motional_populations()[:90], om, 0.0, [t])[0]
            assert out.p_down == pytest.approx(ref, abs=1e-9)


class TestFAlpha:
    def test_f_zero_is_one(self):
        assert f_alpha(0.0) == 1.0

    def test_small_alpha_value(self):
        assert f_alpha(0.055) == pytest.approx(0.99699, abs=5e-5)

    def test_decreases_with_alpha(self):
        vals = [f_alpha(a) for a in (0.0, 0.5, 1.0, 2.0)]
        assert all(x > y for x, y in zip(vals, vals[1:]))


class TestPsrsb:
    def test_alpha_zero_is_half(self):
        for phi in (0.0, 1.0, math.pi):
            assert psrsb_exact_pdown(0.0, phi, SP) == pytest.approx(0.5, abs=1e-12)

    def test_small_alpha_examples(self):
        a = 0.055
        assert psrsb_exact_pdown(a, 0.0, SP) == pytest.approx(0.5 - a * f_alpha(a), abs=1e-10)
        assert psrsb_exact_pdown(a, math.pi / 2, SP) == pytest.approx(0.5, abs=1e-10)

    @pytest.mark.parametrize("alpha", [0.02, 0.3, 1.0, 2.0])
    @pytest.mark.parametrize("phi", [0.0, 0.9, 2.3, math.pi])
    def test_matrix_path_matches_series(self, alpha, phi):
        sp = FockSpace(96)
        exact = psrsb_exact_pdown(alpha, phi, sp)
        assert exact == pytest.approx(psrsb_pdown_series(alpha, phi), abs=1e-9)

    def test_beatnote_shifts_fringe(self):
        # displacing in quadrature with the sideband kills the phi=0 signal
        sp = FockSpace(64)
        val = psrsb_exact_pdown(0.3, 0.0, sp, beatnote=math.pi / 2)
        assert val == pytest.approx(0.5, abs=1e-10)

    def test_contrast_matches_series(self):
        assert psrsb_contrast(0.0550) == pytest.approx(2 * 0.0550 * f_alpha(0.0550), rel=1e-12)
        assert psrsb_contrast(0.0550) == pytest.approx(0.1097, abs=5e-4)
        assert psrsb_contrast(0.3, FockSpace(64)) == pytest.approx(
            psrsb_contrast(0.3), abs=1e-9
        )

    def test_contrast_small_alpha_limit(self):
        # |C - 2 alpha| bounded by k alpha^3
        alphas = np.linspace(0.01, 0.1, 10)
        errs = np.array([abs(psrsb_contrast(a) - 2 * a) for a in alphas])
        k = errs / alphas**3
        assert np.max(k) < 2.0

    def test_direct_signal(self):
        assert rsb_direct_signal(0.5) == pytest.approx(0.25)
