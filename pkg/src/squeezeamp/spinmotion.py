"""Qubit-oscillator composite dynamics: carrier rotations, red/blue sideband
unitaries, the blue-sideband Rabi analysis signal, and the phase-sensitive
red-sideband (PSRSB) readout of a displacement.

Joint vectors are ordered as (spin-down Fock block, spin-up Fock block), so a
2N x 2N operator acts on the down block first.  Phase conventions are frozen
so that the PSRSB fringe is exactly

    P_down(phi) = 1/2 - |alpha| f(|alpha|) cos(phi)

when the displacement is driven in phase with the sideband (beatnote = 0):
the displacement is along the positive real axis, the RSB pi-pulse carries
phase 0, and the carrier pi/2 pulse is rotated by the scan phase phi.
"""

from dataclasses import dataclass
import math

import numpy as np

from . import fock, gaussian
from .errors import DimensionMismatchError

RSB = "RSB"
BSB = "BSB"
CARRIER = "CARRIER"

_SIGMA_PLUS = np.array([[0.0, 0.0], [1.0, 0.0]], dtype=complex)  # |up><down|


@dataclass(frozen=True)
class JointState:
    """Pure qubit (x) oscillator state of length 2N: (down block, up block)."""

    space: fock.FockSpace
    amps: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amps, dtype=complex)
        if amps.shape != (2 * self.space.dim,):
            raise DimensionMismatchError(
                f"joint vector of length {amps.shape} does not match 2x{self.space.dim}"
            )
        object.__setattr__(self, "amps", amps)

    @classmethod
    def from_motional(cls, state, spin="down"):
        amps = np.zeros(2 * state.space.dim, dtype=complex)
        if spin == "down":
            amps[: state.space.dim] = state.amps
        elif spin == "up":
            amps[state.space.dim :] = state.amps
        else:
            raise ValueError("spin must be 'down' or 'up'")
        return cls(state.space, amps)

    @property
    def norm(self):
        return float(np.linalg.norm(self.amps))

    @property
    def p_down(self):
        return float(np.sum(np.abs(self.amps[: self.space.dim]) ** 2))

    @property
    def p_up(self):
        return float(np.sum(np.abs(self.amps[self.space.dim :]) ** 2))

    def motional_populations(self):
        d = self.space.dim
        return np.abs(self.amps[:d]) ** 2 + np.abs(self.amps[d:]) ** 2

    def tail_mass(self, levels=fock.TAIL_LEVELS):
        return float(np.sum(self.motional_populations()[-levels:]))

    def check_tail(self, eps=fock.DEFAULT_TAIL_EPS):
        tail = self.tail_mass()
        if tail >= eps:
            from .errors import TruncationError

            raise TruncationError(
                f"joint-state tail mass {tail:.3e} >= {eps:.1e} (dim={self.space.dim})"
            )
        return tail


@dataclass(frozen=True)
class SidebandPulse:
    """One resonant pulse: kind RSB/BSB/CARRIER, Rabi rate, duration, phase."""

    kind: str
    rabi: float  # rad/s
    duration: float  # s
    phase: float = 0.0

    def __post_init__(self):
        if self.kind not in (RSB, BSB, CARRIER):
            raise ValueError(f"unknown pulse kind {self.kind!r}")
        if self.rabi < 0 or self.duration < 0:
            raise ValueError("rabi rate and duration must be >= 0")

    @classmethod
    def pi_pulse(cls, kind, rabi, phase=0.0):
        """Pulse with Omega t / 2 = pi / 2 exactly."""
        return cls(kind, rabi, math.pi / rabi, phase)

    @property
    def area(self):
        """Pulse area Omega t / 2."""
        return 0.5 * self.rabi * self.duration


def u_carrier(phase, angle):
    """2x2 rotation by `angle` about the equatorial axis at azimuth `phase`.

    R = exp(-i (angle/2)(cos(phase) sigma_x + sin(phase) sigma_y)) in the
    (down, up) basis.
    """
    c, s = math.cos(0.5 * angle), math.sin(0.5 * angle)
    return np.array(
        [[c, -1j * np.exp(-1j * phase) * s], [-1j * np.exp(1j * phase) * s, c]],
        dtype=complex,
    )


def lift_carrier(phase, angle, space):
    """Carrier rotation as a 2N x 2N operator (identity on the oscillator)."""
    return np.kron(u_carrier(phase, angle), np.eye(space.dim))


def sideband_hamiltonian(kind, rabi, phase, space):
    """H_RSB = (Omega/2)(e^{i phase} sigma+ a + h.c.); BSB couples to a†."""
    a = fock.ladder_lowering(space)
    coupling = a if kind == RSB else a.conj().T
    if kind not in (RSB, BSB):
        raise ValueError(f"sideband kind must be RSB or BSB, got {kind!r}")
    term = 0.5 * rabi * np.exp(1j * phase) * np.kron(_SIGMA_PLUS, coupling)
    return term + term.conj().T


def u_sideband(kind, pulse, space):
    """Unitary exp(-i H t) of a resonant first-sideband pulse (2N x 2N)."""
    if kind == CARRIER:
        return lift_carrier(pulse.phase, pulse.rabi * pulse.duration, space)
    H = sideband_hamiltonian(kind, pulse.rabi, pulse.phase, space)
    return fock.hermitian_propagator(H, pulse.duration)


def apply_pulse(pulse, state):
    """Apply a sideband or carrier pulse to a JointState."""
    U = u_sideband(pulse.kind, pulse, state.space)
    return JointState(state.space, U @ state.amps)


def bsb_signal(populations, omega, gamma, times):
    """Decaying blue-sideband Rabi signal for a Fock distribution.

    P_down(t) = 1/2 (1 + sum_n P_n e^{-gamma sqrt(n+1) t} cos(Omega sqrt(n+1) t)).
    """
    populations = np.asarray(populations, dtype=float)
    if np.any(populations < -1e-12):
        raise ValueError("populations must be nonnegative")
    if populations.sum() > 1.0 + 1e-9:
        raise ValueError("populations must sum to at most 1")
    times = np.asarray(times, dtype=float)
    root = np.sqrt(np.arange(populations.size) + 1.0)
    t = times[:, None]
    osc = populations * np.exp(-gamma * root * t) * np.cos(omega * root * t)
    return 0.5 * (1.0 + osc.sum(axis=1))


def f_alpha(alpha_abs, nmax=None):
    """Fringe-amplitude reduction factor of the exact PSRSB signal.

    f(|a|) = sum_n e^{-|a|^2} |a|^{2n}/n! cos(pi sqrt(n)/2) sin(pi sqrt(n+1)/2)/sqrt(n+1).
    """
    alpha_abs = abs(alpha_abs)
    if nmax is None:
        nmax = max(30, int(math.ceil(alpha_abs**2 + 10 * math.sqrt(alpha_abs**2 + 1))))
    n = np.arange(nmax)
    if alpha_abs == 0:
        weights = np.zeros(nmax)
        weights[0] = 1.0
    else:
        logw = -(alpha_abs**2) + 2 * n * math.log(alpha_abs) - np.array(
            [math.lgamma(k + 1) for k in n]
        )
        weights = np.exp(logw)
    half_pi = 0.5 * math.pi
    terms = np.cos(half_pi * np.sqrt(n)) * np.sin(half_pi * np.sqrt(n + 1)) / np.sqrt(n + 1)
    return float(np.sum(weights * terms))


def psrsb_pdown_series(alpha, phi):
    """Closed-form fringe 1/2 - |alpha| f(|alpha|) cos(phi)."""
    mag = abs(alpha)
    return 0.5 - mag * f_alpha(mag) * math.cos(phi)


def psrsb_exact_pdown(alpha, phi, space, beatnote=0.0):
    """Full matrix-path PSRSB readout: D(alpha)|down,0>, RSB pi-pulse, carrier.

    `beatnote` is the relative phase between the displacement drive and the
    sideband; 0 places the displacement along the sideband's in-phase axis,
    where the fringe amplitude |alpha| f(|alpha|) is maximal.
    """
    mag = abs(alpha)
    disp = gaussian.Displacement(mag * np.exp(1j * beatnote))
    motional = gaussian.coherent_state(disp, space)
    state = JointState.from_motional(motional, "down")
    state = apply_pulse(SidebandPulse.pi_pulse(RSB, 1.0, phase=0.0), state)
    state = JointState(space, lift_carrier(phi, 0.5 * math.pi, space) @ state.amps)
    return state.p_down


def psrsb_contrast(alpha, space=None):
    """Fringe contrast C = P_down(pi) - P_down(0) = 2 |alpha| f(|alpha|)."""
    if space is None:
        return 2.0 * abs(alpha) * f_alpha(abs(alpha))
    return psrsb_exact_pdown(alpha, math.pi, space) - psrsb_exact_pdown(alpha, 0.0, space)


def psrsb_fringe_density(rho, phis, rabi=1.0):
    """PSRSB fringe P_down(phi) for a motional density operator.

    Lifts rho to the joint space with the qubit in |down>, applies a
    noiseless RSB pi-pulse, and reads P_down after a carrier pi/2 pulse at
    each phase in `phis`.  After the RSB pulse the fringe is
    P_down(phi) = 1/2 tr(rho) + Re(-i e^{-i phi} tr rho_ud), so the scan
    costs one joint conjugation regardless of the number of phases.
    """
    if rho.kind != "motional":
        raise ValueError("psrsb_fringe_density expects a motional density operator")
    d = rho.space.dim
    joint = np.zeros((2 * d, 2 * d), dtype=complex)
    joint[:d, :d] = rho.matrix
    U = u_sideband(RSB, SidebandPulse.pi_pulse(RSB, rabi, phase=0.0), rho.space)
    joint = U @ joint @ U.conj().T
    t_ud = complex(np.trace(joint[d:, :d]))
    base = 0.5 * float(np.trace(joint).real)
    phis = np.asarray(phis, dtype=float)
    return base + np.real(-1j * np.exp(-1j * phis) * t_ud)


def psrsb_contrast_density(rho, rabi=1.0):
    """Fringe contrast P_down(pi) - P_down(0) of a motional density operator."""
    p = psrsb_fringe_density(rho, [math.pi, 0.0], rabi)
    return float(p[0] - p[1])


def rsb_direct_signal(alpha):
    """Reference direct-RSB excitation signal, proportional to |alpha|^2."""
    return abs(alpha) ** 2
