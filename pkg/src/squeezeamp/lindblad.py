"""Lindblad open-system evolution for the amplification protocol.

The decoherence model has two motional channels: heating through the
Lindblad operators sqrt(nbar_dot) a† and sqrt(nbar_dot) a, and dephasing
through sqrt(Gamma) a†a.  Both act on the oscillator only; the qubit is
treated as noiseless during sideband pulses.

Evolution uses a Strang split per step: an exact unitary half-step (the
Hamiltonian propagator from an eigendecomposition), a classical 4th-order
Runge-Kutta step of the dissipator, and a second unitary half-step.  The
step count is doubled until two successive resolutions agree in trace
distance, so stiff dissipators are detected rather than silently
under-resolved.
"""

from dataclasses import dataclass, field
import math

import numpy as np

from . import fock, spinmotion
from .errors import ConfigError, ConvergenceError, DimensionMismatchError

SEGMENT_KINDS = ("displace", "parametric", "rsb", "bsb", "carrier", "free")


@dataclass(frozen=True)
class NoiseParams:
    """Motional heating rate (quanta/s) and dephasing rate (1/s)."""

    heating_rate: float = 20.0
    dephasing_rate: float = 18.0

    def __post_init__(self):
        if self.heating_rate < 0 or self.dephasing_rate < 0:
            raise ValueError("noise rates must be >= 0")

    @property
    def is_zero(self):
        return self.heating_rate == 0.0 and self.dephasing_rate == 0.0

    @classmethod
    def none(cls):
        return cls(0.0, 0.0)


@dataclass(frozen=True)
class Segment:
    """One pulse-sequence element.

    `strength` is the drive rate in rad/s: the displacement Rabi rate for
    `displace` (final alpha = strength * duration * e^{i phase}), the
    parametric coupling g for `parametric` (r = g * duration), the sideband
    or carrier Rabi rate otherwise.  `free` ignores phase and strength.
    """

    kind: str
    duration: float  # seconds
    phase: float = 0.0
    strength: float = 0.0
    noise_active: bool = True

    def __post_init__(self):
        if self.kind not in SEGMENT_KINDS:
            raise ValueError(f"unknown segment kind {self.kind!r}")
        if self.duration <= 0:
            raise ValueError("segment duration must be > 0")
        if not (np.isfinite(self.phase) and np.isfinite(self.strength)):
            raise ValueError("segment phase and strength must be finite")
        if self.strength < 0:
            raise ValueError("segment strength must be >= 0")


@dataclass(frozen=True)
class PulseSequence:
    """Ordered pulse segments sharing one phase reference."""

    segments: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(self.segments))

    def __len__(self):
        return len(self.segments)

    @property
    def total_duration(self):
        return sum(s.duration for s in self.segments)

    def to_text(self):
        """One segment per line: kind duration_us phase_rad strength."""
        lines = ["# kind duration_us phase_rad strength"]
        for s in self.segments:
            lines.append(f"{s.kind} {s.duration * 1e6:.17g} {s.phase:.17g} {s.strength:.17g}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text):
        segments = []
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 4:
                raise ConfigError(
                    f"segment line {lineno} needs 4 fields (kind duration_us phase_rad strength)",
                    line=lineno,
                )
            kind = parts[0]
            try:
                duration_us, phase, strength = (float(p) for p in parts[1:])
            except ValueError:
                raise ConfigError(
                    f"segment line {lineno} has a non-numeric field", line=lineno
                ) from None
            try:
                segments.append(Segment(kind, duration_us * 1e-6, phase, strength))
            except ValueError as exc:
                raise ConfigError(f"segment line {lineno}: {exc}", line=lineno) from None
        return cls(tuple(segments))


def segment_hamiltonian(segment, space):
    """Joint-space (2N x 2N) Hamiltonian of one segment.

    Motional drives are tensored with the qubit identity so every segment
    acts on the same composite space.
    """
    dim = space.dim
    a = fock.ladder_lowering(space)
    if segment.kind == "free":
        h_mot = np.zeros((dim, dim), dtype=complex)
    elif segment.kind == "displace":
        # exp(-i H t) = D(s t e^{i phase})
        term = 1j * segment.strength * np.exp(1j * segment.phase) * a.conj().T
        h_mot = term + term.conj().T
    elif segment.kind == "parametric":
        a2 = a @ a
        h_mot = 1j * 0.5 * segment.strength * (
            a2 * np.exp(-1j * segment.phase) - a2.conj().T * np.exp(1j * segment.phase)
        )
    elif segment.kind == "carrier":
        return np.kron(
            0.5 * segment.strength * np.array(
                [[0, np.exp(-1j * segment.phase)], [np.exp(1j * segment.phase), 0]]
            ),
            np.eye(dim),
        )
    else:
        kind = spinmotion.RSB if segment.kind == "rsb" else spinmotion.BSB
        return spinmotion.sideband_hamiltonian(kind, segment.strength, segment.phase, space)
    return np.kron(np.eye(2), h_mot)


def _noise_operators(dim, joint, noise):
    """Precomputed pieces of the dissipator on an N- or 2N-dim space."""
    space = fock.FockSpace(dim)
    a = fock.ladder_lowering(space)
    ad = a.conj().T
    n = np.arange(dim, dtype=float)
    # anticommutator half: (nbar_dot (a a† + a†a) + Gamma n²) / 2, diagonal
    half = 0.5 * (noise.heating_rate * (2 * n + 1) + noise.dephasing_rate * n**2)
    if joint:
        a = np.kron(np.eye(2), a)
        ad = np.kron(np.eye(2), ad)
        n = np.concatenate([n, n])
        half = np.concatenate([half, half])
    return a, ad, n, half


def _dissipator(rho, ops, noise):
    a, ad, n, half = ops
    out = -half[:, None] * rho - rho * half[None, :]
    if noise.heating_rate:
        out += noise.heating_rate * (ad @ rho @ a + a @ rho @ ad)
    if noise.dephasing_rate:
        out += noise.dephasing_rate * (n[:, None] * rho * n[None, :])
    return out


def _strang_run(rho, H, ops, noise, t, n_steps):
    dt = t / n_steps
    if H is None:
        u_half = None
    else:
        u_half = fock.hermitian_propagator(H, 0.5 * dt)
    for _ in range(n_steps):
        if u_half is not None:
            rho = u_half @ rho @ u_half.conj().T
        k1 = _dissipator(rho, ops, noise)
        k2 = _dissipator(rho + 0.5 * dt * k1, ops, noise)
        k3 = _dissipator(rho + 0.5 * dt * k2, ops, noise)
        k4 = _dissipator(rho + dt * k3, ops, noise)
        rho = rho + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        if u_half is not None:
            rho = u_half @ rho @ u_half.conj().T
    return rho


def trace_distance(m1, m2):
    """Half the trace norm of the difference of two matrices."""
    return 0.5 * float(np.sum(np.linalg.svd(m1 - m2, compute_uv=False)))


def lindblad_evolve(rho, H, noise, t, tol=1e-7, min_steps=16, max_doublings=10):
    """Evolve a DensityOperator under constant H plus the noise channels.

    The step count doubles until two resolutions agree within `tol` in trace
    distance; failure to converge raises ConvergenceError.
    """
    if not isinstance(rho, fock.DensityOperator):
        raise TypeError("rho must be a DensityOperator")
    mat = rho.matrix
    if H is not None and H.shape != mat.shape:
        raise DimensionMismatchError("Hamiltonian does not match density-matrix shape")
    if t < 0:
        raise ValueError("evolution time must be >= 0")
    if t == 0:
        return rho
    if noise.is_zero:
        if H is None:
            return rho
        u = fock.hermitian_propagator(H, t)
        return fock.DensityOperator(rho.space, u @ mat @ u.conj().T, rho.kind)

    ops = _noise_operators(rho.space.dim, rho.kind == "joint", noise)
    n_steps = max(min_steps, int(math.ceil(t / 1e-6)))
    coarse = _strang_run(mat, H, ops, noise, t, n_steps)
    for _ in range(max_doublings):
        n_steps *= 2
        fine = _strang_run(mat, H, ops, noise, t, n_steps)
        if trace_distance(coarse, fine) < tol:
            return fock.DensityOperator(rho.space, fine, rho.kind)
        coarse = fine
    raise ConvergenceError(
        f"Lindblad integration not converged after {n_steps} steps over t={t:.3e} s"
    )


def _lift_initial(initial, space=None):
    """Normalize the accepted initial-state types to a joint DensityOperator."""
    if isinstance(initial, fock.DensityOperator):
        if initial.kind == "joint":
            return initial
        dim = initial.space.dim
        mat = np.zeros((2 * dim, 2 * dim), dtype=complex)
        mat[:dim, :dim] = initial.matrix
        return fock.DensityOperator(initial.space, mat, "joint")
    if isinstance(initial, spinmotion.JointState):
        return fock.DensityOperator(
            initial.space, np.outer(initial.amps, initial.amps.conj()), "joint"
        )
    if isinstance(initial, fock.MotionalState):
        return _lift_initial(fock.DensityOperator.from_motional(initial))
    raise TypeError("initial must be a JointState, MotionalState, or DensityOperator")


def run_sequence(seq, noise, initial, tol=1e-7):
    """Apply every segment of a PulseSequence with Lindblad noise.

    Noise acts throughout each segment unless the segment's `noise_active`
    flag is False.  Returns the joint DensityOperator.
    """
    rho = _lift_initial(initial)
    space = rho.space
    for segment in seq.segments:
        H = segment_hamiltonian(segment, space)
        seg_noise = noise if segment.noise_active else NoiseParams.none()
        rho = lindblad_evolve(rho, H, seg_noise, segment.duration, tol=tol)
    return rho


def run_sequence_pure(seq, initial):
    """Noiseless unitary path on a pure JointState (oracle for run_sequence)."""
    if isinstance(initial, fock.MotionalState):
        initial = spinmotion.JointState.from_motional(initial, "down")
    if not isinstance(initial, spinmotion.JointState):
        raise TypeError("initial must be a JointState or MotionalState")
    amps = initial.amps
    for segment in seq.segments:
        H = segment_hamiltonian(segment, initial.space)
        amps = fock.hermitian_propagator(H, segment.duration) @ amps
    return spinmotion.JointState(initial.space, amps)
