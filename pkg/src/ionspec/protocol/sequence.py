"""Pulse sequences and the measured signal Tr{A G(t_m) V_m ... G(t_1) V_1 [rho0]}."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..dynamics import Propagator
from ..operators import StateBasis, expectation_functional, unvec, vec
from .pulses import PHONON_A, PulseEvent, pulse_superoperator, readout_observable

IMAG_TOLERANCE = 1e-9


class HermiticityError(ArithmeticError):
    """A signal that must be real came out with a sizeable imaginary part."""


@dataclass(frozen=True)
class PulseSequence:
    """Pulses with the free-evolution delay that follows each one.

    ``delays[k]`` is the waiting time after ``events[k]``; the last delay runs
    up to the readout.
    """

    events: tuple
    delays: tuple
    readout_site: int
    readout_kind: str = PHONON_A

    def __post_init__(self):
        object.__setattr__(self, "events", tuple(self.events))
        object.__setattr__(self, "delays", tuple(float(t) for t in self.delays))
        if len(self.events) != len(self.delays):
            raise ValueError(f"{len(self.events)} pulses but {len(self.delays)} delays")
        if any(t < 0 for t in self.delays):
            raise ValueError("delays must be non-negative")

    def with_delays(self, delays) -> "PulseSequence":
        return PulseSequence(self.events, tuple(delays), self.readout_site, self.readout_kind)

    def observable(self, basis: StateBasis) -> np.ndarray:
        return readout_observable(basis, self.readout_site, self.readout_kind)


@dataclass
class SignalRecord:
    """Real signal plus the imaginary residue kept for diagnostics."""

    value: float
    imag: float = field(default=0.0)


def sequence_expectation(rho0: np.ndarray, seq: PulseSequence, prop: Propagator,
                         phases, basis: StateBasis) -> complex:
    """Complex ``Tr{A rho^(m)}`` for the given pulse phases."""
    phases = tuple(phases)
    if len(phases) != len(seq.events):
        raise ValueError(f"{len(phases)} phases for {len(seq.events)} pulses")
    if rho0.shape != (basis.dim, basis.dim) or prop.dim != basis.dim:
        raise ValueError("state, propagator and basis dimensions differ")
    v = vec(np.asarray(rho0, dtype=complex))
    for ev, phi, t in zip(seq.events, phases, seq.delays):
        v = prop.step(t) @ (pulse_superoperator(ev.with_phase(phi), basis) @ v)
    return complex(expectation_functional(seq.observable(basis)) @ v)


def run_sequence(rho0, seq, prop, phases, basis, record: SignalRecord | None = None) -> float:
    """Measured signal (real part); raises if the imaginary part exceeds 1e-9."""
    s = sequence_expectation(rho0, seq, prop, phases, basis)
    if record is not None:
        record.value, record.imag = s.real, s.imag
    if abs(s.imag) > IMAG_TOLERANCE:
        raise HermiticityError(f"imaginary signal component {s.imag:.3e}")
    return s.real


def final_state(rho0, seq: PulseSequence, prop: Propagator, phases, basis) -> np.ndarray:
    v = vec(np.asarray(rho0, dtype=complex))
    for ev, phi, t in zip(seq.events, phases, seq.delays):
        v = prop.step(t) @ (pulse_superoperator(ev.with_phase(phi), basis) @ v)
    return unvec(v, basis.dim)
