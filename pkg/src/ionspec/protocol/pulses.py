"""Impulsive pulse maps, their phase harmonics, and readout observables."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from ..operators import (PHONON, SPIN, BasisTypeError, StateBasis, ladder_operator,
                         sandwich, spin_operator)

LINEARIZED = "linearized"
EXACT = "exact"

PHONON_A = "phonon_A"
SPIN_Z = "spin_z"


@dataclass(frozen=True)
class PulseEvent:
    """One impulsive interaction.

    Phonon pulses displace mode ``site`` by ``amplitude * exp(i phase)``.
    Spin pulses apply ``U = a I + b (e^{i phase} s_+ - e^{-i phase} s_-)`` with
    ``(a, b) = amplitude``; ``a**2 + b**2`` must be 1.
    """

    site: int
    amplitude: float | tuple
    phase: float = 0.0
    model: str = LINEARIZED

    def __post_init__(self):
        if self.model not in (LINEARIZED, EXACT):
            raise ValueError(f"unknown pulse model {self.model!r}")
        if isinstance(self.amplitude, tuple):
            a, b = self.amplitude
            if abs(a * a + b * b - 1.0) > 1e-12:
                raise ValueError(f"spin pulse amplitudes must satisfy a^2+b^2=1, got {a}, {b}")
        elif self.model == LINEARIZED and abs(self.amplitude) > 0.3:
            warnings.warn(f"linearized pulse with amplitude {self.amplitude} > 0.3")

    @property
    def is_spin(self) -> bool:
        return isinstance(self.amplitude, tuple)

    @classmethod
    def spin(cls, site: int, beta: float, phase: float = 0.0) -> "PulseEvent":
        return cls(site, (float(np.sqrt(1.0 - beta * beta)), float(beta)), phase)

    def with_phase(self, phase: float) -> "PulseEvent":
        return PulseEvent(self.site, self.amplitude, phase, self.model)

    def with_amplitude(self, amplitude) -> "PulseEvent":
        return PulseEvent(self.site, amplitude, self.phase, self.model)

    @property
    def first_order_weight(self) -> float:
        """Prefactor of the ``k = +-1`` harmonics: ``alpha`` (phonon) or ``a*b`` (spin)."""
        if self.is_spin:
            a, b = self.amplitude
            return a * b
        return float(self.amplitude)

    def phase_steps(self) -> int:
        """Default number of cycled phases for this pulse model."""
        return 3 if self.model == LINEARIZED else 5


def _raising(basis: StateBasis, event: PulseEvent) -> np.ndarray:
    if event.is_spin:
        if basis.kind != SPIN:
            raise BasisTypeError("spin pulse on a phonon basis")
        return spin_operator(basis, event.site, "+")
    if basis.kind != PHONON:
        raise BasisTypeError("phonon pulse on a spin basis")
    return ladder_operator(basis, event.site, True)


def pulse_operator(event: PulseEvent, basis: StateBasis) -> np.ndarray:
    """Ket-side operator of the pulse (``D`` or ``U``)."""
    R = _raising(basis, event)
    eye = np.eye(basis.dim, dtype=complex)
    if event.is_spin:
        a, b = event.amplitude
        c = b * np.exp(1j * event.phase)
        return a * eye + c * R - np.conj(c) * R.conj().T
    c = event.amplitude * np.exp(1j * event.phase)
    gen = c * R - np.conj(c) * R.conj().T
    if event.model == LINEARIZED:
        return eye + gen
    return scipy.linalg.expm(gen)


def pulse_superoperator(event: PulseEvent, basis: StateBasis) -> np.ndarray:
    D = pulse_operator(event, basis)
    return sandwich(D, D.conj().T)


def apply_pulse(rho: np.ndarray, event: PulseEvent, basis: StateBasis) -> np.ndarray:
    """``D rho D^dag``; linearized pulses are not renormalized."""
    D = pulse_operator(event, basis)
    return D @ rho @ D.conj().T


def _harmonic_terms(event: PulseEvent, basis: StateBasis, k: int):
    """List of ``(coef, left, right)`` with component ``sum coef * left rho right``."""
    R = _raising(basis, event)
    Rd = R.conj().T
    if event.is_spin:
        w0, b = event.amplitude
    else:
        w0, b = 1.0, float(event.amplitude)
    eye = np.eye(basis.dim, dtype=complex)
    if k == 0:
        return [(w0 * w0, eye, eye), (b * b, R, Rd), (b * b, Rd, R)]
    if k == 1:
        return [(w0 * b, R, eye), (-w0 * b, eye, R)]
    if k == -1:
        return [(w0 * b, eye, Rd), (-w0 * b, Rd, eye)]
    if k == 2:
        return [(-b * b, R, R)]
    if k == -2:
        return [(-b * b, Rd, Rd)]
    raise ValueError(f"harmonic {k} outside |k| <= 2 of a linearized pulse")


def pulse_harmonic_component(event: PulseEvent, k: int, basis: StateBasis,
                             normalized: bool = False) -> np.ndarray:
    """Superoperator multiplying ``e^{i k phase}`` in the pulse map.

    For linearized pulses the components ``k = -2..2`` reassemble the map
    exactly. Exact displacements are resolved numerically on ``4*cap+1``
    phases (on a capped basis the map only carries ``|k| <= 2*cap``). With
    ``normalized=True`` the ``k = +-1`` components are divided by
    :attr:`PulseEvent.first_order_weight`.
    """
    if event.model == EXACT:
        if event.is_spin:
            raise ValueError("spin pulses are exact already; use the linearized form")
        n_ph = 4 * basis.excitation_cap + 1
        if abs(k) > 2 * basis.excitation_cap:
            raise ValueError(f"harmonic {k} beyond cap {basis.excitation_cap}")
        acc = 0
        for j in range(n_ph):
            ph = 2 * np.pi * j / n_ph
            acc = acc + np.exp(-1j * k * ph) * pulse_superoperator(event.with_phase(ph), basis)
        S = acc / n_ph
    else:
        S = sum(c * sandwich(A, B) for c, A, B in _harmonic_terms(event, basis, k))
    if normalized and abs(k) == 1:
        S = S / event.first_order_weight
    return S


def apply_harmonic(rho: np.ndarray, event: PulseEvent, k: int, basis: StateBasis) -> np.ndarray:
    """Action of :func:`pulse_harmonic_component` on a matrix (linearized only)."""
    out = np.zeros_like(rho, dtype=complex)
    for c, A, B in _harmonic_terms(event, basis, k):
        out += c * (A @ rho @ B)
    return out


def readout_observable(basis: StateBasis, site: int, kind: str = PHONON_A) -> np.ndarray:
    """Phonon fluorescence observable ``sin^2(sqrt(n_site) pi / 2)`` or spin ``sigma_z``."""
    if kind == PHONON_A:
        if basis.kind != PHONON:
            raise BasisTypeError("phonon_A readout needs a phonon basis")
        if not 0 <= site < basis.n_sites:
            raise IndexError(f"readout site {site} out of range")
        n = basis.occupations()[:, site]
        return np.diag(np.sin(np.sqrt(n) * np.pi / 2) ** 2).astype(complex)
    if kind == SPIN_Z:
        if basis.kind != SPIN:
            raise BasisTypeError("spin_z readout needs a spin basis")
        return spin_operator(basis, site, "z")
    raise ValueError(f"unknown readout kind {kind!r}")
