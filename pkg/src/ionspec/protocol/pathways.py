"""Closed-form pathway chains used as oracles for phase-cycled emulation.

A pathway replaces every pulse map by one phase harmonic. Harmonics of
order one are divided by the pulse's first-order weight, so pathway values
are independent of the pulse amplitude.
"""

from __future__ import annotations

import numpy as np

from ..dynamics import Propagator, evolve
from ..operators import StateBasis, expectation_functional, ladder_operator, vec
from .pulses import PHONON_A, pulse_harmonic_component, readout_observable
from .sequence import PulseSequence

DQC_VARIANTS = (1, 2, 3)


def _require_ground(rho0, basis):
    if not np.allclose(rho0, basis.ground_state(), atol=1e-12):
        raise ValueError("direct pathway formulas assume the system starts in the ground state")


def pathway_value(rho0: np.ndarray, seq: PulseSequence, prop: Propagator, signature,
                  basis: StateBasis) -> complex:
    """Normalized pathway amplitude of ``signature`` for the sequence ``seq``."""
    if len(signature) != len(seq.events):
        raise ValueError("signature length must match the number of pulses")
    v = vec(np.asarray(rho0, dtype=complex))
    for ev, k, t in zip(seq.events, signature, seq.delays):
        v = prop.step(t) @ (pulse_harmonic_component(ev, k, basis, normalized=True) @ v)
    return complex(expectation_functional(seq.observable(basis)) @ v)


def direct_sqc(i1: int, i2: int, j: int, t1: float, t2: float, prop: Propagator,
               rho0: np.ndarray, basis: StateBasis, readout_kind: str = PHONON_A) -> complex:
    """``Tr{A_j G(t2)[G(t1)[a^dag_i1 rho0] a_i2]}`` with zero-based site indices."""
    _require_ground(rho0, basis)
    adag = ladder_operator(basis, i1, True)
    a = ladder_operator(basis, i2, False)
    x = evolve(prop, t1, adag @ rho0)
    x = evolve(prop, t2, x @ a)
    return complex(np.trace(readout_observable(basis, j, readout_kind) @ x))


def _dqc_diagram(variant):
    """Per-pulse ``(side, raising, sign)`` placements of the three DQC diagrams.

    Pulses 1 and 2 raise the ket; the diagrams differ in how pulses 3 and 4
    close the double coherence. Each de-excitation contributes a factor -1.
    """
    up = [("ket", True, 1), ("ket", True, 1)]
    if variant == 1:
        return up + [("ket", False, -1), ("bra", False, 1)]
    if variant == 2:
        return up + [("bra", False, 1), ("bra", False, 1)]
    if variant == 3:
        return up + [("bra", False, 1), ("ket", False, -1)]
    raise ValueError(f"DQC variant must be 1, 2, 3 or 'sum', got {variant!r}")


def direct_dqc(variant, sites, t1: float, t3: float, prop: Propagator, rho0: np.ndarray,
               basis: StateBasis, readout_site: int, t2: float = 0.0, t4: float = 0.0,
               readout_kind: str = PHONON_A) -> complex:
    """Double-quantum-coherence diagram(s) for pulses on ``sites`` (four zero-based ions).

    Bra-side placements of a lowering operator ``a`` act as ``rho a`` (which
    excites the bra); ket-side placements act as ``a rho``.
    """
    if variant == "sum":
        return sum(direct_dqc(v, sites, t1, t3, prop, rho0, basis, readout_site, t2, t4,
                              readout_kind) for v in DQC_VARIANTS)
    diagram = _dqc_diagram(variant)
    _require_ground(rho0, basis)
    if len(sites) != 4:
        raise ValueError("DQC needs four pulse sites")
    x = np.asarray(rho0, dtype=complex)
    sign = 1
    for (side, raising, s), site, t in zip(diagram, sites, (t1, t2, t3, t4)):
        op = ladder_operator(basis, site, raising)
        x = op @ x if side == "ket" else x @ op
        sign *= s
        x = evolve(prop, t, x)
    return sign * complex(np.trace(readout_observable(basis, readout_site, readout_kind) @ x))
