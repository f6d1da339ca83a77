"""Pathway selection by phase cycling (inverse DFT over pulse phases)."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np


class IncompleteGridError(KeyError):
    pass


@dataclass(frozen=True)
class PhaseCycleScheme:
    """Target phase signature and the phase grid used to isolate it.

    Each cycled pulse visits ``steps_per_pulse`` equally spaced phases
    ``2 pi j / L``. When ``fixed_last_phase`` is set the final pulse stays at
    phase 0; this is valid whenever only zero-net-signature pathways can reach
    the readout (number-diagonal observable, number-conserving dynamics).
    """

    signature: tuple
    steps_per_pulse: int = 3
    fixed_last_phase: bool = True

    def __post_init__(self):
        object.__setattr__(self, "signature", tuple(int(s) for s in self.signature))
        L = self.steps_per_pulse
        if L < 3 or L % 2 == 0:
            raise ValueError(f"steps_per_pulse must be odd and >= 3, got {L}")
        if any(2 * abs(s) + 1 > L for s in self.signature):
            raise ValueError("phase grid too coarse for the requested signature")
        if self.fixed_last_phase and len(self.signature) < 2:
            raise ValueError("fixing the last phase needs at least two pulses")

    @property
    def n_pulses(self) -> int:
        return len(self.signature)

    @property
    def cycled(self) -> int:
        return self.n_pulses - 1 if self.fixed_last_phase else self.n_pulses

    def phase_values(self) -> np.ndarray:
        return 2 * np.pi * np.arange(self.steps_per_pulse) / self.steps_per_pulse

    def grid_indices(self):
        """All phase-index tuples of the cycled pulses, in lexicographic order."""
        return list(itertools.product(range(self.steps_per_pulse), repeat=self.cycled))

    def phases(self, indices) -> tuple:
        vals = self.phase_values()
        ph = tuple(float(vals[j]) for j in indices)
        return ph + (0.0,) if self.fixed_last_phase else ph

    def phase_points(self) -> list:
        return [self.phases(idx) for idx in self.grid_indices()]

    def weight(self, indices) -> complex:
        sig = self.signature[:self.cycled]
        L = self.steps_per_pulse
        return np.exp(-2j * np.pi * sum(s * j for s, j in zip(sig, indices)) / L) / L ** self.cycled


def phase_cycle_extract(samples: dict, scheme: PhaseCycleScheme):
    """Inverse-DFT coefficient of the scheme's signature.

    ``samples`` maps the full phase tuple (as produced by
    :meth:`PhaseCycleScheme.phases`) to a scalar or array signal.
    """
    total = 0
    for idx in scheme.grid_indices():
        key = scheme.phases(idx)
        try:
            val = samples[key]
        except KeyError:
            val = _lookup_close(samples, key)
        total = total + scheme.weight(idx) * np.asarray(val)
    return total if np.ndim(total) else complex(total)


def _lookup_close(samples, key):
    for k, v in samples.items():
        if len(k) == len(key) and np.allclose(np.mod(np.subtract(k, key) + np.pi, 2 * np.pi) - np.pi,
                                              0, atol=1e-12):
            return v
    raise IncompleteGridError(f"no sample at phases {key}")


def cycle(fn, scheme: PhaseCycleScheme):
    """Evaluate ``fn(phases)`` over the scheme's grid and extract the signature."""
    return phase_cycle_extract({ph: fn(ph) for ph in scheme.phase_points()}, scheme)


def all_signatures(samples: dict, scheme: PhaseCycleScheme) -> dict:
    """Every harmonic resolvable on the scheme's grid (aliased into ``|k| <= L//2``)."""
    L = scheme.steps_per_pulse
    half = L // 2
    out = {}
    for sig in itertools.product(range(-half, half + 1), repeat=scheme.cycled):
        full = sig + ((0,) if scheme.fixed_last_phase else ())
        out[sig] = phase_cycle_extract(samples, PhaseCycleScheme(full, L, scheme.fixed_last_phase))
    return out
