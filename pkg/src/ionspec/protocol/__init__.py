"""Pulse protocols: impulsive maps, sequences, phase cycling and pathway oracles."""

from .pathways import DQC_VARIANTS, direct_dqc, direct_sqc, pathway_value
from .phasecycle import PhaseCycleScheme, all_signatures, cycle, phase_cycle_extract
from .pulses import (EXACT, LINEARIZED, PHONON_A, SPIN_Z, PulseEvent, apply_harmonic,
                     apply_pulse, pulse_harmonic_component, pulse_operator,
                     pulse_superoperator, readout_observable)
from .scan import (DIRECT, PHASE_CYCLED, Experiment, GridSpec, SpectralTerm, eigen_expansion,
                   scan_2d, scan_point, spectral_weight)
from .sequence import (HermiticityError, PulseSequence, SignalRecord, run_sequence,
                       sequence_expectation)
