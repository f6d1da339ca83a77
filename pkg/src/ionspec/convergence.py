"""Convergence checks for phonon experiments: excitation cap, pulse amplitude, time grid."""

from __future__ import annotations

import copy
from dataclasses import asdict, dataclass

import numpy as np

from .experiments import MAX_LIOUVILLE_DIM, ResourceLimitError, grid_spec, phonon_experiment, transform
from .protocol import PHASE_CYCLED, scan_2d
from .spectra import find_peaks

ALPHA_TOLERANCE = 0.01


@dataclass
class Check:
    name: str
    value: float
    threshold: float
    passed: bool
    detail: str = ""


@dataclass
class ConvergenceReport:
    checks: list

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self) -> dict:
        return {"passed": self.passed, "checks": [asdict(c) for c in self.checks]}


def _relative(a, b) -> float:
    scale = np.abs(b).max()
    return float(np.abs(a - b).max() / scale) if scale > 0 else float(np.abs(a).max())


def _experiment(cfg):
    return phonon_experiment(cfg)


def _signal(cfg, mode=None):
    return scan_2d(_experiment(cfg), grid_spec(cfg), mode or cfg["mode"]).values


def cap_check(cfg) -> Check:
    """Raise the excitation cap by one; the signal should move by less than ``5 alpha^2``."""
    more = copy.deepcopy(cfg)
    more["chain"]["excitation_cap"] += 1
    d = _relative(_signal(more), _signal(cfg))
    tol = 5 * cfg["pulses"]["alpha"] ** 2
    return Check("excitation_cap", d, tol, bool(d < tol), f"cap {cfg['chain']['excitation_cap']} -> +1")


def alpha_check(cfg) -> Check:
    """Halve the pulse amplitude under phase-cycled emulation; normalized signals move < 1%."""
    half = copy.deepcopy(cfg)
    half["pulses"]["alpha"] /= 2
    d = _relative(_signal(cfg, PHASE_CYCLED), _signal(half, PHASE_CYCLED))
    return Check("alpha_halving", d, ALPHA_TOLERANCE, bool(d < ALPHA_TOLERANCE),
                 f"alpha {cfg['pulses']['alpha']} -> {half['pulses']['alpha']}")


def grid_check(cfg) -> Check:
    """Double the samples at half the step: every peak must stay within one original bin."""
    fine = copy.deepcopy(cfg)
    fine["grid"]["n"] = [2 * n for n in cfg["grid"]["n"]]
    fine["grid"]["dt"] = [dt / 2 for dt in cfg["grid"]["dt"]]
    thr = cfg["spectrum"]["peak_threshold"]
    s0 = transform(cfg, scan_2d(_experiment(cfg), grid_spec(cfg), cfg["mode"]))
    s1 = transform(fine, scan_2d(_experiment(fine), grid_spec(fine), fine["mode"]))
    p0, p1 = find_peaks(s0, thr), find_peaks(s1, thr)
    ba, bb = s0.freq_a.step, s0.freq_b.step
    worst = 0.0
    for p in p0:
        if not p1:
            worst = np.inf
            break
        drift = min(max(abs(p.position[0] - q.position[0]) / ba, abs(p.position[1] - q.position[1]) / bb)
                    for q in p1)
        worst = max(worst, drift)
    if not p0:
        worst = np.inf if p1 else 0.0
    return Check("grid_doubling", float(worst), 1.0, bool(worst <= 1.0),
                 f"{len(p0)} peaks on the original grid, {len(p1)} on the refined one (drift in bins)")


def convergence_report(cfg) -> ConvergenceReport:
    if cfg["experiment"] not in ("sqc", "dqc"):
        raise ValueError("convergence checks apply to phonon sqc/dqc experiments")
    return ConvergenceReport([cap_check(cfg), alpha_check(cfg), grid_check(cfg)])
