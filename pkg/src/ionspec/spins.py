"""Two-spin Molmer-Sorensen experiments: lineshapes under dephasing and gate error."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from .dynamics import (SPIN_COLLECTIVE_DEPHASING, SPIN_LOCAL_DEPHASING, NoiseChannel,
                       NoiseSpec, evolve, make_propagator)
from .operators import SPIN, StateBasis, build_liouvillian, enumerate_basis, spin_operator
from .protocol import (DIRECT, SPIN_Z, Experiment, GridSpec, PulseEvent, PulseSequence,
                       scan_2d)
from .spectra import Peak, Spectrum2D, find_peaks, fourier_2d, fwhm

NOISE_KINDS = ("none", "local", "collective")

DEFAULT_PULSE_BETA = 0.1
DEFAULT_SPAN = 60.0      # in units of 1/Omega
DEFAULT_SAMPLES = 256
DEFAULT_PAD = 8
PEAK_SEARCH_RADIUS = 0.1   # in units of Omega


@dataclass(frozen=True)
class MsModel:
    omega: float = 1.0
    n_spins: int = 2

    def __post_init__(self):
        if self.omega <= 0:
            raise ValueError(f"MS coupling must be positive, got {self.omega}")
        if self.n_spins != 2:
            raise ValueError("only two-spin MS models are supported")

    @property
    def gate_time(self) -> float:
        return np.pi / (2 * self.omega)


@dataclass
class GateErrorPoint:
    gamma: float            # in units of Omega
    fidelity: float
    fwhm_omega1: float | None = None

    def __post_init__(self):
        if not -1e-12 <= self.fidelity <= 1 + 1e-12:
            raise ValueError(f"fidelity {self.fidelity} outside [0, 1]")

    @property
    def error(self) -> float:
        return 1.0 - self.fidelity

    @property
    def resolved(self) -> bool:
        return self.fwhm_omega1 is not None


@dataclass
class LinearFit:
    slope: float
    intercept: float
    max_relative_residual: float
    n_points: int
    excluded: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"slope": self.slope, "intercept": self.intercept,
                "max_relative_residual": self.max_relative_residual,
                "n_points": self.n_points, "excluded_gammas": list(self.excluded)}


def spin_basis() -> StateBasis:
    return enumerate_basis(SPIN, 2)


def build_ms_hamiltonian(model: MsModel, basis: StateBasis) -> np.ndarray:
    """``(Omega/2) sigma_x (x) sigma_x`` on a two-spin basis."""
    if basis.kind != SPIN or basis.n_sites != 2 or basis.dim != 4:
        raise ValueError("MS Hamiltonian needs the full two-spin basis")
    return 0.5 * model.omega * spin_operator(basis, 0, "x") @ spin_operator(basis, 1, "x")


def bell_states(basis: StateBasis) -> dict:
    """Bell vectors ``phi+, phi-, psi+, psi-`` in the given spin basis."""
    def ket(bits):
        return basis.basis_vector(bits)
    s = 1 / np.sqrt(2)
    return {"phi+": s * (ket("00") + ket("11")), "phi-": s * (ket("00") - ket("11")),
            "psi+": s * (ket("01") + ket("10")), "psi-": s * (ket("01") - ket("10"))}


def ms_noise(kind: str, gamma: float) -> NoiseSpec:
    if kind not in NOISE_KINDS:
        raise ValueError(f"noise kind must be one of {NOISE_KINDS}, got {kind!r}")
    if gamma < 0:
        raise ValueError("dephasing rate must be non-negative")
    if kind == "none" or gamma == 0:
        return NoiseSpec.none()
    channel = SPIN_LOCAL_DEPHASING if kind == "local" else SPIN_COLLECTIVE_DEPHASING
    return NoiseSpec((NoiseChannel(channel, (0, 1), gamma),))


def collective_dissipator(basis: StateBasis, gamma: float = 1.0) -> np.ndarray:
    """Dissipative part of the Liouvillian for ``L = sqrt(gamma) sz (x) sz``."""
    H0 = np.zeros((basis.dim, basis.dim), dtype=complex)
    return build_liouvillian(H0, ms_noise("collective", gamma).lindblads(basis))


def ms_experiment(model: MsModel, noise_kind: str, gamma: float,
                  beta: float = DEFAULT_PULSE_BETA) -> Experiment:
    """SQC experiment: two spin pulses on spin 1, sigma_z readout on spin 1, start in |00>."""
    basis = spin_basis()
    H = build_ms_hamiltonian(model, basis)
    prop = make_propagator(H, ms_noise(noise_kind, gamma), basis)
    ev = PulseEvent.spin(0, beta)
    seq = PulseSequence((ev, ev), (0.0, 0.0), readout_site=0, readout_kind=SPIN_Z)
    return Experiment(basis, prop, basis.ground_state(), seq, (1, -1))


def ms_sqc_spectrum(noise_kind: str = "none", gamma: float = 0.0, model: MsModel | None = None,
                    n: int = DEFAULT_SAMPLES, span: float | None = None, eta=None,
                    pad_factor: int = DEFAULT_PAD, beta: float = DEFAULT_PULSE_BETA,
                    mode: str = DIRECT) -> Spectrum2D:
    """Two-dimensional SQC spectrum of the MS pair.

    ``span`` is the scan length per axis (default ``60/Omega``), ``eta``
    defaults to ``3/span`` on both axes. ``gamma`` is the absolute dephasing
    rate of the chosen channel.
    """
    model = model or MsModel()
    span = DEFAULT_SPAN / model.omega if span is None else span
    exp = ms_experiment(model, noise_kind, gamma, beta)
    dt = span / n
    sig = scan_2d(exp, GridSpec(n, dt, n, dt), mode)
    if eta is None:
        eta = 3.0 / span
    spec = fourier_2d(sig, eta=eta, pad_factor=pad_factor)
    spec.meta.update({"noise": noise_kind, "gamma": gamma, "omega": model.omega, "beta": beta})
    return spec


def nearest_peak(spec: Spectrum2D, target, rel_threshold: float = 0.05,
                 radius: float | None = None) -> Peak | None:
    """Detected peak closest to ``target``.

    ``radius`` bounds the distance per axis in frequency units; by default
    the peak has to sit within one bin of the target on both axes.
    """
    ra = spec.freq_a.step if radius is None else radius
    rb = spec.freq_b.step if radius is None else radius
    best = None
    for p in find_peaks(spec, rel_threshold):
        da = abs(p.position[0] - target[0]) / ra
        db = abs(p.position[1] - target[1]) / rb
        if da <= 1 and db <= 1 and (best is None or da + db < best[0]):
            best = (da + db, p)
    return None if best is None else best[1]


def ms_gate_fidelity(gamma: float, noise_kind: str = "local", model: MsModel | None = None) -> float:
    """``sqrt(<00| U^dag rho_gamma U |00>)`` after one noisy gate of length ``pi/(2 Omega)``."""
    model = model or MsModel()
    basis = spin_basis()
    H = build_ms_hamiltonian(model, basis)
    t = model.gate_time
    rho0 = basis.ground_state()
    rho = evolve(make_propagator(H, ms_noise(noise_kind, gamma), basis), t, rho0)
    psi = expm(-1j * H * t) @ basis.basis_vector("00")
    overlap = np.real(np.vdot(psi, rho @ psi))
    return float(np.sqrt(np.clip(overlap, 0.0, 1.0)))


def linear_fit(x, y) -> LinearFit:
    """Least-squares line with the largest residual relative to ``|y|``."""
    x, y = np.asarray(x, float), np.asarray(y, float)
    if len(x) < 2:
        raise ValueError("a linear fit needs at least two points")
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    rel = np.abs(resid) / np.where(y != 0, np.abs(y), 1.0)
    return LinearFit(float(slope), float(intercept), float(rel.max()), len(x))


def gate_error_point(gamma: float, model: MsModel | None = None, **spectrum_kw) -> GateErrorPoint:
    model = model or MsModel()
    spec = ms_sqc_spectrum("local", gamma * model.omega, model, **spectrum_kw)
    # dephasing pulls the line off its bin through overlap with neighbouring tails
    peak = nearest_peak(spec, (model.omega, model.omega), radius=PEAK_SEARCH_RADIUS * model.omega)
    width = None if peak is None else fwhm(spec, peak, "a")
    return GateErrorPoint(gamma, ms_gate_fidelity(gamma * model.omega, "local", model),
                          None if width is None else width / model.omega)


def gate_error_scan(gammas, model: MsModel | None = None, **spectrum_kw):
    """Fidelity and ``(Omega, Omega)`` Omega1-width for each ``gamma/Omega``.

    Returns ``(points, fit)``; points with unresolved widths are kept in the
    list but left out of the fit.
    """
    points = [gate_error_point(float(g), model, **spectrum_kw) for g in gammas]
    good = [p for p in points if p.resolved]
    bad = [p.gamma for p in points if not p.resolved]
    if bad:
        warnings.warn(f"unresolved FWHM at gamma/Omega = {bad}; excluded from fit", RuntimeWarning)
    if len(good) < 2:
        raise ValueError(f"only {len(good)} resolved widths; refine the spectral grid")
    fit = linear_fit([p.error for p in good], [p.fwhm_omega1 for p in good])
    fit.excluded = bad
    return points, fit


def write_gate_scan(points, fit: LinearFit, prefix) -> list:
    """``<prefix>_points.csv`` and ``<prefix>_fit.json``."""
    import csv
    import json
    rows = f"{prefix}_points.csv"
    with open(rows, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["gamma_over_omega", "fidelity", "error", "fwhm_omega1"])
        for p in points:
            w.writerow([f"{p.gamma:.16e}", f"{p.fidelity:.16e}", f"{p.error:.16e}",
                        "" if p.fwhm_omega1 is None else f"{p.fwhm_omega1:.16e}"])
    meta = f"{prefix}_fit.json"
    with open(meta, "w") as fh:
        json.dump(fit.to_dict(), fh, indent=2, sort_keys=True)
    return [rows, meta]
