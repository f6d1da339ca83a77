"""Acceptance criteria 1-10.

Each test records one ``criterion N: PASS|FAIL ...`` line; the lines are
printed in the pytest terminal summary and when this file runs as a script.
"""

import json
import time

import numpy as np
import pytest

from ionspec.chain import chain, diagonalize_single_sector, sector_energies
from ionspec.cli import preset_text
from ionspec.config import loads
from ionspec.convergence import alpha_check, cap_check
from ionspec.dynamics import NoiseSpec, evolve, make_propagator
from ionspec.experiments import phonon_experiment, run_experiment
from ionspec.operators import PHONON, enumerate_basis, number_operator
from ionspec.protocol import DIRECT, PHASE_CYCLED, GridSpec, scan_2d
from ionspec.spectra import find_peaks, fwhm
from ionspec.spins import (MsModel, bell_states, collective_dissipator, gate_error_scan,
                           ms_sqc_spectrum, nearest_peak, spin_basis)
from ionspec.operators import vec

ALPHA = 0.1
RESULTS = {}


def record(n, ok, detail):
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'} {detail}"
    RESULTS[n] = line
    print(line)
    assert ok, line


def preset(name, **over):
    raw = json.loads(preset_text(name))
    raw.update(over)
    return loads(json.dumps(raw))


def sqc_config(**over):
    raw = {"schema_version": 1, "experiment": "sqc"}
    raw.update(over)
    return loads(json.dumps(raw))


def test_criterion_1_two_ion_spectrum():
    t0 = time.perf_counter()
    w = diagonalize_single_sector(chain(2, 0.1)).frequencies
    dt = time.perf_counter() - t0
    err = np.abs(w - [0.95, 1.00]).max()
    record(1, err < 1e-3 and dt < 1.0, f"frequencies {np.round(w, 6).tolist()}, max error {err:.1e}, {dt:.3f} s")


def test_criterion_2_five_ion_spectrum():
    t0 = time.perf_counter()
    ex = diagonalize_single_sector(chain(5, 0.1))
    dt = time.perf_counter() - t0
    w = ex.frequencies
    centre = abs(ex.modes[2, 3])
    ok = abs(w[0] - 0.69) < 5e-3 and abs(w[4] - 1.0) < 1e-6 and centre < 1e-10 and dt < 1.0
    record(2, ok, f"omega_1={w[0]:.5f} omega_5={w[4]:.10f} mode-4 centre amplitude {centre:.1e}, {dt:.3f} s")


def test_criterion_3_unitary_sqc_structure():
    res = run_experiment(preset("fig2-sqc-unitary"))
    spec = res.spectrum
    w = diagonalize_single_sector(chain(5, 0.1)).frequencies
    sa, sb = spec.freq_a.step, spec.freq_b.step
    unmatched = [p.position for p in res.peaks
                 if not any(abs(p.position[0] - wi) <= sa and abs(p.position[1] - (wj - wk)) <= sb
                            for wi in w for wj in w for wk in w)]
    at_w4 = [p.position for p in find_peaks(spec, 1e-3) if abs(p.position[0] - w[3]) <= sa]
    ok = bool(res.peaks) and not unmatched and not at_w4
    record(3, ok, f"{len(res.peaks)} peaks, {len(unmatched)} unmatched, {len(at_w4)} above 1e-3 at omega_4")


def test_criterion_4_dephasing_peaks():
    res = run_experiment(preset("fig2-sqc-dephasing"))
    spec = res.spectrum
    w = diagonalize_single_sector(chain(5, 0.1)).frequencies
    step = spec.freq_b.step
    mag = spec.magnitude / spec.magnitude.max()
    a_peaks = [p for p in res.peaks if abs(p.position[0] - w[3]) <= step and abs(p.position[1]) <= step]
    ia, _ = spec.index_of(w[3], 0.0)
    col, f = mag[ia], spec.freq_b.values
    target = w[3] - w[1]
    b_bins = [j for j in range(1, len(col) - 1)
              if col[j] >= col[j - 1] and col[j] >= col[j + 1] and abs(f[j] - target) <= step]
    A = a_peaks[0].magnitude / spec.magnitude.max() if a_peaks else 0.0
    B = max((col[j] for j in b_bins), default=0.0)
    ok = bool(a_peaks) and bool(b_bins) and A > B
    record(4, ok, f"|A|={A:.4f} at (omega_4, 0), |B|={B:.4f} on the omega_4 slice near omega_4-omega_2={target:.4f}")


def _dqc(U):
    name = "fig3-dqc-harmonic" if U == 0 else "fig3-dqc-anharmonic"
    cfg = preset(name)
    res = run_experiment(cfg)
    m = chain(2, 0.1, U)
    w, f = sector_energies(m, 1), sector_energies(m, 2)
    return cfg, res, w, f


def _nearest(peaks, target, radius):
    close = [p for p in peaks if abs(p.position[0] - target[0]) <= radius and abs(p.position[1] - target[1]) <= radius]
    return min(close, key=lambda p: abs(p.position[1] - target[1]), default=None)


def test_criterion_5_dqc_anharmonicity():
    from ionspec.protocol import eigen_expansion, spectral_weight
    notes, ok = [], True
    for U in (0.0, -0.025):
        cfg, res, w, f = _dqc(U)
        step = res.spectrum.freq_b.step
        radius = 2 * cfg["spectrum"]["eta"][1]
        p11 = _nearest(res.peaks, (w[0], f[0] - w[0]), radius)
        p22 = _nearest(res.peaks, (w[1], f[1] - w[1]), radius)
        if p11 is None or p22 is None:
            ok = False
            notes.append(f"U={U}: omega'_11/omega'_22 peaks not found")
            continue
        sep = abs(p11.position[1] - p22.position[1]) / step
        w31 = f[2] - w[0]
        if U == 0:
            terms = eigen_expansion(phonon_experiment(cfg))
            weight = spectral_weight(terms, w[0], 2 * w[1] - w[0]) / max(abs(t.amplitude) for t in terms)
            ok &= weight < 1e-3 and sep <= 1
            notes.append(f"U=0: weight at (omega_1, 2omega_2-omega_1) {weight:.1e}, omega'_11/22 {sep:.2f} bins apart")
        else:
            p31 = _nearest(res.peaks, (w[0], w31), radius)
            ok &= p31 is not None and sep > 2
            where = "missing" if p31 is None else f"at ({p31.position[0]:.4f}, {p31.position[1]:.4f})"
            notes.append(f"U=-0.025: (omega_1, omega'_31={w31:.4f}) peak {where}, omega'_11/22 {sep:.1f} bins apart")
    record(5, ok, "; ".join(notes))


def test_criterion_6_phase_cycling_matches_direct():
    sqc = phonon_experiment(sqc_config(grid={"n": 64, "dt": 500 / 512}))
    g = GridSpec(64, 500 / 512, 64, 500 / 512)
    pc, d = scan_2d(sqc, g, PHASE_CYCLED).values, scan_2d(sqc, g, DIRECT).values
    dev_sqc = np.abs(pc - d).max() / np.abs(d).max()
    dqc_cfg = preset("fig3-dqc-harmonic", grid={"n": 32, "dt": 2.5})
    dqc = phonon_experiment(dqc_cfg)
    g = GridSpec(32, 2.5, 32, 2.5)
    pc, d = scan_2d(dqc, g, PHASE_CYCLED).values, scan_2d(dqc, g, DIRECT).values
    dev_dqc = np.abs(pc - d).max() / np.abs(d).max()
    tol = 5 * ALPHA ** 2
    record(6, dev_sqc < tol and dev_dqc < tol,
           f"SQC 64x64 deviation {dev_sqc:.1e}, DQC 32x32 deviation {dev_dqc:.1e} (limit {tol:.2f})")


def test_criterion_7_propagator_analytics():
    from conftest import random_density, random_hermitian
    rng = np.random.default_rng(7)
    omega, gamma = 0.9, 0.02
    b = enumerate_basis(PHONON, 1, 3)
    prop = make_propagator(omega * number_operator(b, 0), NoiseSpec.phonon_local(1, gamma), b)
    coh = np.outer(b.basis_vector((1,)), b.basis_vector((0,)))
    decay = 0.0
    for t in (0.5, 7.0, 60.0, 300.0):
        exact = np.exp((-1j * omega - gamma / 2) * t)
        decay = max(decay, abs(evolve(prop, t, coh)[1, 0] - exact) / abs(exact))
    b2 = enumerate_basis(PHONON, 2, 2)
    worst = {"semigroup": 0.0, "trace": 0.0, "hermiticity": 0.0, "positivity": 0.0}
    for _ in range(10):
        H = random_hermitian(rng, b2.dim)
        p = make_propagator(H, NoiseSpec.phonon_local(2, rng.uniform(0, 0.3)), b2)
        s, t = rng.uniform(0, 5, size=2)
        worst["semigroup"] = max(worst["semigroup"], np.abs(p.step(s + t) - p.step(s) @ p.step(t)).max())
        rho = evolve(p, s + t, random_density(rng, b2.dim))
        worst["trace"] = max(worst["trace"], abs(np.trace(rho) - 1))
        worst["hermiticity"] = max(worst["hermiticity"], np.abs(rho - rho.conj().T).max())
        worst["positivity"] = max(worst["positivity"], -min(np.linalg.eigvalsh((rho + rho.conj().T) / 2).min(), 0))
    ok = decay < 1e-9 and all(v < 1e-10 for v in worst.values())
    record(7, ok, f"coherence decay rel. error {decay:.1e}; " + ", ".join(f"{k} {v:.1e}" for k, v in worst.items()))


def test_criterion_8_ms_spins():
    none = ms_sqc_spectrum()
    step = none.freq_a.step
    found = [nearest_peak(none, t) is not None for t in ((0.0, 1.0), (1.0, 1.0))]
    b = spin_basis()
    bell = bell_states(b)
    dfs = np.linalg.norm(collective_dissipator(b, 0.05) @ vec(np.outer(bell["psi+"], bell["psi-"].conj())))
    widths = {}
    for kind in ("local", "collective"):
        spec = ms_sqc_spectrum(kind, 0.05)
        p = nearest_peak(spec, (1.0, 1.0), radius=0.1)
        widths[kind] = None if p is None else fwhm(spec, p, "b")
    ok = all(found) and dfs < 1e-12 and None not in widths.values() \
        and widths["local"] >= 2 * widths["collective"]
    record(8, ok, f"gamma=0 peaks found {found} (bin {step:.4f}); DFS residual {dfs:.1e}; "
                  f"Omega2 FWHM local {widths['local']:.4f} vs collective {widths['collective']:.4f}")


def test_criterion_9_gate_error_scaling():
    cfg = preset("fig4-gate-error-scan")
    s = cfg["spectrum"]
    (n, _), (dt, _) = cfg["grid"]["n"], cfg["grid"]["dt"]
    points, fit = gate_error_scan(cfg["gammas"], MsModel(), n=n, span=n * dt, eta=tuple(s["eta"]),
                                  pad_factor=s["pad_factor"], beta=cfg["pulses"]["beta"])
    ok = fit.max_relative_residual < 0.10 and fit.slope > 0 and fit.n_points == len(cfg["gammas"])
    record(9, ok, f"{fit.n_points} points, slope {fit.slope:.3f}, max relative residual {fit.max_relative_residual:.3f}")


def test_criterion_10_convergence():
    sqc = sqc_config(grid={"n": 64, "dt": 500 / 512}, spectrum={"pad_factor": 1})
    cap = cap_check(sqc)
    a_sqc = alpha_check(sqc)
    a_dqc = alpha_check(preset("fig3-dqc-harmonic", grid={"n": 32, "dt": 2.5}))
    ok = cap.passed and a_sqc.passed and a_dqc.passed
    record(10, ok, f"SQC cap 2->3 change {cap.value:.1e} (limit {cap.threshold:.2f}); alpha halving "
                   f"SQC {a_sqc.value:.1e}, DQC {a_dqc.value:.1e} (limit {a_dqc.threshold:.2f})")


if __name__ == "__main__":
    import sys
    sys.exit(pytest.main([__file__, "-q"]))
