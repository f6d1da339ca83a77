import json
import warnings

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from ionspec.dynamics import evolve, make_propagator
from ionspec.operators import PHONON, SPIN, enumerate_basis, unvec, vec
from ionspec.spectra import find_peaks, fwhm
from ionspec.spins import (GateErrorPoint, LinearFit, MsModel, bell_states, build_ms_hamiltonian,
                           collective_dissipator, gate_error_point, gate_error_scan, linear_fit,
                           ms_experiment, ms_gate_fidelity, ms_noise, ms_sqc_spectrum,
                           nearest_peak, spin_basis, write_gate_scan)


@pytest.fixture(scope="module")
def spectra_005():
    out = {kind: ms_sqc_spectrum(kind, 0.05) for kind in ("local", "collective")}
    out["none"] = ms_sqc_spectrum()
    return out


def test_model_validation():
    with pytest.raises(ValueError):
        MsModel(0.0)
    with pytest.raises(ValueError):
        MsModel(1.0, n_spins=3)
    assert MsModel(2.0).gate_time == pytest.approx(np.pi / 4)


@pytest.mark.parametrize("omega", [1.0, 0.3, 2.5])
def test_ms_hamiltonian_spectrum(omega):
    b = spin_basis()
    H = build_ms_hamiltonian(MsModel(omega), b)
    np.testing.assert_allclose(np.linalg.eigvalsh(H), [-omega / 2] * 2 + [omega / 2] * 2, atol=1e-14)
    assert abs(np.trace(H)) < 1e-15
    np.testing.assert_allclose(H, H.conj().T)


def test_bell_states_are_eigenvectors():
    b = spin_basis()
    H = build_ms_hamiltonian(MsModel(1.0), b)
    bell = bell_states(b)
    expected = {"phi+": 0.5, "phi-": -0.5, "psi+": 0.5, "psi-": -0.5}
    for name, v in bell.items():
        np.testing.assert_allclose(H @ v, expected[name] * v, atol=1e-15)
    M = np.column_stack(list(bell.values()))
    np.testing.assert_allclose(M.conj().T @ M, np.eye(4), atol=1e-15)


def test_hamiltonian_needs_two_spin_basis():
    with pytest.raises(ValueError):
        build_ms_hamiltonian(MsModel(), enumerate_basis(SPIN, 3))
    with pytest.raises(ValueError):
        build_ms_hamiltonian(MsModel(), enumerate_basis(PHONON, 2, 1))


def test_noise_spec_validation():
    assert ms_noise("local", 0.0).channels == ()
    assert ms_noise("none", 0.3).channels == ()
    with pytest.raises(ValueError):
        ms_noise("global", 0.1)
    with pytest.raises(ValueError):
        ms_noise("local", -0.1)


def test_collective_dissipator_leaves_dfs_coherence():
    b = spin_basis()
    bell = bell_states(b)
    D = collective_dissipator(b, 0.37)
    coh = np.outer(bell["psi+"], bell["psi-"].conj())
    assert np.linalg.norm(D @ vec(coh)) < 1e-12
    # the same coherence decays under local dephasing
    L_local = make_propagator(np.zeros((4, 4)), ms_noise("local", 0.37), b)
    assert np.linalg.norm(evolve(L_local, 1.0, coh) - coh) > 0.1


def test_bell_blocks_are_invariant():
    b = spin_basis()
    H = build_ms_hamiltonian(MsModel(1.0), b)
    prop = make_propagator(H, None, b)
    bell = list(bell_states(b).values())
    for t in (0.4, 3.0):
        G = prop.step(t)
        for i, u in enumerate(bell):
            for j, v in enumerate(bell):
                out = unvec(G @ vec(np.outer(u, v.conj())))
                # H is diagonal in the Bell basis, so each |i><j| only picks up a phase
                proj = np.array([[x.conj() @ out @ y for y in bell] for x in bell])
                mask = np.ones((4, 4), bool)
                mask[i, j] = False
                assert np.abs(proj[mask]).max() < 1e-12
                assert abs(proj[i, j]) == pytest.approx(1.0)


def test_experiment_layout():
    exp = ms_experiment(MsModel(), "none", 0.0)
    assert exp.signature == (1, -1)
    assert exp.sequence.readout_site == 0 and exp.sequence.readout_kind == "spin_z"
    assert all(ev.site == 0 and ev.is_spin for ev in exp.sequence.events)


def test_unitary_peaks(spectra_005):
    spec = spectra_005["none"]
    for target in [(0.0, 1.0), (1.0, 1.0)]:
        p = nearest_peak(spec, target)
        assert p is not None, target
        assert abs(p.position[0] - target[0]) <= spec.freq_a.step
        assert abs(p.position[1] - target[1]) <= spec.freq_b.step


def test_peaks_come_in_reflected_pairs(spectra_005):
    spec = spectra_005["none"]
    peaks = find_peaks(spec, 0.05)
    for p in peaks[:8]:
        mirror = nearest_peak(spec, (-p.position[0], -p.position[1]))
        assert mirror is not None
        assert mirror.magnitude == pytest.approx(p.magnitude, rel=1e-6)


@pytest.mark.parametrize("omega", [1.0, 2.0])
def test_peaks_scale_with_omega(omega):
    spec = ms_sqc_spectrum(model=MsModel(omega))
    assert nearest_peak(spec, (omega, omega)) is not None


def test_collective_keeps_omega2_width(spectra_005):
    def width(spec):
        p = nearest_peak(spec, (1.0, 1.0), radius=0.1)
        return fwhm(spec, p, "b")
    w0 = width(spectra_005["none"])
    wc = width(spectra_005["collective"])
    wl = width(spectra_005["local"])
    assert wc == pytest.approx(w0, rel=0.10)
    assert wl >= 2 * wc


def test_local_dephasing_broadens_both_axes(spectra_005):
    p0 = nearest_peak(spectra_005["none"], (1.0, 1.0), radius=0.1)
    pl = nearest_peak(spectra_005["local"], (1.0, 1.0), radius=0.1)
    for axis in "ab":
        assert fwhm(spectra_005["local"], pl, axis) > 1.5 * fwhm(spectra_005["none"], p0, axis)


# gate fidelity

def test_ideal_gate_is_perfect():
    assert ms_gate_fidelity(0.0) == pytest.approx(1.0, abs=1e-12)
    # sz(x)sz acts as +1 on span{|00>, |11>} where the gate lives
    assert ms_gate_fidelity(0.05, "collective") == pytest.approx(1.0, abs=1e-12)


def test_error_grows_with_gamma():
    errs = [1 - ms_gate_fidelity(g) for g in np.arange(0.01, 0.101, 0.01)]
    assert np.all(np.diff(errs) > 0)


def _bloch_end(gamma, omega):
    # span{|00>,|11>}: H = (omega/2) X, coherence damped at 4 gamma by local sz on both spins
    G = 4 * gamma

    def rhs(t, r):
        x, y, z = r
        return [-G * x, -omega * z - G * y, omega * y]

    sol = solve_ivp(rhs, (0, np.pi / (2 * omega)), [0.0, 0.0, 1.0], rtol=1e-12, atol=1e-14)
    return sol.y[:, -1]


def bloch_fidelity(gamma, omega=1.0):
    return np.sqrt((1 + _bloch_end(gamma, omega) @ _bloch_end(0.0, omega)) / 2)


@pytest.mark.parametrize("gamma", [0.01, 0.05, 0.1])
@pytest.mark.parametrize("omega", [1.0, 1.7])
def test_fidelity_matches_two_level_oracle(gamma, omega):
    F = ms_gate_fidelity(gamma, model=MsModel(omega))
    assert F == pytest.approx(bloch_fidelity(gamma, omega), abs=1e-9)


def test_fidelity_first_order_estimate():
    # 1 - F ~ gamma * pi / (4 Omega) at leading order
    err = 1 - ms_gate_fidelity(0.05)
    assert err == pytest.approx(0.05 * np.pi / 4, rel=0.20)


def test_gate_error_point_bounds():
    with pytest.raises(ValueError):
        GateErrorPoint(0.1, 1.2)
    p = GateErrorPoint(0.1, 0.9)
    assert p.error == pytest.approx(0.1) and not p.resolved


def test_linear_fit_two_points_exact():
    fit = linear_fit([0.1, 0.3], [1.0, 2.0])
    assert fit.slope == pytest.approx(5.0) and fit.intercept == pytest.approx(0.5)
    assert fit.max_relative_residual < 1e-12
    with pytest.raises(ValueError):
        linear_fit([1.0], [1.0])


def test_doubling_gamma_doubles_error_and_excess_width():
    base = gate_error_point(0.0)
    for g in (0.02, 0.03):
        a, b = gate_error_point(g), gate_error_point(2 * g)
        assert b.error / a.error == pytest.approx(2.0, rel=0.2)
        excess = (b.fwhm_omega1 - base.fwhm_omega1) / (a.fwhm_omega1 - base.fwhm_omega1)
        assert excess == pytest.approx(2.0, rel=0.2)


def test_gate_scan_flags_unresolved():
    # a coarse unpadded grid cannot resolve the line
    with pytest.warns(RuntimeWarning, match="unresolved"):
        with pytest.raises(ValueError, match="resolved widths"):
            gate_error_scan([0.01, 0.02, 0.03], n=32, span=12.0, pad_factor=1)


def test_gate_scan_outputs(tmp_path):
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        points, fit = gate_error_scan([0.02, 0.04])
    assert fit.n_points == 2 and fit.slope > 0
    files = write_gate_scan(points, fit, tmp_path / "scan")
    rows = (tmp_path / "scan_points.csv").read_text().splitlines()
    assert rows[0] == "gamma_over_omega,fidelity,error,fwhm_omega1" and len(rows) == 3
    assert json.loads((tmp_path / "scan_fit.json").read_text())["slope"] == fit.slope
    assert len(files) == 2
