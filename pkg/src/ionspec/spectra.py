"""Two-dimensional Fourier analysis of delay-scan signals.

The transform approximates the one-sided integral

    S(W_a, W_b) = int_0^inf dt_a int_0^inf dt_b exp(+i (W_a t_a + W_b t_b)) S(t_a, t_b)

by a trapezoid-weighted sum (half weight on the ``t = 0`` sample) after an
exponential window ``exp(-eta t)`` and zero padding. A time-domain factor
``exp(-i w t)`` therefore peaks at ``W = +w``. The spectral bin width along an
axis with ``n`` samples of step ``dt`` and padding ``p`` is
``2 pi / (p n dt)``.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class Axis:
    n: int
    step: float
    label: str = ""
    start: float = 0.0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("axis needs at least one point")
        if self.step <= 0:
            raise ValueError(f"axis step must be positive, got {self.step}")

    @property
    def values(self) -> np.ndarray:
        return self.start + self.step * np.arange(self.n)

    @property
    def span(self) -> float:
        """``n * step``, the window reference length."""
        return self.n * self.step


@dataclass
class SignalGrid2D:
    axis_a: Axis
    axis_b: Axis
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.shape != (self.axis_a.n, self.axis_b.n):
            raise ValueError(f"values {self.values.shape} do not match axes "
                             f"({self.axis_a.n}, {self.axis_b.n})")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("signal contains non-finite values")


@dataclass
class Spectrum2D:
    freq_a: Axis
    freq_b: Axis
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    @property
    def magnitude(self) -> np.ndarray:
        return np.abs(self.values)

    def index_of(self, omega_a: float, omega_b: float) -> tuple:
        ia = int(round((omega_a - self.freq_a.start) / self.freq_a.step))
        ib = int(round((omega_b - self.freq_b.start) / self.freq_b.step))
        return ia, ib

    def value_at(self, omega_a: float, omega_b: float) -> complex:
        ia, ib = self.index_of(omega_a, omega_b)
        return self.values[ia, ib]


@dataclass(frozen=True)
class Peak:
    position: tuple
    magnitude: float
    index: tuple
    fwhm_a: float | None = None
    fwhm_b: float | None = None


def default_eta(axis: Axis) -> float:
    """Window rate ``3 / T_max`` used for undamped signals."""
    return 3.0 / axis.span


def _frequency_axis(n_pad, dt, label):
    step = 2 * np.pi / (n_pad * dt)
    start = -(n_pad // 2) * step
    return Axis(n_pad, step, label, start)


def _window(axis: Axis, eta: float) -> np.ndarray:
    w = np.exp(-eta * axis.values)
    w[0] *= 0.5 if axis.start == 0 else 1.0
    return w


def _transform_axis(x, axis, eta, pad_factor, dim):
    n_pad = pad_factor * axis.n
    shape = [1, 1]
    shape[dim] = axis.n
    x = x * _window(axis, eta).reshape(shape)
    X = np.fft.ifft(x, n=n_pad, axis=dim) * n_pad * axis.step
    phase = np.exp(1j * _frequency_axis(n_pad, axis.step, "").values * axis.start)
    X = np.fft.fftshift(X, axes=dim)
    shape[dim] = n_pad
    return X * phase.reshape(shape)


def fourier_2d(signal: SignalGrid2D, eta=None, pad_factor: int = 2,
               axes: str = "both") -> Spectrum2D:
    """One-sided 2D (or first-axis-only) Fourier transform.

    Parameters
    ----------
    eta : float, pair of floats, or None
        Window rate per axis; ``None`` selects :func:`default_eta`.
    pad_factor : int
        Zero padding multiplier (>= 1).
    axes : {"both", "first_only"}
    """
    if signal.values.size == 0:
        raise ValueError("empty signal grid")
    if pad_factor < 1 or int(pad_factor) != pad_factor:
        raise ValueError("pad_factor must be a positive integer")
    if eta is None:
        eta = (default_eta(signal.axis_a), default_eta(signal.axis_b))
    elif np.isscalar(eta):
        eta = (float(eta), float(eta))
    if min(eta) < 0:
        raise ValueError("window rate must be non-negative")
    X = _transform_axis(signal.values, signal.axis_a, eta[0], pad_factor, 0)
    fa = _frequency_axis(pad_factor * signal.axis_a.n, signal.axis_a.step, "Omega_a")
    if axes == "both":
        X = _transform_axis(X, signal.axis_b, eta[1], pad_factor, 1)
        fb = _frequency_axis(pad_factor * signal.axis_b.n, signal.axis_b.step, "Omega_b")
    elif axes == "first_only":
        fb = signal.axis_b
    else:
        raise ValueError(f"axes must be 'both' or 'first_only', got {axes!r}")
    meta = dict(signal.meta)
    meta.update(eta=list(map(float, eta)), pad_factor=int(pad_factor), axes=axes)
    return Spectrum2D(fa, fb, X, meta)


def windowed_energy(signal: SignalGrid2D, eta, axes: str = "both") -> float:
    """``sum |w x|^2 dt_a dt_b`` of the windowed, trapezoid-weighted samples."""
    if np.isscalar(eta):
        eta = (eta, eta)
    x = signal.values * _window(signal.axis_a, eta[0])[:, None]
    norm = signal.axis_a.step
    if axes == "both":
        x = x * _window(signal.axis_b, eta[1])[None, :]
        norm *= signal.axis_b.step
    return float(np.sum(np.abs(x) ** 2) * norm)


def spectral_energy(spec: Spectrum2D, axes: str = "both") -> float:
    """``sum |S|^2 dW_a dW_b / (2 pi)^d``; equals :func:`windowed_energy` exactly."""
    norm = spec.freq_a.step / (2 * np.pi)
    if axes == "both":
        norm *= spec.freq_b.step / (2 * np.pi)
    return float(np.sum(np.abs(spec.values) ** 2) * norm)


def arcsinh_rescale(spec: Spectrum2D, scale: float) -> Spectrum2D:
    """Display map ``arcsinh(|S| / scale)``; not meant for peak analysis."""
    if scale <= 0:
        raise ValueError("scale must be positive")
    meta = dict(spec.meta, display="arcsinh", arcsinh_scale=float(scale))
    return Spectrum2D(spec.freq_a, spec.freq_b, np.arcsinh(np.abs(spec.values) / scale), meta)


def _parabolic_offset(y_m, y_0, y_p):
    denom = y_m - 2 * y_0 + y_p
    if denom == 0:
        return 0.0
    return float(np.clip(0.5 * (y_m - y_p) / denom, -0.5, 0.5))


def find_peaks(spec: Spectrum2D, rel_threshold: float = 0.05, include_edges: bool = False) -> list:
    """Local maxima of ``|S|`` over 8-neighbourhoods above ``rel_threshold * max``.

    The outermost bins of an axis with three or more points sit on the
    Nyquist wrap and are skipped unless ``include_edges`` is set.
    """
    if not 0 < rel_threshold < 1:
        raise ValueError("rel_threshold must lie in (0, 1)")
    mag = np.abs(np.asarray(spec.values))
    if mag.ndim != 2 or mag.size == 0:
        return []
    top = mag.max()
    if top == 0:
        return []
    padded = np.pad(mag, 1, constant_values=-np.inf)
    na, nb = mag.shape
    is_max = np.ones_like(mag, dtype=bool)
    for da in (-1, 0, 1):
        for db in (-1, 0, 1):
            if da == 0 and db == 0:
                continue
            neigh = padded[1 + da:1 + da + na, 1 + db:1 + db + nb]
            # ties: the first grid index in (a, b) order wins
            if (da, db) < (0, 0):
                is_max &= mag > neigh
            else:
                is_max &= mag >= neigh
    is_max &= mag > rel_threshold * top
    if not include_edges:
        if na >= 3:
            is_max[[0, -1], :] = False
        if nb >= 3:
            is_max[:, [0, -1]] = False
    peaks = []
    for ia, ib in zip(*np.nonzero(is_max)):
        off_a = off_b = 0.0
        if 0 < ia < na - 1:
            off_a = _parabolic_offset(mag[ia - 1, ib], mag[ia, ib], mag[ia + 1, ib])
        if 0 < ib < nb - 1:
            off_b = _parabolic_offset(mag[ia, ib - 1], mag[ia, ib], mag[ia, ib + 1])
        pos = (spec.freq_a.start + (ia + off_a) * spec.freq_a.step,
               spec.freq_b.start + (ib + off_b) * spec.freq_b.step)
        peaks.append(Peak(pos, float(mag[ia, ib]), (int(ia), int(ib))))
    peaks.sort(key=lambda p: (-p.magnitude, p.index))
    return peaks


def fwhm(spec: Spectrum2D, peak: Peak, axis: str = "a", quantity: str = "power"):
    """Full width at half maximum through ``peak`` along ``axis`` ("a" or "b").

    ``quantity="power"`` measures the width of ``|S|^2`` (a Lorentzian
    ``1/(g - i dW)`` gives ``2 g``); ``"magnitude"`` uses ``|S|`` itself
    (``2 sqrt(3) g`` for the same line). The slice is linearly interpolated
    between the two grid lines bracketing the refined peak position in the
    other axis; half-maximum crossings are linearly interpolated between bins.
    Returns ``None`` when a crossing is not bracketed inside the grid or the
    line is narrower than two bins.
    """
    mag = np.abs(np.asarray(spec.values))
    if quantity == "power":
        mag = mag**2
    elif quantity != "magnitude":
        raise ValueError(f"unknown quantity {quantity!r}")
    if axis == "a":
        along, other = spec.freq_a, spec.freq_b
        ia, io = peak.index
        pos_other = peak.position[1]
        take = lambda j: mag[:, j]
    elif axis == "b":
        along, other = spec.freq_b, spec.freq_a
        io, ia = peak.index
        pos_other = peak.position[0]
        take = lambda j: mag[j, :]
    else:
        raise ValueError("axis must be 'a' or 'b'")
    x = (pos_other - other.start) / other.step
    j0 = int(np.clip(np.floor(x), 0, other.n - 1))
    j1 = min(j0 + 1, other.n - 1)
    frac = x - j0 if j1 != j0 else 0.0
    line = (1 - frac) * take(j0) + frac * take(j1)
    i = ia
    # refine the slice maximum near the peak bin
    lo, hi = max(i - 2, 0), min(i + 3, len(line))
    i = lo + int(np.argmax(line[lo:hi]))
    if i == 0 or i == len(line) - 1:
        return None
    off = _parabolic_offset(line[i - 1], line[i], line[i + 1])
    y = line[i]
    denom = line[i - 1] - 2 * y + line[i + 1]
    top = y - 0.25 * (line[i - 1] - line[i + 1]) * off if denom != 0 else y
    half = 0.5 * top

    def crossing(direction):
        k = i
        while True:
            nxt = k + direction
            if nxt < 0 or nxt >= len(line):
                return None
            if line[nxt] < half:
                if k == i:
                    return "narrow"
                f = (line[k] - half) / (line[k] - line[nxt])
                return k + direction * f
            k = nxt

    left, right = crossing(-1), crossing(+1)
    if left is None or right is None or "narrow" in (left, right):
        return None
    return float((right - left) * along.step)


def write_grid_csv(path, axis_a_values, axis_b_values, values) -> None:
    """Grid CSV: first row holds axis-b values, first column axis-a values."""
    fmt = "{:.16e}".format
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["a\\b"] + [fmt(v) for v in axis_b_values])
        for va, row in zip(axis_a_values, np.asarray(values)):
            w.writerow([fmt(va)] + [fmt(float(v)) for v in row])


def read_grid_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    b = np.array([float(v) for v in rows[0][1:]])
    a = np.array([float(r[0]) for r in rows[1:]])
    vals = np.array([[float(v) for v in r[1:]] for r in rows[1:]])
    return a, b, vals


def export_spectrum(spec: Spectrum2D, prefix, peaks=None, extra_meta=None) -> list:
    """Write ``<prefix>_{re,im,abs}.csv`` plus ``<prefix>_meta.json``; returns paths."""
    prefix = str(prefix)
    paths = []
    for tag, data in (("re", spec.values.real), ("im", spec.values.imag), ("abs", np.abs(spec.values))):
        p = f"{prefix}_{tag}.csv"
        write_grid_csv(p, spec.freq_a.values, spec.freq_b.values, data)
        paths.append(p)
    meta = dict(spec.meta)
    meta.update(
        freq_a={"n": spec.freq_a.n, "step": spec.freq_a.step, "start": spec.freq_a.start,
                "label": spec.freq_a.label},
        freq_b={"n": spec.freq_b.n, "step": spec.freq_b.step, "start": spec.freq_b.start,
                "label": spec.freq_b.label},
    )
    if extra_meta:
        meta.update(extra_meta)
    if peaks is not None:
        meta["peaks"] = [peak_to_dict(p) for p in peaks]
    p = f"{prefix}_meta.json"
    with open(p, "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
    paths.append(p)
    return paths


def peak_to_dict(p: Peak) -> dict:
    return {"position": [float(x) for x in p.position], "magnitude": p.magnitude,
            "index": list(p.index), "fwhm_a": p.fwhm_a, "fwhm_b": p.fwhm_b}
