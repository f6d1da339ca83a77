"""Open-system propagation: Liouvillian assembly and G(t) = exp(L t)."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .operators import (PHONON, SPIN, StateBasis, build_liouvillian, number_operator,
                        spin_operator, unvec, vec)

PHONON_LOCAL_DEPHASING = "phonon_local_dephasing"
SPIN_LOCAL_DEPHASING = "spin_local_dephasing"
SPIN_COLLECTIVE_DEPHASING = "spin_collective_dephasing"
CHANNEL_KINDS = (PHONON_LOCAL_DEPHASING, SPIN_LOCAL_DEPHASING, SPIN_COLLECTIVE_DEPHASING)

EIG_CONDITION_LIMIT = 1e8


@dataclass(frozen=True)
class NoiseChannel:
    kind: str
    sites: tuple
    rate: float

    def __post_init__(self):
        if self.kind not in CHANNEL_KINDS:
            raise ValueError(f"unknown noise channel {self.kind!r}")
        if self.rate < 0:
            raise ValueError(f"negative rate {self.rate}")
        object.__setattr__(self, "sites", tuple(int(s) for s in self.sites))


@dataclass(frozen=True)
class NoiseSpec:
    channels: tuple = ()

    @classmethod
    def none(cls) -> "NoiseSpec":
        return cls(())

    @classmethod
    def phonon_local(cls, n_sites: int, rate: float) -> "NoiseSpec":
        return cls((NoiseChannel(PHONON_LOCAL_DEPHASING, tuple(range(n_sites)), rate),))

    def lindblads(self, basis: StateBasis) -> list:
        """Bare jump operators paired with their rates."""
        ops = []
        for ch in self.channels:
            for s in ch.sites:
                if not 0 <= s < basis.n_sites:
                    raise IndexError(f"noise site {s} out of range")
            if ch.kind == PHONON_LOCAL_DEPHASING:
                if basis.kind != PHONON:
                    raise TypeError("phonon dephasing needs a phonon basis")
                ops += [(number_operator(basis, s), ch.rate) for s in ch.sites]
            elif ch.kind == SPIN_LOCAL_DEPHASING:
                if basis.kind != SPIN:
                    raise TypeError("spin dephasing needs a spin basis")
                ops += [(spin_operator(basis, s, "z"), ch.rate) for s in ch.sites]
            else:
                if basis.kind != SPIN:
                    raise TypeError("spin dephasing needs a spin basis")
                op = np.eye(basis.dim, dtype=complex)
                for s in ch.sites:
                    op = op @ spin_operator(basis, s, "z")
                ops.append((op, ch.rate))
        return ops


def expm_generator(L: np.ndarray, t: float, decomposition=None) -> np.ndarray:
    """``exp(L t)``, via an eigendecomposition when one is supplied and usable."""
    if decomposition is not None:
        w, V, Vinv = decomposition
        return (V * np.exp(w * t)) @ Vinv
    return scipy.linalg.expm(L * t)


def eigen_decomposition(L: np.ndarray, cond_limit: float = EIG_CONDITION_LIMIT):
    """Return ``(w, V, V^-1)`` or ``None`` when the eigenvectors are ill-conditioned."""
    w, V = np.linalg.eig(L)
    cond = np.linalg.cond(V)
    if not np.isfinite(cond) or cond > cond_limit:
        return None
    return w, V, np.linalg.inv(V)


def unitary_decomposition(H: np.ndarray):
    """Eigenpairs of ``-i[H, .]`` built from ``H = U E U^dag``.

    ``|u_i><u_j|`` has eigenvalue ``-i (E_i - E_j)``; the eigenvector matrix
    ``conj(U) (x) U`` is unitary, so no large eigenproblem is solved.
    """
    E, U = np.linalg.eigh(H)
    w = (-1j * (E[None, :] - E[:, None])).ravel()
    V = np.kron(U.conj(), U)
    return w, V, V.conj().T


@dataclass
class Propagator:
    """Time-independent Lindblad propagator with a cache of G(t) keyed by exact t.

    The generator never changes after construction. Fill the cache (``step``)
    before handing the object to parallel workers.
    """

    generator: np.ndarray
    dim: int
    decomposition: tuple | None = None
    cached_steps: dict = field(default_factory=dict, repr=False)

    @classmethod
    def from_generator(cls, L: np.ndarray, dim: int | None = None) -> "Propagator":
        if dim is None:
            dim = int(round(np.sqrt(L.shape[0])))
        return cls(L, dim, eigen_decomposition(L))

    @property
    def uses_eigendecomposition(self) -> bool:
        return self.decomposition is not None

    def step(self, t: float) -> np.ndarray:
        """G(t) as a ``D^2 x D^2`` matrix."""
        if t < 0:
            raise ValueError(f"negative time {t}")
        t = float(t)
        G = self.cached_steps.get(t)
        if G is None:
            if t == 0.0:
                G = np.eye(self.generator.shape[0], dtype=complex)
            else:
                G = expm_generator(self.generator, t, self.decomposition)
            self.cached_steps[t] = G
        return G

    def eigenmodes(self):
        """``(w, V, V^-1)`` of the generator, computing it unconditionally if needed."""
        if self.decomposition is not None:
            return self.decomposition
        w, V = np.linalg.eig(self.generator)
        return w, V, np.linalg.inv(V)


def make_propagator(H: np.ndarray, noise: NoiseSpec | None, basis: StateBasis) -> Propagator:
    if H.shape != (basis.dim, basis.dim):
        raise ValueError(f"Hamiltonian shape {H.shape} does not match basis dim {basis.dim}")
    lindblads = noise.lindblads(basis) if noise is not None else []
    L = build_liouvillian(H, lindblads)
    if not lindblads and np.allclose(H, H.conj().T, rtol=0, atol=1e-12):
        return Propagator(L, basis.dim, unitary_decomposition(H))
    return Propagator.from_generator(L, basis.dim)


def evolve(prop: Propagator, t: float, rho: np.ndarray) -> np.ndarray:
    if t < 0:
        raise ValueError("only forward evolution (t >= 0) is supported")
    return unvec(prop.step(t) @ vec(rho), prop.dim)


def evolve_grid(prop: Propagator, dt: float, n_steps: int, rho: np.ndarray) -> list:
    """States at ``t_k = k dt`` for ``k = 0 .. n_steps-1`` (element 0 is the input)."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    G = prop.step(dt)
    v = vec(np.asarray(rho, dtype=complex))
    out = []
    for k in range(n_steps):
        if k:
            v = G @ v
        out.append(unvec(v, prop.dim))
    return out


def propagate_columns(prop: Propagator, dt: float, n_steps: int, v0: np.ndarray) -> np.ndarray:
    """Vectorized states ``G(k dt) v0`` stacked as columns, shape ``(D^2, n_steps)``."""
    G = prop.step(dt)
    out = np.empty((v0.shape[0], n_steps), dtype=complex)
    v = np.asarray(v0, dtype=complex)
    for k in range(n_steps):
        if k:
            v = G @ v
        out[:, k] = v
    return out


def propagate_rows(prop: Propagator, dt: float, n_steps: int, w0: np.ndarray) -> np.ndarray:
    """Row functionals ``w0 G(k dt)`` stacked as rows, shape ``(n_steps, D^2)``."""
    G = prop.step(dt)
    out = np.empty((n_steps, w0.shape[0]), dtype=complex)
    w = np.asarray(w0, dtype=complex)
    for k in range(n_steps):
        if k:
            w = w @ G
        out[k] = w
    return out
