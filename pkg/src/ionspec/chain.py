"""Linear ion crystal: equilibrium positions and transverse local-phonon model.

Lengths are in units of ``l0`` (``l0**3 = e**2 / (m nu_z**2)``), frequencies in
units of the transverse trap frequency ``nu_x``.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass

import numpy as np

from .operators import PHONON, StateBasis, enumerate_basis, ladder_operator


class ConvergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class ChainGeometry:
    n_ions: int
    positions: np.ndarray

    def residual(self) -> np.ndarray:
        return equilibrium_residual(self.positions)


@dataclass(frozen=True)
class ChainModel:
    """Tight-binding model of the transverse local phonons."""

    n_ions: int
    beta: float
    site_energies: np.ndarray
    couplings: np.ndarray
    U: float = 0.0
    positions: np.ndarray | None = None

    def single_excitation_matrix(self) -> np.ndarray:
        return np.diag(self.site_energies) + self.couplings

    def to_dict(self) -> dict:
        return {
            "n_ions": self.n_ions,
            "beta": self.beta,
            "U": self.U,
            "positions": None if self.positions is None else list(map(float, self.positions)),
            "site_energies": list(map(float, self.site_energies)),
            "couplings": [list(map(float, row)) for row in self.couplings],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, d: dict) -> "ChainModel":
        positions = d.get("positions")
        return cls(
            n_ions=int(d["n_ions"]),
            beta=float(d["beta"]),
            site_energies=np.asarray(d["site_energies"], dtype=float),
            couplings=np.asarray(d["couplings"], dtype=float),
            U=float(d.get("U", 0.0)),
            positions=None if positions is None else np.asarray(positions, dtype=float),
        )

    @classmethod
    def from_json(cls, text: str) -> "ChainModel":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class ExcitonBasis:
    """Single-excitation eigenmodes; ``modes[:, j]`` is exciton ``j`` in the site basis."""

    frequencies: np.ndarray
    modes: np.ndarray


def equilibrium_residual(u: np.ndarray) -> np.ndarray:
    """Net dimensionless force on each ion: ``u_m - sum_n sign(u_m-u_n)/(u_m-u_n)^2``."""
    u = np.asarray(u, dtype=float)
    diff = u[:, None] - u[None, :]
    np.fill_diagonal(diff, np.inf)
    coulomb = np.sign(diff) / diff**2
    return u - coulomb.sum(axis=1)


def _jacobian(u):
    diff = u[:, None] - u[None, :]
    np.fill_diagonal(diff, np.inf)
    J = -2.0 / np.abs(diff) ** 3
    np.fill_diagonal(J, 1.0 - J.sum(axis=1))
    return J


def solve_equilibrium(n_ions: int, tol: float = 1e-10, max_iter: int = 200) -> ChainGeometry:
    """Damped Newton solve of the axial force balance, started on a uniform grid."""
    if n_ions < 1:
        raise ValueError("n_ions must be >= 1")
    if n_ions == 1:
        return ChainGeometry(1, np.zeros(1))
    u = np.linspace(-0.5, 0.5, n_ions) * n_ions ** 0.6 * 1.2
    r = equilibrium_residual(u)
    norm = np.max(np.abs(r))
    for _ in range(max_iter):
        if norm < tol:
            break
        step = np.linalg.solve(_jacobian(u), r)
        damp = 1.0
        while True:
            trial = u - damp * step
            if np.all(np.diff(trial) > 0):
                r_trial = equilibrium_residual(trial)
                norm_trial = np.max(np.abs(r_trial))
                if norm_trial < norm:
                    break
            damp *= 0.5
            if damp < 1e-12:
                raise ConvergenceError(f"line search stalled; max residual {norm:.3e}")
        u, r, norm = trial, r_trial, norm_trial
    else:
        raise ConvergenceError(f"equilibrium not converged after {max_iter} iterations; "
                               f"max residual {norm:.3e}")
    if norm >= tol:
        raise ConvergenceError(f"equilibrium residual {norm:.3e} above {tol:g}")
    # symmetrize away roundoff asymmetry
    u = 0.5 * (u - u[::-1])
    return ChainGeometry(n_ions, u)


def coulomb_energy(u: np.ndarray) -> float:
    """Dimensionless harmonic-plus-Coulomb potential energy."""
    u = np.asarray(u, dtype=float)
    i, j = np.triu_indices(len(u), 1)
    return 0.5 * float(np.sum(u**2)) + float(np.sum(1.0 / np.abs(u[i] - u[j])))


def build_chain_model(geometry: ChainGeometry, beta: float, U: float = 0.0) -> ChainModel:
    """Local trap frequencies and couplings from the equilibrium positions."""
    if beta < 0:
        raise ValueError("beta must be non-negative")
    if beta > 0.3:
        warnings.warn(f"beta={beta} is not small; the tight-binding model assumes beta << 1")
    u = np.asarray(geometry.positions, dtype=float)
    dist = np.abs(u[:, None] - u[None, :])
    off = ~np.eye(len(u), dtype=bool)
    if np.any(dist[off] == 0):
        raise ZeroDivisionError("coincident ion positions")
    inv3 = np.zeros_like(dist)
    inv3[off] = dist[off] ** -3
    t = 0.5 * beta * inv3
    omega0 = 1.0 - t.sum(axis=1)
    return ChainModel(geometry.n_ions, float(beta), omega0, t, float(U), u.copy())


def diagonalize_single_sector(model: ChainModel) -> ExcitonBasis:
    """Exciton frequencies (ascending) and sign-fixed eigenvectors."""
    w, c = np.linalg.eigh(model.single_excitation_matrix())
    for j in range(c.shape[1]):
        k = np.argmax(np.abs(c[:, j]))
        if c[k, j] < 0:
            c[:, j] = -c[:, j]
    return ExcitonBasis(w, c)


def build_hamiltonian(model: ChainModel, basis: StateBasis) -> np.ndarray:
    """Tight-binding Hamiltonian plus on-site ``U a^dag a^dag a a`` on a capped basis."""
    if basis.kind != PHONON:
        raise TypeError("phonon basis required")
    if basis.n_sites != model.n_ions:
        raise ValueError(f"basis has {basis.n_sites} sites, model has {model.n_ions} ions")
    N = model.n_ions
    up = [ladder_operator(basis, i, True) for i in range(N)]
    dn = [op.conj().T for op in up]
    H = np.zeros((basis.dim, basis.dim), dtype=complex)
    for i in range(N):
        H += model.site_energies[i] * (up[i] @ dn[i])
        if model.U:
            H += model.U * (up[i] @ up[i] @ dn[i] @ dn[i])
        for j in range(i + 1, N):
            hop = up[i] @ dn[j]
            H += model.couplings[i, j] * (hop + hop.conj().T)
    return H


def chain(n_ions: int, beta: float, U: float = 0.0) -> ChainModel:
    """Shortcut: equilibrium geometry followed by :func:`build_chain_model`."""
    return build_chain_model(solve_equilibrium(n_ions), beta, U)


def sector_energies(model: ChainModel, n_excitations: int, basis: StateBasis | None = None) -> np.ndarray:
    """Ascending eigenvalues of the Hamiltonian inside one excitation-number sector."""
    if basis is None:
        basis = enumerate_basis(PHONON, model.n_ions, n_excitations)
    if n_excitations > basis.excitation_cap:
        raise ValueError("sector lies above the basis excitation cap")
    sel = np.flatnonzero(basis.total_number() == n_excitations)
    H = build_hamiltonian(model, basis)
    return np.linalg.eigvalsh(H[np.ix_(sel, sel)])
