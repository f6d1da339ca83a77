"""Truncated Hilbert spaces, elementary operators and Liouville-space maps.

Conventions
-----------
* Phonon bases use a global cap on the *total* excitation number. States are
  ordered by ascending total excitation; inside a sector they are sorted in
  descending lexicographic order of the occupation tuple, so index 0 is the
  vacuum and indices ``1..N`` are the single-phonon states ``|1_1>, ..., |1_N>``.
* Spin bases use bit strings with the same ordering rule. ``|0>`` is the
  ground state and carries ``sigma_z = -1``; ``sigma_+ = |1><0|``.
* Density matrices are vectorized column-major (``order="F"``), so that
  ``vec(A X B) = (B^T kron A) vec(X)``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

DEFAULT_MAX_DIM = 4096

PHONON = "phonon"
SPIN = "spin"


class BasisTypeError(TypeError):
    """Operator requested on a basis of the wrong kind."""


class DimensionError(ValueError):
    """Operands live on incompatible spaces."""


@dataclass(frozen=True)
class StateBasis:
    """Enumerated truncated basis.

    Attributes
    ----------
    kind : str
        ``"phonon"`` or ``"spin"``.
    n_sites : int
    excitation_cap : int or None
        Maximum total phonon number (phonon bases only).
    states : tuple
        Occupation tuples (phonon) or bit strings (spin).
    """

    kind: str
    n_sites: int
    excitation_cap: int | None
    states: tuple
    _index: dict = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_index", {s: i for i, s in enumerate(self.states)})

    @property
    def dim(self) -> int:
        return len(self.states)

    def index(self, state) -> int:
        return self._index[state]

    def occupations(self) -> np.ndarray:
        """Integer array ``(dim, n_sites)`` of local occupations."""
        if self.kind == PHONON:
            return np.array(self.states, dtype=int).reshape(self.dim, self.n_sites)
        return np.array([[int(b) for b in s] for s in self.states], dtype=int)

    def total_number(self) -> np.ndarray:
        return self.occupations().sum(axis=1)

    def basis_vector(self, state) -> np.ndarray:
        v = np.zeros(self.dim, dtype=complex)
        v[self.index(state)] = 1.0
        return v

    def ground_state(self) -> np.ndarray:
        """Projector onto index 0 as a density matrix."""
        rho = np.zeros((self.dim, self.dim), dtype=complex)
        rho[0, 0] = 1.0
        return rho


def _sorted_sector(states):
    return sorted(states, reverse=True)


def enumerate_basis(kind: str, n_sites: int, excitation_cap: int | None = None,
                    max_dim: int = DEFAULT_MAX_DIM) -> StateBasis:
    """Enumerate a truncated basis.

    >>> enumerate_basis("phonon", 5, 2).dim
    21
    """
    if n_sites < 1:
        raise ValueError(f"n_sites must be >= 1, got {n_sites}")
    if kind == PHONON:
        if excitation_cap is None or excitation_cap < 0:
            raise ValueError("phonon basis needs excitation_cap >= 0")
        dim = _multiset_count(n_sites, excitation_cap)
        if dim > max_dim:
            raise OverflowError(f"basis dimension {dim} exceeds cap {max_dim}")
        states = []
        for n in range(excitation_cap + 1):
            sector = [occ for occ in itertools.product(range(n + 1), repeat=n_sites)
                      if sum(occ) == n]
            states.extend(_sorted_sector(sector))
        return StateBasis(PHONON, n_sites, excitation_cap, tuple(states))
    if kind == SPIN:
        dim = 2 ** n_sites
        if dim > max_dim:
            raise OverflowError(f"basis dimension {dim} exceeds cap {max_dim}")
        bits = ["".join(b) for b in itertools.product("01", repeat=n_sites)]
        states = []
        for n in range(n_sites + 1):
            states.extend(_sorted_sector([b for b in bits if b.count("1") == n]))
        return StateBasis(SPIN, n_sites, None, tuple(states))
    raise ValueError(f"unknown basis kind {kind!r}")


def _multiset_count(n_sites, cap):
    from math import comb
    return comb(n_sites + cap, cap)


def _check_site(basis, site):
    if not 0 <= site < basis.n_sites:
        raise IndexError(f"site {site} out of range for {basis.n_sites} sites")


def ladder_operator(basis: StateBasis, site: int, raising: bool) -> np.ndarray:
    """Bosonic creation (``raising=True``) or annihilation operator at ``site``.

    Sites are zero-based. Transitions leaving the capped space are dropped.
    """
    if basis.kind != PHONON:
        raise BasisTypeError("ladder operators need a phonon basis")
    _check_site(basis, site)
    adag = np.zeros((basis.dim, basis.dim), dtype=complex)
    for col, occ in enumerate(basis.states):
        target = list(occ)
        target[site] += 1
        target = tuple(target)
        row = basis._index.get(target)
        if row is not None:
            adag[row, col] = np.sqrt(occ[site] + 1)
    return adag if raising else adag.conj().T


def number_operator(basis: StateBasis, site: int | None = None) -> np.ndarray:
    """Local (or total, for ``site=None``) occupation as a diagonal matrix."""
    occ = basis.occupations()
    n = occ.sum(axis=1) if site is None else occ[:, site]
    return np.diag(n.astype(complex))


_SINGLE_SPIN = {
    # basis order (|0>, |1>); |0> is the sigma_z = -1 ground state
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, 1j], [-1j, 0]], dtype=complex),
    "z": np.array([[-1, 0], [0, 1]], dtype=complex),
    "+": np.array([[0, 0], [1, 0]], dtype=complex),
    "-": np.array([[0, 1], [0, 0]], dtype=complex),
}


def spin_operator(basis: StateBasis, site: int, which: str) -> np.ndarray:
    """Single-site Pauli or ladder operator embedded in the register.

    ``which`` is one of ``"x", "y", "z", "+", "-"``. The single-spin matrices
    satisfy ``sigma_pm = (sigma_x +- i sigma_y) / 2`` and the Pauli algebra
    ``sigma_x sigma_y = i sigma_z``.
    """
    if basis.kind != SPIN:
        raise BasisTypeError("spin operators need a spin basis")
    _check_site(basis, site)
    if which not in _SINGLE_SPIN:
        raise ValueError(f"unknown spin operator {which!r}")
    local = _SINGLE_SPIN[which]
    op = np.zeros((basis.dim, basis.dim), dtype=complex)
    for col, s in enumerate(basis.states):
        b = int(s[site])
        for b_new in (0, 1):
            amp = local[b_new, b]
            if amp == 0:
                continue
            target = s[:site] + str(b_new) + s[site + 1:]
            op[basis.index(target), col] += amp
    return op


def identity(basis: StateBasis) -> np.ndarray:
    return np.eye(basis.dim, dtype=complex)


# -- Liouville space ---------------------------------------------------------

def vec(rho: np.ndarray) -> np.ndarray:
    """Column-major vectorization."""
    return np.reshape(rho, -1, order="F")


def unvec(v: np.ndarray, dim: int | None = None) -> np.ndarray:
    if dim is None:
        dim = int(round(np.sqrt(v.shape[0])))
    return np.reshape(v, (dim, dim), order="F")


def left_mult(A: np.ndarray) -> np.ndarray:
    """Superoperator of ``rho -> A rho``."""
    return np.kron(np.eye(A.shape[0]), A)


def right_mult(B: np.ndarray) -> np.ndarray:
    """Superoperator of ``rho -> rho B``."""
    return np.kron(B.T, np.eye(B.shape[0]))


def sandwich(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Superoperator of ``rho -> A rho B``."""
    return np.kron(B.T, A)


def trace_functional(dim: int) -> np.ndarray:
    """Row vector ``t`` with ``t @ vec(rho) == Tr(rho)``."""
    return vec(np.eye(dim, dtype=complex))


def expectation_functional(A: np.ndarray) -> np.ndarray:
    """Row vector ``w`` with ``w @ vec(rho) == Tr(A rho)``."""
    return vec(A.T)


def build_liouvillian(H: np.ndarray, lindblads=()) -> np.ndarray:
    """Lindblad generator as a ``D^2 x D^2`` matrix.

    Parameters
    ----------
    H : (D, D) array
        Hamiltonian.
    lindblads : iterable of (O, rate)
        Bare jump operators with non-negative rates; the effective jump
        operator is ``sqrt(rate) * O``.
    """
    H = np.asarray(H, dtype=complex)
    D = H.shape[0]
    if H.shape != (D, D):
        raise DimensionError(f"Hamiltonian must be square, got {H.shape}")
    eye = np.eye(D, dtype=complex)
    L = -1j * (np.kron(eye, H) - np.kron(H.T, eye))
    for op, rate in lindblads:
        op = np.asarray(op, dtype=complex)
        if op.shape != (D, D):
            raise DimensionError(f"Lindblad operator shape {op.shape} != {(D, D)}")
        if rate < 0:
            raise ValueError(f"negative Lindblad rate {rate}")
        if rate == 0:
            continue
        LdL = op.conj().T @ op
        L += rate * (np.kron(op.conj(), op)
                     - 0.5 * np.kron(eye, LdL)
                     - 0.5 * np.kron(LdL.T, eye))
    return L


def apply_superoperator(S: np.ndarray, rho: np.ndarray) -> np.ndarray:
    D = rho.shape[0]
    if S.shape != (D * D, D * D):
        raise DimensionError(f"superoperator {S.shape} incompatible with {rho.shape}")
    return unvec(S @ vec(rho), D)
