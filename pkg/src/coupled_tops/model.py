"""Coupled-tops Hamiltonian H = J_x1 + J_x2 + (mu/j) J_z1 J_z2.

The Hamiltonian is kept in structured form (single-site J_x band plus the
diagonal of the coupling) so that solvers can apply it without building the
(2j+1)^2 square matrix. A dense copy is produced on request for small
dimensions only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.linalg import expm

from .spin import MAX_DENSE_DIM, DimensionError, SpinJ, build_jx_jy, build_jz, commutator, kron, spin_operators


@dataclass(frozen=True)
class ModelParams:
    """Spin size and dimensionless coupling mu = chi / omega (omega = 1)."""

    j: SpinJ
    mu: float

    def __post_init__(self):
        if not isinstance(self.j, SpinJ):
            object.__setattr__(self, "j", SpinJ.from_value(self.j))
        if self.j.twice_j < 1:
            raise ValueError("the coupled-tops model needs j >= 1/2")
        mu = float(self.mu)
        if not math.isfinite(mu):
            raise ValueError(f"mu must be finite, got {self.mu!r}")
        object.__setattr__(self, "mu", mu)

    @property
    def negative_coupling(self) -> bool:
        """Negative couplings are allowed for exploration but flagged."""
        return self.mu < 0

    @property
    def dim(self) -> int:
        return self.j.dim() ** 2


@dataclass(frozen=True)
class Hamiltonian:
    """Immutable handle on H(j, mu).

    Attributes
    ----------
    params : ModelParams
    jx : ndarray
        Single-site J_x, shape (d, d) with d = 2j+1.
    coupling_diag : ndarray
        (mu/j) * m * n laid out as a (d, d) array matching the coefficient
        matrix of a state vector.
    """

    params: ModelParams
    jx: np.ndarray = field(repr=False)
    coupling_diag: np.ndarray = field(repr=False)

    @property
    def site_dim(self) -> int:
        return self.params.j.dim()

    @property
    def dim(self) -> int:
        return self.params.dim

    @cached_property
    def dense(self) -> np.ndarray:
        """Dense real-symmetric matrix; only for dim <= MAX_DENSE_DIM."""
        if self.dim > MAX_DENSE_DIM:
            raise DimensionError(f"dense Hamiltonian of dimension {self.dim} exceeds cap {MAX_DENSE_DIM}")
        eye = np.eye(self.site_dim)
        h = kron(self.jx, eye) + kron(eye, self.jx)
        h[np.diag_indices_from(h)] += self.coupling_diag.ravel()
        return h

    def matvec(self, v: np.ndarray) -> np.ndarray:
        return apply_hamiltonian(self, v)


def build_hamiltonian(params: ModelParams | SpinJ, mu: float | None = None) -> Hamiltonian:
    """Assemble the structured Hamiltonian.

    Accepts either a ``ModelParams`` or ``(spin, mu)``.
    """
    if not isinstance(params, ModelParams):
        params = ModelParams(params, mu)
    spin = params.j
    jx, _ = build_jx_jy(spin)
    m = spin.m_values()
    coupling = (params.mu / spin.value) * np.outer(m, m)
    jx.setflags(write=False)
    coupling.setflags(write=False)
    return Hamiltonian(params, jx, coupling)


def apply_hamiltonian(h: Hamiltonian, v: np.ndarray) -> np.ndarray:
    """H @ v from the structured form, O(dim * sqrt(dim))."""
    v = np.asarray(v)
    if v.shape != (h.dim,):
        raise ValueError(f"expected a vector of length {h.dim}, got shape {v.shape}")
    c = v.reshape(h.site_dim, h.site_dim)
    # J_x is symmetric, so the site-2 action C J_x^T is C @ J_x
    out = h.jx @ c + c @ h.jx + h.coupling_diag * c
    return out.ravel()


def swap_operator(spin: SpinJ) -> np.ndarray:
    """Permutation matrix exchanging the two tensor factors."""
    d = spin.dim()
    idx = np.arange(d * d).reshape(d, d).T.ravel()
    return np.eye(d * d)[idx]


def swap_vector(v: np.ndarray, spin: SpinJ) -> np.ndarray:
    d = spin.dim()
    return np.asarray(v).reshape(d, d).T.ravel()


def parity_operator(spin: SpinJ) -> np.ndarray:
    """Pi = exp(i pi J_x) (x) exp(i pi J_x): flips J_z on both sites."""
    jx, _ = build_jx_jy(spin)
    r = expm(1j * np.pi * jx)
    return np.kron(r, r)


@dataclass
class SymmetryReport:
    """Max-norms of commutators of H with candidate conserved quantities."""

    comm_j1_sq: float
    comm_j2_sq: float
    comm_swap: float
    comm_j_total_sq: float
    comm_parity: float
    negative_coupling: bool = False
    tolerance: float = 1e-12

    @property
    def casimirs_conserved(self) -> bool:
        return max(self.comm_j1_sq, self.comm_j2_sq) < self.tolerance

    @property
    def total_j_conserved(self) -> bool:
        return self.comm_j_total_sq < self.tolerance

    def as_dict(self) -> dict:
        return {
            "comm_j1_sq": self.comm_j1_sq,
            "comm_j2_sq": self.comm_j2_sq,
            "comm_swap": self.comm_swap,
            "comm_j_total_sq": self.comm_j_total_sq,
            "comm_parity": self.comm_parity,
            "negative_coupling": self.negative_coupling,
        }


def check_symmetries(h: Hamiltonian) -> SymmetryReport:
    spin = h.params.j
    hd = h.dense
    d = spin.dim()
    eye = np.eye(d)
    ops = spin_operators(spin)
    casimir = sum(op @ op for op in ops)
    j1_sq = np.kron(casimir, eye)
    j2_sq = np.kron(eye, casimir)
    total = j1_sq + j2_sq + 2 * sum(np.kron(op, op) for op in ops)

    def norm(a, b):
        return float(np.max(np.abs(commutator(a, b))))

    return SymmetryReport(
        comm_j1_sq=norm(hd, j1_sq),
        comm_j2_sq=norm(hd, j2_sq),
        comm_swap=norm(hd, swap_operator(spin)),
        comm_j_total_sq=norm(hd, total),
        comm_parity=norm(hd, parity_operator(spin)),
        negative_coupling=h.params.negative_coupling,
    )


def stoquastic_signs(spin: SpinJ) -> np.ndarray:
    """Sign pattern (-1)^(k1 + k2) of the product basis, as a (d, d) array.

    Conjugating H by this diagonal sign matrix makes every off-diagonal
    element non-positive, so the ground state has this sign pattern
    (Perron-Frobenius, the hopping graph being connected).
    """
    k = np.arange(spin.dim())
    s = (-1.0) ** k
    return np.outer(s, s)


def minimal_jx_product_state(spin: SpinJ) -> np.ndarray:
    """|-j>_x (x) |-j>_x, the exact ground state at mu = 0."""
    jx, _ = build_jx_jy(spin)
    _, vecs = np.linalg.eigh(jx)
    low = vecs[:, 0]
    low = low * np.sign(low[0])
    return np.kron(low, low)


def jz_diagonal(spin: SpinJ) -> np.ndarray:
    return np.diag(build_jz(spin)).copy()
