r"""SU(2) coherent states and Husimi distributions of two-spin states.

Coherent states are generated from the lowest-weight state,

.. math:: |z\rangle = (1+|z|^2)^{-j} e^{z J_+} |j,-j\rangle,\qquad
          z = e^{-i\phi}\tan(\theta/2),

and are evaluated through the closed form

.. math:: \langle j,m|\theta,\phi\rangle = \sqrt{\binom{2j}{j+m}}
          \cos^{j-m}(\theta/2)\,\sin^{j+m}(\theta/2)\,e^{-i(j+m)\phi},

which stays finite at the pole theta = pi where z diverges. Note the mean
spin of such a state points along
:math:`(\sin\theta\cos\phi, \sin\theta\sin\phi, -\cos\theta)`: theta = 0 is
the south pole m = -j. :func:`angles_of` maps a classical unit vector to the
(theta, phi) of the coherent state centred on it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .entanglement import QuantumState
from .spin import SpinJ


@dataclass(frozen=True)
class SphereAngle:
    theta: float
    phi: float

    def __post_init__(self):
        if not 0.0 <= self.theta <= math.pi:
            raise ValueError(f"theta must lie in [0, pi], got {self.theta}")
        object.__setattr__(self, "phi", float(self.phi) % (2 * math.pi))


@dataclass
class CoherentAmplitudes:
    j: SpinJ
    amps: np.ndarray


@dataclass
class QGrid:
    """Q on a (theta1, theta2) grid at fixed azimuths; values[a, b] belongs
    to (axis1[a], axis2[b])."""

    axis1: np.ndarray
    axis2: np.ndarray
    phi1: float
    phi2: float
    values: np.ndarray

    def local_maxima(self, rel_height: float = 0.1) -> list[tuple[int, int]]:
        """Grid cells strictly higher than their 8 neighbours (plateaus
        count once) and above ``rel_height * max``."""
        q = self.values
        padded = np.pad(q, 1, constant_values=-np.inf)
        n1, n2 = q.shape
        neighbours = np.stack(
            [padded[1 + di : 1 + di + n1, 1 + dj : 1 + dj + n2] for di in (-1, 0, 1) for dj in (-1, 0, 1) if di or dj]
        )
        mask = (q >= neighbours.max(axis=0)) & (q >= rel_height * q.max())
        peaks: list[tuple[int, int]] = []
        for a, b in zip(*np.nonzero(mask)):
            if not any(abs(a - p) <= 1 and abs(b - r) <= 1 for p, r in peaks):
                peaks.append((int(a), int(b)))
        return peaks


def log_binomials(twice_j: int) -> np.ndarray:
    """ln C(2j, k) for k = 0..2j."""
    k = np.arange(twice_j + 1)
    return gammaln(twice_j + 1) - gammaln(k + 1) - gammaln(twice_j - k + 1)


def _moduli(twice_j: int, theta: np.ndarray) -> np.ndarray:
    """|<j,m|theta,phi>| for every theta (rows) and k = j + m (columns)."""
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    k = np.arange(twice_j + 1)
    # cos(theta/2) as sin((pi - theta)/2) so that it is exactly 0 at theta = pi
    c = np.sin((math.pi - theta[:, None]) / 2)
    s = np.sin(theta[:, None] / 2)
    # logs avoid overflow of the binomials; 0**0 = 1 at the poles
    with np.errstate(divide="ignore", invalid="ignore"):
        term_c = np.where(k == twice_j, 0.0, (twice_j - k) * np.log(np.abs(c)))
        term_s = np.where(k == 0, 0.0, k * np.log(np.abs(s)))
    return np.exp(0.5 * log_binomials(twice_j)[None, :] + term_c + term_s)


def coherent_amps(j, angle: SphereAngle) -> CoherentAmplitudes:
    """Amplitudes <j,m|theta,phi> in ascending-m order."""
    spin = j if isinstance(j, SpinJ) else SpinJ.from_value(j)
    k = np.arange(spin.dim())
    amps = _moduli(spin.twice_j, angle.theta)[0] * np.exp(-1j * k * angle.phi)
    return CoherentAmplitudes(spin, amps)


def coherent_matrix(j, theta, phi) -> np.ndarray:
    """Coherent amplitudes for paired arrays of angles, shape (n, 2j+1)."""
    spin = j if isinstance(j, SpinJ) else SpinJ.from_value(j)
    theta = np.atleast_1d(theta)
    phi = np.broadcast_to(np.atleast_1d(phi), theta.shape)
    k = np.arange(spin.dim())
    return _moduli(spin.twice_j, theta) * np.exp(-1j * np.outer(phi, k))


def angles_of(L) -> SphereAngle:
    """Angles of the coherent state whose mean spin direction is L."""
    x, y, z = np.asarray(L, dtype=float) / np.linalg.norm(L)
    return SphereAngle(math.acos(max(-1.0, min(1.0, -z))), math.atan2(y, x) % (2 * math.pi))


def coherent_product(j, a1: SphereAngle, a2: SphereAngle) -> QuantumState:
    u = coherent_amps(j, a1).amps
    v = coherent_amps(j, a2).amps
    return QuantumState.normalized(np.kron(u, v), j)


def q_value(state: QuantumState, a1: SphereAngle, a2: SphereAngle) -> float:
    """Two-body Husimi function |<z1, z2|psi>|^2."""
    u = coherent_amps(state.j, a1).amps
    v = coherent_amps(state.j, a2).amps
    amp = u.conj() @ state.matrix @ v.conj()
    return float(abs(amp) ** 2)


def q_cross_section(state: QuantumState, phi1: float = math.pi, phi2: float = math.pi, n_theta: int = 129) -> QGrid:
    """Q on a uniform n_theta x n_theta grid of [0, pi]^2 at fixed azimuths."""
    if n_theta < 16:
        raise ValueError("n_theta must be at least 16")
    theta = np.linspace(0.0, math.pi, n_theta)
    a1 = coherent_matrix(state.j, theta, phi1).conj()
    a2 = coherent_matrix(state.j, theta, phi2).conj()
    values = np.abs(a1 @ state.matrix @ a2.T) ** 2
    return QGrid(theta, theta.copy(), float(phi1), float(phi2), np.clip(values, 0.0, 1.0))


@dataclass
class WehrlResult:
    entropy_nats: float
    norm: float
    order: float
    n_theta: int
    n_phi: int

    @property
    def entropy_bits(self) -> float:
        return self.entropy_nats / math.log(2)


def _theta_weights(n_theta: int) -> tuple[np.ndarray, np.ndarray]:
    theta = np.linspace(0.0, math.pi, n_theta)
    w = np.full(n_theta, math.pi / (n_theta - 1))
    w[0] *= 0.5
    w[-1] *= 0.5
    return theta, w * np.sin(theta)


def wehrl_entropy(
    state: QuantumState,
    n_theta: int = 128,
    n_phi: int = 128,
    order: float = 1.0,
    norm_tol: float = 1e-2,
) -> WehrlResult:
    r"""Wehrl entropy :math:`-\int Q \ln Q\, d\mu` of the two-body Husimi
    function, or its Renyi version :math:`\ln(\int Q^q d\mu)/(1-q)` for
    ``order`` q != 1.

    The measure is :math:`((2j+1)/4\pi)^2 \sin\theta_1\sin\theta_2\,
    d\theta_1 d\phi_1 d\theta_2 d\phi_2`; theta uses the trapezoidal rule,
    phi the uniform periodic rule. For each theta1 row the phi1 dependence
    is contracted first, so the cost is O(n_theta^2 n_phi^2 (2j+1)).
    """
    if n_theta < 32 or n_phi < 32:
        raise ValueError("Wehrl grids need at least 32 points per axis")
    if order <= 0:
        raise ValueError("Renyi order must be positive")
    spin = state.j
    d = spin.dim()
    if n_phi < d:
        raise ValueError(f"n_phi must be at least 2j+1 = {d}")
    theta, wt = _theta_weights(n_theta)
    phi = 2 * math.pi * np.arange(n_phi) / n_phi
    wphi = 2 * math.pi / n_phi
    pref = (d / (4 * math.pi)) ** 2

    moduli = _moduli(spin.twice_j, theta)  # (n_theta, d)
    phase = np.exp(1j * np.outer(phi, np.arange(d)))  # (n_phi, d), conj of coherent phase
    # site-2 amplitudes conj(<n|theta2, phi2>) over the flattened (theta2, phi2) grid
    site2 = (moduli[:, None, :] * phase[None, :, :]).reshape(-1, d)
    w2 = np.repeat(wt, n_phi) * wphi
    psi = state.matrix

    total = 0.0
    mass = 0.0
    for a in range(n_theta):
        if wt[a] == 0.0:
            continue
        row1 = moduli[a][None, :] * phase  # (n_phi, d)
        amp = (row1 @ psi) @ site2.T  # (n_phi, n_theta * n_phi)
        q = amp.real**2 + amp.imag**2
        weight = pref * wt[a] * wphi
        mass += weight * float(q.sum(axis=0) @ w2)
        if order == 1.0:
            with np.errstate(divide="ignore", invalid="ignore"):
                integrand = np.where(q > 0, q * np.log(q), 0.0)
            total -= weight * float(integrand.sum(axis=0) @ w2)
        else:
            total += weight * float((q**order).sum(axis=0) @ w2)
    if abs(mass - 1.0) > norm_tol:
        raise ValueError(f"Husimi normalization {mass:.6f} deviates from 1; refine the grid")
    entropy = total if order == 1.0 else math.log(total) / (1.0 - order)
    return WehrlResult(entropy, mass, order, n_theta, n_phi)


def coherent_wehrl_minimum(j) -> float:
    """Wehrl entropy of any coherent product state, 2 * 2j / (2j + 1) nats."""
    spin = j if isinstance(j, SpinJ) else SpinJ.from_value(j)
    return 2.0 * spin.twice_j / (spin.twice_j + 1)


def wehrl_sweep(j, mu_grid, n_theta: int = 64, n_phi: int = 64, order: float = 1.0, tol: float = 1e-11) -> list[dict]:
    """Wehrl entropy of the ground state along a coupling grid."""
    from .entanglement import ground_state_of

    spin = j if isinstance(j, SpinJ) else SpinJ.from_value(j)
    rows = []
    for mu in mu_grid:
        state, _ = ground_state_of(spin, float(mu), tol)
        res = wehrl_entropy(state, n_theta=n_theta, n_phi=n_phi, order=order)
        rows.append({"mu": float(mu), "wehrl_nats": res.entropy_nats, "wehrl_bits": res.entropy_bits, "norm": res.norm})
    return rows
