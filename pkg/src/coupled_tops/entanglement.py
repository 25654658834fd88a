"""Bipartite entanglement of coupled-tops ground states.

The entropy of entanglement of a pure state is the base-2 von Neumann
entropy of either reduced density matrix. ``sweep`` maps it across a grid of
couplings and ``find_mu_qc`` locates the coupling where it peaks.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .eigen import DEFAULT_TOL, DEGENERACY_THRESHOLD, ConvergenceError, ground_state, symmetric_eigh
from .model import ModelParams, build_hamiltonian
from .spin import SpinJ

log = logging.getLogger(__name__)

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class QuantumState:
    """Normalized amplitudes over the (2j+1)^2 product basis."""

    amplitudes: np.ndarray
    j: SpinJ

    def __post_init__(self):
        if not isinstance(self.j, SpinJ):
            object.__setattr__(self, "j", SpinJ.from_value(self.j))
        amps = np.asarray(self.amplitudes)
        d = self.j.dim()
        if amps.shape != (d * d,):
            raise ValueError(f"expected {d * d} amplitudes for j={self.j}, got shape {amps.shape}")
        nrm = np.linalg.norm(amps)
        if abs(nrm - 1.0) > 1e-10:
            raise ValueError(f"state is not normalized (norm {nrm:.15g})")
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def normalized(cls, amplitudes, j) -> "QuantumState":
        amps = np.asarray(amplitudes)
        return cls(amps / np.linalg.norm(amps), j)

    @classmethod
    def product(cls, a: np.ndarray, b: np.ndarray, j) -> "QuantumState":
        return cls.normalized(np.kron(a, b), j)

    @property
    def matrix(self) -> np.ndarray:
        """Coefficient matrix C[m, n]; rows index subsystem 1."""
        d = self.j.dim()
        return self.amplitudes.reshape(d, d)


@dataclass
class ReducedDensityMatrix:
    entries: np.ndarray
    subsystem: int


@dataclass
class SweepRow:
    mu: float
    entropy_bits: float
    ground_energy: float
    gap: float
    degenerate_flag: bool
    failed: bool = False
    residual: float = math.nan
    error: str = ""

    def as_dict(self) -> dict:
        return {
            "mu": self.mu,
            "entropy_bits": self.entropy_bits,
            "ground_energy": self.ground_energy,
            "gap": self.gap,
            "degenerate_flag": self.degenerate_flag,
        }


@dataclass
class CriticalPointRecord:
    """Location of the entanglement maximum; ``peak`` is False when the
    profile has no interior maximum in the scan window."""

    j: SpinJ
    mu_qc: float | None
    S_max: float | None
    bracket: tuple[float, float] | None
    grid_step: float
    peak: bool = True
    window: tuple[float, float] = (0.5, 3.0)
    evaluations: int = 0
    notes: list[str] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "twice_j": self.j.twice_j,
            "status": "peak" if self.peak else "no-peak",
            "mu_qc": self.mu_qc,
            "S_max": self.S_max,
            "bracket": list(self.bracket) if self.bracket else None,
            "grid_step": self.grid_step,
            "window": list(self.window),
        }


# ---------------------------------------------------------------------------

def reduce(state: QuantumState, subsystem: int = 1) -> ReducedDensityMatrix:
    """Partial trace over the other site: rho1 = C C^dag, rho2 = C^T conj(C)."""
    c = state.matrix
    if subsystem == 1:
        rho = c @ c.conj().T
    elif subsystem == 2:
        rho = c.T @ c.conj()
    else:
        raise ValueError("subsystem must be 1 or 2")
    return ReducedDensityMatrix(rho, subsystem)


def _rho_eigenvalues(rho: np.ndarray) -> np.ndarray:
    if np.iscomplexobj(rho) and np.max(np.abs(rho.imag)) > 0:
        # a Hermitian n x n matrix is the real symmetric 2n x 2n [[A, -B], [B, A]],
        # whose spectrum is that of rho with every eigenvalue doubled
        a, b = rho.real, rho.imag
        vals, _ = symmetric_eigh(np.block([[a, -b], [b, a]]), vectors=False)
        return vals[::2]
    vals, _ = symmetric_eigh(np.asarray(rho).real, vectors=False)
    return vals


def entropy_bits(rho: ReducedDensityMatrix | np.ndarray, cutoff: float = 1e-14) -> float:
    """-sum p log2 p over the spectrum of rho, eigenvalues below ``cutoff``
    dropped."""
    entries = rho.entries if isinstance(rho, ReducedDensityMatrix) else np.asarray(rho)
    tr = np.trace(entries).real
    if abs(tr - 1.0) > 1e-8:
        raise ValueError(f"reduced density matrix has trace {tr:.12g}, expected 1")
    p = _rho_eigenvalues(entries)
    p = p[p > cutoff]
    return float(-np.sum(p * np.log2(p)))


def entanglement_entropy(state: QuantumState, subsystem: int = 1) -> float:
    return entropy_bits(reduce(state, subsystem))


def schmidt_entropy_bits(state: QuantumState, cutoff: float = 1e-14) -> float:
    """Entropy from singular values of the coefficient matrix."""
    s = np.linalg.svd(state.matrix, compute_uv=False) ** 2
    s = s[s > cutoff]
    return float(-np.sum(s * np.log2(s)))


def ground_state_of(spin: SpinJ, mu: float, tol: float = DEFAULT_TOL, compute_gap: bool = False):
    """(QuantumState, EigenResult) for H(spin, mu)."""
    res = ground_state(build_hamiltonian(ModelParams(spin, mu)), tol=tol, compute_gap=compute_gap)
    return QuantumState(res.eigenvector, spin), res


def ground_entropy(spin: SpinJ, mu: float, tol: float = DEFAULT_TOL) -> float:
    state, _ = ground_state_of(spin, mu, tol)
    return entanglement_entropy(state)


def _row(spin: SpinJ, mu: float, tol: float, degeneracy_threshold: float) -> SweepRow:
    h = build_hamiltonian(ModelParams(spin, mu))
    try:
        res = ground_state(h, tol=tol, compute_gap=True, degeneracy_threshold=degeneracy_threshold)
    except ConvergenceError as exc:
        log.warning("solver failed at mu=%s: %s", mu, exc)
        return SweepRow(mu, math.nan, math.nan, math.nan, False, failed=True, residual=exc.best_residual, error=str(exc))
    state = QuantumState(res.eigenvector, spin)
    return SweepRow(
        mu=float(mu),
        entropy_bits=entanglement_entropy(state),
        ground_energy=res.eigenvalue,
        gap=res.gap,
        degenerate_flag=res.quasi_degenerate,
        residual=res.residual_norm,
    )


def sweep(
    j,
    mu_grid,
    tol: float = DEFAULT_TOL,
    threads: int = 1,
    degeneracy_threshold: float = DEGENERACY_THRESHOLD,
) -> list[SweepRow]:
    """Ground-state entanglement on each coupling of an ascending grid.

    Solver failures are reported per row (``failed=True``) rather than
    aborting the sweep.
    """
    spin = j if isinstance(j, SpinJ) else SpinJ.from_value(j)
    grid = [float(m) for m in mu_grid]
    if any(b < a for a, b in zip(grid, grid[1:])):
        raise ValueError("mu grid must be sorted ascending")
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(lambda mu: _row(spin, mu, tol, degeneracy_threshold), grid))
    return [_row(spin, mu, tol, degeneracy_threshold) for mu in grid]


def golden_section_max(f, a: float, b: float, c: float, fb: float, tol: float, max_iter: int = 200):
    """Maximize f inside the bracket a < b < c with f(b) >= f(a), f(c).

    Returns ``(x_best, f_best, (lo, hi), evaluations)``.
    """
    evals = 0
    lo, hi = a, c
    x, fx = b, fb
    for _ in range(max_iter):
        if hi - lo < tol:
            break
        # probe the larger sub-interval at the golden fraction
        if x - lo > hi - x:
            u = x - (1 - GOLDEN) * (x - lo)
        else:
            u = x + (1 - GOLDEN) * (hi - x)
        fu = f(u)
        evals += 1
        if fu >= fx:
            if u < x:
                hi = x
            else:
                lo = x
            x, fx = u, fu
        else:
            if u < x:
                lo = u
            else:
                hi = u
    return x, fx, (lo, hi), evals


def find_mu_qc(
    j,
    coarse_step: float = 0.01,
    refine_tol: float = 1e-5,
    window: tuple[float, float] = (0.5, 3.0),
    tol: float = DEFAULT_TOL,
) -> CriticalPointRecord:
    """Coupling of maximal ground-state entanglement.

    A coarse scan over ``window`` locates the grid maximum; golden-section
    search on the bracketing triple refines it until the bracket is narrower
    than ``refine_tol``. A maximum on the window edge means no interior
    peak, reported with ``peak=False``.
    """
    spin = j if isinstance(j, SpinJ) else SpinJ.from_value(j)
    if coarse_step <= 0 or coarse_step > 0.05:
        raise ValueError("coarse_step must lie in (0, 0.05]")
    lo, hi = window
    n = int(round((hi - lo) / coarse_step)) + 1
    grid = np.linspace(lo, hi, n)
    step = float(grid[1] - grid[0])

    def f(mu):
        return ground_entropy(spin, float(mu), tol)

    values = np.array([f(mu) for mu in grid])
    k = int(np.argmax(values))
    if k == 0 or k == n - 1:
        return CriticalPointRecord(
            spin, None, None, None, step, peak=False, window=(lo, hi), evaluations=n,
            notes=[f"maximum on window edge at mu={grid[k]:g}"],
        )
    x, fx, bracket, more = golden_section_max(f, grid[k - 1], grid[k], grid[k + 1], values[k], refine_tol)
    return CriticalPointRecord(spin, float(x), float(fx), (float(bracket[0]), float(bracket[1])), step,
                               window=(lo, hi), evaluations=n + more)
