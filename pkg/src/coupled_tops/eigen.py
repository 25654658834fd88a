r"""Symmetric eigensolvers for the coupled-tops Hamiltonian.

Three independent routes are provided:

* :func:`ground_state` -- Lanczos with full reorthogonalization on the
  matrix-free product, used for every sweep.
* :func:`full_spectrum` -- Householder tridiagonalization followed by the
  implicit-shift QL iteration, for dense matrices.
* :func:`jacobi_oracle` -- cyclic Jacobi rotations; slow and simple, kept
  as the reference the other two are checked against.

Lanczos start vector
--------------------
After conjugation by the sign pattern :math:`(-1)^{k_1+k_2}` every
off-diagonal element of :math:`H` is non-positive, so the ground state has
that sign pattern and a strictly positive overlap with the vector of equal
magnitudes carrying the same signs. That vector is the fixed start. It is
invariant under SWAP and under the parity :math:`\Pi`, so the Krylov space
never leaves the sector of the ground state: in the quasi-degenerate cat
regime the SWAP-symmetric member is returned deterministically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .model import Hamiltonian, stoquastic_signs

DEFAULT_TOL = 1e-11
DEGENERACY_THRESHOLD = 1e-10
JACOBI_MAX_DIM = 512


class ConvergenceError(RuntimeError):
    """An iterative solver hit its iteration cap."""

    def __init__(self, message: str, best_residual: float = math.inf, iterations: int = 0):
        super().__init__(message)
        self.best_residual = best_residual
        self.iterations = iterations


@dataclass
class EigenResult:
    """Eigenvalues (ascending) with optional eigenvectors stored as columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray | None
    residual_norm: float
    gap: float = math.nan
    iterations: int = 0
    quasi_degenerate: bool = False

    @property
    def eigenvalue(self) -> float:
        return float(self.eigenvalues[0])

    @property
    def eigenvector(self) -> np.ndarray:
        if self.eigenvectors is None:
            raise AttributeError("eigenvectors were not computed")
        return self.eigenvectors[:, 0]


# ---------------------------------------------------------------------------
# Lanczos
# ---------------------------------------------------------------------------

def lanczos_lowest(
    matvec: Callable[[np.ndarray], np.ndarray],
    v0: np.ndarray,
    tol: float = DEFAULT_TOL,
    krylov_dim: int = 200,
    max_restarts: int = 20,
    check_every: int = 4,
    deflate: np.ndarray | None = None,
) -> tuple[float, np.ndarray, float, float, int]:
    """Lowest eigenpair of a symmetric operator.

    Returns ``(eigenvalue, eigenvector, residual, second_ritz, iterations)``.
    ``deflate`` holds orthonormal rows that are projected out of every
    Krylov vector, which turns the solve into one for the lowest state of
    the complement.
    """
    n = v0.shape[0]
    m_max = max(1, min(krylov_dim, n))

    def project(w):
        if deflate is not None:
            w = w - deflate.T @ (deflate @ w)
        return w

    x = project(np.array(v0, dtype=float))
    nrm = np.linalg.norm(x)
    if nrm == 0.0:
        raise ValueError("start vector vanishes after deflation")
    x /= nrm

    iterations = 0
    best = (math.inf, None, None, math.nan)
    breakdown = 1e-14
    for _ in range(max_restarts):
        basis = np.empty((m_max + 1, n))
        basis[0] = x
        alpha = np.empty(m_max)
        beta = np.empty(m_max)
        for k in range(m_max):
            w = matvec(basis[k])
            iterations += 1
            a = basis[k] @ w
            w -= a * basis[k]
            if k > 0:
                w -= beta[k - 1] * basis[k - 1]
            # full reorthogonalization, twice is enough
            for _ in range(2):
                w -= basis[: k + 1].T @ (basis[: k + 1] @ w)
                w = project(w)
            b = np.linalg.norm(w)
            alpha[k] = a
            beta[k] = b

            last = k == m_max - 1
            if not (last or b < breakdown or (k + 1) % check_every == 0):
                basis[k + 1] = w / b
                continue

            if k == 0:
                theta, y = np.array([alpha[0]]), np.ones((1, 1))
            else:
                theta, y = eigh_tridiagonal(alpha[: k + 1], beta[:k], select="i", select_range=(0, min(1, k)))
            estimate = b * abs(y[-1, 0])
            if estimate <= 0.5 * tol or b < breakdown or last:
                ritz = basis[: k + 1].T @ y[:, 0]
                ritz /= np.linalg.norm(ritz)
                hx = matvec(ritz)
                rq = ritz @ hx
                residual = float(np.linalg.norm(hx - rq * ritz))
                second = float(theta[1]) if theta.size > 1 else math.inf
                if residual < best[0]:
                    best = (residual, rq, ritz, second)
                if residual <= tol:
                    return float(rq), ritz, residual, second, iterations
                if b < breakdown or last:
                    x = ritz
                    break
            basis[k + 1] = w / b
    raise ConvergenceError(
        f"Lanczos did not reach residual {tol:g} (best {best[0]:.3g}) after {iterations} products",
        best_residual=best[0],
        iterations=iterations,
    )


def _start_vector(h: Hamiltonian) -> np.ndarray:
    return stoquastic_signs(h.params.j).ravel() / h.site_dim


def _excited_start(h: Hamiltonian) -> np.ndarray:
    # breaks SWAP and parity so that every symmetry sector is represented
    d = h.site_dim
    k = np.arange(d)
    ramp = 1.0 + (k[:, None] + 2.0 * k[None, :] + 1.0) / (3.0 * d)
    return (stoquastic_signs(h.params.j) * ramp).ravel()


def ground_state(
    h: Hamiltonian,
    tol: float = DEFAULT_TOL,
    compute_gap: bool = True,
    degeneracy_threshold: float = DEGENERACY_THRESHOLD,
    krylov_dim: int = 200,
    max_restarts: int = 20,
) -> EigenResult:
    """Lowest eigenpair of ``h`` by Lanczos on the matrix-free product.

    With ``compute_gap`` a second Lanczos run, deflated against the ground
    vector and started outside the ground-state symmetry sector, gives the
    first excited energy; the reported gap is the distance to it. Gaps below
    ``degeneracy_threshold`` set ``quasi_degenerate``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    energy, vec, residual, second, iters = lanczos_lowest(
        h.matvec, _start_vector(h), tol=tol, krylov_dim=krylov_dim, max_restarts=max_restarts
    )
    # fix the global sign: positive overlap with the start vector
    if vec @ _start_vector(h) < 0:
        vec = -vec
    gap = second - energy
    if compute_gap and h.dim > 1:
        e1, _, _, _, more = lanczos_lowest(
            h.matvec,
            _excited_start(h),
            tol=max(tol, 1e-9),
            krylov_dim=krylov_dim,
            max_restarts=max_restarts,
            deflate=vec[None, :],
        )
        iters += more
        gap = min(gap, e1 - energy)
    gap = max(gap, 0.0)
    return EigenResult(
        eigenvalues=np.array([energy]),
        eigenvectors=vec[:, None],
        residual_norm=residual,
        gap=gap,
        iterations=iters,
        quasi_degenerate=bool(compute_gap and gap < degeneracy_threshold),
    )


def first_excited(h: Hamiltonian, ground: EigenResult, tol: float = DEFAULT_TOL) -> EigenResult:
    """Lowest eigenpair orthogonal to ``ground``."""
    g = ground.eigenvector
    energy, vec, residual, _, iters = lanczos_lowest(
        h.matvec, _excited_start(h), tol=tol, deflate=g[None, :]
    )
    return EigenResult(np.array([energy]), vec[:, None], residual, iterations=iters)


# ---------------------------------------------------------------------------
# Householder + implicit QL
# ---------------------------------------------------------------------------

def householder_tridiagonalize(a: np.ndarray, want_q: bool = True):
    """Reduce symmetric ``a`` to tridiagonal form, ``a = Q T Q^T``.

    Returns ``(diag, offdiag, Q)`` with ``Q`` None when not requested.
    """
    t = np.array(a, dtype=float)
    n = t.shape[0]
    q = np.eye(n) if want_q else None
    for k in range(n - 2):
        x = t[k + 1 :, k]
        tail = np.linalg.norm(x[1:])
        if tail == 0.0:
            continue
        alpha = -math.copysign(math.hypot(x[0], tail), x[0])
        v = x.copy()
        v[0] -= alpha
        v /= np.linalg.norm(v)
        sub = t[k + 1 :, k + 1 :]
        p = sub @ v
        w = p - (v @ p) * v
        sub -= 2.0 * (np.outer(v, w) + np.outer(w, v))
        t[k + 1, k] = t[k, k + 1] = alpha
        t[k + 2 :, k] = 0.0
        t[k, k + 2 :] = 0.0
        if q is not None:
            q[:, k + 1 :] -= 2.0 * np.outer(q[:, k + 1 :] @ v, v)
    return np.diag(t).copy(), np.diag(t, 1).copy(), q


def tridiagonal_ql(diag: np.ndarray, offdiag: np.ndarray, z: np.ndarray | None = None, max_iter: int = 60):
    """Implicit-shift QL on a symmetric tridiagonal matrix.

    ``z`` (n x n), when given, is overwritten with ``z @ eigenvectors``;
    pass the Householder ``Q`` to get eigenvectors of the original matrix.
    Returns eigenvalues and vectors sorted ascending.
    """
    d = [float(x) for x in diag]
    n = len(d)
    e = [float(x) for x in offdiag] + [0.0]
    # rows of zt are the columns of z
    zt = None if z is None else np.ascontiguousarray(np.asarray(z, dtype=float).T)
    eps = np.finfo(float).eps
    for l in range(n):
        it = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= eps * dd:
                    break
                m += 1
            if m == l:
                break
            it += 1
            if it > max_iter:
                raise ConvergenceError(f"QL did not converge for eigenvalue {l}", iterations=it)
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + math.copysign(r, g))
            s = c = 1.0
            p = 0.0
            i = m - 1
            underflow = False
            while i >= l:
                f = s * e[i]
                b = c * e[i]
                r = math.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    underflow = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                if zt is not None:
                    zi = zt[i].copy()
                    zt[i] = c * zi - s * zt[i + 1]
                    zt[i + 1] = s * zi + c * zt[i + 1]
                i -= 1
            if underflow:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0
    vals = np.array(d)
    order = np.argsort(vals, kind="stable")
    vecs = None if zt is None else zt[order].T.copy()
    return vals[order], vecs


def symmetric_eigh(a: np.ndarray, vectors: bool = True):
    """Dense symmetric eigendecomposition via Householder + QL."""
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("expected a square matrix")
    if np.iscomplexobj(a):
        if np.max(np.abs(a.imag)) > 0:
            raise ValueError("symmetric_eigh handles real matrices only")
        a = a.real
    if a.shape[0] == 0:
        return np.empty(0), (np.empty((0, 0)) if vectors else None)
    d, e, q = householder_tridiagonalize(a, want_q=vectors)
    return tridiagonal_ql(d, e, q)


def _dense(h) -> np.ndarray:
    return h.dense if isinstance(h, Hamiltonian) else np.asarray(h, dtype=float)


def full_spectrum(h: Hamiltonian | np.ndarray, vectors: bool = False) -> EigenResult:
    """All eigenvalues (ascending) of the dense form."""
    a = _dense(h)
    vals, vecs = symmetric_eigh(a, vectors=vectors)
    residual = 0.0
    if vecs is not None:
        residual = float(np.max(np.linalg.norm(a @ vecs - vecs * vals, axis=0)))
    gap = float(vals[1] - vals[0]) if vals.size > 1 else math.nan
    return EigenResult(vals, vecs, residual, gap=gap)


# ---------------------------------------------------------------------------
# Jacobi oracle
# ---------------------------------------------------------------------------

def jacobi_oracle(h: Hamiltonian | np.ndarray, tol: float = 1e-13, max_sweeps: int = 100) -> EigenResult:
    """Cyclic Jacobi eigen-decomposition; the off-diagonal Frobenius norm is
    driven below ``tol * max(1, ||A||_F)``."""
    a = np.array(_dense(h), dtype=float)
    n = a.shape[0]
    if n > JACOBI_MAX_DIM:
        raise ValueError(f"jacobi_oracle is limited to dim <= {JACOBI_MAX_DIM}, got {n}")
    if not np.allclose(a, a.T, atol=1e-14, rtol=0):
        raise ValueError("matrix is not symmetric")
    v = np.eye(n)
    target = tol * max(1.0, float(np.linalg.norm(a)))
    sweeps = 0

    off_mask = ~np.eye(n, dtype=bool)

    def off_norm():
        # summed directly; sum(A^2) - sum(diag^2) cancels catastrophically
        return float(np.linalg.norm(a[off_mask]))

    while off_norm() > target:
        sweeps += 1
        if sweeps > max_sweeps:
            raise ConvergenceError("Jacobi sweeps exhausted", best_residual=off_norm(), iterations=sweeps)
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= 1e-300 + 1e-18 * (abs(a[p, p]) + abs(a[q, q])):
                    a[p, q] = a[q, p] = 0.0
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = math.copysign(1.0, theta) / (abs(theta) + math.hypot(theta, 1.0))
                c = 1.0 / math.hypot(t, 1.0)
                s = t * c
                cp = a[:, p].copy()
                a[:, p] = c * cp - s * a[:, q]
                a[:, q] = s * cp + c * a[:, q]
                rp = a[p, :].copy()
                a[p, :] = c * rp - s * a[q, :]
                a[q, :] = s * rp + c * a[q, :]
                a[p, q] = a[q, p] = 0.0
                vp = v[:, p].copy()
                v[:, p] = c * vp - s * v[:, q]
                v[:, q] = s * vp + c * v[:, q]
    vals = np.diag(a).copy()
    order = np.argsort(vals, kind="stable")
    vals = vals[order]
    v = v[:, order]
    gap = float(vals[1] - vals[0]) if n > 1 else math.nan
    return EigenResult(vals, v, off_norm(), gap=gap, iterations=sweeps)
