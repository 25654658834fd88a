r"""Semiclassical dynamics of the coupled tops.

With :math:`L_i = \langle J_i \rangle / j` on the unit spheres the energy per
spin is :math:`E = L_{x1} + L_{x2} + \mu L_{z1} L_{z2}`. Taking expectation
values of the Heisenberg equations :math:`\dot J = i[H, J]` and factorizing
moments gives a precession of each spin about its effective field,

.. math:: \dot L_1 = B_1 \times L_1,\quad B_1 = \nabla_{L_1} E = (1, 0, \mu L_{z2}),

and symmetrically for site 2. In the canonical chart
:math:`(\phi_i, z_i = \cos\theta_i)` the same flow reads
:math:`\dot\phi_i = \partial E/\partial z_i`,
:math:`\dot z_i = -\partial E/\partial \phi_i`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

BRANCHES = ("→→", "←←", "→←", "←→", "A", "B", "C", "D")

ELLIPTIC = "elliptic"
HYPERBOLIC = "hyperbolic"
MARGINAL = "marginal"

CONSTRAINT_TOL = 1e-6
STABILITY_TOL = 1e-8


class ConstraintError(ValueError):
    """A classical state is off the unit spheres."""


class ChartSingularityError(ValueError):
    """A point sits on a pole, where (phi, z) is not a valid chart."""


@dataclass(frozen=True)
class ClassicalState:
    """Pair of unit angular-momentum vectors."""

    L1: np.ndarray
    L2: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "L1", np.asarray(self.L1, dtype=float).reshape(3))
        object.__setattr__(self, "L2", np.asarray(self.L2, dtype=float).reshape(3))

    @classmethod
    def from_array(cls, s) -> "ClassicalState":
        s = np.asarray(s, dtype=float).reshape(6)
        return cls(s[:3], s[3:])

    @classmethod
    def from_angles(cls, theta1, phi1, theta2, phi2) -> "ClassicalState":
        """L = (sin t cos p, sin t sin p, cos t) on each site."""
        return cls(_unit(theta1, phi1), _unit(theta2, phi2))

    def as_array(self) -> np.ndarray:
        return np.concatenate([self.L1, self.L2])

    def constraint_error(self) -> float:
        return max(abs(np.linalg.norm(self.L1) - 1.0), abs(np.linalg.norm(self.L2) - 1.0))

    def normalized(self) -> "ClassicalState":
        return ClassicalState(self.L1 / np.linalg.norm(self.L1), self.L2 / np.linalg.norm(self.L2))

    def to_canonical(self) -> np.ndarray:
        """(phi1, z1, phi2, z2)."""
        return np.array(
            [
                math.atan2(self.L1[1], self.L1[0]),
                self.L1[2],
                math.atan2(self.L2[1], self.L2[0]),
                self.L2[2],
            ]
        )

    @classmethod
    def from_canonical(cls, x) -> "ClassicalState":
        phi1, z1, phi2, z2 = x
        r1 = math.sqrt(max(1.0 - z1 * z1, 0.0))
        r2 = math.sqrt(max(1.0 - z2 * z2, 0.0))
        return cls([r1 * math.cos(phi1), r1 * math.sin(phi1), z1], [r2 * math.cos(phi2), r2 * math.sin(phi2), z2])


def _unit(theta, phi):
    return np.array([math.sin(theta) * math.cos(phi), math.sin(theta) * math.sin(phi), math.cos(theta)])


@dataclass
class FixedPointRecord:
    coords: ClassicalState
    branch: str
    stability: str
    jacobian_eigenvalues: np.ndarray = field(repr=False)
    mu: float = math.nan
    energy: float = math.nan

    def as_dict(self) -> dict:
        ev = self.jacobian_eigenvalues
        return {
            "mu": self.mu,
            "branch": self.branch,
            "stability": self.stability,
            "energy": self.energy,
            "L1": [float(x) for x in self.coords.L1],
            "L2": [float(x) for x in self.coords.L2],
            "eigenvalues_re": [float(x) for x in ev.real],
            "eigenvalues_im": [float(x) for x in ev.imag],
        }


# ---------------------------------------------------------------------------
# energy and flow
# ---------------------------------------------------------------------------

def _check_constraint(s: ClassicalState):
    err = s.constraint_error()
    if err > CONSTRAINT_TOL:
        raise ConstraintError(f"spherical constraint violated by {err:.3g}")


def classical_energy(s: ClassicalState, mu: float) -> float:
    _check_constraint(s)
    return float(s.L1[0] + s.L2[0] + mu * s.L1[2] * s.L2[2])


def _flow(v: np.ndarray, mu: float) -> np.ndarray:
    """Vector field on stacked states, ``v[..., 6]``."""
    l1 = v[..., :3]
    l2 = v[..., 3:]
    b1 = np.zeros_like(l1)
    b2 = np.zeros_like(l2)
    b1[..., 0] = 1.0
    b2[..., 0] = 1.0
    b1[..., 2] = mu * l2[..., 2]
    b2[..., 2] = mu * l1[..., 2]
    return np.concatenate([np.cross(b1, l1), np.cross(b2, l2)], axis=-1)


def equations_of_motion(s: ClassicalState, mu: float) -> ClassicalState:
    """Time derivative (dL1/dt, dL2/dt); returned in a ClassicalState container
    (the derivative is not a unit vector)."""
    _check_constraint(s)
    d = _flow(s.as_array(), mu)
    return ClassicalState(d[:3], d[3:])


def canonical_flow(x: np.ndarray, mu: float) -> np.ndarray:
    """Flow in (phi1, z1, phi2, z2); vectorized over leading axes."""
    x = np.asarray(x, dtype=float)
    phi1, z1, phi2, z2 = np.moveaxis(x, -1, 0)
    r1 = np.sqrt(1.0 - z1**2)
    r2 = np.sqrt(1.0 - z2**2)
    dphi1 = -z1 / r1 * np.cos(phi1) + mu * z2
    dz1 = r1 * np.sin(phi1)
    dphi2 = -z2 / r2 * np.cos(phi2) + mu * z1
    dz2 = r2 * np.sin(phi2)
    return np.stack([dphi1, dz1, dphi2, dz2], axis=-1)


def canonical_jacobian(x: np.ndarray, mu: float) -> np.ndarray:
    """Analytic Jacobian of :func:`canonical_flow` (vectorized)."""
    x = np.asarray(x, dtype=float)
    phi1, z1, phi2, z2 = np.moveaxis(x, -1, 0)
    jac = np.zeros(x.shape[:-1] + (4, 4))
    for (phi, z, p, q) in ((phi1, z1, 0, 1), (phi2, z2, 2, 3)):
        r = np.sqrt(1.0 - z**2)
        # d(dphi)/dphi, d(dphi)/dz
        jac[..., p, p] = z / r * np.sin(phi)
        jac[..., p, q] = -np.cos(phi) / r**3
        # d(dz)/dphi, d(dz)/dz
        jac[..., q, p] = r * np.cos(phi)
        jac[..., q, q] = -z / r * np.sin(phi)
    jac[..., 0, 3] = mu
    jac[..., 2, 1] = mu
    return jac


# ---------------------------------------------------------------------------
# linear stability
# ---------------------------------------------------------------------------

def _charpoly(a: np.ndarray) -> np.ndarray:
    """Characteristic polynomial coefficients [1, c1, ..., cn] by
    Faddeev-LeVerrier."""
    n = a.shape[0]
    coeffs = [1.0]
    m = np.zeros_like(a)
    eye = np.eye(n)
    for k in range(1, n + 1):
        m = a @ m + coeffs[-1] * eye
        coeffs.append(-np.trace(a @ m) / k)
    return np.array(coeffs)


def hamiltonian_eigenvalues(jac: np.ndarray) -> np.ndarray:
    """Eigenvalues of a 4x4 Hamiltonian-flow Jacobian.

    Such spectra are symmetric under lambda -> -lambda, so the characteristic
    polynomial is a quadratic in lambda^2 and is solved in closed form.
    """
    c = _charpoly(np.asarray(jac, dtype=float))
    scale = max(1.0, float(np.max(np.abs(c))))
    if abs(c[1]) > 1e-9 * scale or abs(c[3]) > 1e-9 * scale:
        raise ValueError("Jacobian spectrum is not symmetric under lambda -> -lambda")
    b, cc = complex(c[2]), complex(c[4])
    disc = np.sqrt(b * b - 4 * cc)
    s1 = (-b + disc) / 2
    s2 = (-b - disc) / 2
    roots = []
    for s in (s1, s2):
        r = np.sqrt(s)
        roots.extend([r, -r])
    return np.array(sorted(roots, key=lambda z: (z.real, z.imag)))


def classify(eigenvalues: np.ndarray, tol: float = STABILITY_TOL) -> str:
    re = np.abs(eigenvalues.real)
    if np.all(re < tol) and np.all(np.abs(eigenvalues) > tol):
        return ELLIPTIC
    if np.any(eigenvalues.real > tol):
        return HYPERBOLIC
    return MARGINAL


def linearize_and_classify(fp: ClassicalState, mu: float, branch: str = "") -> FixedPointRecord:
    _check_constraint(fp)
    flow = np.linalg.norm(_flow(fp.as_array(), mu))
    if flow > 1e-10:
        raise ValueError(f"not a fixed point: flow magnitude {flow:.3g}")
    x = fp.to_canonical()
    if max(abs(x[1]), abs(x[3])) >= 1.0 - 1e-12:
        raise ChartSingularityError("fixed point on a pole of the (phi, z) chart")
    ev = hamiltonian_eigenvalues(canonical_jacobian(x, mu))
    return FixedPointRecord(
        coords=fp,
        branch=branch,
        stability=classify(ev),
        jacobian_eigenvalues=ev,
        mu=float(mu),
        energy=classical_energy(fp, mu),
    )


# ---------------------------------------------------------------------------
# fixed points and bifurcation
# ---------------------------------------------------------------------------

def _axial_points() -> list[tuple[str, ClassicalState]]:
    right = [1.0, 0.0, 0.0]
    left = [-1.0, 0.0, 0.0]
    return [
        ("→→", ClassicalState(right, right)),
        ("←←", ClassicalState(left, left)),
        ("→←", ClassicalState(right, left)),
        ("←→", ClassicalState(left, right)),
    ]


def emergent_points(mu: float) -> list[tuple[str, ClassicalState]]:
    """Branches that exist for mu > 1: A, B beside (→→), C, D beside (←←)."""
    if mu <= 1.0:
        return []
    lx = 1.0 / mu
    lz = math.sqrt(1.0 - lx * lx)
    return [
        ("A", ClassicalState([lx, 0.0, lz], [lx, 0.0, lz])),
        ("B", ClassicalState([lx, 0.0, -lz], [lx, 0.0, -lz])),
        ("C", ClassicalState([-lx, 0.0, lz], [-lx, 0.0, -lz])),
        ("D", ClassicalState([-lx, 0.0, -lz], [-lx, 0.0, lz])),
    ]


def enumerate_fixed_points(mu: float) -> list[FixedPointRecord]:
    """All equilibria: four axial points always, four more for mu > 1."""
    if mu < 0:
        raise ValueError("enumerate_fixed_points expects mu >= 0")
    return [linearize_and_classify(s, mu, branch) for branch, s in _axial_points() + emergent_points(mu)]


_SIDES = {"left": ("←←", "C", "D"), "right": ("→→", "A", "B")}


def bifurcation_diagram(mu_lo: float, mu_hi: float, n: int, side: str = "left") -> list[dict]:
    """Rows (mu, branch, Lz1, Lx1, stability) on an n-point grid.

    ``side`` picks the bifurcating axial point: ``"left"`` follows (←←) and
    the C, D branches, ``"right"`` follows (→→) with A, B, and ``"all"``
    lists every equilibrium.
    """
    if not mu_lo < mu_hi:
        raise ValueError("need mu_lo < mu_hi")
    if n < 2:
        raise ValueError("need n >= 2")
    keep = None if side == "all" else _SIDES[side]
    rows = []
    for mu in np.linspace(mu_lo, mu_hi, n):
        mu = float(mu)
        for rec in enumerate_fixed_points(mu):
            if keep is not None and rec.branch not in keep:
                continue
            rows.append(
                {
                    "mu": mu,
                    "branch": rec.branch,
                    "Lz1": float(rec.coords.L1[2]),
                    "Lx1": float(rec.coords.L1[0]),
                    "stability": rec.stability,
                }
            )
    return rows


def newton_fixed_points(mu: float, n_seed: int = 20, tol: float = 1e-12, max_iter: int = 60) -> np.ndarray:
    """Equilibria found by batched Newton iteration from an n_seed^4 grid of
    canonical seeds; returns the distinct solutions as Cartesian 6-vectors."""
    phis = 2 * np.pi * (np.arange(n_seed) + 0.5) / n_seed - np.pi
    zs = -1 + 2 * (np.arange(n_seed) + 0.5) / n_seed
    grid = np.stack(np.meshgrid(phis, zs, phis, zs, indexing="ij"), axis=-1).reshape(-1, 4)
    x = grid.copy()
    alive = np.ones(len(x), dtype=bool)
    for _ in range(max_iter):
        f = canonical_flow(x[alive], mu)
        jac = canonical_jacobian(x[alive], mu)
        with np.errstate(all="ignore"):
            try:
                step = np.linalg.solve(jac, f[..., None])[..., 0]
            except np.linalg.LinAlgError:
                step = np.stack([np.linalg.lstsq(a, b, rcond=None)[0] for a, b in zip(jac, f)])
        xa = x[alive] - step
        xa[:, 0] = (xa[:, 0] + np.pi) % (2 * np.pi) - np.pi
        xa[:, 2] = (xa[:, 2] + np.pi) % (2 * np.pi) - np.pi
        x[alive] = xa
        bad = ~np.isfinite(xa).all(axis=1) | (np.abs(xa[:, 1]) >= 1) | (np.abs(xa[:, 3]) >= 1)
        idx = np.flatnonzero(alive)
        alive[idx[bad]] = False
    ok = alive.copy()
    res = np.full(len(x), np.inf)
    res[ok] = np.linalg.norm(canonical_flow(x[ok], mu), axis=1)
    ok &= res < tol
    states = _canonical_to_cartesian(x[ok])
    # coarse rounding collapses the many seeds that reach one equilibrium
    _, first = np.unique(np.round(states, 6), axis=0, return_index=True)
    distinct: list[np.ndarray] = []
    for s in states[np.sort(first)]:
        if not any(np.max(np.abs(s - t)) < 1e-6 for t in distinct):
            distinct.append(s)
    return np.array(distinct).reshape(-1, 6)


def _canonical_to_cartesian(x: np.ndarray) -> np.ndarray:
    phi1, z1, phi2, z2 = x.T
    r1 = np.sqrt(np.clip(1 - z1**2, 0, None))
    r2 = np.sqrt(np.clip(1 - z2**2, 0, None))
    return np.stack([r1 * np.cos(phi1), r1 * np.sin(phi1), z1, r2 * np.cos(phi2), r2 * np.sin(phi2), z2], axis=1)


# ---------------------------------------------------------------------------
# integrator
# ---------------------------------------------------------------------------

@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray  # (steps + 1, 6)
    energy_drift: float
    constraint_drift: float
    mu: float


def integrate(s0: ClassicalState, mu: float, dt: float, steps: int, renormalize: bool = True) -> Trajectory:
    """Classic RK4 on the cross-product flow, renormalizing each L_i after
    every step. Drifts are maxima over the trajectory."""
    _check_constraint(s0)
    if not math.isfinite(dt * steps):
        raise ValueError("dt * steps must be finite")
    out = np.empty((steps + 1, 6))
    s = s0.as_array()
    out[0] = s
    for k in range(steps):
        k1 = _flow(s, mu)
        k2 = _flow(s + 0.5 * dt * k1, mu)
        k3 = _flow(s + 0.5 * dt * k2, mu)
        k4 = _flow(s + dt * k3, mu)
        s = s + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if renormalize:
            s[:3] /= np.linalg.norm(s[:3])
            s[3:] /= np.linalg.norm(s[3:])
        out[k + 1] = s
    energies = out[:, 0] + out[:, 3] + mu * out[:, 2] * out[:, 5]
    norms = np.stack([np.linalg.norm(out[:, :3], axis=1), np.linalg.norm(out[:, 3:], axis=1)])
    return Trajectory(
        times=dt * np.arange(steps + 1),
        states=out,
        energy_drift=float(np.max(np.abs(energies - energies[0]))),
        constraint_drift=float(np.max(np.abs(norms - 1.0))),
        mu=float(mu),
    )
