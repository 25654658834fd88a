"""Spin-j angular momentum matrices in the J_z eigenbasis.

Basis order is fixed to ascending m = -j, ..., +j everywhere in the package,
and composite indices are row-major with subsystem 1 as the slow index::

    index(m, n) = (j + m) * (2j + 1) + (j + n)

so a product-basis vector reshapes to a (2j+1, 2j+1) coefficient matrix whose
rows belong to subsystem 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

#: Largest Kronecker-product dimension we are willing to materialize densely.
MAX_DENSE_DIM = 4096


class DimensionError(ValueError):
    """A dense object would exceed the configured dimension cap."""


@dataclass(frozen=True, order=True)
class SpinJ:
    """Total spin quantum number stored as the integer ``2j``."""

    twice_j: int

    def __post_init__(self):
        if not isinstance(self.twice_j, (int, np.integer)) or isinstance(self.twice_j, bool):
            raise TypeError(f"twice_j must be an integer, got {self.twice_j!r}")
        if self.twice_j < 0:
            raise ValueError(f"twice_j must be non-negative, got {self.twice_j}")
        object.__setattr__(self, "twice_j", int(self.twice_j))

    @classmethod
    def from_value(cls, j) -> "SpinJ":
        """Build from j itself (``0.5``, ``"7/2"``, ``Fraction(3, 2)`` ...)."""
        two_j = Fraction(j) * 2
        if two_j.denominator != 1:
            raise ValueError(f"j must be an integer or half-integer, got {j!r}")
        return cls(int(two_j))

    @property
    def j(self) -> Fraction:
        return Fraction(self.twice_j, 2)

    @property
    def value(self) -> float:
        return self.twice_j / 2

    def dim(self) -> int:
        return self.twice_j + 1

    def m_values(self) -> np.ndarray:
        """Magnetic quantum numbers in basis order."""
        return (np.arange(self.dim()) * 2 - self.twice_j) / 2

    def __str__(self):
        return str(self.j)


def _as_spin(j) -> SpinJ:
    return j if isinstance(j, SpinJ) else SpinJ.from_value(j)


def build_jz(j) -> np.ndarray:
    """Diagonal J_z with entries -j, ..., +j."""
    return np.diag(_as_spin(j).m_values())


def build_jplus(j) -> np.ndarray:
    """Raising operator, J_+|j,m> = sqrt(j(j+1) - m(m+1)) |j,m+1>.

    In the ascending basis the nonzero band is the subdiagonal: the
    element ``J_+[k + 1, k]`` maps the k-th basis state onto the next one.
    """
    spin = _as_spin(j)
    # 4*(j(j+1) - m(m+1)) = (2j - 2m)(2j + 2m + 2) in exact integers
    two_m = np.arange(spin.dim() - 1) * 2 - spin.twice_j
    band = np.sqrt((spin.twice_j - two_m) * (spin.twice_j + two_m + 2)) / 2
    return np.diag(band, -1)


def build_jx_jy(j) -> tuple[np.ndarray, np.ndarray]:
    """Return (J_x, J_y); J_x is real symmetric, J_y purely imaginary."""
    jp = build_jplus(j)
    jm = jp.T
    jx = (jp + jm) / 2
    jy = (jp - jm) / 2j
    return jx, jy


def spin_operators(j) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(J_x, J_y, J_z) for a single site."""
    jx, jy = build_jx_jy(j)
    return jx, jy, build_jz(j)


def kron(a: np.ndarray, b: np.ndarray, max_dim: int = MAX_DENSE_DIM) -> np.ndarray:
    """Kronecker product with a guard on the resulting dimension."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or b.ndim != 2 or b.shape[0] != b.shape[1]:
        raise ValueError("kron expects two square matrices")
    dim = a.shape[0] * b.shape[0]
    if dim > max_dim:
        raise DimensionError(f"kron dimension {dim} exceeds cap {max_dim}")
    return np.kron(a, b)


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a
