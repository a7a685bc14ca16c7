"""Oscillator, qubit and spin-J operators as dense numpy matrices.

Conventions
-----------
* Composite states are indexed qubit-major: ``index = qubit_level * cavity_dim + fock``
  (see :data:`BASIS_ORDER`), so the qubit factor always comes first in :func:`tensor`.
* Qubit level 0 is the ground state ``|g>``. ``sigma_z = diag(1, -1)`` and
  ``sigma_minus = |g><e|``.
* A spin-J manifold is stored in Fock order, ``|n> = |J, m = n - J>``: the
  vacuum is the south pole ``m = -J``.
* ``x = (a + a^dagger) / sqrt(2)``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

import numpy as np

from .errors import (
    DegenerateSpin,
    HermiticityViolation,
    InvalidDimension,
    InvalidQuantumNumbers,
    InvalidRank,
)

BASIS_ORDER = "qubit-major"
"""Composite index layout: ``qubit_level * cavity_dim + fock``."""

HERMITIAN_TOL = 1e-10


@dataclass(frozen=True)
class SpinQuantum:
    """Spin quantum number stored as the integer ``two_j = 2J``."""

    two_j: int

    def __post_init__(self):
        if int(self.two_j) != self.two_j or self.two_j < 0:
            raise InvalidQuantumNumbers(f"two_j must be a non-negative integer, got {self.two_j}")
        object.__setattr__(self, "two_j", int(self.two_j))

    @property
    def j(self) -> float:
        return self.two_j / 2

    @property
    def dim(self) -> int:
        return self.two_j + 1

    def m_values(self) -> np.ndarray:
        """m for each Fock index n = 0..2J."""
        return np.arange(self.dim) - self.j

    def __str__(self):
        return f"{self.two_j}/2" if self.two_j % 2 else str(self.two_j // 2)


SpinLike = Union[SpinQuantum, int, float, Fraction]


def as_spin(J: SpinLike) -> SpinQuantum:
    """Coerce ``J`` (a SpinQuantum or a number such as 1.5) to SpinQuantum."""
    if isinstance(J, SpinQuantum):
        return J
    two_j = 2 * Fraction(J).limit_denominator(4)
    if two_j.denominator != 1:
        raise InvalidQuantumNumbers(f"J must be a multiple of 1/2, got {J}")
    return SpinQuantum(int(two_j))


# ---------------------------------------------------------------- oscillator

def annihilation(dim: int) -> np.ndarray:
    """Truncated lowering operator with ``a[n-1, n] = sqrt(n)``."""
    if dim < 2:
        raise InvalidDimension(f"oscillator dimension must be >= 2, got {dim}")
    return np.diag(np.sqrt(np.arange(1, dim)), 1).astype(complex)


def creation(dim: int) -> np.ndarray:
    return annihilation(dim).conj().T


def number(dim: int) -> np.ndarray:
    if dim < 1:
        raise InvalidDimension(f"dimension must be >= 1, got {dim}")
    return np.diag(np.arange(dim)).astype(complex)


def position(dim: int) -> np.ndarray:
    """Quadrature ``x = (a + a^dagger)/sqrt(2)``."""
    a = annihilation(dim)
    return (a + a.conj().T) / np.sqrt(2)


def parity(dim: int) -> np.ndarray:
    """Photon parity ``exp(i pi n)``."""
    return np.diag((-1.0) ** np.arange(dim)).astype(complex)


def identity(dim: int) -> np.ndarray:
    return np.eye(dim, dtype=complex)


def fock(dim: int, n: int) -> np.ndarray:
    if not 0 <= n < dim:
        raise InvalidDimension(f"Fock index {n} outside dimension {dim}")
    v = np.zeros(dim, dtype=complex)
    v[n] = 1.0
    return v


def projector(vec: np.ndarray) -> np.ndarray:
    vec = np.asarray(vec, dtype=complex)
    return np.outer(vec, vec.conj())


# ---------------------------------------------------------------- qubit

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
SIGMA_MINUS = np.array([[0, 1], [0, 0]], dtype=complex)  # |g><e|
SIGMA_PLUS = SIGMA_MINUS.T.copy()


def pauli(label: str) -> np.ndarray:
    table = {"x": SIGMA_X, "y": SIGMA_Y, "z": SIGMA_Z, "-": SIGMA_MINUS, "+": SIGMA_PLUS, "i": np.eye(2)}
    return np.array(table[label.lower()], dtype=complex)


# ---------------------------------------------------------------- spin J

def spin_lowering(J: SpinLike) -> np.ndarray:
    """``J_-`` in Fock order; ``J_-[n-1, n] = sqrt(J(J+1) - m(m-1))`` with ``m = n - J``."""
    s = as_spin(J)
    if s.two_j == 0:
        raise DegenerateSpin("J = 0 has no ladder operators")
    j = s.j
    m = s.m_values()[1:]
    return np.diag(np.sqrt(j * (j + 1) - m * (m - 1)), 1).astype(complex)


def spin_raising(J: SpinLike) -> np.ndarray:
    return spin_lowering(J).conj().T


def spin_x(J: SpinLike) -> np.ndarray:
    jm = spin_lowering(J)
    return (jm + jm.conj().T) / 2


def spin_y(J: SpinLike) -> np.ndarray:
    jm = spin_lowering(J)
    return 1j * (jm - jm.conj().T) / 2


def spin_z(J: SpinLike) -> np.ndarray:
    return np.diag(as_spin(J).m_values()).astype(complex)


def spin_ops(J: SpinLike):
    """Return ``(Jx, Jy, Jz)``."""
    return spin_x(J), spin_y(J), spin_z(J)


def spin_rotation(J: SpinLike, angle: float, axis) -> np.ndarray:
    """``exp(-i angle n.J)`` for a unit vector ``axis = (nx, ny, nz)``."""
    jx, jy, jz = spin_ops(J)
    nx, ny, nz = np.asarray(axis, dtype=float) / np.linalg.norm(axis)
    return unitary_exp(nx * jx + ny * jy + nz * jz, angle)


# ---------------------------------------------------------------- algebra

def tensor(*ops: np.ndarray) -> np.ndarray:
    """Kronecker product, leftmost factor outermost (qubit first by convention)."""
    out = np.asarray(ops[0])
    for op in ops[1:]:
        out = np.kron(out, op)
    return out


def is_hermitian(H: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    return bool(np.max(np.abs(H - H.conj().T), initial=0.0) <= tol)


def dagger(op: np.ndarray) -> np.ndarray:
    return op.conj().T


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def unitary_exp(H: np.ndarray, t: float = 1.0) -> np.ndarray:
    """``exp(-i t H)`` for Hermitian ``H`` via eigendecomposition."""
    H = np.asarray(H, dtype=complex)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise InvalidDimension(f"expected a square matrix, got shape {H.shape}")
    if not is_hermitian(H):
        raise HermiticityViolation("unitary_exp requires a Hermitian generator")
    w, v = np.linalg.eigh((H + H.conj().T) / 2)
    return (v * np.exp(-1j * t * w)) @ v.conj().T


def displacement(alpha: complex, dim: int) -> np.ndarray:
    """Truncated ``exp(alpha a^dagger - alpha^* a)``.

    Built as ``exp(-i H)`` with the Hermitian ``H = i(alpha a^dagger - alpha^* a)``.
    The truncated operator is exactly unitary but deviates from the infinite
    one in the top Fock levels.
    """
    if abs(alpha) ** 2 > dim / 4:
        warnings.warn(f"|alpha|^2 = {abs(alpha) ** 2:.3g} is large for dimension {dim}", stacklevel=2)
    a = annihilation(dim)
    gen = 1j * (alpha * a.conj().T - np.conj(alpha) * a)
    return unitary_exp(gen, 1.0)


# ---------------------------------------------------------------- angular momentum coupling

def _two(x) -> int:
    """Return 2x as an int, raising if x is not a half-integer."""
    t = 2 * Fraction(x).limit_denominator(1000)
    if t.denominator != 1 or abs(float(t) - 2 * float(x)) > 1e-9:
        raise InvalidQuantumNumbers(f"{x} is not a half-integer")
    return int(t)


def clebsch_gordan(j1, m1, j2, m2, J, M) -> float:
    """``<j1 m1; j2 m2 | J M>`` via the Racah sum (Condon-Shortley phases).

    Returns 0 for any combination violating the selection rules.
    """
    tj1, tm1, tj2, tm2, tJ, tM = (_two(x) for x in (j1, m1, j2, m2, J, M))
    if min(tj1, tj2, tJ) < 0:
        return 0.0
    if tm1 + tm2 != tM:
        return 0.0
    if abs(tm1) > tj1 or abs(tm2) > tj2 or abs(tM) > tJ:
        return 0.0
    if (tj1 + tm1) % 2 or (tj2 + tm2) % 2 or (tJ + tM) % 2:
        return 0.0
    if tJ < abs(tj1 - tj2) or tJ > tj1 + tj2 or (tj1 + tj2 + tJ) % 2:
        return 0.0

    def lf(two_x: int) -> float:
        return math.lgamma(two_x // 2 + 1)

    # all arguments below are even integers (twice an integer)
    log_pre = 0.5 * (
        math.log(tJ + 1)
        + lf(tJ + tj1 - tj2) + lf(tJ - tj1 + tj2) + lf(tj1 + tj2 - tJ) - lf(tj1 + tj2 + tJ + 2)
        + lf(tJ + tM) + lf(tJ - tM)
        + lf(tj1 - tm1) + lf(tj1 + tm1) + lf(tj2 - tm2) + lf(tj2 + tm2)
    )
    kmin = max(0, (tj2 - tJ - tm1) // 2, (tj1 - tJ + tm2) // 2)
    kmax = min((tj1 + tj2 - tJ) // 2, (tj1 - tm1) // 2, (tj2 + tm2) // 2)
    total = 0.0
    for k in range(kmin, kmax + 1):
        tk = 2 * k
        log_den = (
            lf(tk) + lf(tj1 + tj2 - tJ - tk) + lf(tj1 - tm1 - tk) + lf(tj2 + tm2 - tk)
            + lf(tJ - tj2 + tm1 + tk) + lf(tJ - tj1 - tm2 + tk)
        )
        total += (-1) ** k * math.exp(log_pre - log_den)
    return total


def spherical_tensor(k: int, q: int, J: SpinLike) -> np.ndarray:
    """Irreducible tensor ``T^k_q(J)`` in Fock order, orthonormal under the trace inner product.

    ``T^k_q = sqrt((2k+1)/(2J+1)) sum_m C^{J, m+q}_{k q; J m} |m+q><m|``.
    """
    s = as_spin(J)
    if not (0 <= k <= s.two_j) or abs(q) > k:
        raise InvalidRank(f"need 0 <= k <= 2J and |q| <= k, got k={k}, q={q}, 2J={s.two_j}")
    j = s.j
    out = np.zeros((s.dim, s.dim), dtype=complex)
    pre = math.sqrt((2 * k + 1) / (2 * j + 1))
    for col, m in enumerate(s.m_values()):
        row = col + q
        if 0 <= row < s.dim:
            out[row, col] = pre * clebsch_gordan(k, q, j, m, j, m + q)
    return out
