"""Matrix-element modification: phase combs, effective generators, decoder phases.

A comb of qubit drive phases ``phi_0..phi_N`` rescales the oscillator ladder
elements to ``sqrt(n) cos(dphi_n / 2)`` with ``dphi_n = phi_n - phi_{n-1}``.
The resulting generator is

    M = sum_n sqrt(n) cos(dphi_n / 2) |n-1><n|,    M_phi = e^{-i phi} M + e^{i phi} M^dagger.

Rotation convention used across the package: ``U(theta) = exp(-i theta/2 M_phi)``.
With a cavity drive of rate ``eps`` applied for time ``t`` the angle is
``theta = eps * t`` (see :func:`rotation_angle`). For the SU(2) comb,
``M_0 = 2 Jx / sqrt(2J)``, so ``U(theta)`` is a spin rotation by ``theta / sqrt(2J)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DecompositionFailure, DegenerateSpin, InvalidDimension, UnreachableMatrixElement
from .operators import SpinLike, as_spin, spin_lowering, spin_z, unitary_exp

ELEMENT_SLACK = 1e-12


@dataclass(frozen=True)
class PhaseComb:
    """Qubit comb phases ``phi_0..phi_N`` (radians)."""

    phases: tuple

    def __post_init__(self):
        ph = tuple(float(p) for p in self.phases)
        if len(ph) < 2:
            raise InvalidDimension("a phase comb needs at least two phases")
        object.__setattr__(self, "phases", ph)

    @property
    def manifold_size(self) -> int:
        return len(self.phases)

    @property
    def deltas(self) -> np.ndarray:
        """``dphi_n`` for n = 1..N."""
        return np.diff(np.asarray(self.phases))

    def elements(self) -> np.ndarray:
        """Modified ladder elements ``sqrt(n) cos(dphi_n / 2)``, n = 1..N."""
        n = np.arange(1, self.manifold_size)
        return np.sqrt(n) * np.cos(self.deltas / 2)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.phases, dtype=dtype)


@dataclass(frozen=True)
class NonlinearCoeffs:
    """Coefficients ``c_1..c_{2J}`` of ``M = sum_k c_k [J_-, Jz^k]``."""

    c: tuple

    def __post_init__(self):
        object.__setattr__(self, "c", tuple(float(x) for x in self.c))

    @property
    def two_j(self) -> int:
        return len(self.c)

    def __len__(self):
        return len(self.c)

    def __iter__(self):
        return iter(self.c)

    def __getitem__(self, i):
        return self.c[i]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.c, dtype=dtype)


def rotation_angle(eps: float, t: float) -> float:
    """Angle ``theta`` reached by a cavity drive of rate ``eps`` (rad/s) after ``t`` seconds."""
    return eps * t


def rotation(M_phi: np.ndarray, theta: float) -> np.ndarray:
    """``U(theta) = exp(-i theta/2 M_phi)``."""
    return unitary_exp(M_phi, theta / 2)


def with_phase(M: np.ndarray, varphi: float) -> np.ndarray:
    """``e^{-i varphi} M + e^{i varphi} M^dagger``."""
    M = np.asarray(M, dtype=complex)
    return np.exp(-1j * varphi) * M + np.exp(1j * varphi) * M.conj().T


def su2_phases(J: SpinLike) -> PhaseComb:
    """Comb turning the oscillator ladder into spin-J ladder elements.

    ``phi_0 = 0`` and ``phi_n = phi_{n-1} + 2 arccos(sqrt((2J+1-n)/(2J)))``.
    """
    s = as_spin(J)
    if s.two_j == 0:
        raise DegenerateSpin("J = 0 has no comb")
    n = np.arange(1, s.two_j + 1)
    ratio = np.clip((s.two_j + 1 - n) / s.two_j, 0.0, 1.0)
    steps = 2 * np.arccos(np.sqrt(ratio))
    return PhaseComb(tuple(np.concatenate([[0.0], np.cumsum(steps)])))


def blockade_phases(manifold_size: int) -> PhaseComb:
    """All-zero comb: unmodified elements inside the manifold (photon blockade)."""
    return PhaseComb((0.0,) * manifold_size)


def generator_from_elements(elements: Sequence[float], varphi: float = 0.0) -> np.ndarray:
    """Hermitian ``M_phi`` from ladder elements ``<n-1|M|n>``, n = 1..N."""
    return with_phase(np.diag(np.asarray(elements, dtype=complex), 1), varphi)


def generator_from_phases(comb: PhaseComb, varphi: float = 0.0) -> np.ndarray:
    """``M_phi`` for a phase comb."""
    return generator_from_elements(comb.elements(), varphi)


def phases_from_matrix_elements(elements: Sequence[float]) -> PhaseComb:
    """Invert ``e_n = sqrt(n) cos(dphi_n/2)`` with ``phi_0 = 0``.

    ``dphi_n = 2 arccos(e_n / sqrt(n))`` lies in ``[0, pi]`` for non-negative
    elements and in ``(pi, 2 pi]`` for negative ones.
    """
    e = np.asarray(elements, dtype=float)
    if e.ndim != 1 or e.size < 1:
        raise InvalidDimension("need at least one matrix element")
    root_n = np.sqrt(np.arange(1, e.size + 1))
    bad = np.flatnonzero(np.abs(e) > root_n + ELEMENT_SLACK)
    if bad.size:
        n = int(bad[0]) + 1
        raise UnreachableMatrixElement(
            f"element {e[bad[0]]:.6g} at n={n} exceeds sqrt({n}); modification can only shrink elements"
        )
    deltas = 2 * np.arccos(np.clip(e / root_n, -1.0, 1.0))
    return PhaseComb(tuple(np.concatenate([[0.0], np.cumsum(deltas)])))


def _commutator_basis(J: SpinLike) -> np.ndarray:
    """Columns k-1 hold the super-diagonal of ``[J_-, Jz^k]``, k = 1..2J."""
    s = as_spin(J)
    jm = np.real(np.diag(spin_lowering(s), 1))
    m = s.m_values()[1:]  # m of the upper state of each transition
    ks = np.arange(1, s.two_j + 1)
    return jm[:, None] * (m[:, None] ** ks - (m[:, None] - 1) ** ks)


def nonlinear_generator(c, J: SpinLike, varphi: float = 0.0) -> np.ndarray:
    """``M_phi`` for ``M = sum_k c_k [J_-, Jz^k]``."""
    s = as_spin(J)
    c = np.asarray(c, dtype=float)
    if c.shape != (s.two_j,):
        raise InvalidDimension(f"need {s.two_j} coefficients for J={s}, got {c.size}")
    jm = spin_lowering(s)
    jz = np.real(np.diag(spin_z(s)))
    M = np.zeros_like(jm)
    for k, ck in enumerate(c, start=1):
        zk = np.diag(jz**k)
        M += ck * (jm @ zk - zk @ jm)
    return with_phase(M, varphi)


def coeffs_from_generator(M: np.ndarray, J: SpinLike) -> NonlinearCoeffs:
    """Solve for ``c_k`` reproducing the ladder elements of ``M``.

    ``M`` may be the one-sided ladder matrix or the Hermitian ``M_phi`` at
    ``varphi = 0``; only the super-diagonal ``M[n-1, n]`` is read.
    """
    s = as_spin(J)
    M = np.asarray(M)
    if M.shape != (s.dim, s.dim):
        raise InvalidDimension(f"expected {s.dim}x{s.dim}, got {M.shape}")
    upper = np.diag(M, 1)
    if np.max(np.abs(upper.imag), initial=0.0) > 1e-12:
        raise DecompositionFailure("ladder elements must be real (varphi = 0)")
    if not np.any(upper) and np.any(np.diag(M, -1)):
        upper = np.diag(M, -1).conj()
    basis = _commutator_basis(s)
    if np.linalg.cond(basis) > 1e12:
        raise DecompositionFailure("commutator basis is singular")
    return NonlinearCoeffs(tuple(np.linalg.solve(basis, upper.real)))


def coeffs_from_elements(elements: Sequence[float], J: SpinLike) -> NonlinearCoeffs:
    return NonlinearCoeffs(tuple(np.linalg.solve(_commutator_basis(J), np.asarray(elements, dtype=float))))


def elements_from_coeffs(c, J: SpinLike) -> np.ndarray:
    return _commutator_basis(J) @ np.asarray(c, dtype=float)


def coeffs_from_top_ordered(c) -> NonlinearCoeffs:
    """Convert coefficients quoted with spin operators indexed from ``m = +J``.

    Indexing the manifold from the top flips ``Jz -> -Jz`` and ``J_- -> J_+``,
    which maps ``c_k -> (-1)^(k+1) c_k`` up to an overall sign of ``M``.
    That sign leaves every reflection ``U(2 pi / |lambda_min|)`` unchanged.
    """
    c = np.asarray(c, dtype=float)
    signs = (-1.0) ** np.arange(c.size)
    return NonlinearCoeffs(tuple(signs * c))


def decoder_snap_phases(comb: PhaseComb) -> np.ndarray:
    """Per-Fock phases ``phi_n / 2`` applied by the decoder SNAP."""
    return np.asarray(comb.phases) / 2
