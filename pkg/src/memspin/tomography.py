"""Bosonic and spin Wigner functions, and the emulated spin-Wigner measurement.

Both Wigner functions use the parity-kernel normalisation ``W = Tr[Delta rho]``
with ``Delta = 2 D P D^dagger`` for the oscillator. This is ``pi`` times the
usual quasi-probability density, so the bosonic values lie in ``[-2, 2]``
and match the large-J limit of the spin kernel.

The spin kernel is diagonal in the Fock (``m = n - J``) basis::

    Delta_m = sum_{l=0}^{2J} (2l+1)/(2J+1) <J m; l 0 | J m>

and is moved around the sphere by ``R(theta, phi) = exp(i theta (cos phi Jx + sin phi Jy))``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.special import eval_genlaguerre, gammaln

from .errors import InvalidDimension, ManifoldLeakage
from .operators import (
    SpinLike,
    SpinQuantum,
    as_spin,
    clebsch_gordan,
    spin_ops,
    unitary_exp,
)

LEAKAGE_TOL = 1e-6
TRUNCATION_WARN = 1e-4


@dataclass
class WignerGrid:
    """Wigner values on a grid.

    ``kind`` is ``"bosonic"`` (``axes = (alphas,)``) or ``"spin"``
    (``axes = (theta, phi)``, broadcast against each other).
    """

    kind: str
    axes: Tuple[np.ndarray, ...]
    values: np.ndarray


# ---------------------------------------------------------------- bosonic

def _fock_wigner_term(m: int, n: int, alpha: np.ndarray) -> np.ndarray:
    """``<m| 2 D(alpha) P D(alpha)^dagger |n>`` for ``m >= n`` at every point of ``alpha``.

    Closed form through generalised Laguerre polynomials, exact for any ``alpha``.
    The ``n > m`` entries follow from Hermiticity.
    """
    x = 4 * np.abs(alpha) ** 2
    k = m - n
    log_ratio = 0.5 * (gammaln(n + 1) - gammaln(m + 1))
    return 2 * (-1) ** n * np.exp(log_ratio - x / 2) * eval_genlaguerre(n, k, x) * (2 * alpha) ** k


def bosonic_wigner(rho_c: np.ndarray, alphas) -> WignerGrid:
    """``W(alpha) = 2 Tr[D(alpha) P D(alpha)^dagger rho]`` for a cavity state.

    Warns when the top Fock level holds more than 1e-4 population, since the
    state itself is then likely truncated.
    """
    rho_c = np.asarray(rho_c, dtype=complex)
    if rho_c.ndim != 2 or rho_c.shape[0] != rho_c.shape[1]:
        raise InvalidDimension("rho_c must be a square matrix")
    dim = rho_c.shape[0]
    if np.real(rho_c[-1, -1]) > TRUNCATION_WARN:
        warnings.warn(f"top Fock population {np.real(rho_c[-1, -1]):.2e} suggests truncation",
                      RuntimeWarning, stacklevel=2)
    alphas = np.asarray(alphas, dtype=complex)
    flat = alphas.ravel()
    vals = np.zeros(flat.size, dtype=complex)
    for m in range(dim):
        for n in range(m + 1):
            if rho_c[n, m] == 0 and rho_c[m, n] == 0:
                continue
            t = _fock_wigner_term(m, n, flat)
            # W = sum_{m,n} rho[n, m] T[m, n] with T[n, m] = conj(T[m, n])
            vals += rho_c[n, m] * t
            if m != n:
                vals += rho_c[m, n] * np.conj(t)
    return WignerGrid("bosonic", (alphas,), np.real(vals).reshape(alphas.shape))


# ---------------------------------------------------------------- spin kernel

@dataclass(frozen=True)
class SpinKernel:
    """Diagonal spin kernel and the qubit angles that measure it.

    ``theta_angles`` satisfy ``cos^2(theta_m/2) = gamma_m`` and
    ``beta_angles`` satisfy ``cos^2(beta_m/2) = eta_m = 1 - gamma_m``.
    """

    spin: SpinQuantum
    delta_diag: np.ndarray
    theta_angles: np.ndarray
    beta_angles: np.ndarray

    @property
    def delta_min(self) -> float:
        return float(np.min(self.delta_diag))

    @property
    def delta_max(self) -> float:
        return float(np.max(self.delta_diag))

    @property
    def gamma(self) -> np.ndarray:
        return (self.delta_diag - self.delta_min) / (self.delta_max - self.delta_min)

    @property
    def eta(self) -> np.ndarray:
        return (self.delta_max - self.delta_diag) / (self.delta_max - self.delta_min)

    def matrix(self) -> np.ndarray:
        return np.diag(self.delta_diag).astype(complex)


def kernel_diagonal(J: SpinLike) -> np.ndarray:
    """``Delta_m`` for ``m = -J..J`` (Fock order)."""
    s = as_spin(J)
    j = s.j
    out = np.zeros(s.dim)
    for i, m in enumerate(s.m_values()):
        out[i] = sum((2 * l + 1) / (2 * j + 1) * clebsch_gordan(j, m, l, 0, j, m) for l in range(s.two_j + 1))
    return out


def spin_kernel(J: SpinLike) -> SpinKernel:
    s = as_spin(J)
    if s.two_j < 1:
        raise InvalidDimension("spin kernel needs J >= 1/2")
    d = kernel_diagonal(s)
    span = d.max() - d.min()
    gamma = np.clip((d - d.min()) / span, 0.0, 1.0)
    eta = np.clip((d.max() - d) / span, 0.0, 1.0)
    theta = 2 * np.arccos(np.sqrt(gamma))
    beta = 2 * np.arccos(np.sqrt(eta))
    return SpinKernel(s, d, theta, beta)


def rotation_operator(J: SpinLike, theta: float, phi: float) -> np.ndarray:
    """``R_J(theta, phi) = exp(i theta (cos phi Jx + sin phi Jy))``."""
    jx, jy, _ = spin_ops(J)
    return unitary_exp(np.cos(phi) * jx + np.sin(phi) * jy, -theta)


def direction(theta, phi) -> np.ndarray:
    """Unit vector ``n`` with ``R Jz R^dagger = n . J`` for ``R = R_J(theta, phi)``."""
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    return np.stack([-np.sin(theta) * np.sin(phi), np.sin(theta) * np.cos(phi), np.cos(theta)], axis=-1)


def angles_from_direction(n) -> Tuple[np.ndarray, np.ndarray]:
    """Inverse of :func:`direction`."""
    n = np.asarray(n, dtype=float)
    n = n / np.linalg.norm(n, axis=-1, keepdims=True)
    theta = np.arccos(np.clip(n[..., 2], -1.0, 1.0))
    phi = np.arctan2(-n[..., 0], n[..., 1])
    return theta, phi


def _manifold_block(rho: np.ndarray, s: SpinQuantum) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.shape[0] < s.dim:
        raise InvalidDimension(f"state dimension {rho.shape[0]} smaller than manifold {s.dim}")
    excess = float(np.real(np.trace(rho)) - np.real(np.trace(rho[: s.dim, : s.dim])))
    if abs(excess) > LEAKAGE_TOL:
        raise ManifoldLeakage(f"population {excess:.2e} outside the spin-{s} manifold")
    return rho[: s.dim, : s.dim]


def spin_wigner(rho: np.ndarray, J: SpinLike, theta, phi, kernel: Optional[SpinKernel] = None) -> WignerGrid:
    """``W(theta, phi) = Tr[R Delta R^dagger rho]`` on the broadcast grid of angles.

    ``rho`` may be any operator (Hermitian or not) on the manifold, or a
    larger cavity state whose support outside the manifold is below 1e-6.
    """
    s = as_spin(J)
    kernel = kernel or spin_kernel(s)
    block = _manifold_block(rho, s)
    theta, phi = np.broadcast_arrays(np.asarray(theta, dtype=float), np.asarray(phi, dtype=float))
    vals = np.empty(theta.shape, dtype=complex)
    D = kernel.delta_diag
    for idx in np.ndindex(theta.shape):
        R = rotation_operator(s, theta[idx], phi[idx])
        # Tr[R D R^+ rho] = sum_m D_m <m| R^+ rho R |m>
        vals[idx] = np.einsum("m,am,ab,bm->", D, R.conj(), block, R)
    hermitian = np.allclose(block, block.conj().T, atol=1e-12)
    values = np.real(vals) if hermitian else vals
    return WignerGrid("spin", (theta, phi), values)


def sphere_quadrature(order: int, n_phi: Optional[int] = None):
    """Gauss-Legendre in ``cos theta`` times a uniform ``phi`` rule.

    Returns ``(theta, phi, weights)`` flattened, with ``sum(weights) = 4 pi``.
    Exact for spherical harmonics up to degree ``min(2 order - 1, n_phi - 1)``.
    """
    n_phi = n_phi or 2 * order
    x, w = np.polynomial.legendre.leggauss(order)
    phis = 2 * np.pi * np.arange(n_phi) / n_phi
    theta = np.repeat(np.arccos(x), n_phi)
    phi = np.tile(phis, order)
    weights = np.repeat(w, n_phi) * (2 * np.pi / n_phi)
    return theta, phi, weights


def sphere_integral(J: SpinLike, values: np.ndarray, weights: np.ndarray) -> complex:
    """``(2J+1)/(4 pi) * integral of values dOmega``."""
    s = as_spin(J)
    total = np.sum(np.asarray(values) * weights)
    return (s.dim / (4 * np.pi)) * total


def default_order(J: SpinLike) -> int:
    """Quadrature order exact for products of two spin-J Wigner functions."""
    return as_spin(J).two_j + 2


# ---------------------------------------------------------------- emulated measurement

def fock_conditioned_rotation(angles: Sequence[float]) -> np.ndarray:
    """``sum_m R_x(a_m) x |m><m|`` on qubit x manifold (qubit-major), ``R_x(a) = exp(-i a sigma_x / 2)``."""
    angles = np.asarray(angles, dtype=float)
    dim = angles.size
    U = np.zeros((2 * dim, 2 * dim), dtype=complex)
    c, sn = np.cos(angles / 2), np.sin(angles / 2)
    idx = np.arange(dim)
    U[idx, idx] = c
    U[dim + idx, dim + idx] = c
    U[idx, dim + idx] = -1j * sn
    U[dim + idx, idx] = -1j * sn
    return U


def _ground_probability(joint: np.ndarray, dim: int) -> float:
    return float(np.real(np.trace(joint[:dim, :dim])))


def _readout(pg: float, misassign: float, bias: float) -> float:
    return (1 - misassign) * pg + misassign * (1 - pg) + bias


@dataclass
class SpinWignerMeasurement:
    """Emulated two-channel spin-Wigner measurement."""

    grid: WignerGrid
    channel_1: np.ndarray
    channel_2: np.ndarray
    keep_probability: float


def simulated_spin_wigner_measurement(
    rho: np.ndarray,
    kernel: SpinKernel,
    theta,
    phi,
    qubit_dim: int = 2,
    misassign: float = 0.0,
    bias: float = 0.0,
) -> SpinWignerMeasurement:
    """Emulate the measurement on a composite ``qubit x cavity`` state.

    Steps: post-select the first qubit readout on ``|g>``; for each grid
    point undo the spin rotation, reset the qubit to ``|g>``, apply the
    Fock-conditioned ``R_x(theta_m)`` (channel 1) or ``R_x(beta_m)``
    (channel 2) and record ``P_g``. Readout noise is
    ``P_g -> (1-r) P_g + r (1-P_g) + bias``. The channels give
    ``W1 = D_min + P_g (D_max - D_min)`` and ``W2 = D_max - P_g (D_max - D_min)``
    and the reported value is their mean.
    """
    s = kernel.spin
    rho = np.asarray(rho, dtype=complex)
    d = rho.shape[0]
    if d % qubit_dim:
        raise InvalidDimension(f"state dimension {d} is not a multiple of qubit_dim={qubit_dim}")
    cav = d // qubit_dim
    r4 = rho.reshape(qubit_dim, cav, qubit_dim, cav)
    rho_g = r4[0, :, 0, :]
    keep = float(np.real(np.trace(rho_g)))
    if keep < 1e-12:
        raise ManifoldLeakage("qubit never found in |g>")
    block = _manifold_block(rho_g / keep, s)
    theta, phi = np.broadcast_arrays(np.asarray(theta, dtype=float), np.asarray(phi, dtype=float))
    span = kernel.delta_max - kernel.delta_min
    w1 = np.empty(theta.shape)
    w2 = np.empty(theta.shape)
    U1 = fock_conditioned_rotation(kernel.theta_angles)
    U2 = fock_conditioned_rotation(kernel.beta_angles)
    g = np.zeros((2, 2), dtype=complex)
    g[0, 0] = 1.0
    for idx in np.ndindex(theta.shape):
        R = rotation_operator(s, theta[idx], phi[idx])
        joint = np.kron(g, R.conj().T @ block @ R)
        pg1 = _readout(_ground_probability(U1 @ joint @ U1.conj().T, s.dim), misassign, bias)
        pg2 = _readout(_ground_probability(U2 @ joint @ U2.conj().T, s.dim), misassign, bias)
        w1[idx] = kernel.delta_min + pg1 * span
        w2[idx] = kernel.delta_max - pg2 * span
    grid = WignerGrid("spin", (theta, phi), 0.5 * (w1 + w2))
    return SpinWignerMeasurement(grid, w1, w2, keep)
