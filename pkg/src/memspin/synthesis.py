"""Generator synthesis and certification.

* integer-ratio spectra and parity-preserving nonlinear rotations,
* SU(d) universality witness via the rank-2 spherical tensor,
* nearest-neighbour Givens factorization of a unitary,
* aperiodicity of the blockade generator (Hermite zeros).

Rotation angles follow :mod:`memspin.mem`: ``U(theta) = exp(-i theta/2 M_phi)``.
A generator whose eigenvalues are integer multiples of ``lambda_min`` returns
to the identity at ``theta = 4 pi / |lambda_min|``. Half of that,
``theta* = 2 pi / |lambda_min|``, gives a reflection that commutes with parity.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import mpmath
import numpy as np
from scipy.optimize import least_squares, minimize

from .errors import DegenerateGenerator, InvalidDimension, InvalidTarget, SynthesisFailure
from .mem import NonlinearCoeffs, coeffs_from_elements, generator_from_elements, rotation
from .operators import SpinLike, as_spin, is_hermitian, parity, position, spherical_tensor, unitary_exp

log = logging.getLogger(__name__)

ZERO_EIG_TOL = 1e-9


# ---------------------------------------------------------------- spectra

@dataclass
class EigenReport:
    eigenvalues: np.ndarray
    min_magnitude: float
    ratios: np.ndarray
    is_integer_ratio: bool
    rationalization_digits: Optional[int] = None
    rationalized: Optional[bool] = None
    hermite_mismatch: Optional[float] = None

    @property
    def periodic(self) -> bool:
        return bool(self.is_integer_ratio)


def _magnitude_ratios(eigenvalues: np.ndarray) -> Tuple[float, np.ndarray]:
    mags = np.abs(eigenvalues)
    mags = mags[mags > ZERO_EIG_TOL * max(1.0, float(np.max(mags, initial=0.0)))]
    if mags.size == 0:
        raise DegenerateGenerator("generator has an all-zero spectrum")
    lam = float(np.min(mags))
    return lam, np.sort(mags) / lam


def eigenvalue_integer_check(M: np.ndarray, tol: float = 1e-3) -> EigenReport:
    """Check whether every non-zero ``|lambda_j| / |lambda_min|`` is within ``tol`` of an integer."""
    M = np.asarray(M, dtype=complex)
    if not is_hermitian(M):
        raise InvalidTarget("eigenvalue check needs a Hermitian generator")
    w = np.linalg.eigvalsh(M)
    lam, ratios = _magnitude_ratios(w)
    ok = bool(np.all(np.abs(ratios - np.round(ratios)) <= tol))
    return EigenReport(eigenvalues=w, min_magnitude=lam, ratios=ratios, is_integer_ratio=ok)


# ---------------------------------------------------------------- Hermite zeros

def _hermite_and_derivative(n: int, x):
    h_prev, h = mpmath.mpf(1), 2 * x
    if n == 0:
        return h_prev, mpmath.mpf(0)
    for k in range(1, n):
        h_prev, h = h, 2 * x * h - 2 * k * h_prev
    return h, 2 * n * h_prev


def hermite_zeros_mp(order: int, dps: int = 50) -> List[mpmath.mpf]:
    """Zeros of the physicists' Hermite polynomial ``H_order`` at ``dps`` decimal digits.

    Starting points come from the Jacobi matrix; each zero is then refined
    by Newton iteration on the three-term recurrence.
    """
    if order < 1:
        raise InvalidDimension("Hermite order must be >= 1")
    guesses = np.linalg.eigvalsh(position(order).real) if order > 1 else np.array([0.0])
    out = []
    with mpmath.workdps(dps + 10):
        tol = mpmath.mpf(10) ** (-(dps + 5))
        for g in guesses:
            x = mpmath.mpf(float(g))
            for _ in range(100):
                h, dh = _hermite_and_derivative(order, x)
                step = h / dh
                x -= step
                if abs(step) < tol * max(1, abs(x)):
                    break
            out.append(+x)
        # exact symmetry about zero
        n = len(out)
        for i in range(n // 2):
            m = (out[n - 1 - i] - out[i]) / 2
            out[i], out[n - 1 - i] = -m, m
        if n % 2:
            out[n // 2] = mpmath.mpf(0)
    return out


def hermite_zeros(order: int) -> np.ndarray:
    """Real zeros of ``H_order`` in ascending order, symmetric about 0."""
    return np.array([float(z) for z in hermite_zeros_mp(order, dps=30)])


def _digits_to_rationalize(r, max_digits: int) -> Optional[int]:
    """Smallest D such that the first continued-fraction convergent within
    ``10^-D`` of ``r`` equals ``r`` to working precision, or None if D > max_digits."""
    work = mpmath.mpf(10) ** (-(max_digits + 15))
    x = r
    p0, q0, p1, q1 = 0, 1, 1, 0
    for _ in range(400):
        a = int(mpmath.floor(x))
        p0, q0, p1, q1 = p1, q1, a * p1 + p0, a * q1 + q0
        err = abs(r - mpmath.mpf(p1) / q1)
        if err < work:
            # r is this rational; count digits at which this convergent first becomes the answer
            prev_err = abs(r - mpmath.mpf(p0) / q0) if q0 else mpmath.inf
            if prev_err == mpmath.inf or prev_err == 0:
                return 1
            d = int(mpmath.floor(-mpmath.log10(prev_err))) + 1
            return max(1, d) if d <= max_digits else None
        if err < mpmath.mpf(10) ** (-max_digits):
            return None
        frac = x - a
        if frac == 0:
            return None
        x = 1 / frac
    return None


def blockade_aperiodicity(J: SpinLike, max_digits: int = 30) -> EigenReport:
    """Spectrum of the truncated quadrature ``x_J`` and the digits needed to rationalize its ratios.

    The eigenvalues are checked against independently polished zeros of
    ``H_{2J+1}`` (``hermite_mismatch``). ``rationalization_digits`` is the
    minimum over ratios of the decimal digits needed before a continued-fraction
    convergent reproduces the ratio exactly; when no ratio is rational within
    ``max_digits`` it is ``max_digits + 1`` and ``rationalized`` is False.
    """
    s = as_spin(J)
    if s.two_j < 1:
        raise InvalidDimension("need 2J >= 1")
    dim = s.dim
    w = np.linalg.eigvalsh(position(dim).real)
    zeros_mp = hermite_zeros_mp(dim, dps=max_digits + 25)
    mismatch = float(np.max(np.abs(w - np.array([float(z) for z in zeros_mp]))))
    lam, ratios = _magnitude_ratios(w)

    with mpmath.workdps(max_digits + 25):
        mags = sorted({abs(z) for z in zeros_mp if abs(z) > mpmath.mpf(10) ** -(max_digits + 10)})
        lam_mp = mags[0]
        digits = []
        for m in mags[1:]:
            d = _digits_to_rationalize(m / lam_mp, max_digits)
            digits.append(max_digits + 1 if d is None else d)
    distinct = np.unique(np.round(ratios, 12))
    periodic = distinct.size == 1 or bool(np.all(np.abs(distinct - np.round(distinct)) < 1e-12))
    return EigenReport(
        eigenvalues=w,
        min_magnitude=lam,
        ratios=ratios,
        is_integer_ratio=periodic,
        rationalization_digits=min(digits) if digits else 0,
        rationalized=bool(digits) and min(digits) <= max_digits,
        hermite_mismatch=mismatch,
    )


# ---------------------------------------------------------------- universality

def check_universality(M: np.ndarray, J: SpinLike, tol: float = 1e-10) -> Tuple[bool, Optional[Tuple[int, int]]]:
    """True when ``M`` has a non-zero rank-2 spherical-tensor component.

    Returns ``(flag, (2, q))`` with the first witnessing ``q`` or ``(False, None)``.
    """
    s = as_spin(J)
    M = np.asarray(M, dtype=complex)
    if M.shape != (s.dim, s.dim):
        raise InvalidDimension(f"expected {s.dim}x{s.dim}, got {M.shape}")
    if not is_hermitian(M):
        raise InvalidTarget("universality check needs a Hermitian generator")
    if s.two_j < 2:
        return False, None
    for q in range(-2, 3):
        if abs(np.trace(M @ spherical_tensor(2, q, s))) > tol:
            return True, (2, q)
    return False, None


# ---------------------------------------------------------------- Givens factorization

def givens_gate(dim: int, m: int, theta: float, phase: float) -> np.ndarray:
    """``exp(-i theta/2 (e^{-i phase}|m-1><m| + h.c.))`` embedded in ``dim`` levels."""
    if not 1 <= m < dim:
        raise InvalidDimension(f"level {m} outside 1..{dim - 1}")
    g = np.eye(dim, dtype=complex)
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    g[m - 1, m - 1] = c
    g[m, m] = c
    g[m - 1, m] = -1j * s * np.exp(-1j * phase)
    g[m, m - 1] = -1j * s * np.exp(1j * phase)
    return g


@dataclass
class GivensFactorization:
    """``U = diag(exp(i diagonal)) @ G_K @ ... @ G_1``, with ``rotations`` in time order."""

    dim: int
    rotations: List[Tuple[int, float, float]]
    diagonal: np.ndarray = field(repr=False)

    def matrix(self) -> np.ndarray:
        U = np.eye(self.dim, dtype=complex)
        for m, theta, phase in self.rotations:
            U = givens_gate(self.dim, m, theta, phase) @ U
        return np.exp(1j * self.diagonal)[:, None] * U

    def __iter__(self):
        return iter(self.rotations)

    def __len__(self):
        return len(self.rotations)


def givens_factorization(U: np.ndarray, tol: float = 1e-12) -> GivensFactorization:
    """Factor a unitary into nearest-neighbour two-level rotations plus a diagonal phase stage.

    Each rotation ``(m, theta, phase)`` couples levels ``m-1`` and ``m``. It is
    realised by a comb with ``dphi_m = 0`` and all other ``dphi = pi``, whose
    generator has element ``sqrt(m)``, so the drive angle is ``theta / sqrt(m)``.
    """
    U = np.asarray(U, dtype=complex)
    if U.ndim != 2 or U.shape[0] != U.shape[1]:
        raise InvalidTarget("expected a square matrix")
    dim = U.shape[0]
    if np.linalg.norm(U @ U.conj().T - np.eye(dim)) > 1e-10:
        raise InvalidTarget("givens_factorization needs a unitary input")
    W = U.conj().T.copy()
    rotations = []
    for col in range(dim - 1):
        for row in range(dim - 1, col, -1):
            b = W[row, col]
            if abs(b) <= tol:
                continue
            a = W[row - 1, col]
            theta = 2 * np.arctan2(abs(b), abs(a))
            phase = np.angle(b) - (np.angle(a) if abs(a) > tol else 0.0) - np.pi / 2
            G = givens_gate(dim, row, theta, phase)
            W = G @ W
            rotations.append((row, float(theta), float(phase)))
    # W = G_K ... G_1 U^dagger is diagonal; U = W^dagger-diagonal times G_K ... G_1
    d = np.diag(W)
    return GivensFactorization(dim=dim, rotations=rotations, diagonal=-np.angle(d))


# ---------------------------------------------------------------- parity-preserving search

@dataclass
class SynthesisResult:
    """Outcome of :func:`parity_preserving_search`; unpacks as ``(coeffs, theta)``."""

    coeffs: NonlinearCoeffs
    theta: float
    elements: np.ndarray
    fidelity: float
    ratio_error: float
    gamma: float
    restarts_used: int

    def generator(self, varphi: float = 0.0) -> np.ndarray:
        return generator_from_elements(self.elements, varphi)

    def unitary(self, varphi: float = 0.0) -> np.ndarray:
        return rotation(self.generator(varphi), self.theta)

    def __iter__(self):
        return iter((self.coeffs, self.theta))


def _reflection(elements: np.ndarray) -> Tuple[np.ndarray, float, np.ndarray]:
    M = generator_from_elements(elements).real
    w, v = np.linalg.eigh(M)
    lam, ratios = _magnitude_ratios(w)
    theta = 2 * np.pi / lam
    U = (v * np.exp(-1j * theta / 2 * w)) @ v.T
    return U, theta, ratios


def _target_state(dim: int, gamma: float) -> np.ndarray:
    psi = np.zeros(dim, dtype=complex)
    psi[0] = np.cos(gamma)
    psi[2] = np.sin(gamma)
    return psi


def parity_preserving_search(
    J: SpinLike,
    gamma: float,
    seed: int = 0,
    restarts: int = 32,
    fidelity_threshold: float = 0.999,
    ratio_tol: float = 1e-3,
) -> SynthesisResult:
    """Find a nonlinear generator whose ``theta* = 2 pi/|lambda_min|`` rotation maps
    ``|0> -> cos(gamma)|0> + sin(gamma)|2>`` while commuting with parity.

    Nelder-Mead runs over the ladder elements ``e_n = sqrt(n) sin(u_n)`` with
    the penalty ``(1 - F) + w sum dist(ratio, Z)^2``, with ``w`` annealed
    upward. Each restart is then polished by least squares on the same
    residuals. Restarts are drawn from ``seed`` and the first one passing
    both checks is returned.
    """
    s = as_spin(J)
    if s.two_j % 2 == 0 or s.two_j < 3:
        raise InvalidTarget("parity-preserving search needs half-integer J >= 3/2")
    if not 0 <= gamma <= np.pi / 2 + 1e-12:
        raise InvalidTarget("gamma must lie in [0, pi/2]")
    dim = s.dim
    root_n = np.sqrt(np.arange(1, dim))
    target = _target_state(dim, gamma)

    def elements(u):
        return root_n * np.sin(u)

    def evaluate(u):
        e = elements(u)
        if np.max(np.abs(e)) < 1e-6:
            return None
        U, theta, ratios = _reflection(e)
        fid = abs(np.vdot(target, U[:, 0])) ** 2
        return fid, ratios, theta

    def penalty(u, weight):
        r = evaluate(u)
        if r is None:
            return 10.0
        fid, ratios, _ = r
        return (1 - fid) + weight * np.sum((ratios - np.round(ratios)) ** 2)

    def residuals(u):
        r = evaluate(u)
        if r is None:
            return np.full(dim // 2 + 1, 10.0)
        fid, ratios, _ = r
        dist = ratios[1::2] - np.round(ratios[1::2])  # magnitudes come in +- pairs
        return np.concatenate([[1 - fid], dist])

    rng = np.random.default_rng(seed)
    best = None
    for attempt in range(1, restarts + 1):
        u = rng.uniform(-np.pi / 2, np.pi / 2, size=dim - 1)
        for weight in (1.0, 10.0, 100.0, 1e3, 1e4):
            u = minimize(penalty, u, args=(weight,), method="Nelder-Mead",
                         options={"xatol": 1e-10, "fatol": 1e-14, "maxiter": 4000}).x
        u = least_squares(residuals, u, xtol=1e-15, ftol=1e-15, gtol=1e-15).x
        fid, ratios, theta = evaluate(u)
        ratio_err = float(np.max(np.abs(ratios - np.round(ratios))))
        # integer ratios must have an even member for a non-trivial reflection
        cand = (fid, ratio_err, u, attempt)
        if best is None or (fid - 10 * ratio_err) > (best[0] - 10 * best[1]):
            best = cand
        log.debug("restart %d: fidelity %.6f ratio error %.2e", attempt, fid, ratio_err)
        if fid >= fidelity_threshold and ratio_err <= ratio_tol:
            break
    fid, ratio_err, u, attempt = best
    e = elements(u)
    # rescale so the strongest element saturates its bare value; the action is scale free
    e = e / np.max(np.abs(e) / root_n)
    _, theta, _ = _reflection(e)
    result = SynthesisResult(
        coeffs=coeffs_from_elements(e, s),
        theta=float(theta),
        elements=e,
        fidelity=float(fid),
        ratio_error=ratio_err,
        gamma=float(gamma),
        restarts_used=attempt,
    )
    if fid < fidelity_threshold or ratio_err > ratio_tol:
        raise SynthesisFailure(
            f"best candidate reached fidelity {fid:.5f} with ratio error {ratio_err:.2e}", best=result
        )
    return result


def parity_commutator_norm(U: np.ndarray) -> float:
    P = parity(U.shape[0])
    return float(np.max(np.abs(P @ U - U @ P)))
