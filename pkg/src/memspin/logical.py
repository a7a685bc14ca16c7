"""Spin-cat codewords, SU(2)-realizable logical gates, state preparation and fidelities.

The code lives on the manifold ``|0>..|N>`` with ``N = 2J``:

    |0_L> = (|0> + |N>)/sqrt(2),    |1_L> = (|0> - |N>)/sqrt(2),

so ``|+_L> = |0> = |J, -J>`` and ``|-_L> = |N> = |J, +J>``. Two families of
spin rotations act as logical gates (global phases ignored):

Type I
    ``R_z(-(theta + 2 pi k)/(2J))`` realises ``R_x^L(theta)``.
Type II
    ``R_{cos(phi') x + sin(phi') y}(pi)`` with ``phi' = (phi + pi k)/(2J)``
    realises ``R^L_{sin(phi) y + cos(phi) z}(pi)``.

``k`` runs over ``0 .. 2J-1``; every branch gives the same logical action.
Logical matrices are written in the ``(|0_L>, |1_L>)`` basis.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, replace
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import minimize

from . import dynamics as dyn
from . import mem
from .errors import ConfigurationError, InvalidDimension, ManifoldLeakage, UnknownGate
from .operators import SIGMA_X, SIGMA_Y, SIGMA_Z, SpinLike, annihilation, as_spin, spin_rotation, unitary_exp
from .synthesis import SynthesisResult, parity_preserving_search

LEAKAGE_TOL = 1e-12
GATES = ("I", "X", "Y", "Z", "SdagHS", "Rx", "TypeII")


# ---------------------------------------------------------------- codewords

@dataclass(frozen=True)
class SpinCatCode:
    """Two-legged spin cat on the ``2J+1`` manifold."""

    J: object
    codeword_zero: np.ndarray
    codeword_one: np.ndarray

    @classmethod
    def from_spin(cls, J: SpinLike) -> "SpinCatCode":
        s = as_spin(J)
        if s.two_j < 1:
            raise InvalidDimension("a spin cat needs J >= 1/2")
        zero = np.zeros(s.dim, dtype=complex)
        one = np.zeros(s.dim, dtype=complex)
        zero[0] = one[0] = 1 / math.sqrt(2)
        zero[-1] = 1 / math.sqrt(2)
        one[-1] = -1 / math.sqrt(2)
        return cls(s, zero, one)

    @property
    def N(self) -> int:
        return self.J.two_j

    @property
    def dim(self) -> int:
        return self.J.dim

    def basis(self) -> np.ndarray:
        """Isometry with columns ``|0_L>, |1_L>``."""
        return np.stack([self.codeword_zero, self.codeword_one], axis=1)

    def projector(self) -> np.ndarray:
        V = self.basis()
        return V @ V.conj().T

    def logical_state(self, amplitudes: Sequence[complex]) -> np.ndarray:
        return self.basis() @ np.asarray(amplitudes, dtype=complex)

    def plus(self) -> np.ndarray:
        """``|+_L> = |0>``."""
        return (self.codeword_zero + self.codeword_one) / math.sqrt(2)

    def minus(self) -> np.ndarray:
        """``|-_L> = |N>``."""
        return (self.codeword_zero - self.codeword_one) / math.sqrt(2)


def spin_cat_code(J: SpinLike) -> SpinCatCode:
    return SpinCatCode.from_spin(J)


# ---------------------------------------------------------------- logical targets

def logical_rx(theta: float) -> np.ndarray:
    return unitary_exp(SIGMA_X, theta / 2)


def logical_type_ii(phi: float) -> np.ndarray:
    """``exp(-i pi/2 (sin(phi) Y + cos(phi) Z))``."""
    return unitary_exp(math.sin(phi) * SIGMA_Y + math.cos(phi) * SIGMA_Z, math.pi / 2)


HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
S_GATE = np.diag([1, 1j]).astype(complex)


def ideal_logical(gate: str) -> np.ndarray:
    """Textbook matrices for the named gates."""
    table = {
        "I": np.eye(2, dtype=complex),
        "X": SIGMA_X,
        "Y": SIGMA_Y,
        "Z": SIGMA_Z,
        "H": HADAMARD,
        "S": S_GATE,
        "SdagHS": S_GATE.conj().T @ HADAMARD @ S_GATE,
    }
    if gate not in table:
        raise UnknownGate(gate)
    return table[gate].copy()


def equal_up_to_phase(A: np.ndarray, B: np.ndarray) -> float:
    """Max deviation between ``A`` and ``B`` after removing the best global phase."""
    A = np.asarray(A, dtype=complex)
    B = np.asarray(B, dtype=complex)
    ov = np.vdot(B, A)
    ph = ov / abs(ov) if abs(ov) > 0 else 1.0
    return float(np.max(np.abs(A - ph * B)))


# ---------------------------------------------------------------- recipes

@dataclass(frozen=True)
class GateRecipe:
    """A spin rotation ``exp(-i angle n.J)`` and the logical unitary it realises."""

    gate: str
    J: object
    k: int
    kind: str
    axis: Tuple[float, float, float]
    angle: float
    logical: np.ndarray
    parameter: float = 0.0

    def unitary(self) -> np.ndarray:
        return spin_rotation(self.J, self.angle, self.axis)

    @property
    def azimuth(self) -> Optional[float]:
        """Equatorial axis angle ``phi'`` for Type II recipes."""
        if self.kind != "II":
            return None
        return math.atan2(self.axis[1], self.axis[0]) % (2 * math.pi)


def _type_i(gate: str, s, k: int, theta: float) -> GateRecipe:
    angle = -(theta + 2 * math.pi * k) / s.two_j
    return GateRecipe(gate, s, k, "I", (0.0, 0.0, 1.0), angle, logical_rx(theta), theta)


def _type_ii(gate: str, s, k: int, phi: float) -> GateRecipe:
    az = (phi + math.pi * k) / s.two_j
    return GateRecipe(gate, s, k, "II", (math.cos(az), math.sin(az), 0.0), math.pi, logical_type_ii(phi), phi)


def gate_recipe(gate: str, J: SpinLike, k: int = 0, theta: float = 0.0, phi: float = 0.0) -> GateRecipe:
    """Spin rotation realising a logical gate on the spin-cat code.

    ``gate`` is one of ``I, X, Y, Z, SdagHS`` or the parametrised
    ``Rx`` (uses ``theta``) and ``TypeII`` (uses ``phi``). ``k`` selects
    one of the ``2J`` equivalent branches.
    """
    s = as_spin(J)
    if s.two_j < 1:
        raise InvalidDimension("logical gates need J >= 1/2")
    if not 0 <= k < s.two_j:
        raise ConfigurationError(f"branch k={k} outside 0..{s.two_j - 1}")
    if gate == "I":
        return _type_i(gate, s, k, 0.0)
    if gate == "X":
        return _type_i(gate, s, k, math.pi)
    if gate == "Rx":
        return _type_i(gate, s, k, float(theta))
    if gate == "Y":
        return _type_ii(gate, s, k, math.pi / 2)
    if gate == "Z":
        return _type_ii(gate, s, k, 0.0)
    if gate == "SdagHS":
        return _type_ii(gate, s, k, 3 * math.pi / 4)
    if gate == "TypeII":
        return _type_ii(gate, s, k, float(phi))
    raise UnknownGate(f"unknown gate {gate!r}; expected one of {', '.join(GATES)}")


def stabilizer_recipes(J: SpinLike) -> List[GateRecipe]:
    """Type I rotations with ``theta = 0`` and ``k = 1..2J-1``; identity on the code."""
    s = as_spin(J)
    return [gate_recipe("I", s, k) for k in range(1, s.two_j)]


def _manifold_vector(state: np.ndarray, dim: int) -> np.ndarray:
    state = np.asarray(state, dtype=complex)
    if state.shape[0] < dim:
        raise InvalidDimension(f"state has dimension {state.shape[0]}, manifold needs {dim}")
    if state.ndim == 1:
        excess = float(np.sum(np.abs(state[dim:]) ** 2))
    else:
        excess = float(np.real(np.trace(state)) - np.real(np.trace(state[:dim, :dim])))
    if excess > LEAKAGE_TOL:
        raise ManifoldLeakage(f"weight {excess:.3e} outside the {dim}-level manifold")
    return state


def apply_recipe(recipe: GateRecipe, state: np.ndarray) -> np.ndarray:
    """Apply the exact spin rotation to a state vector or density matrix.

    States may carry extra Fock levels as long as they are unpopulated;
    the output has the input's shape.
    """
    dim = recipe.J.dim
    state = _manifold_vector(state, dim)
    U = recipe.unitary()
    out = state.copy()
    if state.ndim == 1:
        out[:dim] = U @ state[:dim]
    else:
        out[:dim, :dim] = U @ state[:dim, :dim] @ U.conj().T
    return out


def logical_action(U: np.ndarray, code: SpinCatCode) -> Tuple[np.ndarray, float]:
    """Project ``U`` onto the code: ``(V^+ U V, leakage)`` with leakage the max off-code amplitude."""
    V = code.basis()
    L = V.conj().T @ U @ V
    leak = float(np.max(np.abs(U @ V - V @ L)))
    return L, leak


def recipe_error(recipe: GateRecipe, code: Optional[SpinCatCode] = None) -> float:
    """Deviation of the recipe's code action from its logical target, up to global phase."""
    code = code or spin_cat_code(recipe.J)
    L, leak = logical_action(recipe.unitary(), code)
    return max(leak, equal_up_to_phase(L, recipe.logical))


# ---------------------------------------------------------------- nonlinear Hadamard

@dataclass(frozen=True)
class HadamardResult:
    synthesis: SynthesisResult
    logical: np.ndarray
    fidelity: float

    def __iter__(self):
        return iter((self.synthesis.coeffs, self.synthesis.theta))


def hadamard_via_nonlinear(J: SpinLike = 1.5, gamma: float = math.pi / 4, seed: int = 0) -> HadamardResult:
    """Nonlinear reflection acting on the spin-1 cat embedded in the spin-``J`` manifold.

    The parity-preserving reflection maps ``|0>`` to
    ``cos(gamma)|0> + sin(gamma)|2>``; at ``gamma = pi/4`` this is the
    logical Hadamard. ``fidelity`` is the normalised overlap ``|Tr(H^+ L)|/2``.
    """
    s = as_spin(J)
    res = parity_preserving_search(s, gamma, seed=seed)
    U = res.unitary()
    V = np.zeros((s.dim, 2), dtype=complex)
    V[0] = [1, 1]
    V[2] = [1, -1]
    V /= math.sqrt(2)
    L = V.conj().T @ U @ V
    fid = float(abs(np.trace(HADAMARD.conj().T @ L)) / 2)
    return HadamardResult(res, L, fid)


# ---------------------------------------------------------------- state preparation

@dataclass(frozen=True)
class PrepStep:
    """One cavity rotation. ``blockade_level`` set means a single blocking qubit tone;
    otherwise the SU(2) comb. ``varphi`` is the physical cavity drive phase and
    ``cavity_angle`` is ``eps * t``."""

    label: str
    manifold: int
    blockade_level: Optional[int]
    varphi: float
    cavity_angle: float

    def comb(self) -> mem.PhaseComb:
        if self.blockade_level is not None:
            return mem.blockade_phases(self.manifold)
        return mem.su2_phases(as_spin((self.manifold - 1) / 2))

    def effective_unitary(self, dim: int) -> np.ndarray:
        """Ideal effective rotation embedded in ``dim`` Fock levels."""
        H = dyn.effective_hamiltonian(self.comb(), 1.0, self.varphi)
        U = np.eye(dim, dtype=complex)
        U[: self.manifold, : self.manifold] = unitary_exp(H, self.cavity_angle)
        return U


@dataclass(frozen=True)
class PrepSequence:
    J: object
    steps: Tuple[PrepStep, ...]
    target: np.ndarray

    def ideal_state(self) -> np.ndarray:
        psi = np.zeros(self.J.dim, dtype=complex)
        psi[0] = 1.0
        for st in self.steps:
            psi = st.effective_unitary(self.J.dim) @ psi
        return psi


def prep_sequence(J: SpinLike = 1, axis: str = "y") -> PrepSequence:
    """Blockade ``|0> -> |1>``, then an SU(2) ``pi/2`` rotation about ``axis``.

    For ``J = 1`` with ``axis = "y"`` the target is ``(|0> - |2>)/sqrt(2)``;
    ``axis = "x"`` gives ``-i(|0> + |2>)/sqrt(2)``. Other ``J`` run the same
    two steps on a larger manifold.
    """
    s = as_spin(J)
    if axis not in ("x", "y"):
        raise ConfigurationError("axis must be 'x' or 'y'")
    # the physical drive phase pi/2 realises +Jy
    varphi = math.pi / 2 if axis == "y" else 0.0
    steps = (
        PrepStep("blockade", 2, 2, 0.0, math.pi),
        PrepStep("su2", s.dim, None, varphi, math.pi / 2 * math.sqrt(s.two_j)),
    )
    start = np.zeros(s.dim, dtype=complex)
    start[1] = 1.0
    ax = (0.0, 1.0, 0.0) if axis == "y" else (1.0, 0.0, 0.0)
    target = spin_rotation(s, math.pi / 2, ax) @ start
    return PrepSequence(s, steps, target)


@dataclass
class PrepResult:
    cavity_state: np.ndarray
    keep_probability: float
    fidelity: float
    intermediate_fidelity: float
    final_state: np.ndarray


def blockade_stark_shift(chi: float, omega: float, level: int = 2) -> float:
    """Light shift of the ``|g,0> -> |g,1>`` transition (rad/s) from a qubit tone at ``level * chi``.

    Each Fock ``n`` sees the tone detuned by ``d = (n - level) chi``; the
    dressed ground energy is ``d/2 - sign(d) sqrt(d^2 + omega^2)/2``.
    """
    def ground(n):
        d = (n - level) * chi
        return d / 2 - math.copysign(1.0, d) * math.sqrt(d * d + omega * omega) / 2

    return ground(1) - ground(0)


def _shift(drive: dyn.DriveSpec, dt: float) -> dyn.DriveSpec:
    return replace(drive, envelope=drive.envelope.shifted(dt))


def simulate_prep(
    seq: PrepSequence,
    params: dyn.SystemParams,
    eps: float,
    omega: float,
    omega_blockade: Optional[float] = None,
    trims: Optional[Sequence[float]] = None,
    rtol: float = dyn.DEFAULT_RTOL,
    atol: float = dyn.DEFAULT_ATOL,
) -> PrepResult:
    """Run the preparation through the full driven model.

    Step one drives a single cavity tone while a qubit tone at ``2 chi``
    blocks ``|2>``. Step two is :func:`dynamics.schedule_spin_experiment`
    started when the first step ends. The decoder and post-selection on
    ``|g>`` close the sequence. ``intermediate_fidelity`` is the
    post-selected population of ``|1>`` after step one. The blockade
    cavity tone is detuned by :func:`blockade_stark_shift` so it stays
    resonant with the light-shifted ``0 -> 1`` transition.
    """
    blk, rot = seq.steps
    omega_blockade = omega if omega_blockade is None else omega_blockade
    sig_q, sig_c = dyn.QUBIT_SIGMA, dyn.CAVITY_SIGMA
    c_edges = 2 * 2.5 * sig_c
    c_flat = blk.cavity_angle / eps - 2 * dyn.Envelope(flat=0.0, sigma=sig_c).area()
    if c_flat < 0:
        raise ConfigurationError("cavity rate too large for the blockade step")
    q_flat = dyn.comb_flat_for_area(omega_blockade, c_flat + c_edges, sig_q)
    q_env = dyn.Envelope(flat=q_flat, sigma=sig_q)
    c_env = dyn.Envelope(flat=c_flat, sigma=sig_c, start=q_env.flat_end - c_flat - c_edges)
    step1 = [dyn.blockade_comb(blk.blockade_level, omega_blockade, q_env),
             dyn.cavity_drive(eps, c_env, blk.varphi, teeth=(0,),
                              detuning=blockade_stark_shift(params.chi, omega_blockade, blk.blockade_level))]
    t1 = q_env.end
    rho0 = dyn.ground_state(params)
    mid = dyn.lindblad_evolve(params, step1, rho0, [0.0, t1], rtol=rtol, atol=atol).final_state
    rc1, _ = dyn.postselect_ground(mid, params)
    inter = float(np.real(rc1[1, 1]))

    t_cav = dyn.cavity_flat_for_angle(seq.J, eps, rot.cavity_angle / math.sqrt(seq.J.two_j))
    sch = dyn.schedule_spin_experiment(seq.J, params, eps, omega, t_cav, varphi=rot.varphi, trims=trims)
    step2 = [_shift(d, t1) for d in sch.drives]
    tr = dyn.lindblad_evolve(params, step2, mid, [t1, t1 + sch.total_time], rtol=rtol, atol=atol)
    D = sch.decoder(params)
    rho = D @ tr.final_state @ D.conj().T
    rc, keep = dyn.postselect_ground(rho, params)
    psi = np.zeros(params.cavity_dim, dtype=complex)
    psi[: seq.J.dim] = seq.target
    return PrepResult(rc, keep, state_fidelity(rc, psi), inter, rho)


# ---------------------------------------------------------------- fidelity and errors

def state_fidelity(rho: np.ndarray, target: np.ndarray) -> float:
    """``<psi|rho|psi>`` for a pure target; ``rho`` may be a vector."""
    psi = np.asarray(target, dtype=complex)
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim == 1:
        rho = np.outer(rho, rho.conj())
    if rho.shape != (psi.size, psi.size):
        raise InvalidDimension(f"state shape {rho.shape} does not match target size {psi.size}")
    psi = psi / np.linalg.norm(psi)
    return float(np.clip(np.real(np.vdot(psi, rho @ psi)), 0.0, 1.0))


def photon_loss_syndrome(code: SpinCatCode, n_losses: int) -> bool:
    """Whether ``n_losses`` photon losses take every codeword out of the code space."""
    if n_losses < 0:
        raise ConfigurationError("n_losses must be non-negative")
    if n_losses == 0:
        return False
    a = annihilation(code.dim)
    an = np.linalg.matrix_power(a, n_losses)
    V = code.basis()
    outs = [an @ V[:, mu] for mu in range(2)]
    if all(np.linalg.norm(o) < LEAKAGE_TOL for o in outs):
        return False  # every codeword annihilated: nothing left to flag
    return all(np.max(np.abs(V.conj().T @ o)) <= LEAKAGE_TOL for o in outs)


@dataclass(frozen=True)
class ErasureRecovery:
    """Best rotation ``exp(-i angle n.J)`` returning the post-loss state to the code."""

    axis: Tuple[float, float, float]
    angle: float
    code_weight: float
    state: np.ndarray


def erasure_recovery_search(J: SpinLike = 1, resolution: float = 1e-3, coarse: int = 12) -> ErasureRecovery:
    """Search rotations for the one that maximises code-space weight after one loss.

    A coarse grid over axis polar angle, azimuth and rotation angle seeds a
    Nelder-Mead refinement stopped at ``resolution`` in every parameter.
    """
    code = spin_cat_code(J)
    a = annihilation(code.dim)
    lost = a @ code.codeword_zero
    lost /= np.linalg.norm(lost)
    P = code.projector()

    def axis_of(x):
        pol, az = x[0], x[1]
        return (math.sin(pol) * math.cos(az), math.sin(pol) * math.sin(az), math.cos(pol))

    def cost(x):
        psi = spin_rotation(code.J, x[2], axis_of(x)) @ lost
        return -float(np.real(np.vdot(psi, P @ psi)))

    grid = itertools.product(
        np.linspace(0, math.pi, coarse // 2 + 1),
        np.linspace(0, 2 * math.pi, coarse, endpoint=False),
        np.linspace(0, 2 * math.pi, coarse, endpoint=False),
    )
    x0 = min((np.array(g) for g in grid), key=cost)
    x = minimize(cost, x0, method="Nelder-Mead", options={"xatol": resolution, "fatol": 1e-12}).x
    ax = axis_of(x)
    psi = spin_rotation(code.J, x[2], ax) @ lost
    return ErasureRecovery(ax, float(x[2]), -cost(x), psi)
