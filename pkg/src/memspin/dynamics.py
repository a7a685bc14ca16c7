"""Driven transmon-cavity dynamics in the joint rotating frame.

Hamiltonian (rad/s, qubit factor first)::

    H(t) = chi n_c n_q + K c^+c^+cc/2 + alpha q^+q^+qq/2 + chi' c^+c^+cc n_q/2
           + f_q(t) q + f_q(t)^* q^+ + f_c(t) c + f_c(t)^* c^+

    f_q(t) = env_q(t) sum_n (Omega trim_n / 2) exp(i(n chi t + phi_n))
    f_c(t) = env_c(t) (eps / 2) sum_k exp(i(k chi t + varphi)) exp(i Delta t)

The static part is diagonal in the Fock x transmon basis. Open-system
evolution uses the collapse operators ``sqrt(1/T1c) c``, ``sqrt(1/Tphi_c) n_c``,
``sqrt(1/T1q) q`` and ``sqrt(1/Tphi_q) n_q``.

Two integrators are provided:

``"rk"``
    Adaptive embedded Runge-Kutta (DOP853) on the density matrix.
``"floquet"``
    With constant envelopes and no extra detuning the Hamiltonian is periodic
    with ``T = 2 pi / |chi|``. The one-period propagator is integrated once with the same
    RK scheme, then raised to integer powers. Remainders are integrated
    directly. Unitary propagators are used when the system is lossless,
    superoperators otherwise.
"""
from __future__ import annotations

import cmath
import logging
import math
from dataclasses import dataclass, field, replace
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import solve_ivp
from scipy.special import erf

from . import mem
from .errors import (
    ConfigurationError,
    EmptyBranch,
    IntegratorFailure,
    InvalidRates,
    ScheduleOverflow,
    StiffnessError,
)
from .operators import SpinLike, annihilation, as_spin, identity, number, tensor, unitary_exp

log = logging.getLogger(__name__)

TWO_PI = 2 * np.pi
MHZ = TWO_PI * 1e6
KHZ = TWO_PI * 1e3
US = 1e-6
NS = 1e-9

DEFAULT_RTOL = 1e-9
DEFAULT_ATOL = 1e-11
TRACE_FAIL = 1e-6


# ---------------------------------------------------------------- parameters

def tphi_from_t2(t1: float, t2: float) -> float:
    """Pure dephasing time from ``1/T2 = 1/(2 T1) + 1/Tphi``."""
    rate = 1 / t2 - 1 / (2 * t1)
    if rate <= 0:
        return math.inf
    return 1 / rate


@dataclass(frozen=True)
class SystemParams:
    """Device parameters. Rates in rad/s, times in seconds (``inf`` disables a channel)."""

    chi: float
    cavity_dim: int
    qubit_dim: int = 2
    chi_prime: float = 0.0
    kerr: float = 0.0
    alpha_anh: float = 0.0
    t1_cavity: float = math.inf
    tphi_cavity: float = math.inf
    t1_qubit: float = math.inf
    tphi_qubit: float = math.inf

    def __post_init__(self):
        if self.qubit_dim < 2 or self.cavity_dim < 2:
            raise ConfigurationError("qubit_dim and cavity_dim must be >= 2")
        for name in ("t1_cavity", "tphi_cavity", "t1_qubit", "tphi_qubit"):
            if not getattr(self, name) > 0:
                raise ConfigurationError(f"{name} must be positive or inf")
        if self.chi == 0:
            raise ConfigurationError("chi must be non-zero")

    @property
    def dim(self) -> int:
        return self.qubit_dim * self.cavity_dim

    @property
    def period(self) -> float:
        """Comb period ``2 pi / |chi|``."""
        return TWO_PI / abs(self.chi)

    @property
    def lossless(self) -> bool:
        return all(math.isinf(t) for t in (self.t1_cavity, self.tphi_cavity, self.t1_qubit, self.tphi_qubit))

    def without_losses(self) -> "SystemParams":
        return replace(self, t1_cavity=math.inf, tphi_cavity=math.inf, t1_qubit=math.inf, tphi_qubit=math.inf)

    def ideal(self) -> "SystemParams":
        """Same chi and dimensions with every other non-ideality removed."""
        return replace(self.without_losses(), chi_prime=0.0, kerr=0.0)

    @classmethod
    def table_s1(
        cls,
        column: int,
        cavity_dim: int,
        qubit_dim: int = 4,
        qubit_t1: bool = True,
        qubit_t2: bool = True,
        cavity_t1: bool = True,
        cavity_t2: bool = True,
    ) -> "SystemParams":
        """Measured device parameters (column 1 or 2) with per-channel loss toggles.

        Pure dephasing times come from the measured T1 and Ramsey T2 whether
        or not the T1 channel is enabled.
        """
        p = DEVICE_COLUMNS[column]
        tphi_q = tphi_from_t2(p["t1_qubit"], p["t2_qubit"])
        tphi_c = tphi_from_t2(p["t1_cavity"], p["t2_cavity"])
        return cls(
            chi=p["chi"],
            chi_prime=p["chi_prime"],
            kerr=p["kerr"],
            alpha_anh=p["alpha"],
            cavity_dim=cavity_dim,
            qubit_dim=qubit_dim,
            t1_qubit=p["t1_qubit"] if qubit_t1 else math.inf,
            tphi_qubit=tphi_q if qubit_t2 else math.inf,
            t1_cavity=p["t1_cavity"] if cavity_t1 else math.inf,
            tphi_cavity=tphi_c if cavity_t2 else math.inf,
        )


DEVICE_COLUMNS = {
    1: dict(chi=-2.54 * MHZ, alpha=-180 * MHZ, chi_prime=6.5 * KHZ, kerr=-9 * KHZ,
            t1_qubit=90 * US, t2_qubit=40 * US, t1_cavity=132 * US, t2_cavity=150 * US),
    2: dict(chi=-3.56 * MHZ, alpha=-180 * MHZ, chi_prime=7 * KHZ, kerr=-11 * KHZ,
            t1_qubit=90 * US, t2_qubit=40 * US, t1_cavity=396 * US, t2_cavity=160 * US),
}
"""Measured device parameters; chi, alpha, chi', K in rad/s, times in s."""

TOOTH_TRIMS = (1.0, 1.03, 1.03, 0.97, 0.98)
"""Per-tooth Rabi-rate trims reported to best match the measured spin dynamics."""


# ---------------------------------------------------------------- envelopes

@dataclass(frozen=True)
class Envelope:
    """Flat-top pulse with truncated Gaussian edges.

    The rise occupies ``[start, start + rise]`` with amplitude
    ``exp(-tau^2 / 2 sigma^2)``, where ``tau`` is the distance to the flat
    top. It is cut to zero beyond ``truncation * sigma``. ``sigma = 0``
    gives a rectangular pulse. ``rise`` and ``fall`` default to
    ``truncation * sigma``.
    """

    flat: float
    sigma: float = 0.0
    start: float = 0.0
    rise: Optional[float] = None
    fall: Optional[float] = None
    truncation: float = 2.5

    def __post_init__(self):
        if self.flat < 0 or self.sigma < 0:
            raise ConfigurationError("envelope durations must be non-negative")
        if self.rise is None:
            object.__setattr__(self, "rise", self.truncation * self.sigma)
        if self.fall is None:
            object.__setattr__(self, "fall", self.truncation * self.sigma)

    @property
    def flat_start(self) -> float:
        return self.start + self.rise

    @property
    def flat_end(self) -> float:
        return self.flat_start + self.flat

    @property
    def end(self) -> float:
        return self.flat_end + self.fall

    @property
    def duration(self) -> float:
        return self.end - self.start

    def breakpoints(self) -> Tuple[float, ...]:
        return (self.start, self.flat_start, self.flat_end, self.end)

    def _edge(self, tau):
        cut = self.truncation * self.sigma
        out = np.exp(-0.5 * (tau / self.sigma) ** 2) if self.sigma > 0 else np.zeros_like(tau)
        return np.where(tau <= cut, out, 0.0)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        on = (t >= self.start) & (t <= self.end)
        flat = (t >= self.flat_start) & (t <= self.flat_end)
        rising = on & (t < self.flat_start)
        falling = on & (t > self.flat_end)
        out = np.where(flat, 1.0, out)
        if self.rise > 0:
            out = np.where(rising, self._edge(self.flat_start - t), out)
        if self.fall > 0:
            out = np.where(falling, self._edge(t - self.flat_end), out)
        return out if out.ndim else float(out)

    def value(self, t: float) -> float:
        """Scalar fast path of ``__call__``."""
        if t < self.start or t > self.end:
            return 0.0
        if t < self.flat_start:
            tau = self.flat_start - t
        elif t > self.flat_end:
            tau = t - self.flat_end
        else:
            return 1.0
        if self.sigma <= 0 or tau > self.truncation * self.sigma:
            return 0.0
        return math.exp(-0.5 * (tau / self.sigma) ** 2)

    def area(self) -> float:
        """Integral of the envelope (seconds)."""
        total = self.flat
        for width in (self.rise, self.fall):
            if self.sigma > 0 and width > 0:
                lim = min(width, self.truncation * self.sigma)
                total += self.sigma * math.sqrt(math.pi / 2) * erf(lim / (self.sigma * math.sqrt(2)))
        return total

    def shifted(self, dt: float) -> "Envelope":
        return replace(self, start=self.start + dt)


def constant_envelope(duration: float, start: float = 0.0) -> Envelope:
    return Envelope(flat=duration, sigma=0.0, start=start, rise=0.0, fall=0.0)


# ---------------------------------------------------------------- drives

@dataclass(frozen=True)
class DriveSpec:
    """One comb drive.

    ``teeth`` holds ``(n, phase, trim)`` triples: a tone at ``n chi`` with the
    given phase and relative amplitude. ``carrier_phase`` is the physical
    drive phase ``varphi`` (cavity drives). ``detuning`` adds
    ``exp(i detuning t)`` on top of the comb (rad/s).
    """

    target: str
    base_rate: float
    teeth: Tuple[Tuple[int, float, float], ...]
    envelope: Envelope
    carrier_phase: float = 0.0
    detuning: float = 0.0

    def __post_init__(self):
        if self.target not in ("qubit", "cavity"):
            raise ConfigurationError(f"drive target must be 'qubit' or 'cavity', got {self.target!r}")
        teeth = tuple((int(n), float(p), float(a)) for n, p, a in self.teeth)
        object.__setattr__(self, "teeth", teeth)

    def coefficient(self, t, chi: float):
        """Complex ``f(t)`` multiplying the lowering operator."""
        t = np.asarray(t, dtype=float)
        tone = np.zeros_like(t, dtype=complex)
        for n, phase, trim in self.teeth:
            tone = tone + trim * np.exp(1j * (n * chi * t + phase))
        tone = tone * np.exp(1j * (self.carrier_phase + self.detuning * t))
        return 0.5 * self.base_rate * self.envelope(t) * tone

    @property
    def periodic(self) -> bool:
        return self.detuning == 0.0


def qubit_comb(comb: mem.PhaseComb, omega: float, envelope: Envelope, trims: Optional[Sequence[float]] = None) -> DriveSpec:
    """Qubit comb with one tooth per Fock level of the manifold."""
    n = comb.manifold_size
    trims = tuple(trims[:n]) if trims is not None else (1.0,) * n
    if len(trims) < n:
        trims = trims + (1.0,) * (n - len(trims))
    teeth = tuple((k, comb.phases[k], trims[k]) for k in range(n))
    return DriveSpec("qubit", omega, teeth, envelope)


def blockade_comb(level: int, omega: float, envelope: Envelope) -> DriveSpec:
    """Single qubit tone at ``level * chi`` that blocks the cavity at ``level``."""
    return DriveSpec("qubit", omega, ((level, 0.0, 1.0),), envelope)


def cavity_drive(eps: float, envelope: Envelope, varphi: float = 0.0, teeth: Sequence[int] = (0, 1),
                 detuning: float = 0.0) -> DriveSpec:
    """Cavity drive with tones at ``k chi`` for ``k`` in ``teeth`` (double drive by default)."""
    return DriveSpec("cavity", eps, tuple((k, 0.0, 1.0) for k in teeth), envelope, carrier_phase=varphi,
                     detuning=detuning)


# ---------------------------------------------------------------- operators

@dataclass
class _Model:
    params: SystemParams
    drives: Tuple[DriveSpec, ...]
    energies: np.ndarray
    q: np.ndarray
    c: np.ndarray
    collapse: List[np.ndarray]

    @property
    def dim(self):
        return self.params.dim

    def __post_init__(self):
        # per drive: (is_qubit, envelope, polynomial coefficients in exp(i chi t), detuning)
        self._fast = []
        for d in self.drives:
            nmin = min(n for n, _, _ in d.teeth)
            nmax = max(n for n, _, _ in d.teeth)
            poly = np.zeros(nmax - nmin + 1, dtype=complex)
            for n, phase, trim in d.teeth:
                poly[n - nmin] += 0.5 * d.base_rate * trim * np.exp(1j * (phase + d.carrier_phase))
            self._fast.append((d.target == "qubit", d.envelope, [complex(x) for x in poly[::-1]], nmin, d.detuning))

    def coefficients(self, t):
        fq = 0j
        fc = 0j
        z = cmath.exp(1j * self.params.chi * t)
        for is_qubit, env, poly, nmin, detuning in self._fast:
            a = env.value(t)
            if a == 0.0:
                continue
            tone = 0j
            for coef in poly:
                tone = tone * z + coef
            if nmin:
                tone *= z**nmin
            if detuning:
                tone *= cmath.exp(1j * detuning * t)
            if is_qubit:
                fq += a * tone
            else:
                fc += a * tone
        return fq, fc

    def hamiltonian(self, t):
        fq, fc = self.coefficients(t)
        V = fq * self.q + fc * self.c
        return np.diag(self.energies).astype(complex) + V + V.conj().T

    def periodic(self):
        return all(d.periodic for d in self.drives)


def static_energies(params: SystemParams) -> np.ndarray:
    """Diagonal of the static rotating-frame Hamiltonian, qubit-major."""
    nq = np.repeat(np.arange(params.qubit_dim), params.cavity_dim).astype(float)
    nc = np.tile(np.arange(params.cavity_dim), params.qubit_dim).astype(float)
    return (
        params.chi * nc * nq
        + params.kerr * nc * (nc - 1) / 2
        + params.alpha_anh * nq * (nq - 1) / 2
        + params.chi_prime * nc * (nc - 1) * nq / 2
    )


def system_operators(params: SystemParams):
    """Return ``(q, c, n_q, n_c)`` on the composite space."""
    q = tensor(annihilation(params.qubit_dim), identity(params.cavity_dim))
    c = tensor(identity(params.qubit_dim), annihilation(params.cavity_dim))
    nq = tensor(number(params.qubit_dim), identity(params.cavity_dim))
    nc = tensor(identity(params.qubit_dim), number(params.cavity_dim))
    return q, c, nq, nc


def collapse_operators(params: SystemParams) -> List[np.ndarray]:
    q, c, nq, nc = system_operators(params)
    ops = []
    for time, op in ((params.t1_cavity, c), (params.tphi_cavity, nc), (params.t1_qubit, q), (params.tphi_qubit, nq)):
        if not math.isinf(time):
            ops.append(np.sqrt(1 / time) * op)
    return ops


def _model(params: SystemParams, drives: Sequence[DriveSpec]) -> _Model:
    q, c, _, _ = system_operators(params)
    return _Model(params, tuple(drives), static_energies(params), q, c, collapse_operators(params))


def build_hamiltonian(params: SystemParams, drives: Sequence[DriveSpec], t: float) -> np.ndarray:
    """Rotating-frame Hamiltonian at time ``t`` (rad/s)."""
    for d in drives:
        if not isinstance(d, DriveSpec):
            raise ConfigurationError("drives must be DriveSpec instances")
    return _model(params, drives).hamiltonian(t)


def liouvillian(params: SystemParams, drives: Sequence[DriveSpec], t: float) -> np.ndarray:
    """Row-major vectorised Lindblad generator, ``vec(A rho B) = (A kron B^T) vec(rho)``."""
    m = _model(params, drives)
    H = m.hamiltonian(t)
    eye = np.eye(m.dim)
    L = -1j * (np.kron(H, eye) - np.kron(eye, H.T))
    for C in m.collapse:
        G = C.conj().T @ C
        L += np.kron(C, C.conj()) - 0.5 * np.kron(G, eye) - 0.5 * np.kron(eye, G.T)
    return L


# ---------------------------------------------------------------- states and observables

def ground_state(params: SystemParams, fock_n: int = 0) -> np.ndarray:
    rho = np.zeros((params.dim, params.dim), dtype=complex)
    rho[fock_n, fock_n] = 1.0
    return rho


def product_state(qubit_vec, cavity_vec) -> np.ndarray:
    psi = tensor(np.asarray(qubit_vec, dtype=complex), np.asarray(cavity_vec, dtype=complex))
    return np.outer(psi, psi.conj())


def reduced_cavity(rho: np.ndarray, params: SystemParams) -> np.ndarray:
    r = rho.reshape(params.qubit_dim, params.cavity_dim, params.qubit_dim, params.cavity_dim)
    return np.einsum("iaib->ab", r)


def reduced_qubit(rho: np.ndarray, params: SystemParams) -> np.ndarray:
    r = rho.reshape(params.qubit_dim, params.cavity_dim, params.qubit_dim, params.cavity_dim)
    return np.einsum("iaja->ij", r)


def cavity_populations(rho: np.ndarray, params: SystemParams) -> np.ndarray:
    d = np.real(np.diag(rho)).reshape(params.qubit_dim, params.cavity_dim)
    return d.sum(axis=0)


def qubit_populations(rho: np.ndarray, params: SystemParams) -> np.ndarray:
    d = np.real(np.diag(rho)).reshape(params.qubit_dim, params.cavity_dim)
    return d.sum(axis=1)


def postselect_ground(rho: np.ndarray, params: Optional[SystemParams] = None, qubit_dim: Optional[int] = None):
    """Project the qubit on ``|g>``. Returns ``(rho_cavity, keep_probability)``."""
    rho = np.asarray(rho)
    if params is not None:
        qd, cd = params.qubit_dim, params.cavity_dim
    else:
        qd = qubit_dim or 2
        cd = rho.shape[0] // qd
    block = rho.reshape(qd, cd, qd, cd)[0, :, 0, :]
    keep = float(np.real(np.trace(block)))
    if keep < 1e-12:
        raise EmptyBranch("qubit ground-state branch is empty")
    return block / keep, keep


@dataclass
class StateDiagnostics:
    trace_error: float
    hermiticity_error: float
    min_eigenvalue: float


def diagnose(rho: np.ndarray) -> StateDiagnostics:
    herm = float(np.max(np.abs(rho - rho.conj().T)))
    w = np.linalg.eigvalsh((rho + rho.conj().T) / 2)
    return StateDiagnostics(abs(float(np.real(np.trace(rho))) - 1), herm, float(w[0]))


@dataclass
class Trajectory:
    """Integrator output sampled on ``times``."""

    times: np.ndarray
    cavity_populations: np.ndarray
    qubit_populations: np.ndarray
    keep_probability: np.ndarray
    final_state: np.ndarray
    states: Optional[List[np.ndarray]] = None
    diagnostics: List[StateDiagnostics] = field(default_factory=list)

    @property
    def populations(self) -> np.ndarray:
        return self.cavity_populations

    def max_trace_error(self) -> float:
        return max((d.trace_error for d in self.diagnostics), default=0.0)

    def max_hermiticity_error(self) -> float:
        return max((d.hermiticity_error for d in self.diagnostics), default=0.0)

    def min_eigenvalue(self) -> float:
        return min((d.min_eigenvalue for d in self.diagnostics), default=0.0)


# ---------------------------------------------------------------- integration kernels

def _rk_segment(rhs, y0, t0, t1, t_eval, rtol, atol, max_step=np.inf):
    if t1 <= t0:
        return [y0] * len(t_eval), y0
    try:
        sol = solve_ivp(rhs, (t0, t1), y0, method="DOP853", t_eval=t_eval if len(t_eval) else None,
                        rtol=rtol, atol=atol, max_step=max_step)
    except (ValueError, RuntimeError) as exc:  # pragma: no cover - scipy internal failures
        raise IntegratorFailure(str(exc)) from exc
    if sol.status < 0:
        if "step size" in (sol.message or "").lower():
            raise StiffnessError(sol.message)
        raise IntegratorFailure(sol.message)
    samples = [sol.y[:, k] for k in range(sol.y.shape[1])] if len(t_eval) else []
    return samples, sol.y[:, -1]


def _dissipator_parts(params: SystemParams):
    """Split the dissipator into an elementwise factor and ladder sandwich terms.

    Every ``C^+C`` is diagonal and the dephasing operators are diagonal, so
    their contribution is ``factor * rho``. The ``c`` and ``q`` jumps are
    returned as ``(axis, weights)``: ``C rho C^+`` shifts the 4-index tensor
    ``rho[q, n, q', n']`` by one along the cavity (axis 1) or qubit (axis 0)
    and scales by ``rate * sqrt(k+1) sqrt(k'+1)``.
    """
    Q, N = params.qubit_dim, params.cavity_dim
    nq = np.repeat(np.arange(Q), N).astype(float)
    nc = np.tile(np.arange(N), Q).astype(float)
    d = Q * N
    factor = np.zeros((d, d))
    ladders = []
    for t1, axis, levels, size in ((params.t1_cavity, 1, nc, N), (params.t1_qubit, 0, nq, Q)):
        if math.isinf(t1):
            continue
        g = levels / t1
        factor -= 0.5 * (g[:, None] + g[None, :])
        k = np.sqrt(np.arange(1, size))
        ladders.append((axis, np.outer(k, k) / t1))
    for tphi, levels in ((params.tphi_cavity, nc), (params.tphi_qubit, nq)):
        if math.isinf(tphi):
            continue
        factor -= 0.5 / tphi * (levels[:, None] - levels[None, :]) ** 2
    return factor.astype(complex), ladders


def _add_jumps(out: np.ndarray, rho: np.ndarray, ladders, Q: int, N: int) -> None:
    """``out += sum C rho C^+`` for the ladder jumps; the last two axes hold the matrix."""
    lead = rho.shape[:-2]
    r = rho.reshape(lead + (Q, N, Q, N))
    o = out.reshape(lead + (Q, N, Q, N))
    for axis, w in ladders:
        if axis == 1:
            o[..., :, :-1, :, :-1] += w[:, None, :] * r[..., :, 1:, :, 1:]
        else:
            o[..., :-1, :, :-1, :] += w[:, None, :, None] * r[..., 1:, :, 1:, :]


# The static Hamiltonian is diagonal, so every integrator works in the frame
# rho_I = exp(iE(t - t0)) rho exp(-iE(t - t0)) of the segment start t0. The fast
# static phases (multiples of the anharmonicity) then never limit the step size.
# The non-static part of the generator commutes with this elementwise rotation
# structure: L_I(rho_I) = ph * L(ph^* * rho_I) with ph_ab = exp(i(E_a - E_b)(t - t0)).

def _phase_matrix(E: np.ndarray, tau: float) -> np.ndarray:
    p = np.exp(1j * E * tau)
    return p[:, None] * p.conj()[None, :]


def _rho_to_lab(E: np.ndarray, y: np.ndarray, tau: float) -> np.ndarray:
    d = E.size
    return (y.reshape(d, d) * _phase_matrix(E, tau).conj()).ravel()


def _rho_rhs(m: _Model, t0: float):
    d = m.dim
    E = m.energies
    Q, N = m.params.qubit_dim, m.params.cavity_dim
    factor, ladders = _dissipator_parts(m.params)
    q, c = m.q, m.c

    def rhs(t, y):
        ph = _phase_matrix(E, t - t0)
        rho = y.reshape(d, d) * ph.conj()
        fq, fc = m.coefficients(t)
        V = fq * q + fc * c
        V += V.conj().T
        Vr = V @ rho
        out = factor * rho - 1j * (Vr - Vr.conj().T)
        _add_jumps(out, rho, ladders, Q, N)
        out *= ph
        return out.ravel()

    return rhs


def _unitary_rhs(m: _Model, t0: float):
    d = m.dim
    E = m.energies
    q, c = m.q, m.c

    def rhs(t, y):
        U = y.reshape(d, -1)
        fq, fc = m.coefficients(t)
        V = fq * q + fc * c
        V += V.conj().T
        V *= _phase_matrix(E, t - t0)
        return (-1j * (V @ U)).ravel()

    return rhs


def _superop_rhs(m: _Model, t0: float):
    """RHS acting on a batch of density matrices stored as columns of the superpropagator."""
    d = m.dim
    E = m.energies
    Q, N = m.params.qubit_dim, m.params.cavity_dim
    factor, ladders = _dissipator_parts(m.params)
    q, c = m.q, m.c

    def rhs(t, y):
        # y holds S with shape (d*d, d*d); column k is vec(rho_k)
        ph = _phase_matrix(E, t - t0)
        S = y.reshape(d, d, d * d)
        R = np.moveaxis(S, 2, 0) * ph.conj()  # (batch, d, d)
        fq, fc = m.coefficients(t)
        V = fq * q + fc * c
        V += V.conj().T
        out = factor[None] * R - 1j * (V @ R - R @ V)
        _add_jumps(out, R, ladders, Q, N)
        out *= ph
        return np.moveaxis(out, 0, 2).ravel()

    return rhs


def propagator(params: SystemParams, drives: Sequence[DriveSpec], t0: float, t1: float,
               rtol: float = 1e-10, atol: float = 1e-12, superoperator: Optional[bool] = None) -> np.ndarray:
    """Propagator from ``t0`` to ``t1``.

    Returns a ``d x d`` unitary when lossless, otherwise the ``d^2 x d^2``
    superoperator acting on row-major ``vec(rho)``.
    """
    m = _model(params, drives)
    d = m.dim
    E = m.energies
    if superoperator is None:
        superoperator = not params.lossless
    if superoperator:
        y0 = np.eye(d * d, dtype=complex).ravel()
        _, y = _rk_segment(_superop_rhs(m, t0), y0, t0, t1, [], rtol, atol)
        S = y.reshape(d * d, d * d)
        return S * _phase_matrix(E, t1 - t0).conj().reshape(d * d, 1)
    y0 = np.eye(d, dtype=complex).ravel()
    _, y = _rk_segment(_unitary_rhs(m, t0), y0, t0, t1, [], rtol, atol)
    return np.exp(-1j * E * (t1 - t0))[:, None] * y.reshape(d, d)


def _apply(P: np.ndarray, rho: np.ndarray) -> np.ndarray:
    d = rho.shape[0]
    if P.shape[0] == d:
        return P @ rho @ P.conj().T
    return (P @ rho.ravel()).reshape(d, d)


def _breakpoints(drives: Sequence[DriveSpec], t0: float, t1: float) -> List[float]:
    pts = {t0, t1}
    for d in drives:
        for b in d.envelope.breakpoints():
            if t0 < b < t1:
                pts.add(b)
    return sorted(pts)


def _record(traj_lists, rho, params, store):
    times, cav, qub, keep, states, diags = traj_lists
    cav.append(cavity_populations(rho, params))
    qp = qubit_populations(rho, params)
    qub.append(qp)
    keep.append(qp[0])
    diags.append(diagnose(rho))
    if store:
        states.append(rho.copy())


def lindblad_evolve(
    params: SystemParams,
    drives: Sequence[DriveSpec],
    rho0: np.ndarray,
    t_grid: Sequence[float],
    method: str = "rk",
    rtol: float = DEFAULT_RTOL,
    atol: float = DEFAULT_ATOL,
    store_states: bool = False,
) -> Trajectory:
    """Integrate the master equation and sample on ``t_grid`` (ascending, seconds).

    ``method="rk"`` integrates directly between envelope breakpoints.
    ``method="floquet"`` requires periodic drives with envelopes constant over
    the whole grid. It reuses the one-period propagator, which suits very
    long evolutions.
    """
    rho0 = np.asarray(rho0, dtype=complex)
    if rho0.shape != (params.dim, params.dim):
        raise ConfigurationError(f"rho0 has shape {rho0.shape}, expected {(params.dim, params.dim)}")
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or t_grid.size == 0 or np.any(np.diff(t_grid) < 0):
        raise ConfigurationError("t_grid must be a non-empty ascending 1-D array")
    m = _model(params, drives)
    lists = ([], [], [], [], [], [])
    rho = rho0.copy()
    if method == "rk":
        E = m.energies
        pts = _breakpoints(drives, t_grid[0], t_grid[-1])
        _record(lists, rho, params, store_states)
        gi = 1
        for a, b in zip(pts[:-1], pts[1:]):
            hi = np.searchsorted(t_grid, b, side="right")
            if b == pts[-1]:
                hi = t_grid.size
            ev = t_grid[gi:hi]
            samples, y = _rk_segment(_rho_rhs(m, a), rho.ravel(), a, b, ev, rtol, atol)
            for t, s in zip(ev, samples):
                _record(lists, _rho_to_lab(E, s, t - a).reshape(rho.shape), params, store_states)
            gi = hi
            rho = _rho_to_lab(E, y, b - a).reshape(rho.shape)
    elif method == "floquet":
        _check_floquet(m, t_grid)
        T = params.period
        t0 = t_grid[0]
        P_T = propagator(params, drives, t0, t0 + T, rtol=min(rtol, 1e-10), atol=min(atol, 1e-12))
        k_done = 0
        base = rho0.copy()
        for t in t_grid:
            k, r = divmod(t - t0, T)
            k = int(k)
            if r > T * (1 - 1e-9):
                k, r = k + 1, 0.0
            if r < T * 1e-9:
                r = 0.0
            base = _apply(_matrix_power(P_T, k - k_done), base) if k > k_done else base
            k_done = k
            state = base
            if r > 0:
                ts = t0 + k * T
                _, y = _rk_segment(_rho_rhs(m, ts), base.ravel(), ts, ts + r, [], rtol, atol)
                state = _rho_to_lab(m.energies, y, r).reshape(base.shape)
            _record(lists, state, params, store_states)
        rho = state
    else:
        raise ConfigurationError(f"unknown method {method!r}")

    times, cav, qub, keep, states, diags = lists
    traj = Trajectory(
        times=t_grid.copy(),
        cavity_populations=np.array(cav),
        qubit_populations=np.array(qub),
        keep_probability=np.array(keep),
        final_state=rho,
        states=states if store_states else None,
        diagnostics=diags,
    )
    if traj.max_trace_error() > TRACE_FAIL:
        raise IntegratorFailure(f"trace drift {traj.max_trace_error():.2e} exceeds {TRACE_FAIL:g}")
    return traj


def _matrix_power(P: np.ndarray, k: int) -> np.ndarray:
    if k == 0:
        return np.eye(P.shape[0], dtype=complex)
    if P.shape[0] <= 64:
        # unitary: diagonalise for stable large powers
        w, v = np.linalg.eig(P)
        if np.allclose(np.abs(w), 1, atol=1e-9):
            return (v * w**k) @ np.linalg.inv(v)
    return np.linalg.matrix_power(P, k)


def _check_floquet(m: _Model, t_grid: np.ndarray) -> None:
    if not m.periodic():
        raise ConfigurationError("floquet method needs drives without extra detuning")
    t0, t1 = t_grid[0], t_grid[-1]
    for d in m.drives:
        env = d.envelope
        inside = env.flat_start <= t0 and t1 + m.params.period <= env.flat_end + 1e-15
        outside = t1 <= env.start or t0 >= env.end
        if not (inside or outside):
            raise ConfigurationError("floquet method needs envelopes constant over the sampled window")


# ---------------------------------------------------------------- effective model

def effective_hamiltonian(comb: mem.PhaseComb, eps: float, varphi: float = 0.0) -> np.ndarray:
    """``H_f = (eps/2)(e^{i varphi} M + h.c.) = (eps/2) M_{-varphi}`` on the manifold."""
    return 0.5 * eps * mem.generator_from_phases(comb, -varphi)


def effective_evolve(comb: mem.PhaseComb, eps: float, varphi: float, manifold: int, t_grid: Sequence[float],
                     psi0: Optional[np.ndarray] = None) -> Trajectory:
    """Closed evolution under the ideal effective Hamiltonian on the first ``manifold`` Fock levels."""
    if manifold < 2:
        raise ConfigurationError("manifold must have at least two levels")
    if comb.manifold_size != manifold:
        raise ConfigurationError(f"comb has {comb.manifold_size} phases, manifold is {manifold}")
    H = effective_hamiltonian(comb, eps, varphi)
    w, v = np.linalg.eigh(H)
    psi0 = np.eye(manifold, dtype=complex)[0] if psi0 is None else np.asarray(psi0, dtype=complex)
    c0 = v.conj().T @ psi0
    t_grid = np.asarray(t_grid, dtype=float)
    psis = (v[None, :, :] * np.exp(-1j * np.outer(t_grid, w))[:, None, :]) @ c0
    pops = np.abs(psis) ** 2
    states = [np.outer(p, p.conj()) for p in psis]
    return Trajectory(
        times=t_grid,
        cavity_populations=pops,
        qubit_populations=np.tile([1.0, 0.0], (t_grid.size, 1)),
        keep_probability=np.ones(t_grid.size),
        final_state=states[-1],
        states=states,
    )


def spin_populations(J: SpinLike, angle, axis=(1.0, 0.0, 0.0)) -> np.ndarray:
    """Exact ``|<n| exp(-i angle n.J) |0>|^2`` for each angle (rows) and Fock level (columns)."""
    from .operators import spin_rotation

    s = as_spin(J)
    angle = np.atleast_1d(angle)
    return np.array([np.abs(spin_rotation(s, a, axis)[:, 0]) ** 2 for a in angle])


# ---------------------------------------------------------------- measurement model

def measurement_model(populations, misassign: float, pi_infidelity: float) -> np.ndarray:
    """``p' = (1 - f)[(1 - r) p + r (1 - p)]`` per Fock probe channel."""
    for name, val in (("misassign", misassign), ("pi_infidelity", pi_infidelity)):
        if not 0 <= val <= 0.5:
            raise InvalidRates(f"{name} = {val} outside [0, 0.5]")
    p = np.asarray(populations, dtype=float)
    return (1 - pi_infidelity) * ((1 - misassign) * p + misassign * (1 - p))


# ---------------------------------------------------------------- schedules

QUBIT_SIGMA = 38 * NS
CAVITY_SIGMA = 80 * NS


@dataclass
class Schedule:
    """A runnable spin-rotation experiment. Unpacks as ``(drives, total_time)``."""

    drives: List[DriveSpec]
    total_time: float
    comb: mem.PhaseComb
    decoder_phases: np.ndarray
    qubit_envelope: Envelope
    cavity_envelope: Optional[Envelope]
    decoder_sign: int = 1

    def __iter__(self):
        return iter((self.drives, self.total_time))

    def decoder(self, params: SystemParams) -> np.ndarray:
        """Instantaneous SNAP ``exp(-i s sum_n (phi_n/2) |n><n| Z)`` with Z = +1 on g, -1 on e.

        ``s = +1`` undoes the comb-frame phases; ``s = -1`` doubles them.
        """
        z = np.zeros(params.qubit_dim)
        z[0], z[1] = 1.0, -1.0
        ph = np.zeros(params.cavity_dim)
        k = min(len(self.decoder_phases), params.cavity_dim)
        ph[:k] = self.decoder_phases[:k]
        return np.diag(np.exp(-1j * self.decoder_sign * np.kron(z, ph)))


def comb_flat_for_area(omega: float, min_flat: float, sigma: float = QUBIT_SIGMA, truncation: float = 2.5) -> float:
    """Shortest flat top ``>= min_flat`` for which the comb pulse area is a multiple of ``2 pi``."""
    edge = Envelope(flat=0.0, sigma=sigma, truncation=truncation).area()
    rabi = TWO_PI / omega
    l = max(1, math.ceil((min_flat + edge) / rabi - 1e-12))
    return l * rabi - edge


def schedule_spin_experiment(
    J: SpinLike,
    params: SystemParams,
    eps: float,
    omega: float,
    t_cavity: float,
    comb_flat: Optional[float] = None,
    varphi: float = 0.0,
    trims: Optional[Sequence[float]] = None,
    qubit_sigma: float = QUBIT_SIGMA,
    cavity_sigma: float = CAVITY_SIGMA,
    end_margin: float = 0.0,
    detuning: float = 0.0,
    comb: Optional[mem.PhaseComb] = None,
    decoder_sign: int = 1,
    qubit_truncation: float = 2.5,
    cavity_truncation: float = 2.5,
) -> Schedule:
    """Qubit comb, a right-aligned cavity double drive inside its flat top, then the decoder.

    ``t_cavity`` is the flat-top length of the cavity pulse. Zero omits the
    cavity drive. Every schedule built with the same ``comb_flat`` ends at
    the same time, because the cavity pulse always finishes ``end_margin``
    before the comb starts to fall.
    """
    return schedule_pulse_train(
        J, params, eps, omega, [(t_cavity, varphi)], comb_flat=comb_flat, trims=trims, qubit_sigma=qubit_sigma,
        cavity_sigma=cavity_sigma, end_margin=end_margin, detuning=detuning, comb=comb,
        decoder_sign=decoder_sign, qubit_truncation=qubit_truncation, cavity_truncation=cavity_truncation,
    )


def schedule_pulse_train(
    J: SpinLike,
    params: SystemParams,
    eps: float,
    omega: float,
    pulses: Sequence[Tuple[float, float]],
    comb_flat: Optional[float] = None,
    trims: Optional[Sequence[float]] = None,
    qubit_sigma: float = QUBIT_SIGMA,
    cavity_sigma: float = CAVITY_SIGMA,
    end_margin: float = 0.0,
    detuning: float = 0.0,
    comb: Optional[mem.PhaseComb] = None,
    decoder_sign: int = 1,
    qubit_truncation: float = 2.5,
    cavity_truncation: float = 2.5,
) -> Schedule:
    """Like :func:`schedule_spin_experiment` with several back-to-back cavity pulses.

    ``pulses`` holds ``(flat_top, varphi)`` pairs played in order; pulses of
    zero length are skipped. The train is right-aligned inside the comb
    flat top so trains with a shared ``comb_flat`` end together.
    """
    s = as_spin(J)
    comb = comb or mem.su2_phases(s)
    cav_edges = 2 * cavity_truncation * cavity_sigma
    pulses = [(float(t), float(v)) for t, v in pulses if t > 0]
    needed = sum(t + cav_edges for t, _ in pulses) + end_margin
    if comb_flat is None:
        comb_flat = comb_flat_for_area(omega, needed, qubit_sigma, qubit_truncation)
    if needed > comb_flat + 1e-15:
        raise ScheduleOverflow(f"cavity pulses ({needed:.3e} s) exceed comb flat top ({comb_flat:.3e} s)")
    q_env = Envelope(flat=comb_flat, sigma=qubit_sigma, truncation=qubit_truncation)
    drives = [qubit_comb(comb, omega, q_env, trims)]
    start = q_env.flat_end - end_margin - (needed - end_margin)
    c_env = None
    for t, varphi in pulses:
        c_env = Envelope(flat=t, sigma=cavity_sigma, start=start, truncation=cavity_truncation)
        drives.append(cavity_drive(eps, c_env, varphi, detuning=detuning))
        start = c_env.end
    return Schedule(drives, q_env.end, comb, mem.decoder_snap_phases(comb), q_env, c_env, decoder_sign)


@dataclass
class ExperimentResult:
    populations: np.ndarray
    keep_probability: float
    cavity_state: np.ndarray
    final_state: np.ndarray
    qubit_purity: float


def run_schedule(params: SystemParams, schedule: Schedule, rho0: Optional[np.ndarray] = None,
                 rtol: float = DEFAULT_RTOL, atol: float = DEFAULT_ATOL) -> ExperimentResult:
    """Integrate a schedule, apply the decoder, and post-select the qubit on ``|g>``."""
    rho0 = ground_state(params) if rho0 is None else rho0
    traj = lindblad_evolve(params, schedule.drives, rho0, [0.0, schedule.total_time], rtol=rtol, atol=atol)
    D = schedule.decoder(params)
    rho = D @ traj.final_state @ D.conj().T
    rq = reduced_qubit(rho, params)
    purity = float(np.real(np.trace(rq @ rq)))
    rc, keep = postselect_ground(rho, params)
    return ExperimentResult(np.real(np.diag(rc)), keep, rc, rho, purity)


def cavity_flat_for_angle(J: SpinLike, eps: float, angle: float = np.pi, cavity_sigma: float = CAVITY_SIGMA,
                          cavity_truncation: float = 2.5) -> float:
    """Cavity flat top giving spin rotation ``angle`` once the edge area is included."""
    s = as_spin(J)
    edges = 2 * Envelope(flat=0.0, sigma=cavity_sigma, truncation=cavity_truncation).area()
    return angle * math.sqrt(s.two_j) / eps - edges


def calibrate_return(
    J: SpinLike,
    params: SystemParams,
    eps: float,
    omega: float,
    t_cavity: float,
    points: int = 16,
    rtol: float = DEFAULT_RTOL,
    atol: float = DEFAULT_ATOL,
    **schedule_kw,
) -> Tuple[float, float]:
    """Choose the comb length that returns the qubit to ``|g>`` for a reference cavity pulse.

    The comb is extended after the cavity pulse by ``tail`` in ``[0, T_Rabi)``
    and the tail maximising the final ground-state probability is kept.
    The state at the end of the cavity pulse is shared by every candidate.
    Returns ``(comb_flat, end_margin)`` to pass to
    :func:`schedule_spin_experiment`; every schedule built with them ends at
    the same time.
    """
    rabi = TWO_PI / omega
    base = schedule_spin_experiment(J, params, eps, omega, t_cavity, **schedule_kw)
    base_flat = base.qubit_envelope.flat
    ref = schedule_spin_experiment(J, params, eps, omega, t_cavity, comb_flat=base_flat + rabi,
                                   end_margin=rabi, **schedule_kw)
    t_split = ref.cavity_envelope.end if ref.cavity_envelope is not None else ref.qubit_envelope.flat_start
    rho = lindblad_evolve(params, ref.drives, ground_state(params), [0.0, t_split], rtol=rtol, atol=atol).final_state
    best_pg, best_tail = -1.0, 0.0
    for tail in np.arange(points) * rabi / points:
        sch = schedule_spin_experiment(J, params, eps, omega, t_cavity, comb_flat=base_flat + tail,
                                       end_margin=tail, **schedule_kw)
        tr = lindblad_evolve(params, sch.drives[:1], rho, [t_split, sch.total_time], rtol=rtol, atol=atol)
        pg = float(tr.keep_probability[-1])
        if pg > best_pg:
            best_pg, best_tail = pg, float(tail)
    log.debug("return calibration: tail %.3g s, P_g %.4f", best_tail, best_pg)
    return base_flat + best_tail, best_tail


@dataclass
class BudgetRow:
    """Peak Fock populations over a cavity-duration sweep.

    ``max_p`` uses the unconditioned cavity populations; ``max_p_postselected``
    the populations conditioned on the qubit ending in ``|g>``.
    """

    t_cavity: np.ndarray
    populations: np.ndarray
    populations_postselected: np.ndarray
    keep_probability: np.ndarray
    comb_flat: float
    end_margin: float

    def max_p(self, n: int) -> float:
        return float(np.max(self.populations[:, n]))

    def max_p_postselected(self, n: int) -> float:
        return float(np.max(self.populations_postselected[:, n]))


def error_budget_row(
    J: SpinLike,
    params: SystemParams,
    eps: float,
    omega: float,
    trims: Optional[Sequence[float]] = None,
    span: float = 0.8 * US,
    coarse: int = 5,
    threads: int = 1,
    **schedule_kw,
) -> BudgetRow:
    """Sweep the cavity duration around the spin inversion and record the populations.

    The comb length is calibrated once with :func:`calibrate_return` at the
    nominal inversion time and shared by the whole sweep. A coarse grid of
    ``coarse`` points over ``+-span`` is refined by two points around the
    best ``P_{2J}``.
    """
    s = as_spin(J)
    kw = dict(trims=trims, **schedule_kw)
    t_ref = cavity_flat_for_angle(s, eps, np.pi, kw.get("cavity_sigma", CAVITY_SIGMA),
                                  kw.get("cavity_truncation", 2.5))
    flat, margin = calibrate_return(s, params, eps, omega, t_ref + span, **kw)

    def point(tc):
        sch = schedule_spin_experiment(s, params, eps, omega, tc, comb_flat=flat, end_margin=margin, **kw)
        r = run_schedule(params, sch)
        return cavity_populations(r.final_state, params), r.populations, r.keep_probability

    grid = list(t_ref + np.linspace(-span, span, coarse))
    results = sweep(point, grid, threads)
    step = 2 * span / max(coarse - 1, 1)
    k = int(np.argmax([r[0][s.two_j] for r in results]))
    extra = [grid[k] - step / 2, grid[k] + step / 2]
    grid += extra
    results += sweep(point, extra, threads)
    order = np.argsort(grid)
    return BudgetRow(
        t_cavity=np.asarray(grid)[order],
        populations=np.array([results[i][0] for i in order]),
        populations_postselected=np.array([results[i][1] for i in order]),
        keep_probability=np.array([results[i][2] for i in order]),
        comb_flat=flat,
        end_margin=margin,
    )


# ---------------------------------------------------------------- parallel sweeps

def sweep(fn, items, threads: int = 1):
    """Map ``fn`` over ``items`` with a thread pool; results keep input order."""
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    from concurrent.futures import ThreadPoolExecutor

    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))
