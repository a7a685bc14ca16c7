"""Versioned scenario configuration schema.

Physical quantities carry their unit in the field name: ``*_hz`` fields are
ordinary frequencies (the solver multiplies by ``2 pi``), ``*_s`` are seconds
and ``*_rad`` are radians.
"""

from __future__ import annotations

import math
from typing import Annotated, List, Literal, Optional, Union

import numpy as np
from pydantic import AfterValidator, BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from . import dynamics as dyn

SCHEMA_VERSION = 1


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class Range(_Strict):
    """Inclusive linear grid ``np.linspace(start, stop, points)``."""

    start: float
    stop: float
    points: int = Field(ge=1, le=100_000)

    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.points)


def _spin_value(v: float) -> float:
    two_j = round(2 * v)
    if abs(2 * v - two_j) > 1e-9 or two_j < 1:
        raise ValueError("spin must be a positive multiple of 1/2")
    return two_j / 2


SpinValue = Annotated[float, AfterValidator(_spin_value)]


class LossToggles(_Strict):
    qubit_t1: bool = True
    qubit_t2: bool = True
    cavity_t1: bool = True
    cavity_t2: bool = True


class SystemBlock(_Strict):
    """Device model. Presets take the measured device columns; ``custom`` needs ``chi_hz``."""

    preset: Literal["lossless", "table-s1-col1", "table-s1-col2", "custom"] = "table-s1-col2"
    cavity_levels: Optional[int] = Field(default=None, ge=2, le=60)
    qubit_levels: int = Field(default=4, ge=2, le=6)
    losses: LossToggles = LossToggles()
    chi_hz: Optional[float] = None
    chi_prime_hz: Optional[float] = None
    kerr_hz: Optional[float] = None
    anharmonicity_hz: Optional[float] = None
    t1_qubit_s: Optional[float] = Field(default=None, gt=0)
    t2_qubit_s: Optional[float] = Field(default=None, gt=0)
    t1_cavity_s: Optional[float] = Field(default=None, gt=0)
    t2_cavity_s: Optional[float] = Field(default=None, gt=0)

    @model_validator(mode="after")
    def _custom_needs_chi(self):
        if self.preset == "custom" and self.chi_hz is None:
            raise ValueError("preset 'custom' requires chi_hz")
        if self.chi_hz == 0:
            raise ValueError("chi_hz must be non-zero")
        return self

    def build(self, spin: float) -> dyn.SystemParams:
        """``SystemParams`` with ``2J + 4`` cavity levels unless ``cavity_levels`` is set."""
        cav = self.cavity_levels or int(round(2 * spin)) + 4
        col = 1 if self.preset == "table-s1-col1" else 2
        base = dict(dyn.DEVICE_COLUMNS[col])
        if self.preset == "custom":
            base.update(chi_prime=0.0, kerr=0.0, alpha=0.0, t1_qubit=math.inf, t2_qubit=math.inf,
                        t1_cavity=math.inf, t2_cavity=math.inf)
        two_pi = 2 * math.pi
        for key, field in (("chi", "chi_hz"), ("chi_prime", "chi_prime_hz"), ("kerr", "kerr_hz"),
                           ("alpha", "anharmonicity_hz")):
            if getattr(self, field) is not None:
                base[key] = two_pi * getattr(self, field)
        for key in ("t1_qubit", "t2_qubit", "t1_cavity", "t2_cavity"):
            if getattr(self, key + "_s") is not None:
                base[key] = getattr(self, key + "_s")
        on = self.losses if self.preset != "lossless" else LossToggles(
            qubit_t1=False, qubit_t2=False, cavity_t1=False, cavity_t2=False)
        inf = math.inf
        return dyn.SystemParams(
            chi=base["chi"],
            chi_prime=base["chi_prime"],
            kerr=base["kerr"],
            alpha_anh=base["alpha"],
            cavity_dim=cav,
            qubit_dim=self.qubit_levels,
            t1_qubit=base["t1_qubit"] if on.qubit_t1 else inf,
            tphi_qubit=dyn.tphi_from_t2(base["t1_qubit"], base["t2_qubit"]) if on.qubit_t2 else inf,
            t1_cavity=base["t1_cavity"] if on.cavity_t1 else inf,
            tphi_cavity=dyn.tphi_from_t2(base["t1_cavity"], base["t2_cavity"]) if on.cavity_t2 else inf,
        )


class DriveBlock(_Strict):
    """Comb and cavity drive. ``eps_hz`` and ``omega_hz`` are rates divided by ``2 pi``."""

    spin: SpinValue = 1.5
    eps_hz: float = Field(default=80e3, gt=0)
    omega_hz: float = Field(default=0.732e6, gt=0)
    varphi_rad: float = 0.0
    trims: Optional[List[float]] = None
    cavity_detuning_hz: float = 0.0
    qubit_sigma_s: float = Field(default=dyn.QUBIT_SIGMA, gt=0)
    cavity_sigma_s: float = Field(default=dyn.CAVITY_SIGMA, gt=0)
    calibrate_return: bool = False

    @field_validator("trims")
    @classmethod
    def _positive_trims(cls, v):
        if v is not None and any(t <= 0 for t in v):
            raise ValueError("trims must be positive")
        return v

    @property
    def eps(self) -> float:
        return 2 * math.pi * self.eps_hz

    @property
    def omega(self) -> float:
        return 2 * math.pi * self.omega_hz


class SolverBlock(_Strict):
    rtol: float = Field(default=dyn.DEFAULT_RTOL, gt=0, lt=1)
    atol: float = Field(default=dyn.DEFAULT_ATOL, gt=0, lt=1)


class OutputBlock(_Strict):
    directory: str = "out"
    prefix: Optional[str] = None


class StateBlock(_Strict):
    """Cavity state for the Wigner scenarios.

    ``fock``: ``|n>``; ``spin-coherent``: ``R(theta, phi)|0>`` on the spin
    manifold; ``spin-cat``: a logical codeword; ``prep``: simulated
    preparation of the ``axis`` spin cat through the full model.
    """

    kind: Literal["fock", "spin-coherent", "spin-cat", "prep"] = "spin-cat"
    spin: SpinValue = 1.0
    fock: int = Field(default=0, ge=0)
    theta_rad: float = 0.0
    phi_rad: float = 0.0
    logical: Literal["zero", "one", "plus", "minus"] = "zero"
    axis: Literal["x", "y"] = "y"

    @model_validator(mode="after")
    def _fock_in_manifold(self):
        if self.kind == "fock" and self.fock > 2 * self.spin:
            raise ValueError("fock level lies outside the spin manifold")
        return self


class _Base(_Strict):
    schema_version: Literal[1]
    seed: int = 0
    output: OutputBlock = OutputBlock()
    solver: SolverBlock = SolverBlock()


class _Simulated(_Base):
    system: SystemBlock = SystemBlock()
    drive: DriveBlock = DriveBlock()


# ---------------------------------------------------------------- scenarios

class SpinDynamicsSweep(_Strict):
    t_cavity_s: Range


class SpinDynamicsConfig(_Simulated):
    scenario: Literal["spin-dynamics"]
    sweep: SpinDynamicsSweep


BUDGET_ROWS = ("all-losses", "only-qubit-t1", "only-qubit-t2", "only-cavity-t1", "only-cavity-t2", "lossless")
"""Error-budget rows: every channel, exactly one channel, or none."""


class BudgetSweep(_Strict):
    rows: List[Literal[BUDGET_ROWS]] = Field(default=list(BUDGET_ROWS), min_length=1)  # type: ignore[valid-type]
    span_s: float = Field(default=0.8e-6, gt=0)
    coarse_points: int = Field(default=5, ge=2, le=41)


class ErrorBudgetConfig(_Simulated):
    scenario: Literal["error-budget"]
    sweep: BudgetSweep = BudgetSweep()


class TimeSweep(_Strict):
    t_s: Range


class BlockadeCompareConfig(_Base):
    scenario: Literal["blockade-compare"]
    spin: SpinValue = 1.5
    eps_hz: float = Field(default=80e3, gt=0)
    sweep: TimeSweep


class GammaSweep(_Strict):
    gamma_rad: Range

    @field_validator("gamma_rad")
    @classmethod
    def _in_range(cls, r):
        if min(r.start, r.stop) < 0 or max(r.start, r.stop) > math.pi / 2 + 1e-12:
            raise ValueError("gamma must lie in [0, pi/2]")
        return r


class NonlinearRotationConfig(_Base):
    scenario: Literal["nonlinear-rotation"]
    spin: SpinValue = 1.5
    restarts: int = Field(default=32, ge=1, le=1000)
    sweep: GammaSweep



class SpinListSweep(_Strict):
    spin: List[SpinValue] = Field(min_length=1)


class SpincatGatesConfig(_Base):
    scenario: Literal["spincat-gates"]
    gates: List[Literal["I", "X", "Y", "Z", "SdagHS"]] = ["I", "X", "Y", "Z", "SdagHS"]
    sweep: SpinListSweep


class LockSweep(_Strict):
    t_lock_s: Range


class SpinLockConfig(_Simulated):
    scenario: Literal["spin-lock"]
    prep_varphi_rad: float = math.pi / 2
    lock_varphi_rad: float = 0.0
    sweep: LockSweep


class ChevronSweep(_Strict):
    detuning_hz: Range
    t_cavity_s: Range


class ChevronConfig(_Simulated):
    scenario: Literal["chevron"]
    sweep: ChevronSweep


class PhaseSweep(_Strict):
    varphi_rad: Range


class PhaseVariationConfig(_Simulated):
    scenario: Literal["phase-variation"]
    first_varphi_rad: float = 0.0
    sweep: PhaseSweep


class BosonicGrid(_Strict):
    re_alpha: Range
    im_alpha: Range


class WignerConfig(_Base):
    scenario: Literal["wigner"]
    state: StateBlock = StateBlock()
    system: Optional[SystemBlock] = None
    drive: Optional[DriveBlock] = None
    sweep: BosonicGrid


class SphereGrid(_Strict):
    theta_rad: Range
    phi_rad: Range


class SpinWignerConfig(_Base):
    scenario: Literal["spin-wigner"]
    state: StateBlock = StateBlock()
    system: Optional[SystemBlock] = None
    drive: Optional[DriveBlock] = None
    misassign: float = Field(default=0.0, ge=0, le=0.5)
    bias: float = 0.0
    sweep: SphereGrid


class AperiodicityConfig(_Base):
    scenario: Literal["aperiodicity-report"]
    max_digits: int = Field(default=30, ge=5, le=200)
    sweep: SpinListSweep


class UniversalityConfig(_Base):
    scenario: Literal["universality-report"]
    nonlinear_coeffs: List[float] = [0.1, 0.05, 0.02]
    sweep: SpinListSweep


ScenarioConfig = Annotated[
    Union[
        SpinDynamicsConfig, ErrorBudgetConfig, BlockadeCompareConfig, NonlinearRotationConfig,
        SpincatGatesConfig, SpinLockConfig, ChevronConfig, PhaseVariationConfig, WignerConfig,
        SpinWignerConfig, AperiodicityConfig, UniversalityConfig,
    ],
    Field(discriminator="scenario"),
]


class _Root(BaseModel):
    config: ScenarioConfig


def _needs_drive(cfg) -> None:
    if isinstance(cfg, (WignerConfig, SpinWignerConfig)) and cfg.state.kind == "prep" and cfg.drive is None:
        raise ValueError("state.kind 'prep' requires a drive block")


class ConfigError(Exception):
    """Schema violation. ``path`` is the dotted location of the offending field."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path
        self.message = message


def _format_loc(loc) -> str:
    # drop the wrapper key and the discriminator tag
    parts = [str(p) for p in loc[1:]]
    if parts and parts[0] in SCENARIO_NAMES:
        parts = parts[1:]
    return ".".join(parts)


def parse_config(data) -> object:
    """Validate a mapping; raise :class:`ConfigError` with the first failing field path."""
    if not isinstance(data, dict):
        raise ConfigError("", "config must be a mapping")
    if "schema_version" not in data:
        raise ConfigError("schema_version", "field required")
    if data.get("scenario") not in SCENARIO_NAMES:
        raise ConfigError("scenario", f"unknown scenario {data.get('scenario')!r}; expected one of "
                                      + ", ".join(SCENARIO_NAMES))
    try:
        cfg = _Root(config=data).config
    except ValidationError as exc:
        err = exc.errors()[0]
        raise ConfigError(_format_loc(err["loc"]), err["msg"]) from None
    try:
        _needs_drive(cfg)
    except ValueError as exc:
        raise ConfigError("drive", str(exc)) from None
    return cfg


SCENARIO_NAMES = (
    "spin-dynamics", "error-budget", "blockade-compare", "nonlinear-rotation", "spincat-gates", "spin-lock",
    "chevron", "phase-variation", "wigner", "spin-wigner", "aperiodicity-report", "universality-report",
)
