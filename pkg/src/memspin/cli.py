"""Configuration-driven scenario runner.

``memspin run <config.yaml>`` validates the config, evaluates the scenario's
sweep on a thread pool, and writes CSV tables plus a JSON manifest. Data
files depend only on the config and seed, so reruns are byte-identical.

Exit codes: 0 success, 2 schema or configuration error (with the field
path), 3 integrator or scenario failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
import threading
import time
from dataclasses import dataclass, field
from importlib import metadata
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import yaml

from . import config as cf
from . import dynamics as dyn
from . import logical as lg
from . import mem, synthesis, tomography
from .errors import ConfigurationError, MemspinError, ScheduleOverflow
from .operators import as_spin

EXIT_OK, EXIT_CONFIG, EXIT_FAILURE = 0, 2, 3


@dataclass
class Table:
    header: List[str]
    rows: List[list] = field(default_factory=list)


@dataclass
class Outcome:
    tables: Dict[str, Table]
    report: Optional[dict] = None
    invariants: Optional[dict] = None


@dataclass(frozen=True)
class Scenario:
    name: str
    target: str
    summary: str
    runner: Callable


SCENARIOS: Dict[str, Scenario] = {}


def scenario(name: str, target: str, summary: str):
    def deco(fn):
        SCENARIOS[name] = Scenario(name, target, summary, fn)
        return fn

    return deco


# ---------------------------------------------------------------- helpers

def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if x == 0:
            return "0"
        return format(x, ".12g")
    if x is None:
        return ""
    return str(x)


def write_csv(path: Path, table: Table) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(table.header)
    for row in table.rows:
        w.writerow([_fmt(v) for v in row])
    path.write_text(buf.getvalue())


def _fock_header(dim: int, prefix: str = "p_fock_") -> List[str]:
    return [f"{prefix}{n}" for n in range(dim)]


class _Invariants:
    """Worst trace, Hermiticity and positivity errors over every simulated final state."""

    def __init__(self):
        self.trace_error = 0.0
        self.hermiticity_error = 0.0
        self.min_eigenvalue = math.inf
        self._lock = threading.Lock()

    def add(self, rho: np.ndarray) -> None:
        d = dyn.diagnose(rho)
        with self._lock:
            self._update(d)

    def _update(self, d: dyn.StateDiagnostics) -> None:
        self.trace_error = max(self.trace_error, d.trace_error)
        self.hermiticity_error = max(self.hermiticity_error, d.hermiticity_error)
        self.min_eigenvalue = min(self.min_eigenvalue, d.min_eigenvalue)

    def as_dict(self) -> dict:
        return {"max_trace_error": self.trace_error, "max_hermiticity_error": self.hermiticity_error,
                "min_eigenvalue": self.min_eigenvalue}


def _schedule_kw(drive: cf.DriveBlock) -> dict:
    return dict(
        trims=drive.trims,
        qubit_sigma=drive.qubit_sigma_s,
        cavity_sigma=drive.cavity_sigma_s,
        detuning=2 * math.pi * drive.cavity_detuning_hz,
    )


class _TrainRunner:
    """Runs pulse trains that share one comb length, so every point ends at the same time."""

    def __init__(self, cfg, trains: Sequence[Sequence[Tuple[float, float]]]):
        d = cfg.drive
        self.cfg = cfg
        self.spin = as_spin(d.spin)
        self.params = cfg.system.build(d.spin)
        self.kw = _schedule_kw(d)
        edges = 2 * 2.5 * d.cavity_sigma_s
        needed = max(sum(t + edges for t, _ in tr if t > 0) for tr in trains)
        if d.calibrate_return:
            t_ref = max(needed - edges, 0.0)
            self.flat, self.margin = dyn.calibrate_return(
                self.spin, self.params, d.eps, d.omega, t_ref, rtol=cfg.solver.rtol, atol=cfg.solver.atol,
                **self.kw)
        else:
            self.flat = dyn.comb_flat_for_area(d.omega, needed, d.qubit_sigma_s)
            self.margin = 0.0
        self.invariants = _Invariants()

    def __call__(self, pulses, detuning: Optional[float] = None):
        d = self.cfg.drive
        kw = dict(self.kw)
        if detuning is not None:
            kw["detuning"] = detuning
        sch = dyn.schedule_pulse_train(self.spin, self.params, d.eps, d.omega, pulses, comb_flat=self.flat,
                                       end_margin=self.margin, **kw)
        r = dyn.run_schedule(self.params, sch, rtol=self.cfg.solver.rtol, atol=self.cfg.solver.atol)
        self.invariants.add(r.final_state)
        return list(r.populations) + [r.keep_probability]


def _ideal_state(st: cf.StateBlock) -> np.ndarray:
    s = as_spin(st.spin)
    if st.kind == "fock":
        v = np.zeros(s.dim, dtype=complex)
        v[st.fock] = 1.0
        return v
    if st.kind == "spin-coherent":
        return tomography.rotation_operator(s, st.theta_rad, st.phi_rad)[:, 0]
    code = lg.spin_cat_code(s)
    return {"zero": code.codeword_zero, "one": code.codeword_one,
            "plus": code.plus(), "minus": code.minus()}[st.logical]


def _state_for_wigner(cfg) -> Tuple[np.ndarray, np.ndarray, int, dict]:
    """``(cavity rho, composite rho, qubit_dim, report)`` for the configured state."""
    st = cfg.state
    if st.kind != "prep":
        psi = _ideal_state(st)
        rho_c = np.outer(psi, psi.conj())
        g = np.zeros((2, 2), dtype=complex)
        g[0, 0] = 1.0
        return rho_c, np.kron(g, rho_c), 2, {"state": st.kind}
    system = cfg.system or cf.SystemBlock()
    params = system.build(st.spin)
    d = cfg.drive
    res = lg.simulate_prep(lg.prep_sequence(st.spin, st.axis), params, d.eps, d.omega, trims=d.trims,
                           rtol=cfg.solver.rtol, atol=cfg.solver.atol)
    inv = _Invariants()
    inv.add(res.final_state)
    report = {"state": "prep", "fidelity": res.fidelity, "intermediate_fidelity": res.intermediate_fidelity,
              "keep_probability": res.keep_probability, "invariants": inv.as_dict()}
    return res.cavity_state, res.final_state, params.qubit_dim, report


# ---------------------------------------------------------------- scenarios

@scenario("spin-dynamics", "Figs. 2-3, S4-S6",
          "Fock populations after a cavity pulse of swept length under the comb (full driven model).")
def run_spin_dynamics(cfg, threads: int) -> Outcome:
    ts = cfg.sweep.t_cavity_s.values()
    varphi = cfg.drive.varphi_rad
    runner = _TrainRunner(cfg, [[(t, varphi)] for t in ts])
    rows = dyn.sweep(lambda t: [t] + runner([(t, varphi)]), ts, threads)
    header = ["t_cavity_s"] + _fock_header(runner.params.cavity_dim) + ["keep_prob"]
    return Outcome({"populations": Table(header, rows)}, {"comb_flat_s": runner.flat},
                   runner.invariants.as_dict())


def _budget_toggles(row: str) -> cf.LossToggles:
    """Loss channels included in an error-budget row."""
    if row == "all-losses":
        return cf.LossToggles()
    only = {"only-qubit-t1": "qubit_t1", "only-qubit-t2": "qubit_t2", "only-cavity-t1": "cavity_t1",
            "only-cavity-t2": "cavity_t2"}
    flags = dict(qubit_t1=False, qubit_t2=False, cavity_t1=False, cavity_t2=False)
    if row in only:
        flags[only[row]] = True
    return cf.LossToggles(**flags)


@scenario("error-budget", "error-budget table",
          "Peak P_2J and P_2J+1 around the spin inversion for each loss-toggle row.")
def run_error_budget(cfg, threads: int) -> Outcome:
    d = cfg.drive
    s = as_spin(d.spin)
    preset = cfg.system.preset if cfg.system.preset in ("table-s1-col1", "table-s1-col2", "custom") \
        else "table-s1-col2"
    top, over = s.two_j, s.two_j + 1
    summary = Table(["row", f"max_p_fock_{top}", f"max_p_fock_{over}", f"max_p_fock_{top}_postselected",
                     f"max_p_fock_{over}_postselected", "keep_prob_at_peak"])
    detail = None
    inv = _Invariants()
    kw = _schedule_kw(d)
    for row in cfg.sweep.rows:
        system = cfg.system.model_copy(update={"preset": preset, "losses": _budget_toggles(row)})
        params = system.build(d.spin)
        res = dyn.error_budget_row(s, params, d.eps, d.omega, span=cfg.sweep.span_s,
                                   coarse=cfg.sweep.coarse_points, threads=threads, **kw)
        k = int(np.argmax(res.populations[:, top]))
        summary.rows.append([row, res.max_p(top), res.max_p(over), res.max_p_postselected(top),
                             res.max_p_postselected(over), res.keep_probability[k]])
        if detail is None:
            detail = Table(["row", "t_cavity_s"] + _fock_header(params.cavity_dim)
                           + _fock_header(params.cavity_dim, "p_fock_postselected_") + ["keep_prob"])
        for i, t in enumerate(res.t_cavity):
            detail.rows.append([row, t] + list(res.populations[i]) + list(res.populations_postselected[i])
                               + [res.keep_probability[i]])
            # only populations are kept here: checks their sum and sign
            inv.add(np.diag(res.populations[i]).astype(complex))
    return Outcome({"budget": summary, "budget_sweep": detail}, None, inv.as_dict())


@scenario("blockade-compare", "blockade vs SU(2) comparison",
          "Effective-model populations for the SU(2) comb and the photon blockade on the same manifold.")
def run_blockade_compare(cfg, threads: int) -> Outcome:
    s = as_spin(cfg.spin)
    ts = cfg.sweep.t_s.values()
    eps = 2 * math.pi * cfg.eps_hz
    su2 = dyn.effective_evolve(mem.su2_phases(s), eps, 0.0, s.dim, ts)
    blk = dyn.effective_evolve(mem.blockade_phases(s.dim), eps, 0.0, s.dim, ts)
    header = ["t_s"] + _fock_header(s.dim, "p_su2_") + _fock_header(s.dim, "p_blockade_")
    rows = [[t] + list(a) + list(b) for t, a, b in zip(ts, su2.populations, blk.populations)]
    rep = synthesis.blockade_aperiodicity(s) if s.two_j > 1 else None
    report = {"blockade_periodic": None if rep is None else rep.is_integer_ratio,
              "su2_population_period_s": 2 * math.pi * math.sqrt(s.two_j) / eps}
    return Outcome({"populations": Table(header, rows)}, report)


@scenario("nonlinear-rotation", "Fig. 4 nonlinear rotations",
          "Parity-preserving nonlinear generators reaching cos(g)|0> + sin(g)|2> for swept g.")
def run_nonlinear_rotation(cfg, threads: int) -> Outcome:
    s = as_spin(cfg.spin)
    gammas = cfg.sweep.gamma_rad.values()

    def point(g):
        r = synthesis.parity_preserving_search(s, float(g), seed=cfg.seed, restarts=cfg.restarts)
        comm = synthesis.parity_commutator_norm(r.unitary())
        return [g] + list(r.coeffs) + [r.theta, r.fidelity, r.ratio_error, comm, r.restarts_used]

    rows = dyn.sweep(point, gammas, threads)
    header = ["gamma_rad"] + [f"c_{k}" for k in range(1, s.two_j + 1)] + [
        "theta_rad", "fidelity", "ratio_error", "parity_commutator", "restarts_used"]
    return Outcome({"generators": Table(header, rows)})


@scenario("spincat-gates", "Figs. 4, S11, S12",
          "Logical action of every spin-cat gate recipe and branch k.")
def run_spincat_gates(cfg, threads: int) -> Outcome:
    header = ["spin_j", "gate", "k", "kind", "angle_rad", "azimuth_rad", "logical_error", "leakage"]
    rows = []
    worst = 0.0
    for J in cfg.sweep.spin:
        code = lg.spin_cat_code(J)
        for gate in cfg.gates:
            for k in range(as_spin(J).two_j):
                r = lg.gate_recipe(gate, J, k)
                L, leak = lg.logical_action(r.unitary(), code)
                err = lg.equal_up_to_phase(L, lg.ideal_logical(gate))
                worst = max(worst, err)
                rows.append([J, gate, k, r.kind, r.angle, r.azimuth, err, leak])
    return Outcome({"gates": Table(header, rows)}, {"max_logical_error": worst})


@scenario("spin-lock", "Figs. S7-S8",
          "pi/2 rotation followed by a drive along the spin direction for a swept lock time.")
def run_spin_lock(cfg, threads: int) -> Outcome:
    d = cfg.drive
    t_half = dyn.cavity_flat_for_angle(d.spin, d.eps, math.pi / 2, d.cavity_sigma_s)
    locks = cfg.sweep.t_lock_s.values()
    trains = [[(t_half, cfg.prep_varphi_rad), (t, cfg.lock_varphi_rad)] for t in locks]
    runner = _TrainRunner(cfg, trains)
    rows = dyn.sweep(lambda i: [locks[i]] + runner(trains[i]), range(len(locks)), threads)
    header = ["t_lock_s"] + _fock_header(runner.params.cavity_dim) + ["keep_prob"]
    return Outcome({"populations": Table(header, rows)}, {"t_half_s": t_half}, runner.invariants.as_dict())


@scenario("chevron", "Fig. S9",
          "Populations against cavity drive detuning and pulse length.")
def run_chevron(cfg, threads: int) -> Outcome:
    varphi = cfg.drive.varphi_rad
    dets = cfg.sweep.detuning_hz.values()
    ts = cfg.sweep.t_cavity_s.values()
    runner = _TrainRunner(cfg, [[(t, varphi)] for t in ts])
    grid = [(dz, t) for dz in dets for t in ts]
    rows = dyn.sweep(lambda p: [p[0], p[1]] + runner([(p[1], varphi)], 2 * math.pi * p[0]), grid, threads)
    header = ["detuning_hz", "t_cavity_s"] + _fock_header(runner.params.cavity_dim) + ["keep_prob"]
    return Outcome({"chevron": Table(header, rows)}, None, runner.invariants.as_dict())


@scenario("phase-variation", "Fig. S10",
          "Two pi/2 pulses with the phase of the second swept.")
def run_phase_variation(cfg, threads: int) -> Outcome:
    d = cfg.drive
    t_half = dyn.cavity_flat_for_angle(d.spin, d.eps, math.pi / 2, d.cavity_sigma_s)
    phases = cfg.sweep.varphi_rad.values()
    trains = [[(t_half, cfg.first_varphi_rad), (t_half, p)] for p in phases]
    runner = _TrainRunner(cfg, trains)
    rows = dyn.sweep(lambda i: [phases[i]] + runner(trains[i]), range(len(phases)), threads)
    header = ["varphi_rad"] + _fock_header(runner.params.cavity_dim) + ["keep_prob"]
    return Outcome({"populations": Table(header, rows)}, {"t_half_s": t_half}, runner.invariants.as_dict())


@scenario("wigner", "Fig. S13",
          "Bosonic Wigner function of an ideal or simulated cavity state on a phase-space grid.")
def run_wigner(cfg, threads: int) -> Outcome:
    rho_c, _, _, report = _state_for_wigner(cfg)
    if cfg.state.kind != "prep":
        # ideal states have exact finite support; padding avoids a spurious truncation warning
        rho_c = np.pad(rho_c, (0, 2))
    re, im = cfg.sweep.re_alpha.values(), cfg.sweep.im_alpha.values()
    alphas = re[:, None] + 1j * im[None, :]
    W = tomography.bosonic_wigner(rho_c, alphas).values
    rows = [[re[i], im[j], W[i, j]] for i in range(re.size) for j in range(im.size)]
    return Outcome({"wigner": Table(["re_alpha", "im_alpha", "wigner"], rows)}, report,
                   report.get("invariants"))


@scenario("spin-wigner", "Fig. S13",
          "Spin Wigner function, direct and through the emulated two-channel measurement.")
def run_spin_wigner(cfg, threads: int) -> Outcome:
    _, rho, qdim, report = _state_for_wigner(cfg)
    s = as_spin(cfg.state.spin)
    # simulated states leak slightly above the manifold; tomography sees the projected state
    cav = rho.shape[0] // qdim
    keep = np.kron(np.ones(qdim), (np.arange(cav) < s.dim).astype(float)).astype(bool)
    inside = float(np.real(np.trace(rho[np.ix_(keep, keep)])))
    rho = np.where(np.outer(keep, keep), rho, 0) / inside
    th, ph = cfg.sweep.theta_rad.values(), cfg.sweep.phi_rad.values()
    TH, PH = np.meshgrid(th, ph, indexing="ij")
    kernel = tomography.spin_kernel(s)
    meas = tomography.simulated_spin_wigner_measurement(rho, kernel, TH, PH, qubit_dim=qdim,
                                                        misassign=cfg.misassign, bias=cfg.bias)
    rg = rho.reshape(qdim, cav, qdim, cav)[0, :, 0, :]
    direct = tomography.spin_wigner(rg / np.real(np.trace(rg)), s, TH, PH, kernel).values
    rows = [[th[i], ph[j], direct[i, j], meas.grid.values[i, j], meas.channel_1[i, j], meas.channel_2[i, j]]
            for i in range(th.size) for j in range(ph.size)]
    header = ["theta_rad", "phi_rad", "wigner_direct", "wigner_measured", "channel_1", "channel_2"]
    report = dict(report, keep_probability_readout=meas.keep_probability, manifold_leakage=1 - inside)
    return Outcome({"spin_wigner": Table(header, rows)}, report, report.get("invariants"))


@scenario("aperiodicity-report", "blockade aperiodicity analysis",
          "Hermite-zero spectrum of the blockade generator and digits needed to rationalize its ratios.")
def run_aperiodicity(cfg, threads: int) -> Outcome:
    def point(J):
        r = synthesis.blockade_aperiodicity(J, cfg.max_digits)
        return [J, as_spin(J).dim, r.hermite_mismatch, r.min_magnitude, r.rationalization_digits,
                r.rationalized, r.is_integer_ratio]

    rows = dyn.sweep(point, cfg.sweep.spin, threads)
    header = ["spin_j", "dim", "hermite_mismatch", "min_magnitude", "rationalization_digits", "rationalized",
              "periodic"]
    rep = {"max_hermite_mismatch": max(r[2] for r in rows),
           "min_rationalization_digits": min((r[4] for r in rows if r[0] > 1), default=None)}
    return Outcome({"aperiodicity": Table(header, rows)}, rep)


@scenario("universality-report", "universality construction",
          "Rank-2 tensor content of SU(2) and nonlinear generators plus a Givens factorization check.")
def run_universality(cfg, threads: int) -> Outcome:
    from scipy.stats import unitary_group

    rng = np.random.default_rng(cfg.seed)

    def point(J):
        s = as_spin(J)
        su2 = mem.generator_from_phases(mem.su2_phases(s))
        c = (list(cfg.nonlinear_coeffs) + [0.0] * s.two_j)[: s.two_j]
        nl = mem.nonlinear_generator(c, s)
        flag_su2, _ = synthesis.check_universality(su2, s)
        flag_nl, witness = synthesis.check_universality(nl, s)
        U = unitary_group.rvs(s.dim, random_state=rng) if s.dim > 1 else np.eye(1)
        f = synthesis.givens_factorization(U)
        err = float(np.max(np.abs(f.matrix() - U)))
        return [J, flag_su2, flag_nl, None if witness is None else witness[1], len(f), err]

    # sequential: the shared generator keeps the random unitaries seed-ordered
    rows = [point(J) for J in cfg.sweep.spin]
    header = ["spin_j", "su2_universal", "nonlinear_universal", "witness_q", "givens_rotations",
              "givens_error"]
    return Outcome({"universality": Table(header, rows)})


# ---------------------------------------------------------------- entry points

def load_config(path: str, seed: Optional[int] = None):
    """Read YAML and validate it. Raises :class:`config.ConfigError` on any problem."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise cf.ConfigError("", f"cannot read {path}: {exc.strerror}") from None
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise cf.ConfigError("", f"invalid YAML: {exc}") from None
    cfg = cf.parse_config(data)
    if seed is not None:
        cfg = cfg.model_copy(update={"seed": seed})
    return cfg


def _version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:  # pragma: no cover - source checkout without install
        return "0+unknown"


def run_config(cfg, out_dir: Optional[str] = None, threads: int = 1) -> Dict[str, Path]:
    """Run a validated config and write its artifacts. Returns ``{name: path}``."""
    sc = SCENARIOS[cfg.scenario]
    out = Path(out_dir or cfg.output.directory)
    out.mkdir(parents=True, exist_ok=True)
    prefix = cfg.output.prefix or cfg.scenario
    np.random.seed(cfg.seed)
    t0 = time.perf_counter()
    outcome = sc.runner(cfg, max(1, threads))
    runtime = time.perf_counter() - t0
    paths = {}
    for name, table in outcome.tables.items():
        p = out / f"{prefix}.{name}.csv"
        write_csv(p, table)
        paths[name] = p
    if outcome.report is not None:
        p = out / f"{prefix}.report.json"
        p.write_text(json.dumps(_jsonable(outcome.report), indent=2, sort_keys=True) + "\n")
        paths["report"] = p
    manifest = {
        "scenario": cfg.scenario,
        "target": sc.target,
        "version": _version(),
        "schema_version": cf.SCHEMA_VERSION,
        "seed": cfg.seed,
        "threads": threads,
        "runtime_s": runtime,
        "config": cfg.model_dump(mode="json"),
        "outputs": {k: v.name for k, v in paths.items()},
        "invariants": outcome.invariants,
    }
    p = out / f"{prefix}.manifest.json"
    p.write_text(json.dumps(_jsonable(manifest), indent=2, sort_keys=True) + "\n")
    paths["manifest"] = p
    return paths


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else str(x)
    return obj


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="memspin", description="Synthetic-spin scenario runner.")
    sub = p.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run a scenario config")
    run.add_argument("config")
    run.add_argument("--out-dir", default=None, help="output directory (overrides output.directory)")
    run.add_argument("--threads", type=int, default=1, help="worker threads for sweep points")
    run.add_argument("--seed", type=int, default=None, help="override the config seed")
    val = sub.add_parser("validate", help="check a config against the schema")
    val.add_argument("config")
    val.add_argument("--seed", type=int, default=None)
    sub.add_parser("list-scenarios", help="print the scenario catalog")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(message)s")
    if args.command == "list-scenarios":
        for sc in SCENARIOS.values():
            print(f"{sc.name:20s} {sc.target:32s} {sc.summary}")
        return EXIT_OK
    try:
        cfg = load_config(args.config, args.seed)
    except cf.ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.command == "validate":
        print(f"ok: {cfg.scenario}")
        return EXIT_OK
    try:
        paths = run_config(cfg, args.out_dir, args.threads)
    except (ConfigurationError, ScheduleOverflow) as exc:
        print(f"config error in scenario {cfg.scenario}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except MemspinError as exc:
        print(f"scenario {cfg.scenario} failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    for name, p in paths.items():
        print(f"{name}: {p}")
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
