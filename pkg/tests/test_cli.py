import csv
import json
import math

import numpy as np
import pytest
import yaml

from memspin import cli
from memspin import config as cf
from memspin import dynamics as dyn
from memspin.errors import IntegratorFailure

FAST_SYSTEM = {"preset": "lossless", "qubit_levels": 2, "cavity_levels": 4}
FAST_DRIVE = {"spin": 1.0, "eps_hz": 80.0e3, "omega_hz": 0.732e6}


def write(tmp_path, data, name="cfg.yaml"):
    p = tmp_path / name
    p.write_text(yaml.safe_dump(data))
    return str(p)


def read_csv(path):
    with open(path) as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def run(tmp_path, data, *extra, out="out"):
    path = write(tmp_path, data)
    code = cli.main(["run", path, "--out-dir", str(tmp_path / out), *extra])
    return code, tmp_path / out


def gates_cfg(**kw):
    return dict(schema_version=1, scenario="spincat-gates", sweep={"spin": [1, 1.5]}, **kw)


# ---------------------------------------------------------------- catalog and validation


def test_list_scenarios(capsys):
    assert cli.main(["list-scenarios"]) == 0
    out = capsys.readouterr().out
    for name in cf.SCENARIO_NAMES:
        assert name in out
    assert set(cli.SCENARIOS) == set(cf.SCENARIO_NAMES)


def test_every_scenario_has_a_target():
    for sc in cli.SCENARIOS.values():
        assert sc.target and sc.summary


def test_validate_ok(tmp_path, capsys):
    assert cli.main(["validate", write(tmp_path, gates_cfg())]) == 0
    assert "ok: spincat-gates" in capsys.readouterr().out


@pytest.mark.parametrize(
    "data, path",
    [
        ({"scenario": "spincat-gates", "sweep": {"spin": [1]}}, "schema_version"),
        ({"schema_version": 2, "scenario": "spincat-gates", "sweep": {"spin": [1]}}, "schema_version"),
        ({"schema_version": 1, "scenario": "nope"}, "scenario"),
        (gates_cfg(extra_field=1), "extra_field"),
        ({"schema_version": 1, "scenario": "spincat-gates", "sweep": {"spin": [1.3]}}, "sweep.spin.0"),
        ({"schema_version": 1, "scenario": "spin-dynamics", "sweep": {"t_cavity_s": {"start": 0, "stop": 1}}},
         "sweep.t_cavity_s.points"),
        ({"schema_version": 1, "scenario": "chevron", "sweep": {"t_cavity_s": {"start": 0, "stop": 1, "points": 2}}},
         "sweep.detuning_hz"),
        ({"schema_version": 1, "scenario": "spin-dynamics", "system": {"preset": "custom"},
          "sweep": {"t_cavity_s": {"start": 0, "stop": 1e-6, "points": 2}}}, "system"),
        ({"schema_version": 1, "scenario": "spin-dynamics", "drive": {"eps_hz": -1},
          "sweep": {"t_cavity_s": {"start": 0, "stop": 1e-6, "points": 2}}}, "drive.eps_hz"),
        ({"schema_version": 1, "scenario": "spin-dynamics", "drive": {"eps": 1},
          "sweep": {"t_cavity_s": {"start": 0, "stop": 1e-6, "points": 2}}}, "drive.eps"),
        ({"schema_version": 1, "scenario": "wigner", "state": {"kind": "prep"},
          "sweep": {"re_alpha": {"start": 0, "stop": 1, "points": 2},
                    "im_alpha": {"start": 0, "stop": 1, "points": 2}}}, "drive"),
        ({"schema_version": 1, "scenario": "nonlinear-rotation",
          "sweep": {"gamma_rad": {"start": 0, "stop": 3, "points": 2}}}, "sweep.gamma_rad"),
    ],
)
def test_schema_errors_exit_2_with_path(tmp_path, capsys, data, path):
    assert cli.main(["validate", write(tmp_path, data)]) == 2
    err = capsys.readouterr().err
    assert f"config error: {path}:" in err


def test_unreadable_and_malformed(tmp_path, capsys):
    assert cli.main(["validate", str(tmp_path / "missing.yaml")]) == 2
    bad = tmp_path / "bad.yaml"
    bad.write_text("schema_version: [1\n")
    assert cli.main(["run", str(bad)]) == 2
    bad.write_text("- 1\n- 2\n")
    assert cli.main(["run", str(bad)]) == 2
    assert "config error" in capsys.readouterr().err


def test_hz_fields_convert_to_angular():
    blk = cf.SystemBlock(preset="custom", chi_hz=-1e6, t1_qubit_s=1e-4, t2_qubit_s=1e-4)
    p = blk.build(1.0)
    assert p.chi == pytest.approx(-2 * math.pi * 1e6)
    assert p.cavity_dim == 6 and p.qubit_dim == 4
    assert p.t1_qubit == pytest.approx(1e-4)
    assert p.tphi_qubit == pytest.approx(dyn.tphi_from_t2(1e-4, 1e-4))
    assert math.isinf(p.t1_cavity)
    d = cf.DriveBlock(eps_hz=80e3, omega_hz=0.732e6)
    assert d.eps == pytest.approx(2 * math.pi * 80e3)


def test_presets_match_device_columns():
    for col in (1, 2):
        built = cf.SystemBlock(preset=f"table-s1-col{col}").build(1.5)
        ref = dyn.SystemParams.table_s1(col, cavity_dim=7, qubit_dim=4)
        for name in ("chi", "chi_prime", "kerr", "alpha_anh", "t1_qubit", "tphi_qubit", "t1_cavity",
                     "tphi_cavity"):
            assert getattr(built, name) == pytest.approx(getattr(ref, name), rel=1e-12)
    assert cf.SystemBlock(preset="lossless").build(1.5).lossless
    off = cf.SystemBlock(losses=cf.LossToggles(qubit_t1=False)).build(1.5)
    assert math.isinf(off.t1_qubit) and not math.isinf(off.tphi_qubit)


def test_budget_rows_map_to_toggles():
    assert cli._budget_toggles("all-losses") == cf.LossToggles()
    assert cli._budget_toggles("only-cavity-t2") == cf.LossToggles(qubit_t1=False, qubit_t2=False,
                                                                  cavity_t1=False)
    ll = cli._budget_toggles("lossless")
    assert not any([ll.qubit_t1, ll.qubit_t2, ll.cavity_t1, ll.cavity_t2])


def test_seed_override(tmp_path):
    cfg = cli.load_config(write(tmp_path, gates_cfg(seed=3)), seed=11)
    assert cfg.seed == 11


def test_example_configs_validate():
    from pathlib import Path

    paths = sorted((Path(__file__).parents[1] / "configs").glob("*.yaml"))
    assert len(paths) >= 12
    names = {cli.load_config(str(p)).scenario for p in paths}
    assert names == set(cf.SCENARIO_NAMES)


# ---------------------------------------------------------------- fast scenarios


def test_spincat_gates_run(tmp_path):
    code, out = run(tmp_path, gates_cfg())
    assert code == 0
    header, rows = read_csv(out / "spincat-gates.gates.csv")
    assert header[0] == "spin_j"
    assert len(rows) == 5 * 2 + 5 * 3
    assert max(float(r[header.index("logical_error")]) for r in rows) < 1e-10
    man = json.loads((out / "spincat-gates.manifest.json").read_text())
    assert man["target"] and man["scenario"] == "spincat-gates"
    assert man["config"]["sweep"]["spin"] == [1.0, 1.5]
    assert man["version"] and man["runtime_s"] >= 0
    assert man["outputs"]["gates"] == "spincat-gates.gates.csv"


def test_aperiodicity_report(tmp_path):
    data = dict(schema_version=1, scenario="aperiodicity-report", sweep={"spin": [1, 1.5, 2, 5]})
    code, out = run(tmp_path, data)
    assert code == 0
    header, rows = read_csv(out / "aperiodicity-report.aperiodicity.csv")
    for r in rows:
        assert float(r[2]) < 1e-9
        if float(r[0]) > 1:
            assert int(r[4]) >= 18 and r[5] == "false" and r[6] == "false"
    rep = json.loads((out / "aperiodicity-report.report.json").read_text())
    assert rep["min_rationalization_digits"] >= 18


def test_universality_report(tmp_path):
    data = dict(schema_version=1, scenario="universality-report", seed=5, sweep={"spin": [0.5, 1, 2]})
    code, out = run(tmp_path, data)
    assert code == 0
    header, rows = read_csv(out / "universality-report.universality.csv")
    assert [r[1] for r in rows] == ["false"] * 3
    assert [r[2] for r in rows] == ["false", "true", "true"]
    assert all(float(r[5]) < 1e-12 for r in rows)
    assert [int(r[4]) for r in rows] == [1, 3, 10]


def test_nonlinear_rotation_run(tmp_path):
    data = dict(schema_version=1, scenario="nonlinear-rotation",
                sweep={"gamma_rad": {"start": math.pi / 4, "stop": math.pi / 4, "points": 1}})
    code, out = run(tmp_path, data)
    assert code == 0
    header, rows = read_csv(out / "nonlinear-rotation.generators.csv")
    assert header[:4] == ["gamma_rad", "c_1", "c_2", "c_3"]
    r = dict(zip(header, rows[0]))
    assert float(r["fidelity"]) >= 0.999 and float(r["parity_commutator"]) < 1e-8


def test_blockade_compare(tmp_path):
    data = dict(schema_version=1, scenario="blockade-compare", spin=1.5, eps_hz=80e3,
                sweep={"t_s": {"start": 0, "stop": 20e-6, "points": 11}})
    code, out = run(tmp_path, data)
    assert code == 0
    header, rows = read_csv(out / "blockade-compare.populations.csv")
    assert header[0] == "t_s" and "p_su2_3" in header and "p_blockade_3" in header
    arr = np.array(rows, dtype=float)
    np.testing.assert_allclose(arr[:, 1:5].sum(axis=1), 1, atol=1e-12)
    np.testing.assert_allclose(arr[:, 5:9].sum(axis=1), 1, atol=1e-12)
    eps = 2 * math.pi * 80e3
    ref = dyn.spin_populations(1.5, eps * arr[:, 0] / math.sqrt(3))
    np.testing.assert_allclose(arr[:, 1:5], ref, atol=1e-10)
    rep = json.loads((out / "blockade-compare.report.json").read_text())
    assert rep["blockade_periodic"] is False


def test_bosonic_wigner_scenario(tmp_path):
    data = dict(schema_version=1, scenario="wigner", state={"kind": "spin-cat", "spin": 1, "logical": "zero"},
                sweep={"re_alpha": {"start": -1, "stop": 1, "points": 5},
                       "im_alpha": {"start": -1, "stop": 1, "points": 3}})
    code, out = run(tmp_path, data)
    assert code == 0
    header, rows = read_csv(out / "wigner.wigner.csv")
    assert header == ["re_alpha", "im_alpha", "wigner"]
    assert len(rows) == 15
    origin = [r for r in rows if float(r[0]) == 0 and float(r[1]) == 0][0]
    # W(0) = 2 sum_n (-1)^n p_n; (|0> + |2>)/sqrt(2) gives 2
    assert float(origin[2]) == pytest.approx(2.0)


def test_spin_wigner_scenario(tmp_path):
    data = dict(schema_version=1, scenario="spin-wigner",
                state={"kind": "spin-coherent", "spin": 1.5, "theta_rad": 0.7, "phi_rad": 0.3},
                sweep={"theta_rad": {"start": 0, "stop": math.pi, "points": 4},
                       "phi_rad": {"start": 0, "stop": 2 * math.pi, "points": 3}})
    code, out = run(tmp_path, data)
    assert code == 0
    header, rows = read_csv(out / "spin-wigner.spin_wigner.csv")
    arr = np.array(rows, dtype=float)
    np.testing.assert_allclose(arr[:, 2], arr[:, 3], atol=1e-12)


def test_spin_wigner_misassignment_rescales(tmp_path):
    base = dict(schema_version=1, scenario="spin-wigner", state={"kind": "spin-cat", "spin": 1},
                sweep={"theta_rad": {"start": 0.2, "stop": 2.0, "points": 3},
                       "phi_rad": {"start": 0, "stop": 1, "points": 2}})
    _, a = run(tmp_path, base, out="a")
    _, b = run(tmp_path, dict(base, misassign=0.1), out="b")
    wa = np.array(read_csv(a / "spin-wigner.spin_wigner.csv")[1], dtype=float)
    wb = np.array(read_csv(b / "spin-wigner.spin_wigner.csv")[1], dtype=float)
    np.testing.assert_allclose(wb[:, 2], wa[:, 2], atol=1e-12)
    assert not np.allclose(wb[:, 3], wa[:, 3])


# ---------------------------------------------------------------- determinism


@pytest.mark.parametrize("data", [
    dict(schema_version=1, scenario="universality-report", seed=2, sweep={"spin": [1, 1.5, 3]}),
    dict(schema_version=1, scenario="nonlinear-rotation",
         sweep={"gamma_rad": {"start": 0.3, "stop": 0.6, "points": 2}}),
    dict(schema_version=1, scenario="aperiodicity-report", sweep={"spin": [1.5, 2, 2.5]}),
])
def test_byte_identical_outputs(tmp_path, data):
    _, a = run(tmp_path, data, out="a")
    _, b = run(tmp_path, data, "--threads", "2", out="b")
    csvs = sorted(p.name for p in a.glob("*.csv"))
    assert csvs
    for name in csvs:
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_seed_changes_random_outputs(tmp_path):
    data = dict(schema_version=1, scenario="universality-report", seed=1, sweep={"spin": [2]})
    _, a = run(tmp_path, data, out="a")
    _, b = run(tmp_path, data, "--seed", "2", out="b")
    name = "universality-report.universality.csv"
    assert (a / name).read_bytes() != (b / name).read_bytes()
    assert json.loads((b / "universality-report.manifest.json").read_text())["seed"] == 2


# ---------------------------------------------------------------- simulated scenarios


def sim_cfg(scenario, sweep, **kw):
    return dict(schema_version=1, scenario=scenario, system=FAST_SYSTEM, drive=FAST_DRIVE, sweep=sweep, **kw)


def test_spin_dynamics_run(tmp_path):
    t_pi = float(dyn.cavity_flat_for_angle(1, 2 * math.pi * 80e3, math.pi))
    data = sim_cfg("spin-dynamics", {"t_cavity_s": {"start": 0.0, "stop": t_pi, "points": 2}})
    code, out = run(tmp_path, data)
    assert code == 0
    header, rows = read_csv(out / "spin-dynamics.populations.csv")
    assert header == ["t_cavity_s", "p_fock_0", "p_fock_1", "p_fock_2", "p_fock_3", "keep_prob"]
    arr = np.array(rows, dtype=float)
    assert arr[0, 1] > 0.99
    assert arr[1, 3] > 0.95
    inv = json.loads((out / "spin-dynamics.manifest.json").read_text())["invariants"]
    assert inv["max_trace_error"] < 1e-8 and inv["max_hermiticity_error"] < 1e-10
    assert inv["min_eigenvalue"] > -1e-8


def test_phase_variation_run(tmp_path):
    data = sim_cfg("phase-variation", {"varphi_rad": {"start": 0.0, "stop": math.pi, "points": 2}})
    code, out = run(tmp_path, data)
    assert code == 0
    arr = np.array(read_csv(out / "phase-variation.populations.csv")[1], dtype=float)
    # equal phases add to a pi rotation; opposite phases undo the first pulse
    assert arr[0, 3] > 0.95
    assert arr[1, 1] > 0.95


def test_spin_lock_run(tmp_path):
    data = sim_cfg("spin-lock", {"t_lock_s": {"start": 0.0, "stop": 3e-6, "points": 2}})
    code, out = run(tmp_path, data)
    assert code == 0
    arr = np.array(read_csv(out / "spin-lock.populations.csv")[1], dtype=float)
    # roughly binomial after pi/2; a spin along the drive axis is an eigenstate, so they persist
    np.testing.assert_allclose(arr[0, 1:4], [0.25, 0.5, 0.25], atol=0.08)
    np.testing.assert_allclose(arr[1, 1:4], arr[0, 1:4], atol=0.02)


def test_chevron_run(tmp_path):
    t_pi = float(dyn.cavity_flat_for_angle(1, 2 * math.pi * 80e3, math.pi))
    data = sim_cfg("chevron", {"detuning_hz": {"start": 0.0, "stop": 600e3, "points": 2},
                               "t_cavity_s": {"start": t_pi, "stop": t_pi, "points": 1}})
    code, out = run(tmp_path, data)
    assert code == 0
    header, rows = read_csv(out / "chevron.chevron.csv")
    assert header[:2] == ["detuning_hz", "t_cavity_s"]
    arr = np.array(rows, dtype=float)
    assert arr[0, 4] > 0.95
    assert arr[1, 4] < 0.5


def test_integrator_failure_exits_3(tmp_path, monkeypatch, capsys):
    def boom(*a, **k):
        raise IntegratorFailure("step size underflow")

    monkeypatch.setattr(dyn, "lindblad_evolve", boom)
    data = sim_cfg("spin-dynamics", {"t_cavity_s": {"start": 0.0, "stop": 1e-6, "points": 2}})
    code, _ = run(tmp_path, data)
    assert code == 3
    err = capsys.readouterr().err
    assert "spin-dynamics" in err and "IntegratorFailure" in err


def test_spin_wigner_of_simulated_prep(tmp_path):
    data = dict(schema_version=1, scenario="spin-wigner", state={"kind": "prep", "spin": 1, "axis": "y"},
                system={"preset": "lossless", "qubit_levels": 3}, drive=FAST_DRIVE,
                sweep={"theta_rad": {"start": 0, "stop": math.pi, "points": 3},
                       "phi_rad": {"start": 0, "stop": math.pi, "points": 2}})
    code, out = run(tmp_path, data)
    assert code == 0
    rep = json.loads((out / "spin-wigner.report.json").read_text())
    assert rep["fidelity"] > 0.97 and 0 < rep["keep_probability"] <= 1
    assert rep["invariants"]["min_eigenvalue"] > -1e-8
    arr = np.array(read_csv(out / "spin-wigner.spin_wigner.csv")[1], dtype=float)
    np.testing.assert_allclose(arr[:, 2], arr[:, 3], atol=1e-10)


def test_error_budget_plumbing(tmp_path):
    data = dict(schema_version=1, scenario="error-budget", system={"qubit_levels": 2, "cavity_levels": 3},
                drive={"spin": 0.5, "eps_hz": 80e3, "omega_hz": 0.732e6},
                sweep={"rows": ["lossless", "only-cavity-t1"], "coarse_points": 2, "span_s": 0.2e-6})
    code, out = run(tmp_path, data)
    assert code == 0
    header, rows = read_csv(out / "error-budget.budget.csv")
    assert header[:3] == ["row", "max_p_fock_1", "max_p_fock_2"]
    assert [r[0] for r in rows] == ["lossless", "only-cavity-t1"]
    lossless, lossy = (float(r[1]) for r in rows)
    assert 0.9 < lossless <= 1 and lossy < lossless
    header, rows = read_csv(out / "error-budget.budget_sweep.csv")
    assert header[:2] == ["row", "t_cavity_s"] and len(rows) == 2 * 4
