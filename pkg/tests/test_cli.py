import json

import numpy as np
import pytest

from fhn_meanfield.cli import main

FAST_NET = ["--n", "64", "--t-end", "0.2", "--dt", "1e-3", "--epsilon", "0.05",
            "--seed", "3", "--record-stride", "20"]


def run(argv):
    return main(argv)


def test_classify_json(capsys):
    code = run(["classify", "--lambda", "4", "--a", "0.3", "--b", "0.1",
                "--i-ext", "0"])
    assert code == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["regime"] == "Bistable"
    assert payload["delta"] == pytest.approx(143.96, abs=0.01)
    assert len(payload["equilibria"]) == 3


def test_classify_json_out_file(tmp_path, capsys):
    out = tmp_path / "cls.json"
    assert run(["classify", "--i-ext", "4", "--a", "0.03",
                "--json-out", str(out)]) == 0
    capsys.readouterr()
    payload = json.loads(out.read_text())
    assert payload["regime"] == "MonostableStable"


def test_simulate_network_outputs(tmp_path):
    out = tmp_path / "o"
    code = run(["simulate-network", "--out", str(out), "--label", "demo",
                *FAST_NET])
    assert code == 0
    csv = (out / "demo_timeseries.csv").read_text().splitlines()
    assert csv[0] == ("t,mean_v,mean_x,var_v,var_x,m4_v,m4_x,"
                      "q10_v,q25_v,q75_v,q90_v,q10_x,q25_x,q75_x,q90_x")
    summary = json.loads((out / "demo_summary.json").read_text())
    assert summary["version"]
    assert summary["config"]["params"]["epsilon"] == 0.05
    assert summary["config"]["sim"]["seed"] == 3
    assert "classification" in summary
    assert (out / "demo_vs_limit.csv").exists()


def test_simulate_network_byte_identical_reruns(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert run(["simulate-network", "--out", str(out), "--label", "x",
                    *FAST_NET]) == 0
    assert (a / "x_timeseries.csv").read_bytes() == (b / "x_timeseries.csv").read_bytes()


def test_config_file_roundtrip_and_flag_override(tmp_path):
    cfgfile = tmp_path / "run.ini"
    cfgfile.write_text("""
[params]
epsilon = 0.05
lambda = 4.0

[sim]
n = 32
t_end = 0.1
seed = 11

[init]
mean_v = 0.5
""".strip())
    out = tmp_path / "o"
    code = run(["simulate-network", "--config", str(cfgfile), "--out", str(out),
                "--label", "cfg", "--n", "16"])
    assert code == 0
    summary = json.loads((out / "cfg_summary.json").read_text())
    assert summary["config"]["sim"]["n"] == 16  # flag wins over file
    assert summary["config"]["init"]["mean_v"] == 0.5


def test_unknown_config_key_exits_2(tmp_path, capsys):
    bad = tmp_path / "bad.ini"
    bad.write_text("[params]\nspeling = 1.0\n")
    assert run(["simulate-network", "--config", str(bad)]) == 2
    assert "unknown key" in capsys.readouterr().err


def test_unknown_section_exits_2(tmp_path, capsys):
    bad = tmp_path / "bad.ini"
    bad.write_text("[wheels]\nn = 4\n")
    assert run(["simulate-network", "--config", str(bad)]) == 2


def test_bad_value_exits_2(tmp_path, capsys):
    bad = tmp_path / "bad.ini"
    bad.write_text("[sim]\nn = lots\n")
    assert run(["simulate-network", "--config", str(bad)]) == 2


def test_blowup_exits_3(tmp_path, capsys):
    code = run(["simulate-network", "--out", str(tmp_path), "--n", "8",
                "--epsilon", "1e-5", "--dt", "10.0", "--t-end", "20",
                "--init-mean-v", "3.0"])
    assert code == 3
    assert "numerical failure" in capsys.readouterr().err


def test_simulate_ode_outputs(tmp_path):
    out = tmp_path / "o"
    code = run(["simulate-ode", "--out", str(out), "--label", "ode",
                "--a", "0.3", "--b", "0.1", "--lambda", "4",
                "--t-end", "5", "--dt", "0.01", "--record-stride", "10",
                "--init-mean-v", "1.35", "--init-mean-x", "1.0"])
    assert code == 0
    lines = (out / "ode_ode.csv").read_text().splitlines()
    assert lines[0] == "t,alpha,beta"
    last = [float(tok) for tok in lines[-1].split(",")]
    assert last[0] == pytest.approx(5.0)


def test_simulate_pde_outputs(tmp_path):
    out = tmp_path / "o"
    code = run(["simulate-pde", "--out", str(out), "--label", "pde",
                "--epsilon", "0.2", "--t-end", "0.05",
                "--v-min", "-2", "--v-max", "4", "--x-min", "-2", "--x-max", "3",
                "--nv", "32", "--nx", "16", "--record-stride", "50",
                "--init-mean-v", "1.0", "--init-mean-x", "0.5"])
    assert code == 0
    summary = json.loads((out / "pde_summary.json").read_text())
    assert summary["results"]["mass_drift"] < 1e-10
    lines = (out / "pde_pde.csv").read_text().splitlines()
    assert lines[0] == "t,jg,mass"


def test_compare_smoke(tmp_path):
    out = tmp_path / "o"
    code = run(["compare", "--out", str(out), "--label", "cmp",
                "--epsilon", "0.2", "--sigma", "0.3", "--t-end", "0.5",
                "--n", "400", "--dt", "1e-3", "--record-stride", "50",
                "--v-min", "-2", "--v-max", "4", "--x-min", "-2", "--x-max", "3",
                "--nv", "48", "--nx", "24",
                "--init-mean-v", "1.0", "--init-mean-x", "0.5", "--seeds", "2"])
    assert code == 0
    summary = json.loads((out / "cmp_summary.json").read_text())
    res = summary["results"]
    assert res["seeds_averaged"] == 2
    assert res["sup_network_vs_pde"] < 0.5
    assert (out / "cmp_compare.csv").exists()


def test_detect_cycle_oscillatory(capsys):
    code = run(["detect-cycle", "--a", "0.01", "--b", "0.1", "--lambda", "4",
                "--i-ext", "6.0", "--max-time", "1500"])
    assert code == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["regime"] == "Oscillatory"
    assert payload["cycle"]["period"] > 0


def test_detect_cycle_stable_returns_null(capsys):
    code = run(["detect-cycle", "--a", "0.3", "--b", "0.1", "--lambda", "4",
                "--i-ext", "0.0", "--init-mean-v", "3.5", "--init-mean-x", "1.0"])
    assert code == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["cycle"] is None


def test_env_var_default_outdir(tmp_path, monkeypatch):
    monkeypatch.setenv("FHN_MEANFIELD_OUT", str(tmp_path / "envout"))
    monkeypatch.chdir(tmp_path)
    assert run(["simulate-network", "--label", "env", *FAST_NET]) == 0
    assert (tmp_path / "envout" / "env_summary.json").exists()


def test_preset_requires_label_when_ambiguous(capsys):
    assert run(["simulate-network", "--preset", "fig1"]) == 2
    assert "several runs" in capsys.readouterr().err


def test_preset_single_run_override(tmp_path):
    out = tmp_path / "o"
    # preset fields resolved, then overridden to a tiny footprint
    code = run(["simulate-network", "--preset", "fig1:epsinv25",
                "--out", str(out), "--n", "32", "--t-end", "0.1"])
    assert code == 0
    summary = json.loads((out / "epsinv25_summary.json").read_text())
    assert summary["config"]["params"]["epsilon"] == pytest.approx(1 / 25)
    assert summary["config"]["sim"]["n"] == 32


def test_scenario_rejects_unknown_preset():
    with pytest.raises(SystemExit) as info:
        run(["scenario", "fig9"])
    assert info.value.code == 2
