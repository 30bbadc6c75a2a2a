import json
import os

import numpy as np
import pytest

from dharper.cli import run
from dharper.config import ConfigError, parse_config_file, resolve_model


def invoke(tmp_path, *args):
    out = tmp_path / "out"
    code = run(["--out", str(out), "--quiet", *args])
    return code, out


def test_config_file_parsing(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("""
# driven Harper run
j_x = 1.0
j_y = 1.0
alpha = 0.1545
omega: 0.3
beta_r = 1
beta_q = 3
seed = 99
""")
    values = parse_config_file(str(cfg))
    assert values["omega"] == 0.3
    assert values["beta_q"] == 3
    assert values["seed"] == 99
    params, beta = resolve_model(values)
    assert beta.is_rational and (beta.r, beta.q) == (1, 3)
    assert params.alpha == 0.1545


def test_config_golden_beta():
    params, beta = resolve_model({"omega": 0.45, "beta_irrational": "golden"})
    assert not beta.is_rational
    assert beta.value == pytest.approx(0.30901699437494745, abs=1e-16)


def test_config_errors_name_key():
    with pytest.raises(ConfigError, match="beta_r"):
        resolve_model({"omega": 0.3})
    with pytest.raises(ConfigError, match="omega"):
        resolve_model({"beta_r": 1, "beta_q": 3})
    with pytest.raises(ConfigError, match="beta_irrational"):
        resolve_model({"omega": 0.3, "beta_irrational": "gold"})
    with pytest.raises(ConfigError, match="alpha"):
        resolve_model({"omega": 0.3, "beta_r": 0, "beta_q": 1, "alpha": 1.0})


def test_missing_key_exit_code(tmp_path, capsys):
    code, out = invoke(tmp_path, "classical-spread", "--members", "10",
                       "--periods", "20")
    assert code == 2
    err = capsys.readouterr().err
    assert "beta_r" in err
    assert not out.exists() or not any(out.iterdir())


def test_flag_overrides_config(tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("omega = 0.3\nbeta_r = 1\nbeta_q = 3\nmembers = 10\nperiods = 30\n")
    out = tmp_path / "o"
    code = run(["--config", str(cfg), "--out", str(out), "--quiet",
                "classical-spread", "--members", "20",
                "--steps-per-period", "100"])
    assert code == 0
    meta = json.loads((out / "dispersion.meta.json").read_text())
    assert meta["config"]["members"] == 20          # flag wins
    assert meta["config"]["periods"] == 30          # config survives
    assert meta["derived_params"]["omega"] == pytest.approx(0.3)
    assert meta["tool_version"]
    assert "duration_s" in meta


def test_csv_header_and_meta_sidecar(tmp_path):
    code, out = invoke(tmp_path, "--seed", "5", "island-scan",
                       "--omega", "0.3", "--beta-irrational", "golden",
                       "--grid-nx", "8", "--grid-np", "8",
                       "--measure-periods", "60")
    assert code == 0
    csv = (out / "island-scan.csv").read_text().splitlines()
    assert csv[0] == "x,p,label"
    assert len(csv) == 1 + 64
    meta = json.loads((out / "island-scan.meta.json").read_text())
    assert 0.0 <= meta["S"] <= 1.0
    assert meta["derived_params"]["hbar_eff"] == pytest.approx(2 * np.pi * 0.1545)
    assert not [p for p in os.listdir(out) if p.startswith(".tmp-")]


def test_determinism_same_seed_and_threads(tmp_path):
    args = ("classical-spread", "--omega", "0.45", "--beta-irrational", "golden",
            "--members", "50", "--periods", "60", "--steps-per-period", "100")
    _, out1 = invoke(tmp_path / "a", "--seed", "11", *args)
    _, out2 = invoke(tmp_path / "b", "--seed", "11", "--threads", "4", *args)
    _, out3 = invoke(tmp_path / "c", "--seed", "12", *args)
    b1 = (out1 / "dispersion.csv").read_bytes()
    b2 = (out2 / "dispersion.csv").read_bytes()
    b3 = (out3 / "dispersion.csv").read_bytes()
    assert b1 == b2
    assert b1 != b3


def test_repro_fig1_small(tmp_path):
    code, out = invoke(tmp_path, "repro", "fig1", "--grid", "3",
                       "--periods", "20")
    assert code == 0
    for tag in ("rational", "irrational"):
        lines = (out / f"fig1-{tag}.csv").read_text().splitlines()
        assert lines[0] == "t,x_mod,p_mod"
        assert len(lines) == 1 + 9 * 21
        meta = json.loads((out / f"fig1-{tag}.meta.json").read_text())
        assert meta["beta_kind"] == tag


def test_repro_fig2_consistent_with_classical_spread(tmp_path):
    # a fig2 point equals a direct classical-spread run at the same seed
    om = 0.25 * 2 * np.pi * 0.1545
    code, out = invoke(tmp_path / "r", "--seed", "31", "repro", "fig2",
                       "--members", "40", "--periods", "80",
                       "--omega-grid", f"{om}", "--measure-periods", "50")
    assert code == 0
    row = (out / "fig2-rational.csv").read_text().splitlines()[1].split(",")
    a_fig2 = row[1]
    code, out2 = invoke(tmp_path / "s", "--seed", "31", "classical-spread",
                        "--omega", f"{om}", "--beta-r", "1", "--beta-q", "3",
                        "--members", "40", "--periods", "80",
                        "--steps-per-period", "100")
    assert code == 0
    meta = json.loads((out2 / "dispersion.meta.json").read_text())
    from dharper.output import format_value
    assert a_fig2 == format_value(meta["fit_A"])


def test_repro_rerun_bitwise_identical(tmp_path):
    args = ("repro", "fig1", "--grid", "2", "--periods", "10")
    _, o1 = invoke(tmp_path / "x", "--seed", "3", *args)
    _, o2 = invoke(tmp_path / "y", "--seed", "3", "--threads", "2", *args)
    assert (o1 / "fig1-rational.csv").read_bytes() == \
        (o2 / "fig1-rational.csv").read_bytes()
    assert (o1 / "fig1-irrational.csv").read_bytes() == \
        (o2 / "fig1-irrational.csv").read_bytes()


def test_quantum_evolve_cli(tmp_path):
    code, out = invoke(tmp_path, "quantum-evolve", "--omega", "0.45",
                       "--beta-irrational", "golden", "--periods", "10",
                       "--window", "256", "--snapshot-periods", "5")
    assert code == 0
    sig = (out / "quantum-eq2-sigma.csv").read_text().splitlines()
    assert sig[0] == "t,sigma"
    assert len(sig) == 12
    dens = (out / "quantum-eq2-density.csv").read_text().splitlines()
    assert dens[0] == "t,l,density"
    assert len(dens) > 10


def test_floquet_build_cli(tmp_path):
    code, out = invoke(tmp_path, "floquet-build", "--omega", "0.6",
                       "--beta-irrational", "golden", "--window", "48")
    assert code == 0
    raw = (out / "floquet.op").read_bytes()
    assert raw[:4] == b"DHFQ"
    meta = json.loads((out / "floquet.op.meta.json").read_text())
    assert meta["unitarity_defect"] < 1e-8


def test_floquet_scan_cli(tmp_path):
    code, out = invoke(tmp_path, "floquet-scan", "--beta-irrational", "golden",
                       "--omega-grid", "0.7,0.5", "--window", "96",
                       "--n-states", "20", "--accuracy", "1e-5",
                       "--state-omega", "0.6")
    assert code == 0
    lines = (out / "floquet-scan.csv").read_text().splitlines()
    assert lines[0] == "omega_or_alpha,mean_P,S,n_states"
    assert len(lines) == 3
    fit = json.loads((out / "floquet-scan.fit.json").read_text())
    assert {"slope", "intercept", "r2"} <= set(fit["fit"])
    state = (out / "floquet-scan-state.csv").read_text().splitlines()
    assert state[0] == "l,re,im,density"
    assert len(state) == 1 + 96


def test_aa_transition_cli(tmp_path):
    code, out = invoke(tmp_path, "aa-transition", "--ratios", "2.0,0.5",
                       "--sizes", "55,89,144")
    assert code == 0
    lines = (out / "aa-transition.csv").read_text().splitlines()
    assert lines[0] == "L,jy_over_jx,mean_P,classification"
    assert any("localized" in ln for ln in lines[1:])
    assert any("extended" in ln for ln in lines[1:])


def test_butterfly_cli(tmp_path):
    code, out = invoke(tmp_path, "butterfly", "--q-max", "4",
                       "--chain-length", "40", "--n-phases", "3")
    assert code == 0
    lines = (out / "butterfly.csv").read_text().splitlines()
    assert lines[0] == "alpha_num,alpha_den,energy"
    assert len(lines) > 100
