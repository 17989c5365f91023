"""End-to-end command-line runs: exit codes, file artifacts, determinism."""
import json
import textwrap

import pytest

import dilatox
from dilatox.cli import main
from dilatox.simulate import read_samples_binary


def run(*argv) -> int:
    return main(list(argv))


def write(path, text) -> str:
    path.write_text(textwrap.dedent(text), encoding="utf-8")
    return str(path)


ST_GAUSS = """
    [stationary]
    model = "linear_gauss"
    A = [1.0]
    kappa = 0.5
    R = 0.2
    [stationary.grid]
    lo = -18.0
    hi = 18.0
    count = 181
"""


def test_config_error_exits_2(tmp_path, capsys):
    cfg = write(tmp_path / "bad.toml", """
        [stationary]
        model = "linear_gauss"
        A = [1.0]
        kappa = 1.5
        R = 0.2
        [stationary.grid]
        lo = -5.0
        hi = 5.0
        count = 11
    """)
    assert run("stationary", "--config", cfg, "--out", str(tmp_path)) == 2
    assert "kappa" in capsys.readouterr().err
    assert run("stationary", "--config", str(tmp_path / "missing.toml")) == 2
    bad_toml = write(tmp_path / "broken.toml", "[stationary\n")
    assert run("stationary", "--config", bad_toml) == 2
    err = capsys.readouterr().err
    assert "broken.toml" in err


def test_missing_key_is_diagnosed(tmp_path, capsys):
    cfg = write(tmp_path / "nomodel.toml", """
        [stationary]
        kappa = 0.5
        [stationary.grid]
        lo = -5.0
        hi = 5.0
        count = 11
    """)
    assert run("stationary", "--config", cfg, "--out", str(tmp_path)) == 2
    err = capsys.readouterr().err
    assert "[stationary]" in err and "model" in err


def test_stationary_gauss_report_and_csv(tmp_path):
    cfg = write(tmp_path / "st.toml", ST_GAUSS)
    out = tmp_path / "out"
    assert run("stationary", "--config", cfg, "--out", str(out)) == 0
    report = json.loads((out / "report.json").read_text())
    assert report["version"] == dilatox.__version__
    assert report["params"]["mean"] == [2.0]
    assert abs(report["params"]["per_component_variance"] - 2.0 / 15.0) < 1e-15
    assert report["scaling_residual_max"] < 1e-12
    assert report["config"]["stationary"]["kappa"] == 0.5

    lines = (out / "charfn.csv").read_text().splitlines()
    assert lines[0].startswith("# dilatox ")
    assert lines[1].startswith("# config ")
    assert lines[2] == "u,re,im"
    assert "0,1,0" in lines  # the U = 0 row is exact


def test_stationary_density_refusals(tmp_path, capsys):
    det = write(tmp_path / "det.toml", """
        [stationary]
        model = "linear_det"
        A = [1.0]
        kappa = 0.5
        [stationary.grid]
        lo = -5.0
        hi = 5.0
        count = 11
        [stationary.density]
        lo = -1.0
        hi = 5.0
        count = 21
    """)
    out = tmp_path / "det_out"
    assert run("stationary", "--config", det, "--out", str(out)) == 3
    assert "no density exists" in capsys.readouterr().err
    assert not (out / "charfn.csv").exists()  # refused before any write

    fractal = write(tmp_path / "fr.toml", """
        [stationary]
        model = "gauss_ka"
        kappa = 0.5
        R = 0.0
        points = [0.0, 1.0]
        probs = [0.5, 0.5]
        [stationary.grid]
        lo = -5.0
        hi = 5.0
        count = 11
        [stationary.density]
        lo = -1.0
        hi = 3.0
        count = 21
    """)
    assert run("stationary", "--config", fractal, "--out", str(out)) == 3
    assert "singular" in capsys.readouterr().err


def test_stationary_jump_model_2d(tmp_path):
    cfg = write(tmp_path / "ka.toml", """
        [stationary]
        model = "gauss_ka"
        kappa = 0.5
        R = 0.2
        points = [[0.0, 0.0], [0.5, 0.3]]
        probs = [0.4, 0.6]
        [stationary.grid]
        xlo = -5.0
        xhi = 5.0
        nx = 11
        ylo = -5.0
        yhi = 5.0
        ny = 11
    """)
    out = tmp_path / "out"
    assert run("stationary", "--config", cfg, "--out", str(out)) == 0
    report = json.loads((out / "report.json").read_text())
    assert report["scaling_residual_max"] < 1e-10
    assert report["truncation"]["flagged_points"] == 0
    header = (out / "charfn.csv").read_text().splitlines()[2]
    assert header == "ux,uy,re,im"


def test_json_config_matches_toml(tmp_path):
    toml_cfg = write(tmp_path / "st.toml", ST_GAUSS)
    json_cfg = write(tmp_path / "st.json", json.dumps({
        "stationary": {"model": "linear_gauss", "A": [1.0], "kappa": 0.5,
                       "R": 0.2,
                       "grid": {"lo": -18.0, "hi": 18.0, "count": 181}}}))
    out_t, out_j = tmp_path / "t", tmp_path / "j"
    assert run("stationary", "--config", toml_cfg, "--out", str(out_t)) == 0
    assert run("stationary", "--config", json_cfg, "--out", str(out_j),
               "--json") == 0
    assert (out_t / "charfn.csv").read_bytes() == \
        (out_j / "charfn.csv").read_bytes()
    assert (out_t / "report.json").read_bytes() == \
        (out_j / "report.json").read_bytes()


MFI_CANTOR_X2 = """
    [mfi]
    kappa = 0.3333333333333333
    anchor = 0.5
    f = "x2"
    tol = 1e-10
    n_max = 20
    deriv_bound = 1.0
    prefractal_generation = 6
    [mfi.omega_grid]
    lo = 0.0
    hi = 40.0
    count = 81
"""


def test_mfi_cantor_second_moment(tmp_path):
    cfg = write(tmp_path / "mfi.toml", MFI_CANTOR_X2)
    out = tmp_path / "out"
    assert run("mfi", "--config", cfg, "--out", str(out)) == 0
    report = json.loads((out / "report.json").read_text())
    res = report["result"]
    assert abs(res["value"]["re"] - 0.375) < 1e-6
    assert abs(res["value"]["im"]) < 1e-12
    assert len(report["tail_bounds"]) == len(res["trace"])
    assert report["prefractal"]["points"] == 64
    assert abs(report["prefractal"]["normalization"]["re"] - 1.0) < 1e-10
    assert (out / "prefractal.csv").exists()
    assert (out / "measure_charfn.csv").exists()
    assert report["measure_charfn"]["flagged_points"] == 0


def test_mfi_constant_integrand_is_exact(tmp_path):
    cfg = write(tmp_path / "one.toml", """
        [mfi]
        kappa = 0.5
        anchor = 0.5
        f = "one"
        n_max = 6
    """)
    out = tmp_path / "out"
    assert run("mfi", "--config", cfg, "--out", str(out)) == 0
    report = json.loads((out / "report.json").read_text())
    assert report["result"]["value"] == {"im": 0.0, "re": 1.0}
    assert report["result"]["converged"] is True


def test_mfi_unchecked_weights_policy(tmp_path, capsys):
    cfg = write(tmp_path / "iw.toml", """
        [mfi]
        kappa = 0.4
        anchor = 0.5
        weights = [[1.3065629648763766, 0.5411961001461971],
                   [1.3065629648763766, -0.5411961001461971]]
        f = "cos"
        n_max = 8
    """)
    out = tmp_path / "out"
    assert run("mfi", "--config", cfg, "--out", str(out)) == 3
    assert "unchecked" in capsys.readouterr().err
    assert not (out / "report.json").exists()
    assert run("mfi", "--config", cfg, "--out", str(out), "--unchecked") == 0
    report = json.loads((out / "report.json").read_text())
    assert abs(report["result"]["defect"] - 0.6131259297527532) < 1e-12


def test_mfi_unknown_integrand(tmp_path, capsys):
    cfg = write(tmp_path / "f.toml", """
        [mfi]
        kappa = 0.5
        anchor = 0.5
        f = "tan"
    """)
    assert run("mfi", "--config", cfg, "--out", str(tmp_path)) == 2
    assert "tan" in capsys.readouterr().err


IKEDA_CFG = """
    [ikeda]
    kappa = 0.3
    quad_tol = 1e-3
    [ikeda.grid]
    lo = 0.0
    hi = 0.9
    count = 151
    [ikeda.stationary]
    R = 0.1
    quad_tol = 1e-6
    [ikeda.stationary.grid]
    xlo = -0.2
    xhi = 2.2
    nx = 49
    ylo = -1.2
    yhi = 1.2
    ny = 49
"""


def test_ikeda_mass_and_byte_identical_rerun(tmp_path):
    cfg = write(tmp_path / "ik.toml", IKEDA_CFG)
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert run("ikeda", "--config", cfg, "--out", str(out1)) == 0
    report = json.loads((out1 / "report.json").read_text())
    assert abs(report["mass"] - 1.0) < 1e-3
    assert report["support_radius"] == pytest.approx(0.3 / 0.7)
    assert (out1 / "p_st.csv").exists()

    assert run("ikeda", "--config", cfg, "--out", str(out2)) == 0
    for name in ("p_ch.csv", "p_st.csv", "report.json"):
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes()


SIM_CFG = """
    [simulate]
    chains = 2
    steps = 3000
    seed = 7
    burn_in = 1000
    [simulate.map]
    kind = "linear"
    offset = [1.0]
    kappa = 0.5
    [simulate.noise]
    kind = "gaussian"
    R = 0.2
    [simulate.ecf_grid]
    lo = -5.0
    hi = 5.0
    count = 21
"""


def test_simulate_outputs_and_seed_override(tmp_path):
    cfg = write(tmp_path / "sim.toml", SIM_CFG)
    out = tmp_path / "out"
    assert run("simulate", "--config", cfg, "--out", str(out)) == 0
    samples = read_samples_binary(out / "samples.bin")
    assert samples.shape == (4000, 2)
    assert (samples[:, 1] == 0.0).all()  # 1D states, padded pairs
    summary = json.loads((out / "summary.json").read_text())
    assert summary["count"] == 4000
    assert summary["config"]["simulate"]["seed"] == 7
    assert "0,1,0" in (out / "ecf.csv").read_text().splitlines()

    other = tmp_path / "out99"
    assert run("simulate", "--config", cfg, "--out", str(other),
               "--seed", "99") == 0
    assert json.loads((other / "summary.json").read_text()
                      )["config"]["simulate"]["seed"] == 99
    assert (out / "samples.bin").read_bytes() != \
        (other / "samples.bin").read_bytes()


def test_simulate_divergence_exits_4(tmp_path, capsys):
    cfg = write(tmp_path / "div.toml", """
        [simulate]
        chains = 1
        steps = 10
        seed = 1
        burn_in = 1
        x0 = [1e13]
        [simulate.map]
        kind = "linear"
        offset = [1.0]
        kappa = 0.5
        [simulate.noise]
        kind = "none"
    """)
    assert run("simulate", "--config", cfg, "--out", str(tmp_path)) == 4
    assert "diverged" in capsys.readouterr().err


CMP_CFG = """
    [compare.analytic]
    kind = "stationary"
    model = "linear_gauss"
    A = [1.0]
    kappa = 0.5
    R = 0.2
    [compare.analytic.grid]
    lo = -5.0
    hi = 5.0
    count = 41

    [compare.empirical]
    chains = 2
    steps = 11000
    seed = 31
    burn_in = 1000
    [compare.empirical.map]
    kind = "linear"
    offset = [1.0]
    kappa = 0.5
    [compare.empirical.noise]
    kind = "gaussian"
    R = 0.2

    [compare.thresholds]
    cf_sup = 0.05
"""


def test_compare_pass_and_fail(tmp_path, capsys):
    cfg = write(tmp_path / "cmp.toml", CMP_CFG)
    out = tmp_path / "out"
    assert run("compare", "--config", cfg, "--out", str(out)) == 0
    assert "PASS" in capsys.readouterr().out
    doc = json.loads((out / "compare.json").read_text())
    assert doc["passed"] is True
    assert doc["checks"]["cf_sup"]["value"] < 0.05

    tight = write(tmp_path / "tight.toml",
                  CMP_CFG.replace("cf_sup = 0.05", "cf_sup = 1e-9"))
    assert run("compare", "--config", tight, "--out", str(out)) == 4
    captured = capsys.readouterr()
    assert "FAIL" in captured.out
    doc = json.loads((out / "compare.json").read_text())
    assert doc["passed"] is False

    typo = write(tmp_path / "typo.toml",
                 CMP_CFG.replace("cf_sup = 0.05", "ks_sup = 0.05"))
    assert run("compare", "--config", typo, "--out", str(out)) == 2
    assert "ks_sup" in capsys.readouterr().err


def test_threads_env_validation(tmp_path, capsys, monkeypatch):
    cfg = write(tmp_path / "st.toml", ST_GAUSS)
    monkeypatch.setenv("DILATOX_THREADS", "many")
    assert run("stationary", "--config", cfg, "--out", str(tmp_path)) == 2
    assert "DILATOX_THREADS" in capsys.readouterr().err
    monkeypatch.setenv("DILATOX_THREADS", "2")
    assert run("stationary", "--config", cfg, "--out", str(tmp_path)) == 0
