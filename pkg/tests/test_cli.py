import json
import subprocess
import sys

import pytest

from tsdev.cli import main
from tsdev.experiments import read_report_csv


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def sine_file(tmp_path, capsys):
    path = tmp_path / "pair.csv"
    assert main(["gen", str(path), "--seed", "1"]) == 0
    capsys.readouterr()
    return path


def test_estimate_recovers_clean_delay(sine_file, capsys):
    code, out, _ = run(capsys, "estimate", str(sine_file), "--method", "tsdev")
    assert code == 0
    assert json.loads(out)["tau_s"] == pytest.approx(100e-6, abs=1e-12)


def test_estimate_writes_curve(sine_file, tmp_path, capsys):
    curve = tmp_path / "curve.csv"
    code, _, _ = run(capsys, "estimate", str(sine_file), "--method", "pncc", "--tau-max", "2e-4",
                     "--curve", str(curve))
    assert code == 0
    lines = curve.read_text().splitlines()
    assert lines[0] == "tau_s,value" and len(lines) == 42
    assert json.loads((tmp_path / "curve.csv.json").read_text())["method"] == "PNCC"


def test_binary_gen_and_estimate(tmp_path, capsys):
    path = tmp_path / "pair.tde"
    assert main(["gen", str(path), "--snr-db", "30", "--tau0", "5e-5"]) == 0
    code, out, _ = run(capsys, "estimate", str(path))
    assert code == 0
    assert abs(json.loads(out)["tau_s"] - 5e-5) <= 3e-5


def test_coverage_error_exit_code(sine_file, capsys):
    code, _, err = run(capsys, "estimate", str(sine_file), "--t0", "0", "--tw", "0.3")
    assert code == 4
    assert "missing" in err


def test_missing_file_exit_code(tmp_path, capsys):
    code, _, _ = run(capsys, "estimate", str(tmp_path / "none.csv"))
    assert code == 3


def test_malformed_file_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("time_s,ch1_rad\n0,1\n")
    code, _, _ = run(capsys, "estimate", str(bad))
    assert code == 2


def test_bad_method_exit_code(sine_file, capsys):
    code, _, err = run(capsys, "estimate", str(sine_file), "--method", "gcc")
    assert code == 2 and "unknown method" in err


def test_bad_flag_exit_code(capsys):
    with pytest.raises(SystemExit) as info:
        main(["estimate"])
    assert info.value.code == 2


@pytest.mark.parametrize("cfg,field", [
    ({"seed": 1, "bogus": 2}, "bogus"),
    ({"trial": {"tw_s": -1}}, "trial/tw_s"),
    ({"trials": 0}, "trials"),
    ({"values": []}, "values"),
    ({"common_noise": {"center_hz": 40, "width": 3}}, "width"),
])
def test_config_validation_names_field(tmp_path, capsys, cfg, field):
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps(cfg))
    code, _, err = run(capsys, "sweep", "snr", "--config", str(p), "--out", str(tmp_path))
    assert code == 2
    assert field in err
    assert not (tmp_path / "fig1_snr.csv").exists()


def test_config_not_json(tmp_path, capsys):
    p = tmp_path / "cfg.json"
    p.write_text("{nope")
    assert run(capsys, "sweep", "snr", "--config", str(p))[0] == 2


def test_sweep_writes_report(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("TDE_SEED", "17")
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"values": [30.0, 20.0], "trials": 3}))
    code, out, _ = run(capsys, "sweep", "snr", "--config", str(cfg), "--out", str(tmp_path))
    assert code == 0
    paths = json.loads(out)
    summary = json.loads(open(paths["summary"]).read())
    assert summary["seed"] == 17 and summary["trials"] == 3
    raw = read_report_csv(paths["csv"])
    assert set(raw) == {(30.0, "CC"), (30.0, "TSDEV"), (20.0, "CC"), (20.0, "TSDEV")}


def test_sweep_is_reproducible_from_seed(tmp_path, capsys):
    for d in ("a", "b"):
        assert main(["sweep", "drift", "--trials", "2", "--seed", "4",
                     "--out", str(tmp_path / d)]) == 0
    capsys.readouterr()
    assert (tmp_path / "a" / "fig3a_drift.csv").read_text() == \
        (tmp_path / "b" / "fig3a_drift.csv").read_text()


def test_bad_seed_env(monkeypatch, capsys):
    monkeypatch.setenv("TDE_SEED", "abc")
    assert run(capsys, "sweep", "snr", "--trials", "2")[0] == 2


def test_localize_file_and_out_of_link(tmp_path, capsys):
    path = tmp_path / "field.tde"
    code, out, _ = run(capsys, "gen", str(path), "--kind", "field", "--seed", "2")
    assert code == 0
    info = json.loads(out)
    win = ["--t0", repr(info["window_t0_s"]), "--tw", repr(info["window_tw_s"])]
    code, out, _ = run(capsys, "localize", str(path), "--length-m", "59330", *win)
    assert code == 0
    assert abs(json.loads(out)["position_m"] - 49_490.0) < 2_000.0
    code, out, _ = run(capsys, "localize", str(path), "--length-m", "59330", "--method",
                       "tsdev_comp", "--comp-t0", repr(info["comp_t0_s"]), *win)
    assert code == 0
    code, _, err = run(capsys, "localize", str(path), "--length-m", "100",
                       "--tau-min=-1e-3", "--tau-max=1e-3", *win)
    assert code == 5
    assert json.loads(err)["tau_s"] < 0


def test_localize_needs_length(sine_file, capsys):
    assert run(capsys, "localize", str(sine_file))[0] == 2


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "tsdev", "--help"], capture_output=True, text=True)
    assert res.returncode == 0
    assert "sweep" in res.stdout and "TDE_SEED" in res.stdout


def test_cc_equals_tsdev_on_half_period_window(sine_file, capsys):
    taus = []
    for method in ("cc", "tsdev"):
        code, out, _ = run(capsys, "estimate", str(sine_file), "--method", method,
                           "--t0", "0.001", "--tw", "0.2")
        assert code == 0
        taus.append(json.loads(out)["tau_s"])
    assert taus[0] == taus[1] == pytest.approx(1e-4, abs=1e-12)


def test_zero_delay_file_maps_to_link_center(tmp_path, capsys):
    path = tmp_path / "zero.csv"
    assert main(["gen", str(path), "--tau0", "0"]) == 0
    code, out, _ = run(capsys, "localize", str(path), "--length-m", "60000")
    assert code == 0
    assert json.loads(out)["position_m"] == pytest.approx(30_000.0, abs=1e-6)


def test_worker_count_does_not_change_bytes(tmp_path, capsys):
    for w in ("1", "3"):
        assert main(["sweep", "snr", "--trials", "4", "--seed", "8", "--workers", w,
                     "--out", str(tmp_path / w)]) == 0
    capsys.readouterr()
    for name in ("fig1_snr.csv", "fig1_snr.json"):
        assert (tmp_path / "1" / name).read_bytes() == (tmp_path / "3" / name).read_bytes()


def test_emulated_localize_reports_mean_and_std(capsys):
    code, out, _ = run(capsys, "localize", "--emulate", "--trials", "2", "--seed", "1",
                       "--method", "tsdev")
    assert code == 0
    res = json.loads(out)
    assert res["trials"] == 2 and res["std_m"] >= 0.0
