import csv
import io
import json
from pathlib import Path

import pytest

from spinfeedback.cli import main
from spinfeedback.config import build_config, load_config
from spinfeedback.errors import ConfigError
from spinfeedback.experiments import EXACT_COLUMNS, SWEEP_COLUMNS

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def write(tmp_path, cfg, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(cfg))
    return p


def read_csv(path):
    return parse_csv(Path(path).read_text())


def parse_csv(text):
    lines = text.splitlines()
    header = lines[0]
    body = [ln for ln in lines[1:] if not ln.startswith("#")]
    comments = [ln for ln in lines[1:] if ln.startswith("#")]
    rows = list(csv.DictReader(io.StringIO("\n".join(body))))
    return header, rows, comments


def run_ok(argv):
    assert main([str(a) for a in argv]) == 0


def calibrate_json(tmp_path, **changes):
    cfg = json.loads((CONFIGS / "calibrate.json").read_text())
    cfg.update(changes)
    out = tmp_path / "cal.json"
    run_ok([write(tmp_path, cfg), "--out", out])
    return json.loads(out.read_text())


def test_calibrate_report(tmp_path):
    r = calibrate_json(tmp_path)
    for key in ("kappa", "eps_a", "s", "ratio", "theta_rad", "v_shot", "v_atoms", "kappa2_eps_a"):
        assert key in r
    assert abs(r["kappa"]) == pytest.approx(0.59, abs=0.03)
    assert r["eps_a"] == pytest.approx(0.15, abs=0.02)
    assert abs(r["theta_rad"]) == pytest.approx(0.16, abs=0.02)
    assert r["v_shot"] == pytest.approx(3.3e5, rel=0.1)
    assert r["v_atoms"] == pytest.approx(4.4e5, rel=0.1)
    assert r["kappa2_eps_a"] == pytest.approx(0.052, abs=0.005)
    assert len(r["config_sha256"]) == 64


def test_calibrate_without_atoms(tmp_path):
    r = calibrate_json(tmp_path, n_atoms=0)
    assert r["theta_rad"] == 0.0
    assert r["v_atoms"] == r["v_shot"]


def test_calibrate_doubled_photons(tmp_path):
    base = calibrate_json(tmp_path)
    doubled = calibrate_json(tmp_path, n_photons=2.6e6)
    assert doubled["v_shot"] == pytest.approx(2 * base["v_shot"], rel=1e-12)


def test_sweep_csv(tmp_path):
    cfg = {"mode": "sweep", "kappa": 0.59, "eps_l": 0.042, "eps_a": 0.15, "eps_l_prime": 0.098, "seed": 3}
    out = tmp_path / "sweep.csv"
    run_ok([write(tmp_path, cfg), "--shots", 2000, "--resamples", 100, "--out", out])
    header, rows, _ = read_csv(out)
    assert header.startswith("# spinfeedback") and "config_sha256=" in header and "seed=3" in header
    assert tuple(rows[0].keys()) == SWEEP_COLUMNS
    assert len(rows) == 17
    gains = [float(r["gain"]) for r in rows]
    assert gains == sorted(gains)
    for r in rows:
        assert float(r["xi_unc_err_lo"]) >= 0 and float(r["xi_unc_err_hi"]) >= 0


def test_sweep_zero_gain_point(tmp_path):
    cfg = {
        "mode": "sweep",
        "kappa": 0.59,
        "eps_l": 0.042,
        "eps_a": 0.15,
        "eps_l_prime": 0.098,
        "gain_grid": [0.0],
        "n_shots": 20000,
        "n_resamples": 200,
    }
    out = tmp_path / "z.csv"
    run_ok([write(tmp_path, cfg), "--out", out])
    _, (row,), _ = read_csv(out)
    err = 0.5 * (float(row["xi_unc_err_lo"]) + float(row["xi_unc_err_hi"]))
    assert abs(float(row["xi_unc"]) - 1) < 3 * err
    assert float(row["two_delta_plus_mc"]) > float(row["two_delta_minus_mc"])


def test_multicycle_is_byte_identical(tmp_path):
    cfg = json.loads((CONFIGS / "multicycle.json").read_text())
    cfg.update(gain_grid=[-0.4, 0.0], n_shots=1000, n_resamples=100)
    path = write(tmp_path, cfg)
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    run_ok([path, "--out", a])
    run_ok([path, "--out", b])
    assert a.read_bytes() == b.read_bytes()
    header, rows, _ = read_csv(a)
    assert tuple(rows[0].keys()) == ("gain", "xi_1", "xi_1_err_lo", "xi_1_err_hi", "xi_2", "xi_2_err_lo", "xi_2_err_hi")
    c = tmp_path / "c.csv"
    run_ok([path, "--seed", 1, "--out", c])
    assert c.read_bytes() != a.read_bytes()


def test_exact_output(tmp_path):
    out = tmp_path / "exact.csv"
    run_ok([CONFIGS / "exact.json", "--out", out])
    _, rows, comments = read_csv(out)
    assert tuple(rows[0].keys()) == EXACT_COLUMNS
    assert len(rows) == 81
    xi = [float(r["xi_unp"]) for r in rows]
    assert max(abs(a - b) for a, b in zip(xi, xi[::-1])) < 1e-10
    (summary,) = comments
    fields = dict(kv.split("=") for kv in summary.split()[2:])
    assert float(fields["argmin_abs_gain"]) == pytest.approx(0.14)


def test_exact_two_spins_stdout(tmp_path, capsys):
    run_ok([write(tmp_path, {"mode": "exact", "n_spins": 2, "gain_grid": [0.0]})])
    _, rows, _ = parse_csv(capsys.readouterr().out)
    assert float(rows[0]["xi_unp"]) == 1.0
    assert abs(float(rows[0]["delta_minus"])) < 1e-15


@pytest.mark.parametrize(
    "cfg, field",
    [
        ({"mode": "sweep"}, "kappa"),
        ({"mode": "bogus"}, "mode"),
        ({"mode": "exact"}, "n_spins"),
        ({"mode": "exact", "n_spins": 500}, None),
        ({"mode": "sweep", "kappa": 0.5, "eps_a": 0.1, "n_shots": 10}, "n_shots"),
        ({"mode": "multicycle", "kappa": 0.5, "eps_a": 0.1, "cycles": 1}, "cycles"),
        ({"mode": "sweep", "kappa": 0.5, "eps_a": 0.1, "eps_a": 1.5}, "eps_a"),
        ({"mode": "sweep", "kappa": 0.5, "eps_a": 0.1, "typo": 1}, "typo"),
        ({"mode": "calibrate", "gamma_mhz": 29.0}, None),
    ],
)
def test_errors_are_reported_as_json(tmp_path, capsys, cfg, field):
    code = main([str(write(tmp_path, cfg))])
    assert code != 0
    err = json.loads(capsys.readouterr().err)
    assert err["error"] and err["message"]
    if field is not None:
        assert err["field"] == field


def test_missing_config_file(tmp_path, capsys):
    assert main([str(tmp_path / "nope.json")]) != 0
    assert "error" in json.loads(capsys.readouterr().err)


def test_hash_ignores_output_path():
    a = build_config({"mode": "exact", "n_spins": 4, "output_path": "a.csv"})
    b = build_config({"mode": "exact", "n_spins": 4, "output_path": "b.csv"})
    c = build_config({"mode": "exact", "n_spins": 5})
    assert a.config_hash() == b.config_hash() != c.config_hash()


def test_overrides_apply(tmp_path):
    cfg = load_config(write(tmp_path, {"mode": "sweep", "kappa": 0.5, "eps_a": 0.1}), {"n_shots": 500, "seed": 9, "mode": None})
    assert cfg.n_shots == 500 and cfg.seed == 9 and cfg.mode == "sweep"


def test_bad_json(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    with pytest.raises(ConfigError):
        load_config(p)
