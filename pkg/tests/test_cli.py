import json

import numpy as np
import pytest

from pricenoise.cli import run_cli
from pricenoise.noisegen import generate_noise
from pricenoise.pricemodel import integrate
from pricenoise.series import NoiseSpec, read_series_csv, write_series_csv


def test_simulate_rademacher_stdout(capsys):
    argv = ["simulate", "--paths", "1", "--steps", "8", "--dt", "1", "--n0", "1",
            "--dist", "rademacher", "--seed", "7"]
    assert run_cli(argv) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "t,value"
    values = [float(line.split(",")[1]) for line in lines[1:]]
    assert len(values) == 8 and set(values) <= {-1.0, 1.0}


def test_simulate_matches_library(tmp_path):
    out = tmp_path / "x.csv"
    assert run_cli(["simulate", "--steps", "50", "--seed", "3", "--dist", "uniform",
                    "--n0", "2", "--dt", "0.5", "--out", str(out)]) == 0
    expected = generate_noise(NoiseSpec(2.0, "uniform", 3), 50, 0.5)
    assert np.array_equal(read_series_csv(out).values, expected.values)


def test_simulate_logprice_has_extra_sample(tmp_path):
    out = tmp_path / "y.csv"
    run_cli(["simulate", "--steps", "10", "--seed", "1", "--kind", "logprice", "--out", str(out)])
    y = read_series_csv(out)
    assert len(y) == 11 and y.values[0] == 0.0


def test_simulate_many_paths(tmp_path):
    assert run_cli(["simulate", "--paths", "3", "--steps", "16", "--seed", "5",
                    "--out", str(tmp_path / "ens")]) == 0
    manifest = json.loads((tmp_path / "ens" / "manifest.json").read_text())
    assert manifest["paths"] == 3 and manifest["seed"] == 5
    assert len(list((tmp_path / "ens").glob("path_*.csv"))) == 3


def test_simulate_many_paths_needs_out():
    assert run_cli(["simulate", "--paths", "3", "--steps", "16", "--seed", "5"]) == 2


def test_default_seed_is_logged(caplog):
    with caplog.at_level("WARNING", logger="pricenoise"):
        run_cli(["simulate", "--steps", "8", "--out", "/dev/null"])
    assert "default seed 42" in caplog.text


@pytest.mark.parametrize("argv", [
    ["simulate", "--steps", "8", "--bogus"],
    ["simulate", "--steps", "8", "--dist", "cauchy"],
    ["simulate", "--steps", "0"],
    ["psd", "x.csv", "--segment", "100"],
    ["psd", "x.csv", "--overlap", "1.0"],
    ["nosuchcommand"],
])
def test_usage_errors(argv, capsys):
    assert run_cli(argv) == 2
    assert "usage" in capsys.readouterr().err


def test_input_error_exit_status(tmp_path, capsys):
    (tmp_path / "p.csv").write_text("t,value\n0,1\n1,0\n")
    assert run_cli(["analyze", str(tmp_path / "p.csv")]) == 2
    assert "line 3" in capsys.readouterr().err


def test_acf_csv(tmp_path):
    x = generate_noise(NoiseSpec(1.0), 500, 1.0)
    write_series_csv(tmp_path / "x.csv", x)
    out = tmp_path / "acf.csv"
    assert run_cli(["acf", str(tmp_path / "x.csv"), "--max-lag", "5", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0].startswith("# meta: mode=biased-time-average n=500")
    assert lines[1] == "lag,value"
    assert lines[2] == "0,1.0"
    assert len(lines) == 8


def test_psd_csv_and_angular(tmp_path):
    y = integrate(generate_noise(NoiseSpec(1.0), 4096, 1.0))
    write_series_csv(tmp_path / "y.csv", y)
    out = tmp_path / "psd.csv"
    assert run_cli(["psd", str(tmp_path / "y.csv"), "--segment", "256", "--angular",
                    "--band-lo", "0.004", "--band-hi", "0.1", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert "method=averaged-segments" in lines[0] and "freq_kind=angular" in lines[0]
    assert "slope=" in lines[0]
    assert lines[1] == "freq,value"
    second = float(lines[3].split(",")[0])
    assert second == pytest.approx(2 * np.pi / 256)


def test_theory_dump(tmp_path):
    out = tmp_path / "s.csv"
    assert run_cli(["theory", "--curve", "psd", "--n0", "2", "--horizon", "3", "--points", "5",
                    "--angular", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert "formula=n0*T^2*sinc^2(omega*T/2)" in lines[0]
    assert lines[1] == "omega,S"
    mid = lines[2 + 2].split(",")
    assert float(mid[0]) == 0.0 and float(mid[1]) == 18.0


def test_theory_literal_flag(tmp_path):
    out = tmp_path / "s.csv"
    run_cli(["theory", "--paper-eq12-literal", "--out", str(out)])
    assert "non-normative" in out.read_text().splitlines()[0]


def test_theory_acf_curve(capsys):
    assert run_cli(["theory", "--curve", "acf", "--horizon", "2", "--points", "3"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[1] == "tau,R"
    assert lines[2:] == ["-2.0,0.0", "0.0,2.0", "2.0,0.0"]


def _price_file(tmp_path, seed=11, steps=20_000, n0=1e-4):
    out = tmp_path / "prices.csv"
    run_cli(["simulate", "--steps", str(steps), "--n0", repr(n0), "--seed", str(seed),
             "--kind", "price", "--out", str(out)])
    return out


def test_analyze_report(tmp_path):
    prices = _price_file(tmp_path)
    out = tmp_path / "report.txt"
    status = run_cli(["analyze", str(prices), "--out", str(out)])
    text = out.read_text()
    kv = dict(line.split("=", 1) for line in (tmp_path / "report.txt.kv").read_text().splitlines())
    assert float(kv["n0_hat"]) == pytest.approx(1e-4, rel=0.05)
    slope = float(kv["psd_inverse_square.measured"])
    assert -2.3 <= slope <= -1.7
    assert kv["returns_white.pass"] == "true"
    assert status == 0 and "overall: PASS" in text
    assert kv["overall.pass"] == "true"


def test_analyze_exit_status_tracks_claims(tmp_path):
    # AR(1) log-returns are not white: status 1 and the report says FAIL
    rng = np.random.default_rng(0)
    r = np.zeros(5000)
    eps = rng.standard_normal(5000) * 0.01
    for i in range(1, 5000):
        r[i] = 0.9 * r[i - 1] + eps[i]
    prices = np.exp(np.concatenate([[0.0], np.cumsum(r)]))
    path = tmp_path / "ar.csv"
    path.write_text("t,value\n" + "".join(f"{i},{float(p)!r}\n" for i, p in enumerate(prices)))
    out = tmp_path / "r.txt"
    assert run_cli(["analyze", str(path), "--out", str(out)]) == 1
    assert "[FAIL] returns_white" in out.read_text()
    assert "overall: FAIL" in out.read_text()


def test_analyze_csv_format(tmp_path, capsys):
    prices = _price_file(tmp_path)
    run_cli(["analyze", str(prices), "--format", "csv"])
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "key,value"
    assert any(line.startswith("n0_hat,") for line in lines)


def test_analyze_custom_columns_and_dates(tmp_path):
    y = integrate(generate_noise(NoiseSpec(1e-4, "gaussian", 4), 3000, 1.0)).values
    import datetime as dt
    start = dt.date(2001, 1, 1)
    rows = "".join(f"{start + dt.timedelta(days=i)},{float(np.exp(v))!r}\n" for i, v in enumerate(y))
    path = tmp_path / "d.csv"
    path.write_text("date,close\n" + rows)
    out = tmp_path / "r.txt"
    run_cli(["analyze", str(path), "--time-col", "date", "--price-col", "close", "--out", str(out)])
    kv = dict(line.split("=", 1) for line in (tmp_path / "r.txt.kv").read_text().splitlines())
    assert kv["dt"] == "1.0"


def test_verify_quick_suite_is_deterministic(tmp_path):
    a, b = tmp_path / "a.txt", tmp_path / "b.txt"
    for out in (a, b):
        assert run_cli(["verify", "--suite", "theory", "--seed", "42", "--out", str(out)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert (tmp_path / "a.txt.kv").read_bytes() == (tmp_path / "b.txt.kv").read_bytes()
    assert "wiener_khinchin" in a.read_text()


def test_verify_reduced_paths(tmp_path):
    out = tmp_path / "v.csv"
    status = run_cli(["verify", "--suite", "time", "--seed", "1", "--paths", "200",
                      "--format", "csv", "--out", str(out)])
    lines = out.read_text().splitlines()
    assert lines[0] == "claim_id,anchor,measured,expected,tolerance,pass,seed"
    assert len(lines) == 5
    passed = all(line.split(",")[-2] == "true" for line in lines[1:])
    assert status == (0 if passed else 1)
