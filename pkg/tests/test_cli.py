import json
import math

import numpy as np
import pytest

from prodspectra.cli import main, read_csv_table


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_density_r7_s3_csv(capsys):
    code, out, _ = run(capsys, "density", "--r", "7", "--s", "3", "--points", "200", "--format", "csv")
    assert code == 0
    config, header, rows = read_csv_table(out)
    assert header == ["x", "density"] and len(rows) == 200
    assert config["method"] == "contour"
    x_star = float(config["x_star"])
    assert x_star == pytest.approx(2.015, abs=5e-4)
    xs = np.array(rows)[:, 0]
    assert xs.min() > 0 and xs.max() < x_star
    assert np.all(np.array(rows)[:, 1] > 0)


def test_density_r3_s3_support(capsys):
    code, out, _ = run(capsys, "density", "--r", "3", "--s", "3", "--points", "40")
    config, _, rows = read_csv_table(out)
    assert config["method"] == "closed"
    assert float(config["x_star"]) == pytest.approx(256 / 432, rel=1e-15)


def test_density_marchenko_pastur(capsys):
    _, out, _ = run(capsys, "density", "--r", "1", "--s", "0", "--points", "30")
    _, _, rows = read_csv_table(out)
    x, rho = np.array(rows).T
    assert np.allclose(rho, np.sqrt(4 - x) / (2 * np.pi * np.sqrt(x)), rtol=1e-12)


def test_csv_round_trip_exact(capsys, tmp_path):
    path = tmp_path / "d.csv"
    code, _, _ = run(capsys, "density", "--r", "2", "--s", "1", "--points", "25", "--out", str(path))
    assert code == 0
    text = path.read_bytes().decode()
    assert "\r" not in text
    config, header, rows = read_csv_table(text)
    # re-render the parsed table and compare byte for byte
    lines = [f"# {k}={v}" for k, v in config.items()] + [",".join(header)]
    lines += [",".join(f"{v:.17g}" for v in row) for row in rows]
    assert "\n".join(lines) + "\n" == text


def test_density_json_schema(capsys):
    code, out, _ = run(capsys, "density", "--r", "2", "--s", "0", "--points", "10", "--format", "json")
    doc = json.loads(out)
    assert doc["schema"] == 1 and doc["command"] == "density"
    assert doc["columns"] == ["x", "density"] and len(doc["rows"]) == 10
    assert doc["config"]["r"] == 2


def test_density_svg(capsys, tmp_path):
    path = tmp_path / "fig.svg"
    code, out, _ = run(capsys, "density", "--r", "7", "--s", "3", "--points", "40", "--format", "svg",
                       "--out", str(path))
    assert code == 0 and out.strip() == str(path)
    head = path.read_text()[:400]
    assert "<svg" in head


def test_density_figure_alongside_table(capsys, tmp_path):
    fig = tmp_path / "side.svg"
    code, out, _ = run(capsys, "density", "--r", "2", "--s", "2", "--points", "20", "--figure", str(fig))
    assert code == 0 and out.startswith("# r=2") and fig.exists()


def test_density_invalid_method(capsys):
    with pytest.raises(SystemExit) as info:
        main(["density", "--r", "2", "--s", "2", "--method", "contour"])
    assert info.value.code == 2


def test_invalid_regime(capsys):
    with pytest.raises(SystemExit) as info:
        main(["density", "--r", "2", "--s", "3"])
    assert info.value.code == 2


def test_moments_catalan(capsys):
    _, out, _ = run(capsys, "moments", "--r", "1", "--s", "0", "--kmax", "4")
    _, header, rows = read_csv_table(out)
    assert [row[1] for row in rows] == [1, 1, 2, 5, 14]


def test_moments_first_is_power_of_half(capsys):
    for s in range(0, 5):
        _, out, _ = run(capsys, "moments", "--r", "4", "--s", str(s), "--kmax", "1")
        assert read_csv_table(out)[2][1][1] == 2.0**-s


def test_moments_verify_r7_s3(capsys):
    code, out, _ = run(capsys, "moments", "--r", "7", "--s", "3", "--kmax", "6", "--verify", "--format", "json")
    doc = json.loads(out)
    assert code == 0 and doc["config"]["verify_passed"]
    assert doc["columns"] == ["k", "moment", "quadrature", "rel_diff"]
    assert max(row[3] for row in doc["rows"]) < 1e-5


def test_moments_kmax_guard(capsys):
    with pytest.raises(SystemExit):
        main(["moments", "--r", "2", "--kmax", "31"])


def test_support(capsys):
    _, out, _ = run(capsys, "support", "--r", "7", "--s", "3")
    _, _, _ = None, None, None
    lines = out.splitlines()
    values = {ln.split(",")[0]: ln.split(",")[1] for ln in lines[lines.index("source,value,note") + 1:]}
    assert float(values["analytic"]) == pytest.approx(2.015, abs=5e-4)
    assert float(values["branch_search"]) == pytest.approx(float(values["analytic"]), rel=1e-10)
    assert float(values["closed_w_star"]) == pytest.approx((math.sqrt(33) - 1) / 4, rel=1e-14)


def test_sample_deterministic_files(capsys, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    argv = ["sample", "--r", "2", "--s", "1", "--n", "32", "--trials", "3", "--tol", "0.5"]
    assert main(argv + ["--out", str(a)]) == 0
    assert main(argv + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    err = capsys.readouterr().err
    assert "KS distance" in err
    config, header, rows = read_csv_table(a.read_text())
    assert config["seed"] == "7" and len(rows) == 96 and "ks_distance" in config


def test_sample_json_and_fail_status(capsys):
    code, out, _ = run(capsys, "sample", "--r", "1", "--n", "8", "--trials", "1", "--tol", "1e-9",
                       "--format", "json")
    doc = json.loads(out)
    assert code == 1 and doc["ks_passed"] is False and len(doc["values"]) == 8


def test_sample_size_guard(capsys):
    with pytest.raises(SystemExit) as info:
        main(["sample", "--r", "1", "--n", "4096"])
    assert info.value.code == 2
    assert "guard" in capsys.readouterr().err


@pytest.mark.slow
def test_sample_r2_s2_ks(capsys):
    code, _, err = run(capsys, "sample", "--r", "2", "--s", "2", "--n", "256", "--trials", "40",
                       "--seed", "7")
    assert code == 0 and "pass" in err


@pytest.mark.slow
def test_sample_arcsine_ks(capsys):
    code, _, err = run(capsys, "sample", "--r", "1", "--s", "1", "--n", "512", "--trials", "20")
    assert code == 0 and "pass" in err


def test_verify_r2_s0_json(capsys):
    code, out, err = run(capsys, "verify", "--r", "2", "--s", "0", "--format", "json")
    doc = json.loads(out)
    assert code == 0 and doc["passed"] and doc["schema"] == 1
    names = {v["name"]: v for v in doc["verdicts"]}
    closed_vs_contour = names["density: closed form vs contour"]
    assert closed_vs_contour["measured"] < 1e-6 and closed_vs_contour["tolerance"] == 1e-6
    assert all("tolerance" in v for v in doc["verdicts"])
    assert err.count("pass") == len(doc["verdicts"])


def test_verify_r2_s1_against_oracle(capsys):
    code, out, _ = run(capsys, "verify", "--r", "2", "--s", "1", "--format", "json")
    doc = json.loads(out)
    v = next(v for v in doc["verdicts"] if "oracle" in v["name"])
    assert code == 0 and v["measured"] < 1e-8


@pytest.mark.slow
def test_verify_r7_s3_all_pass(capsys, tmp_path):
    fig = tmp_path / "v.svg"
    code, out, _ = run(capsys, "verify", "--r", "7", "--s", "3", "--format", "csv", "--figure", str(fig))
    assert code == 0 and fig.exists()
    assert "FAIL" not in out


def test_verify_schema_stable(capsys):
    _, a, _ = run(capsys, "verify", "--r", "1", "--s", "0", "--format", "json")
    _, b, _ = run(capsys, "verify", "--r", "1", "--s", "0", "--format", "json")
    assert a == b


def test_verify_nonzero_exit_on_failure(capsys, monkeypatch):
    from prodspectra import verify

    real = verify.run_verify

    def failing(spec, points=50):
        rep = real(spec, points)
        rep.add("forced", 1.0, 0.5)
        return rep

    monkeypatch.setattr(verify, "run_verify", failing)
    code, _, err = run(capsys, "verify", "--r", "1", "--s", "0")
    assert code == 1 and "FAIL  forced" in err


def test_verify_range_guard():
    with pytest.raises(SystemExit):
        main(["verify", "--r", "10"])
