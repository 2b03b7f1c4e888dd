"""CLI contracts: JSON payloads, CSV determinism, exit codes, figures."""

import csv
import json

import pytest

from polysob.cli import EXIT_OK, EXIT_USAGE, EXIT_VERIFY, main


def _read(path):
    with open(path) as fh:
        return fh.read()


def test_constants_payload(tmp_path, capsys):
    out = tmp_path / "c.json"
    assert main(["constants", "--n", "6", "--k", "2", "--out", str(out)]) == EXIT_OK
    data = json.loads(_read(out))
    assert data["two_star"] == "6"
    assert data["a_nk"] == "384^(-1/2)"
    assert data["c_nk"] == "1/3"
    assert data["K"] > 0
    assert data["inv_K"] == pytest.approx(1.0 / data["K"], rel=1e-14)


def test_invalid_dimensions_rejected(capsys):
    assert main(["constants", "--n", "4", "--k", "2"]) == EXIT_USAGE
    err = capsys.readouterr().err
    assert "2 <= 2k < n" in err


def test_unknown_flag_is_usage_error(capsys):
    assert main(["constants", "--n", "6", "--k", "2", "--frobnicate"]) == EXIT_USAGE


def test_identities_exit_codes(tmp_path):
    out = tmp_path / "ids.json"
    assert main(["identities", "--n", "5", "--k", "2", "--out", str(out)]) == EXIT_OK
    data = json.loads(_read(out))
    assert data["all_residuals_zero"]
    names = {c["identity"] for c in data["certificates"]}
    assert names == {"bubble", "kernel_dilation", "kernel_translation"}


def test_green_csv_contract(tmp_path):
    out = tmp_path / "g.csv"
    rc = main(["green", "--n", "5", "--k", "2", "--r-grid", "0.01:10:200",
               "--out", str(out)])
    assert rc == EXIT_OK
    with open(out) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["r", "gamma", "r_pow_singular_scaled", "envelope_bound"]
    assert len(rows) == 201
    radii = [float(r[0]) for r in rows[1:]]
    assert radii == sorted(radii)
    assert radii[0] == pytest.approx(0.01) and radii[-1] == pytest.approx(10.0)
    # figure and summary delivered alongside
    assert (tmp_path / "g.png").exists()
    summary = json.loads(_read(tmp_path / "g.json"))
    assert summary["singular_relative_gap"] < 1e-5
    # every numeric cell parses back and has at most 17 significant digits
    for row in rows[1:]:
        for cell in row:
            float(cell)
            mantissa = cell.lstrip("-").replace(".", "").split("e")[0].lstrip("0")
            assert len(mantissa) <= 17


def test_green_csv_deterministic(tmp_path):
    out1 = tmp_path / "a.csv"
    out2 = tmp_path / "b.csv"
    args = ["green", "--n", "6", "--k", "2", "--r-grid", "0.05:5:40", "--no-plot"]
    assert main(args + ["--out", str(out1)]) == EXIT_OK
    assert main(args + ["--out", str(out2)]) == EXIT_OK
    assert _read(out1) == _read(out2)


def test_quotient_slope_torus_config(tmp_path):
    cfg = {
        "manifold": {"kind": "torus", "n": 8, "period": 6.283185307179586},
        "k": 2,
        "B": 0.0,
        "eps_grid": {"start": 0.006, "stop": 0.02, "count": 8},
        "quadrature_rel_tol": 1e-10,
        "intercept_tolerance": 1e-3,
    }
    cfg_path = tmp_path / "run.json"
    cfg_path.write_text(json.dumps(cfg))
    out = tmp_path / "q.csv"
    rc = main(["quotient-slope", "--config", str(cfg_path), "--out", str(out)])
    assert rc == EXIT_OK
    summary = json.loads(_read(tmp_path / "q.json"))
    assert summary["slope_statistically_zero"]
    assert abs(summary["slope"]) < 2.0 * summary["slope_sigma"]
    assert summary["intercept_rel_gap"] < 1e-3
    assert summary["config_hash"]
    with open(out) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["eps", "theta_eps", "Q", "err"]
    assert len(rows) == 9
    assert (tmp_path / "q.png").exists()


def test_quotient_slope_parallel_matches_serial(tmp_path):
    cfg = {
        "manifold": {"kind": "torus", "n": 8},
        "k": 2, "B": 0.0,
        "eps_grid": {"start": 0.01, "stop": 0.02, "count": 6},
        "quadrature_rel_tol": 1e-9,
    }
    cfg_path = tmp_path / "run.json"
    cfg_path.write_text(json.dumps(cfg))
    out1, out2 = tmp_path / "s.csv", tmp_path / "p.csv"
    assert main(["quotient-slope", "--config", str(cfg_path), "--out", str(out1),
                 "--no-plot"]) == EXIT_OK
    assert main(["quotient-slope", "--config", str(cfg_path), "--out", str(out2),
                 "--no-plot", "--jobs", "4"]) == EXIT_OK
    assert _read(out1) == _read(out2)


def test_probe_iopt_config_and_expectation(tmp_path):
    cfg = {
        "manifold": {"kind": "sphere", "n": 6, "radius": 1.0},
        "k": 2, "B": 1.0,
        "eps_grid": [0.002, 0.004, 0.008],
        "expect_violation": True,
    }
    cfg_path = tmp_path / "probe.json"
    cfg_path.write_text(json.dumps(cfg))
    rc = main(["probe-iopt", "--config", str(cfg_path),
               "--out", str(tmp_path / "p.csv")])
    assert rc == EXIT_OK
    summary = json.loads(_read(tmp_path / "p.json"))
    assert summary["violated"] and summary["margin"] > 0
    # flipped expectation: exit code 2 signals the failed verification
    cfg["expect_violation"] = False
    cfg_path.write_text(json.dumps(cfg))
    assert main(["probe-iopt", "--config", str(cfg_path),
                 "--out", str(tmp_path / "p2.csv")]) == EXIT_VERIFY


def test_probe_iopt_rejects_zero_b(tmp_path):
    cfg = {"manifold": {"kind": "sphere", "n": 6}, "k": 2, "B": 0.0,
           "eps_grid": [0.01]}
    cfg_path = tmp_path / "probe.json"
    cfg_path.write_text(json.dumps(cfg))
    assert main(["probe-iopt", "--config", str(cfg_path)]) == EXIT_USAGE


def test_pohozaev_regimes_csv(tmp_path):
    cfg = {
        "manifold": {"kind": "sphere", "n": 6, "radius": 1.0},
        "k": 2,
        "params": [{"alpha": 1.0, "mu": 1e-3}, {"alpha": 1.0, "mu": 1e-4}],
        "n_profiles": 1,
        "h": 0.01,
    }
    cfg_path = tmp_path / "po.json"
    cfg_path.write_text(json.dumps(cfg))
    out = tmp_path / "po.csv"
    rc = main(["pohozaev-regimes", "--config", str(cfg_path), "--out", str(out)])
    assert rc == EXIT_OK
    with open(out) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["alpha", "mu", "term_curvature", "term_l2", "theta",
                       "theta_prime", "regime"]
    assert len(rows) == 3
    summary = json.loads(_read(tmp_path / "po.json"))
    assert all(r < 1e-6 for r in summary["pohozaev_relative_residuals"])


def test_giraud_default_cases(tmp_path):
    out = tmp_path / "gir.json"
    rc = main(["giraud", "--out", str(out)])
    assert rc == EXIT_OK
    data = json.loads(_read(out))
    regimes = [f["regime"] for f in data["fits"]]
    assert regimes == ["a+b<n", "a+b=n", "a+b>n"]
    for fit in data["fits"]:
        assert abs(fit["fitted_exponent"] - fit["expected_exponent"]) < 0.1
    assert (tmp_path / "gir.png").exists()


def test_missing_config_is_usage_error():
    assert main(["quotient-slope"]) == EXIT_USAGE
    assert main(["probe-iopt"]) == EXIT_USAGE


def test_env_precision_override(tmp_path, monkeypatch):
    monkeypatch.setenv("POLYSOB_PRECISION", "not-an-int")
    assert main(["green", "--n", "5", "--k", "2", "--r-grid", "0.1:1:5",
                 "--out", str(tmp_path / "x.csv")]) == EXIT_USAGE
    monkeypatch.setenv("POLYSOB_PRECISION", "35")
    assert main(["green", "--n", "5", "--k", "2", "--r-grid", "0.1:1:5",
                 "--no-plot", "--out", str(tmp_path / "x.csv")]) == EXIT_OK


def test_giraud_monte_carlo_config(tmp_path):
    cfg = {
        "cases": [{"a": 2.0, "b": 2.0, "p": 7.0, "q": 7.0, "n": 5}],
        "monte_carlo": {"samples": 400000, "separation": 1.0, "alpha": 2.0},
    }
    cfg_path = tmp_path / "gir.json"
    cfg_path.write_text(json.dumps(cfg))
    out = tmp_path / "gir.json.out"
    rc = main(["giraud", "--config", str(cfg_path), "--out", str(out),
               "--seed", "77", "--no-plot"])
    assert rc == EXIT_OK
    data = json.loads(_read(out))
    check = data["monte_carlo_check"]
    assert check["sigmas"] < 3.0
    assert check["seed"] == 77
    # same seed, same stochastic estimate
    out2 = tmp_path / "gir2.json.out"
    main(["giraud", "--config", str(cfg_path), "--out", str(out2),
          "--seed", "77", "--no-plot"])
    data2 = json.loads(_read(out2))
    assert data2["monte_carlo_check"]["monte_carlo"] == check["monte_carlo"]


def test_pohozaev_regimes_composite_path(tmp_path):
    # n < 4k exercises the composite near/far mass inside the balance table
    cfg = {
        "manifold": {"kind": "torus", "n": 5, "period": 6.283185307179586},
        "k": 2,
        "params": [{"alpha": 50.0, "mu": 2e-4}, {"alpha": 100.0, "mu": 1e-4}],
        "n_profiles": 1,
        "h": 0.01,
    }
    cfg_path = tmp_path / "bal.json"
    cfg_path.write_text(json.dumps(cfg))
    out = tmp_path / "bal.csv"
    rc = main(["pohozaev-regimes", "--config", str(cfg_path), "--out", str(out),
               "--no-plot"])
    assert rc == EXIT_OK
    with open(out) as fh:
        rows = list(csv.reader(fh))
    assert len(rows) == 3
    assert rows[1][6] == "n=2k+1"
    summary = json.loads(_read(tmp_path / "bal.json"))
    assert all("regardless of geometry" in diag for diag in summary["diagnoses"])


def test_help_paths_exit_cleanly():
    assert main(["--help"]) == EXIT_OK
    assert main(["green", "--help"]) == EXIT_OK
