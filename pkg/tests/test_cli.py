import json

import pytest

from splitlab.cli import main


def run_cli(capsys, *argv):
    main(list(argv))
    return capsys.readouterr().out


def test_singularities_command(capsys):
    out = run_cli(capsys, "singularities", "--eps", "0.1", "--alpha", "0.5")
    doc = json.loads(out)
    assert "rho_minus" in doc and "delta2" in doc
    assert doc["variant"] == "standard"


def test_singularities_scaling_law(capsys):
    out = run_cli(capsys, "singularities", "--eps", "0.1", "--alpha", "1 - 1.0*eps^2")
    doc = json.loads(out)
    assert abs(float(doc["alpha"]) - 0.99) < 1e-12


def test_melnikov_command(capsys):
    out = run_cli(capsys, "melnikov", "--eps", "0.15", "--alpha", "0.4")
    doc = json.loads(out)
    assert doc["regime"] == "Intermediate"
    methods = {r["method"] for r in doc["results"]}
    assert methods == {"residue", "quadrature", "asymptotic"}
    amps = [float(r["amplitude"]) for r in doc["results"] if "amplitude" in r]
    assert max(amps) / min(amps) < 1.2


def test_melnikov_qp_command(capsys):
    out = run_cli(capsys, "melnikov-qp", "--eps", "0.3", "--alpha", "0.3",
                  "--kmax", "24", "--precision-bits", "128")
    doc = json.loads(out)
    assert doc["n_harmonics"] > 4
    assert tuple(doc["leading_harmonic"]["k"]) in {(-1, 1), (1, -1), (2, -1), (-2, 1)}


def test_sweep_and_fit_roundtrip(tmp_path, capsys):
    cfg = tmp_path / "sweep.cfg"
    cfg.write_text("eps = geom:0.1:0.3:6\nalpha = 0.4\nmethods = residue\n")
    table = tmp_path / "table.csv"
    run_cli(capsys, "sweep", "--config", str(cfg), "--out", str(table))
    text = table.read_text()
    assert text.splitlines()[0].startswith("eps,alpha,regime")
    assert len(text.strip().splitlines()) == 7
    out = run_cli(capsys, "fit", str(table))
    doc = json.loads(out)
    assert 0.8 < doc["rate"] < 0.95  # Im rho_-(0.4) ~ 0.886


def test_sweep_preset(capsys):
    out = run_cli(capsys, "sweep", "--preset", "wide-strip")
    lines = out.strip().splitlines()
    assert len(lines) == 7
    assert "WideStrip" in out


def test_split_direct_mu0(tmp_path, capsys):
    plot = tmp_path / "profile.dat"
    out = run_cli(capsys, "split-direct", "--eps", "0.25", "--alpha", "0.4",
                  "--mu", "0", "--eta", "2", "--section", "pi", "--plot-out", str(plot))
    doc = json.loads(out)
    assert doc["resolved"] is False
    assert plot.read_text().startswith("# phase d")


def test_cli_rejects_bad_sweep_args():
    with pytest.raises(SystemExit):
        main(["sweep"])
