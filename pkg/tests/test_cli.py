import csv
import subprocess
import sys
from pathlib import Path

import pytest

from multlab.cli import main
from multlab.config import parse_config
from multlab.reports import SUMMARY_COLUMNS

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def _write(tmp_path, body, name="run.ini"):
    p = tmp_path / name
    p.write_text(body)
    return p


def _small(suites="eig", n=51, extra=""):
    return (f"[domain]\ndim = 1\nlength = pi\nN = {n}\n\n{extra}"
            f"[run]\nsuites = {suites}\noutput_dir = out\n")


def _read(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_list_suites(capsys):
    assert main(["list-suites"]) == 0
    text = capsys.readouterr().out
    lines = {ln.split()[0]: ln for ln in text.splitlines()[1:]}
    assert "Key Lemma" in lines["keylemma"]
    assert "Davies-Gaffney" in lines["dg"]
    assert "eig_rel=1e-10" in lines["eig"]


def test_minimal_run_writes_csvs(tmp_path, capsys):
    cfg = _write(tmp_path, _small())
    assert main(["run", str(cfg)]) == 0
    out = capsys.readouterr().out
    assert out.startswith("[domain]") and "PASS  AC1.eigenvalues" in out
    rows = _read(tmp_path / "out" / "eig.csv")
    assert list(rows[0]) == ["index", "mu", "analytic", "rel_error", "mu_rescaled_times_4"]
    assert len(rows) == 49
    summary = _read(tmp_path / "out" / "summary.csv")
    assert list(summary[0]) == list(SUMMARY_COLUMNS)
    assert {r["criterion"] for r in summary} == {"AC1", "AC2"}
    # the echoed config parses back to the same settings
    echoed = (tmp_path / "out" / "resolved_config.ini").read_text()
    again = parse_config(echoed, tmp_path / "out")
    assert again.N == 51 and again.tolerances == parse_config(cfg.read_text(), tmp_path).tolerances


def test_runs_are_byte_reproducible(tmp_path, monkeypatch):
    outputs = []
    for workers, sub in (("1", "a"), ("2", "b")):
        d = tmp_path / sub
        d.mkdir()
        monkeypatch.setenv("MULTLAB_WORKERS", workers)
        cfg = _write(d, _small("eig, wave, cone, lp", 41, "[symbols]\nnames = rational\n\n"))
        assert main(["run", str(cfg)]) in (0, 1)
        outputs.append({p.name: p.read_bytes() for p in sorted((d / "out").glob("*.csv"))})
    assert outputs[0] == outputs[1]


@pytest.mark.parametrize("body,needle", [
    ("[domain]\ndim = 1\nN = 4\n", "line 3"),
    ("[domain]\ndim = 1\nN = 51\ncolour = red\n", "colour"),
    ("[domain\n", "parse"),
    ("[operator]\nH = __import__('os')\n", "H"),
    ("[run]\nsuites = eig, teleport\n", "teleport"),
])
def test_configuration_errors_exit_2(tmp_path, capsys, body, needle):
    assert main(["run", str(_write(tmp_path, body))]) == 2
    err = capsys.readouterr().err
    assert "configuration error" in err and needle in err


def test_tolerance_override_keeps_its_name(tmp_path):
    cfg = parse_config(_small() + "\n[tolerances]\nbmo_C = 12\n", tmp_path)
    assert cfg.tol("bmo_C") == 12.0


def test_missing_config_exits_2(tmp_path):
    assert main(["run", str(tmp_path / "nope.ini")]) == 2


def test_numeric_failure_exits_1(tmp_path, capsys):
    body = "[domain]\ndim = 2\nlength = 1\nN = 21\n\n[run]\nsuites = dg\noutput_dir = out\n"
    assert main(["run", str(_write(tmp_path, body))]) == 1
    assert "numeric failure in suite dg" in capsys.readouterr().err


def test_bad_worker_count(tmp_path, monkeypatch):
    monkeypatch.setenv("MULTLAB_WORKERS", "zero")
    assert main(["run", str(_write(tmp_path, _small()))]) == 2


def test_module_entry_point(tmp_path):
    cfg = _write(tmp_path, _small())
    proc = subprocess.run([sys.executable, "-m", "multlab", "run", str(cfg)],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert "eigendecomposition of 49 nodes" in proc.stderr


@pytest.mark.slow
def test_reference_config_passes_every_criterion(tmp_path):
    body = (CONFIGS / "reference.ini").read_text().replace("../out/reference", str(tmp_path / "ref"))
    cfg = _write(tmp_path, body)
    assert main(["run", str(cfg)]) == 0
    summary = _read(tmp_path / "ref" / "summary.csv")
    assert {r["criterion"] for r in summary} == {f"AC{i}" for i in range(1, 16)}
