import json
import os
import subprocess
import sys

import jsonschema
import pytest

from hypogeo.cli import load_schema, main

SMALL = ["--grid", "33,17", "--box=-8,8,-8,8"]


def _report(out):
    return json.loads((out / "report.json").read_text())


def test_verify_exit_zero(tmp_path):
    out = tmp_path / "v"
    code = main(["verify", "--frame", "grushin2d", "--degree", "4", "--samples", "20",
                 "--seed", "7", "--out", str(out)])
    assert code == 0
    rep = _report(out)
    jsonschema.validate(rep, load_schema("report.schema.json"))
    frames = rep["sections"]["verify"]["frames"]
    assert frames["grushin2d"]["summary"]["identity_passed"] == 20
    assert (out / "verify_samples.csv").exists() and (out / "report.md").exists()


def test_verify_martinet_commutation_fails(tmp_path):
    out = tmp_path / "m"
    assert main(["verify", "--frame", "martinet3d", "--degree", "2", "--samples", "3",
                 "--out", str(out)]) == 1
    assert _report(out)["status"] == "fail"


def test_solve_writes_fields(tmp_path):
    out = tmp_path / "s"
    assert main(["solve", "--system", "allen-cahn", "--frame", "grushin2d", *SMALL,
                 "--out", str(out)]) == 0
    rep = _report(out)
    assert rep["sections"]["solve"]["residual_norm"] <= 1e-8
    assert (out / "u.bin").exists() and (out / "u.bin.json").exists() and (out / "u.csv").exists()


def test_full_run_deterministic(tmp_path):
    cfg = {"frame": "grushin2d", "grid": "33,33", "box": [-8, 8, -8, 8], "seed": 3,
           "verify": {"samples": 5, "degree": 3, "frames": ["grushin2d"]},
           "poincare": {"radii": [2, 2.5]}, "diagnose": {"radii": [2, 2.5, 3], "levels": [0.0]}}
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps(cfg))
    codes, blobs = [], []
    for name in ("a", "b"):
        codes.append(main(["run", "--config", str(p), "--out", str(tmp_path / name)]))
        blobs.append((tmp_path / name / "report.json").read_bytes())
    assert codes[0] == codes[1]
    assert blobs[0] == blobs[1]
    rep = json.loads(blobs[0])
    jsonschema.validate(rep, load_schema("report.schema.json"))
    assert set(rep["sections"]) >= {"verify", "solve", "stability", "poincare",
                                    "hamiltonian", "diagnose"}


def test_config_errors_exit_two(tmp_path, capsys):
    assert main(["solve", "--bc", str(tmp_path / "missing.json"), "--out", str(tmp_path)]) == 2
    assert "not found" in capsys.readouterr().err
    assert main(["solve", "--config", str(tmp_path / "nope.json")]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"frame": "grushin2d", "colour": "red"}))
    assert main(["solve", "--config", str(bad)]) == 2
    assert main(["solve", "--frame", "grushin2d", "--grid", "33,33,33"]) == 2
    assert main(["solve", "--frame", "nowhere"]) == 2
    assert main(["report", "--out", str(tmp_path / "empty")]) == 2


def test_custom_bc_file(tmp_path):
    bc = tmp_path / "bc.json"
    bc.write_text(json.dumps([{"kind": "linear", "coef": [1.0, 0.5]}]))
    out = tmp_path / "h"
    assert main(["solve", "--system", "harmonic", "--bc", str(bc), *SMALL, "--out", str(out)]) == 0
    bad = tmp_path / "bad_bc.json"
    bad.write_text(json.dumps([{"kind": "spiral"}]))
    assert main(["solve", "--bc", str(bad), *SMALL, "--out", str(out)]) == 2


def test_report_rerender(tmp_path):
    out = tmp_path / "r"
    main(["verify", "--frame", "euclidean2d", "--samples", "2", "--degree", "2", "--out", str(out)])
    (out / "report.md").unlink()
    assert main(["report", "--out", str(out)]) == 0
    assert (out / "report.md").read_text().startswith("#")


def test_console_script_threads_env(tmp_path):
    env = dict(os.environ, HYPOGEO_THREADS="1")
    out = tmp_path / "e"
    proc = subprocess.run([sys.executable, "-m", "hypogeo.cli", "verify", "--frame", "grushin2d",
                           "--samples", "2", "--degree", "2", "--out", str(out)],
                          capture_output=True, text=True, env=env)
    assert proc.returncode == 0, proc.stderr
    assert "pass" in proc.stdout
