import json
import os
import subprocess

import pytest

CLI = os.environ.get("GRIDFEAS_CLI")

pytestmark = pytest.mark.skipif(not CLI, reason="GRIDFEAS_CLI not set")


def run(*args):
    return subprocess.run([CLI, *map(str, args)], capture_output=True, text=True, timeout=120)


def test_validate(data_dir):
    out = run("validate", "--grid", data_dir / "example2.json")
    assert out.returncode == 0 and out.stdout.startswith("OK")
    assert run("validate", "--grid", data_dir / "disconnected.json").returncode == 2
    reducible = run("validate", "--grid", data_dir / "example2_w12_0.json")
    assert reducible.returncode == 2 and "l2" in reducible.stdout + reducible.stderr


def test_pmax(data_dir):
    out = run("pmax", "--grid", data_dir / "example2_w12_0.json")
    assert out.returncode == 0
    doc = json.loads(out.stdout)
    assert doc["pmax"] == pytest.approx([0.75, 0.5], abs=1e-12)


def test_analyze_then_verify(data_dir, tmp_path):
    out = run("analyze", "--grid", data_dir / "example2.json", "--demand", "0.85,0.6", "--trace", "--oracle")
    assert out.returncode == 0
    report = tmp_path / "report.json"
    report.write_text(out.stdout)
    assert json.loads(out.stdout)["verdict"]["kind"] == "Infeasible"
    assert run("verify", report).returncode == 0

    doc = json.loads(out.stdout)
    doc["verdict"]["certificate"]["s"] = 2.0
    report.write_text(json.dumps(doc))
    assert run("verify", report).returncode == 1


def test_boundary_csv(data_dir):
    out = run("boundary", "--grid", data_dir / "example2.json", "--rays", 8)
    assert out.returncode == 0
    lines = out.stdout.strip().splitlines()
    assert lines[0] == "alpha,p1,p2,v1,v2,lambda1,lambda2,perron_residual"
    assert len(lines) == 9


def test_certify(data_dir):
    feasible = json.loads(run("certify", "--grid", data_dir / "example1.json", "--demand", "0.5").stdout)
    assert feasible["result"] == "feasible"
    infeasible = json.loads(run("certify", "--grid", data_dir / "example1.json", "--demand", "1.0").stdout)
    assert infeasible["result"] == "PD"


def test_exit_codes(data_dir):
    assert run("analyze", "--grid", data_dir / "example2.json", "--demand", "0.5").returncode == 4
    assert run("boundary", "--grid", data_dir / "ring4.json").returncode == 4
    assert run("analyze", "--grid", data_dir / "missing.json", "--demand", "0.5").returncode in (2, 4)
    assert run("analyze", "--grid", data_dir / "disconnected.json", "--demand", "0.5,0.5,0.5").returncode == 2
