import io
import json
import subprocess
import sys

import pytest

from planarbm import cli


def run(*argv):
    buf = io.StringIO()
    rc = cli.main(list(argv), out=buf)
    return rc, buf.getvalue()


def shell(*argv):
    return subprocess.run([sys.executable, "-m", "planarbm.cli", *argv], capture_output=True, text=True)


def test_density_json():
    rc, out = run("density", "disk", "--param", "a=0.5", "--s", "0")
    doc = json.loads(out)
    assert rc == 0 and doc["schema"] == 1
    assert doc["density"][0] == pytest.approx(3 / (2 * 3.141592653589793), rel=1e-14)


def test_cdf_monotone_on_grid():
    rc, out = run("cdf", "strip", "--curve", "right", "--grid", "30")
    vals = json.loads(out)["cdf"]
    assert rc == 0 and all(b >= a for a, b in zip(vals, vals[1:]))


def test_list_catalogs():
    for what in ("densities", "maps", "identities", "rules", "gates"):
        rc, out = run("list", what)
        assert rc == 0 and json.loads(out)["items"]


def test_verify_identity_exit_codes():
    rc, out = run("verify-identity", "basel")
    assert rc == 0 and json.loads(out)["pass"]
    rc, out = run("verify-identity", "leibniz", "--trunc", "10")
    doc = json.loads(out)
    assert doc["tail_bound"] > 0 and doc["n_used"] == 10
    assert rc == 1


def test_usage_errors_exit_2():
    assert run("verify-identity", "nope")[0] == 2
    assert run("density", "disk", "--param", "a=2")[0] == 2
    assert run("density", "disk", "--param", "oops")[0] == 2
    assert shell("sample").returncode == 2
    assert shell("sample", "--rule", "exit", "--domain", "disk", "--start", "3").returncode == 2


def test_json_is_byte_identical_on_repeat():
    a = shell("verify-density", "disk", "--n", "2000")
    b = shell("verify-density", "disk", "--n", "2000")
    assert a.returncode == b.returncode
    assert a.stdout == b.stdout and a.stdout


def test_sample_csv_is_deterministic():
    argv = ("sample", "--rule", "winding-sym", "--r", "1", "--start", "1", "--n", "50", "--format", "csv", "--seed", "4")
    a, b = shell(*argv), shell(*argv)
    assert a.returncode == 0 and a.stdout == b.stdout
    lines = a.stdout.splitlines()
    assert lines[0] == "re,im,winding_index,steps" and len(lines) == 51


def test_export_rows_and_header():
    rc, out = run("export", "--density", "disk", "--grid", "25", "--format", "csv")
    lines = out.splitlines()
    assert rc == 0 and lines[0] == "s,value,cdf" and len(lines) == 26
    rc, out = run("export", "--density", "annulus", "--grid", "10", "--format", "csv")
    lines = out.splitlines()
    assert lines[0] == "curve,s,value,cdf" and len(lines) == 21


def test_dynkin_passes_on_annulus():
    rc, out = run("dynkin", "annulus")
    doc = json.loads(out)
    assert rc == 0
    assert "log_abs" in json.dumps(doc)


def test_seed_range():
    assert run("verify-density", "disk", "--seed", "-1")[0] == 2
    assert run("verify-density", "disk", "--seed", str(2**64))[0] == 2
