import csv
import io
import json
import math
import subprocess
import sys
from pathlib import Path

import pytest

from chainkit import cli
from chainkit.cli import COLUMNS, Row, main

EXPECTED = Path(__file__).parent / "fixtures" / "expected"
RUNS = json.loads((EXPECTED / "runs.json").read_text())


def call(capsys, *argv):
    status = main(list(argv))
    out, err = capsys.readouterr()
    return status, out, err


def data_rows(text):
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(io.StringIO("\n".join(lines))))


def test_all_subcommands_registered():
    names = {
        "gamma2", "dudley", "entropy", "partition", "quantile-dist", "mc-sup", "vc-dim", "shatter",
        "shatter-integral", "maximal-ineq", "cover-ball", "ellipsoid-bound", "verify-theorem3",
        "verify-theorem4", "corollary1", "remark1", "remark2", "theorem2", "decomposition",
        "theorem6", "tail-compare",
    }
    assert set(cli.COMMANDS) == names
    assert len(cli.bundled_instances()) >= 12


def test_gamma2_singleton_is_zero(capsys):
    status, out, _ = call(capsys, "gamma2", "--config", "singleton", "--deterministic")
    assert status == 0
    rows = data_rows(out)
    assert rows[0]["value"] == "0.0"
    assert all(float(r["value"]) == 0 for r in rows)


def test_verify_theorem3_bundled_pass(capsys):
    status, out, _ = call(capsys, "verify-theorem3", "--config", "gauss12", "--tau", "2", "--seed", "7", "--samples", "100000")
    assert status == 0
    (row,) = data_rows(out)
    assert row["pass"] == "PASS" and row["samples"] == "100000" and row["seed"] == "7"


def test_tau_below_two_is_usage_error(capsys):
    status, out, err = call(capsys, "verify-theorem3", "--config", "gauss12", "--tau", "1", "--seed", "7")
    assert status == 1 and out == ""
    assert len(err.strip().splitlines()) == 1 and "tau" in err


def test_seed_is_mandatory_for_mc(capsys):
    status, _, err = call(capsys, "mc-sup", "--config", "gauss12")
    assert status == 1 and "--seed" in err


def test_unknown_subcommand_and_missing_config(capsys):
    assert call(capsys, "nonsense", "--config", "gauss12")[0] == 1
    assert call(capsys, "gamma2")[0] == 1
    assert call(capsys)[0] == 1


def test_malformed_instance_names_field(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"instance_id": "x", "points": [1, 2}')
    status, _, err = call(capsys, "gamma2", "--config", str(bad))
    assert status == 1 and len(err.strip().splitlines()) == 1
    missing = tmp_path / "missing.json"
    missing.write_text(json.dumps({"instance_id": "x"}))
    status, _, err = call(capsys, "gamma2", "--config", str(missing))
    assert status == 1 and "'T'" in err


def test_unknown_instance_name(capsys):
    status, _, err = call(capsys, "gamma2", "--config", "no_such_instance")
    assert status == 1 and err.startswith("chainkit: error:")


def test_header_embeds_hash_seed_versions(capsys):
    _, out, _ = call(capsys, "mc-sup", "--config", "gauss12", "--seed", "3", "--samples", "500")
    head = [ln for ln in out.splitlines() if ln.startswith("#")]
    assert head[0].startswith("# chainkit ") and "numpy" in head[0] and "scipy" in head[0]
    assert any(ln.startswith("# config_hash ") and len(ln.split()[-1]) == 64 for ln in head)
    assert "# seed 3" in head
    assert any(ln.startswith("# generated ") for ln in head)
    _, out, _ = call(capsys, "mc-sup", "--config", "gauss12", "--seed", "3", "--samples", "500", "--deterministic")
    assert not any(ln.startswith("# generated ") for ln in out.splitlines())
    assert out.splitlines()[4] == ",".join(COLUMNS)


def test_deterministic_byte_identical(capsys):
    argv = ["theorem2", "--config", "characters16", "--seed", "11", "--samples", "3000", "--deterministic"]
    _, a, _ = call(capsys, *argv)
    _, b, _ = call(capsys, *argv)
    assert a == b
    _, c, _ = call(capsys, *argv[:4], "12", *argv[5:])
    assert c != a


def test_run_document_and_out_file(tmp_path, capsys):
    doc = {"subcommand": "mc-sup", "instance": "gauss12", "mc": {"samples": 800, "seed": 5}}
    cfgp = tmp_path / "run.json"
    cfgp.write_text(json.dumps(doc))
    outp = tmp_path / "r.csv"
    status, out, _ = call(capsys, "mc-sup", "--config", str(cfgp), "--out", str(outp), "--deterministic")
    assert status == 0 and out == ""
    _, direct, _ = call(capsys, "mc-sup", "--config", "gauss12", "--seed", "5", "--samples", "800", "--deterministic")
    assert outp.read_text() == direct
    status, _, err = call(capsys, "gamma2", "--config", str(cfgp))
    assert status == 1 and "subcommand" in err


def test_text_format(capsys):
    status, out, _ = call(capsys, "remark2", "--config", "ellipsoid8", "--format", "text", "--seed", "1", "--samples", "500", "--deterministic")
    assert status == 0 and "[remark2]" in out and "witness_max_dev" in out


def test_fail_reports_margin_and_exit_two(monkeypatch, capsys):
    def failing(cfg):
        return [Row("fake", 5.0, 0.5, 3.0, 5 / 3, passed=False)]

    monkeypatch.setitem(cli.COMMANDS, "gamma2", failing)
    status, out, _ = call(capsys, "gamma2", "--config", "singleton", "--deterministic")
    assert status == 2
    assert "# FAIL fake margin -0.5" in out
    assert data_rows(out)[0]["pass"] == "FAIL"


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "chainkit", "gamma2", "--config", "singleton", "--deterministic"], capture_output=True, text=True)
    assert proc.returncode == 0 and "singleton" in proc.stdout


def _close(a, b):
    if a == b:
        return True
    try:
        x, y = float(a), float(b)
    except ValueError:
        return False
    if math.isnan(x) and math.isnan(y):
        return True
    return math.isclose(x, y, rel_tol=1e-9, abs_tol=1e-12)


@pytest.mark.parametrize("entry", RUNS, ids=[e["name"] for e in RUNS])
def test_expected_reports(entry, capsys):
    expected = (EXPECTED / f"{entry['name']}.csv").read_text()
    status, out, _ = call(capsys, entry["subcommand"], "--config", entry["instance"], "--deterministic", *entry["args"])
    assert expected.splitlines()[0] == f"# exit {status}"
    exp_head = [ln for ln in expected.splitlines()[1:] if ln.startswith("#")]
    got_head = [ln for ln in out.splitlines() if ln.startswith("#") and not ln.startswith("# chainkit ")]
    assert got_head[:3] == exp_head[:3]
    exp_rows, got_rows = data_rows(expected), data_rows(out)
    assert len(exp_rows) == len(got_rows)
    for e, g in zip(exp_rows, got_rows):
        for k in COLUMNS:
            assert _close(e[k], g[k]), (entry["name"], k, e[k], g[k])
