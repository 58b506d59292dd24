import csv
import io
import json
import subprocess
import sys
import time
from fractions import Fraction

import pytest

from chordenum import cli, mps


def run(*argv):
    return cli.run(list(argv))


def rows(out):
    return list(csv.DictReader(io.StringIO(out)))


def test_count_examples():
    out, _, code = run("count", "--t", "1", "--k", "1", "--N", "5")
    assert code == 0
    assert [r["count"] for r in rows(out)] == ["1", "1", "3", "16", "125"]
    out, _, _ = run("count", "--t", "2", "--k", "2", "--N", "5")
    # K_2 counts as 2-connected, so n = 2 gives 1
    assert [r["count"] for r in rows(out)] == ["0", "1", "1", "6", "70"]
    out, _, _ = run("count", "--t", "2", "--k", "0", "--N", "3")
    assert [r["count"] for r in rows(out)] == ["1", "2", "8"]


def test_count_json():
    out, _, code = run("count", "--t", "2", "--k", "2", "--N", "5", "--format", "json", "--check-integral-unroot")
    body = json.loads(out)
    assert code == 0 and body["t"] == 2 and body["k"] == 2
    assert body["counts"][4] == {"n": 5, "count": "70"}


def test_verify():
    t0 = time.time()
    out, _, code = run("verify", "--t", "1", "--N", "6")
    assert code == 0
    assert time.time() - t0 < 5
    assert all(r["match"] == "yes" for r in rows(out))
    assert list(rows(out)[0]) == ["t", "k", "n", "series_count", "oracle_count", "match"]


def test_verify_mismatch_hook():
    out, _, code = run("verify", "--t", "1", "--N", "4", "--corrupt-coefficient")
    assert code == 1
    assert any(r["match"] == "no" for r in rows(out))


def test_verify_cap():
    _, err, code = run("verify", "--t", "1", "--N", "9")
    assert code == 2 and "cap" in err


def test_table():
    out, _, code = run("table", "--tmax", "1")
    assert code == 0 and rows(out) == [{"t": "1", "k=1": "0.36788"}]
    out, _, code = run("table", "--tmax", "3", "--json")
    body = json.loads(out)
    assert len(body["entries"]) == 6
    assert all(abs(float(r)) < 1e-10 for e in body["entries"] for r in e["residuals"])


def test_table_errors():
    assert run("table", "--tmax", "9")[2] == 2
    assert run("table", "--tmax", "2", "--prec", "1e-6")[2] == 2


def test_moments():
    out, _, code = run("moments", "--t", "1", "--k", "1", "--i", "2", "--N", "8")
    assert code == 0
    for r in rows(out):
        assert Fraction(r["mean"]) == int(r["n"]) - 1 and r["var"] == "0"
    out, _, _ = run("moments", "--t", "1", "--k", "0", "--i", "2", "--N", "4")
    assert Fraction(rows(out)[2]["mean"]) == Fraction(9, 7)
    out, _, _ = run("moments", "--t", "1", "--k", "0", "--i", "2", "--N", "4", "--format", "json")
    m = json.loads(out)["moments"][2]
    assert m["mean"] == {"num": "9", "den": "7"}


def test_moments_growth():
    out, _, _ = run("moments", "--t", "2", "--k", "1", "--i", "2", "--N", "30")
    per_n = {int(r["n"]): float(r["mean_over_n"]) for r in rows(out)}
    diffs = [abs(per_n[n + 1] - per_n[n]) for n in range(20, 29)]
    assert all(b < a for a, b in zip(diffs, diffs[1:]))


def test_asymptotics():
    out, _, code = run("asymptotics", "--t", "1", "--k", "1", "--N", "30", "--format", "json")
    body = json.loads(out)
    assert code == 0
    assert abs(float(body["rho_ratio"]) - float(body["rho_branch"])) < 1e-3
    assert abs(float(body["exponent"]) + 2.5) < 0.15


def test_series_dump_round_trip():
    out, _, code = run("series-dump", "--t", "2", "--k", "1", "--N", "6")
    assert code == 0
    s = mps.from_json(out)
    again = json.dumps(mps.to_json(s), separators=(",", ":")) + "\n"
    assert again == out


def test_usage_errors():
    assert run()[2] == 2
    assert run("count", "--t", "1")[2] == 2
    assert run("count", "--t", "0", "--k", "0", "--N", "3")[2] == 2
    assert run("bogus")[2] == 2
    assert run("count", "--t", "1", "--k", "1", "--N", "3", "--workers", "0")[2] == 2


def test_determinism():
    a = run("verify", "--t", "2", "--N", "5")
    b = run("verify", "--t", "2", "--N", "5", "--workers", "2")
    assert a == b


@pytest.mark.slow
def test_console_exit_codes():
    ok = subprocess.run([sys.executable, "-m", "chordenum.cli", "count", "--t", "1", "--k", "1", "--N", "3"],
                        capture_output=True, text=True)
    assert ok.returncode == 0 and ok.stdout.splitlines()[-1] == "3,3"
    bad = subprocess.run([sys.executable, "-m", "chordenum.cli", "table", "--tmax", "0"], capture_output=True)
    assert bad.returncode == 2
