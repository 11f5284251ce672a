import json
import math
import subprocess
import sys

import pytest

from disclab import report
from disclab.cli import decay_sweep, main
from disclab.pointsets import gen_grid, write_points
from disclab.svgplot import loglog_svg

PI8 = repr(math.pi / 8)


def run(*args):
    return subprocess.run([sys.executable, "-m", "disclab.cli", *args], capture_output=True, text=True)


def load(path):
    return json.loads(path.read_text())


@pytest.fixture
def grid9(tmp_path):
    path = tmp_path / "grid9.csv"
    write_points(gen_grid(3), path)
    return path


def test_discrepancy_grid9(grid9, tmp_path):
    out = tmp_path / "d.json"
    assert main(["discrepancy", "--points", str(grid9), "--theta", "0.3927", "--mode", "periodic",
                 "--out", str(out)]) == 0
    doc = load(out)
    assert doc["result"]["value"] >= 0.25
    meta = doc["meta"]
    assert meta["tool"] == "disclab" and meta["constants_version"] and meta["params"]["theta"] == 0.3927


def test_discrepancy_l2_only(grid9, tmp_path):
    out = tmp_path / "d.csv"
    assert main(["discrepancy", "--points", str(grid9), "--no-search", "--l2", "--trunc", "32",
                 "--format", "csv", "--out", str(out)]) == 0
    header, row = [l for l in out.read_text().splitlines() if not l.startswith("#")]
    cols = dict(zip(header.split(","), row.split(",")))
    assert float(cols["l2.value"]) >= 0


def test_exit_codes(tmp_path, grid9):
    r = run("discrepancy", "--points", str(tmp_path / "absent.csv"))
    assert r.returncode == 2 and "absent.csv" in r.stderr
    bad = tmp_path / "bad.csv"
    bad.write_text("0.1;0.2\n")
    assert run("discrepancy", "--points", str(bad)).returncode == 2
    assert run("discrepancy", "--points", str(grid9), "--theta", "1.0").returncode == 3
    assert run("discrepancy", "--points", str(grid9), "--mode", "sideways").returncode == 3
    r = run("certify", "--generator", "random", "--n", "64", "--theta", repr(math.pi / 16))
    assert r.returncode == 4 and "theta^-5" in r.stderr
    assert run("scaling", "--n", "256").returncode == 3
    assert run("scaling", "--n", "256", "256", "256").returncode == 3


def test_certify(tmp_path):
    out = tmp_path / "c.json"
    assert main(["certify", "--generator", "random", "--n", "1024", "--seed", "7", "--theta", PI8,
                 "--out", str(out)]) == 0
    res = load(out)["result"]
    assert res["phi_sum"] > 0 and res["montgomery"]["holds"]
    assert res["rho_variant"] is None and res["timing_ms"] is None
    assert main(["certify", "--generator", "random", "--n", "1024", "--seed", "7", "--theta", PI8,
                 "--paper-variant", "--timing", "--out", str(out)]) == 0
    res = load(out)["result"]
    assert res["rho_variant"] > 0 and res["timing_ms"] > 0


def test_decay_default_sweep(tmp_path):
    out = tmp_path / "decay.csv"
    assert main(["decay", "--out", str(out)]) == 0
    lines = [l for l in out.read_text().splitlines() if not l.startswith("#")]
    cols = lines[0].split(",")
    assert cols[:4] == ["theta", "R", "xi1", "xi2"] and "ratio_sector" in cols
    rows = [dict(zip(cols, map(float, l.split(",")))) for l in lines[1:]]
    assert all(r["ratio_sector"] > 0 and r["ratio_global"] > 0 for r in rows)
    sector = [r["ratio_sector"] for r in rows if abs(r["arg"]) < math.pi / 16]
    assert max(sector) / min(sector) <= 50
    axis = [r["ratio_global"] for r in rows if r["arg"] == math.pi / 2]
    assert axis and min(axis) > 0


def test_decay_svg(tmp_path):
    out = tmp_path / "decay.svg"
    assert main(["decay", "--format", "svg", "--magnitudes", "4", "--out", str(out)]) == 0
    text = out.read_text()
    assert text.startswith("<svg") and "slope -3" in text and "slope -4" in text


def test_decay_workers_do_not_change_results():
    a = decay_sweep(0.3, 1 / 16, count=4, workers=1)
    b = decay_sweep(0.3, 1 / 16, count=4, workers=2)
    assert a == b


def test_scaling(tmp_path):
    out = tmp_path / "s.json"
    assert main(["scaling", "--generator", "random", "grid", "--n", "256", "512", "1024",
                 "--format", "json", "--out", str(out)]) == 0
    res = load(out)["result"]
    assert len(res["rows"]) == 6
    assert res["slopes"]["random"]["slope"] >= 0.3 and res["slopes"]["random"]["resolved"]
    assert main(["scaling", "--quantity", "extremal", "--n", "16", "32", "64", "--budget-grid", "8",
                 "--budget-rounds", "0", "--format", "svg", "--out", str(tmp_path / "s.svg")]) == 0


def test_generate_round_trip(tmp_path):
    out = tmp_path / "h.csv"
    assert main(["generate", "--generator", "halton", "--n", "5", "--out", str(out)]) == 0
    pts = [l for l in out.read_text().splitlines() if not l.startswith("#")]
    assert pts[1] == "0.5,0.3333333333333333"


def test_report_formatting():
    assert report.fmt_float(0.1) == "0.10000000000000001"
    assert report.fmt_float(2.0) == "2.0"
    assert float(report.fmt_float(math.pi)) == math.pi
    text = report.dumps({"a": [1, 2.5, None, True], "b": {}, "c": float("nan")})
    assert json.loads(text) == {"a": [1, 2.5, None, True], "b": {}, "c": None}
    doc = report.csv_document({"k": 1}, ["x", "y"], [{"x": 1.0, "y": "a,b"}])
    assert doc.splitlines()[1:] == ["x,y", '1.0,"a,b"']


def test_svg_plot():
    svg = loglog_svg({"s": ([1, 10, 100], [1, 0.1, 0.01]), "t": ([1, 2], [0, 3])}, "t", ref_slopes=(-1,))
    assert svg.count("<polyline") == 2 and svg.strip().endswith("</svg>")
    with pytest.raises(ValueError):
        loglog_svg({"z": ([1], [0])})
