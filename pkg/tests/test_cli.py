import csv
import io
import math
import re
import subprocess
import sys
import xml.etree.ElementTree as ET
from pathlib import Path

import numpy as np
import pytest

from pwhs import cli
from pwhs.complexfield import Linear
from pwhs.cycles import linear_cycle, pole_cycle
from pwhs.flow import IntegratorOptions, integrate
from pwhs.switching import VERTICAL, PWSystem

SCEN = Path(__file__).resolve().parents[1] / "scenarios"

TASK_OF = {
    "case1_classify": "classify",
    "linear_cycle": "cycle",
    "rational_cycle": "cycle",
    "homoclinic_pole_n1": "homoclinic",
    "homoclinic_power_n4": "homoclinic",
    "regularize_power": "regularize",
}


def _task(path: Path) -> str:
    stem = path.stem
    if stem in TASK_OF:
        return TASK_OF[stem]
    return "cycle"


def _read_csv(text: str):
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(io.StringIO("\n".join(lines))))


def test_classify_case1(tmp_path):
    out = tmp_path / "c.csv"
    assert cli.main(["classify", str(SCEN / "case1_classify.ini"), "--out", str(out)]) == 0
    rows = _read_csv(out.read_text())
    segs = [(float(r["lo"]), float(r["hi"]), r["class"]) for r in rows if r["record"] == "segment"]
    tang = [float(r["lo"]) for r in rows if r["record"] == "tangency"]
    # crossing below the fold, attracting sliding above it
    assert segs == [(-3.0, 0.0, "Sewing"), (0.0, 3.0, "SlidingAttract")]
    assert len(tang) == 1 and abs(tang[0]) < 1e-12


def test_cycle_summary_for_linear_example(tmp_path, capsys):
    out = tmp_path / "cyc.csv"
    assert cli.main(["cycle", str(SCEN / "linear_cycle.ini"), "--out", str(out)]) == 0
    summary = capsys.readouterr().out
    assert "stability=stable" in summary
    w0 = float(re.search(r"w0=(\S+)", summary).group(1))
    res = linear_cycle(-1, 1, -1, 1, -1)
    assert w0 == res.w0
    assert out.read_text().startswith("# fixed_point=")


def test_cycle_summary_for_square_example(tmp_path, capsys):
    # z^2 above, a=-1, b=1, d=1, z0=i
    assert cli.main(["cycle", str(SCEN / "zn_cycle_n2.ini"), "--out", str(tmp_path / "z.csv")]) == 0
    summary = capsys.readouterr().out
    assert "stability=stable" in summary
    ea = math.exp(-math.pi)
    assert float(re.search(r"w0=(\S+)", summary).group(1)) == pytest.approx((1 + ea) / (1 - ea), rel=1e-14)


def test_malformed_scenario_exits_2(capsys):
    assert cli.main(["classify", str(SCEN / "bad_power.ini"), "--out", "-"]) == 2
    assert "Power needs n" in capsys.readouterr().err


def test_missing_task_section_exits_2(capsys):
    assert cli.main(["portrait", str(SCEN / "linear_cycle.ini")]) == 2
    assert "[portrait]" in capsys.readouterr().err


def test_numerical_failure_exits_3(tmp_path, capsys):
    p = tmp_path / "s.ini"
    # the rational cycle sits below 0.11, so the displacement keeps one sign on this bracket
    text = (SCEN / "rational_cycle.ini").read_text().replace("lo = 1/20", "lo = 0.11").replace("hi = 13/100", "hi = 0.13")
    p.write_text(text)
    assert cli.main(["cycle", str(p), "--out", str(tmp_path / "o.csv")]) == 3
    assert "NoSignChange" in capsys.readouterr().err


def test_unreadable_scenario_exits_1(tmp_path):
    assert cli.main(["classify", str(tmp_path / "nope.ini")]) == 1


def test_parsers():
    assert cli.parse_real("1/20") == 0.05
    assert cli.parse_real("-2.5e-3") == -2.5e-3
    assert cli.parse_complex("2+2j") == 2 + 2j
    assert cli.parse_complex("-0.2j") == -0.2j
    with pytest.raises(Exception):
        cli.parse_int("2.5")


@pytest.mark.parametrize("name", ["case1_classify", "linear_cycle", "pole_cycle_n2"])
def test_deterministic_output(tmp_path, name):
    a, b = tmp_path / "a", tmp_path / "b"
    task = _task(SCEN / f"{name}.ini")
    assert cli.main([task, str(SCEN / f"{name}.ini"), "--out", str(a)]) == 0
    assert cli.main([task, str(SCEN / f"{name}.ini"), "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_portrait_deterministic_with_workers(tmp_path, monkeypatch):
    outs = []
    for threads in ("1", "3"):
        monkeypatch.setenv("PWHS_THREADS", threads)
        o = tmp_path / f"p{threads}.csv"
        assert cli.main(["portrait", str(SCEN / "case1_classify.ini"), "--out", str(o)]) == 0
        outs.append(o.read_bytes())
    assert outs[0] == outs[1]


def test_csv_round_trip(tmp_path):
    system = PWSystem(Linear(0, 1, 0j), Linear(0, 1, 0j), VERTICAL)
    tr = integrate(system, 1 + 0j, IntegratorOptions(t_max=3.0))
    out = tmp_path / "r.csv"
    cli.export_portrait([tr], None, "csv", str(out))
    rows = [r for r in _read_csv(out.read_text()) if r["record"] == "sample"]
    assert len(rows) == len(tr.samples)
    for r, s in zip(rows, tr.samples):
        assert float(r["t"]) == s.t
        assert complex(float(r["x"]), float(r["y"])) == s.z


def _polylines(svg_text):
    root = ET.fromstring(svg_text)
    return [el for el in root.iter() if el.tag.endswith("polyline")]


def _points(el):
    return np.array([[float(v) for v in p.split(",")] for p in el.get("points").split()])


def test_svg_single_circle(tmp_path):
    system = PWSystem(Linear(0, 1, 0j), Linear(0, 1, 0j), VERTICAL)
    tr = integrate(system, 1 + 0j, IntegratorOptions(t_max=2 * math.pi))
    text = cli.export_portrait([tr], None, "svg", str(tmp_path / "c.svg"))
    lines = _polylines(text)
    assert len(lines) == 1
    pts = _points(lines[0])
    assert np.linalg.norm(pts[0] - pts[-1]) < 1e-3 * np.ptp(pts[:, 0])


def test_svg_pole_cycle_closes(tmp_path):
    out = tmp_path / "p.svg"
    assert cli.main(["cycle", str(SCEN / "pole_cycle_n2.ini"), "--out", str(out)]) == 0
    res = pole_cycle(2, 0, -1, -1, 0.5, 1)
    assert res.closure < 1e-6
    lines = _polylines(out.read_text())
    assert len(lines) == 1
    assert 'stroke="#' in out.read_text()


def test_svg_colors_region_classes(tmp_path):
    out = tmp_path / "c.svg"
    assert cli.main(["classify", str(SCEN / "case1_classify.ini"), "--out", str(out), "--format", "svg"]) == 0
    text = out.read_text()
    assert "#1f77b4" in text and "#d62728" in text and "#ff7f0e" in text  # sewing, attracting, tangency
    root = ET.fromstring(text)
    assert float(root.get("width")) > 0 and float(root.get("height")) > 0


def test_export_rejects_empty(tmp_path):
    from pwhs.errors import ValidationError

    with pytest.raises(ValidationError):
        cli.export_portrait([], None, "csv", str(tmp_path / "x.csv"))


@pytest.mark.parametrize(
    "path", sorted(p for p in SCEN.glob("*.ini") if p.stem != "bad_power"), ids=lambda p: p.stem
)
def test_every_scenario_regenerates(tmp_path, path):
    out = tmp_path / ("o." + ("svg" if "format = svg" in path.read_text() else "csv"))
    assert cli.main([_task(path), str(path), "--out", str(out)]) == 0
    assert out.stat().st_size > 0


def test_console_script_entry_point(tmp_path):
    r = subprocess.run(
        [sys.executable, "-m", "pwhs.cli", "classify", str(SCEN / "case1_classify.ini"), "--out", "-"],
        capture_output=True, text=True,
    )
    assert r.returncode == 0
    assert r.stdout.splitlines()[0] == "record,lo,hi,class"
