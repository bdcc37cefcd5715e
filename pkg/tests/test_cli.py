from __future__ import annotations

import io
import json
import xml.etree.ElementTree as ET

import pytest

from foldsaddle.cli import read_config, run


def call(*argv):
    out = io.StringIO()
    code = run(list(argv), out=out)
    text = out.getvalue()
    return code, (json.loads(text) if text.strip() else None)


def test_classify():
    code, payload = call("classify", "--tau", "inv", "--lambda", "-0.2", "--alpha", "-1", "--beta", "0.5")
    assert code == 0
    assert payload["case"] == "11_2" and payload["class"] == "11_1"
    assert payload["points"]["S"] == [0.0, -0.5]


@pytest.mark.parametrize(
    "argv",
    [
        ("classify", "--lambda", "2", "--alpha", "-1", "--beta", "0.5"),
        ("classify", "--lambda", "0", "--alpha", "0.5", "--beta", "0.5"),
        ("classify", "--lambda", "0", "--alpha", "-1"),
        ("nonsense",),
        ("diagram", "--alpha", "-1", "--csv", "a.csv", "--json", "a.json", "--lambda-range", "oops"),
    ],
)
def test_usage_errors_exit_2(argv, tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    code, _ = call(*argv)
    assert code == 2


def test_config_file_and_override(tmp_path):
    cfg = tmp_path / "point.cfg"
    cfg.write_text("# symmetric saddle\ntau = inv\nlambda = -0.2\nalpha = -1\nbeta = 0.5  # foot\n")
    assert read_config(cfg)[:2] == ["--tau", "inv"]
    code, payload = call("--config", str(cfg), "classify")
    assert code == 0 and payload["case"] == "11_2"
    code, payload = call("--config", str(cfg), "classify", "--lambda", "0.5")
    assert payload["lambda"] == 0.5 and payload["case"] == "20_2"


def test_bad_config_line(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("lambda -0.2\n")
    assert call("--config", str(cfg), "classify")[0] == 2


def test_portrait(tmp_path):
    svg = tmp_path / "p.svg"
    code, payload = call("portrait", "--lambda", "-0.1", "--alpha", "-0.6", "--beta", "0.4", "--out", str(svg),
                         "--fan", "5")
    assert code == 0 and payload["svg"] == str(svg)
    root = ET.parse(svg).getroot()
    ns = "{http://www.w3.org/2000/svg}"
    assert len([e for e in root.iter(f"{ns}line") if e.get("id") == "sigma"]) == 1
    names = {e.get("data-name") for e in root.iter(f"{ns}circle")}
    assert {"d", "S", "h", "j", "i"} <= names
    assert any("arc-sliding" in (e.get("class") or "") for e in root.iter(f"{ns}polyline"))


def test_diagram_round_trip(tmp_path):
    csv_path, json_path = tmp_path / "d.csv", tmp_path / "d.json"
    code, payload = call("diagram", "--alpha", "-1", "--resolution", "12x9", "--csv", str(csv_path),
                         "--json", str(json_path))
    assert code == 0
    lines = csv_path.read_text().splitlines()
    assert lines[0] == "lambda,beta,case,class" and len(lines) == 1 + 12 * 9
    summary = json.loads(json_path.read_text())
    assert summary["shape"] == [9, 12]
    assert sum(summary["histogram"].values()) == 108


def test_boundaries_and_cycles():
    code, payload = call("boundaries", "--alpha", "-1", "--beta", "0.5")
    assert code == 0
    assert payload["values"]["M3"] is None
    assert payload["fold_bracket"] == {"name": "M3", "lo": 0.0, "hi": pytest.approx(0.228714, abs=1e-6)}
    assert payload["values"]["M0"] == pytest.approx(-0.27128644612183095)
    code, payload = call("cycles", "--lambda", str(-0.5 + 11 * 6 ** 0.5 / 60), "--alpha", "-1", "--beta", "0.5")
    assert code == 0 and len(payload["cycles"]) == 1
    assert payload["cycles"][0]["stability"] == "repeller"


def test_sphere(tmp_path):
    csv_path = tmp_path / "s.csv"
    code, payload = call("sphere", "--tau", "vis", "--samples", "100", "--csv", str(csv_path))
    assert code == 0 and payload["samples"] >= 100
    assert csv_path.read_text().startswith("lambda,mu,beta,case,class,source")


def test_verify_invariants_pass():
    code, payload = call("verify", "--only", "invariants")
    assert code == 0 and payload["passed"]


def test_verify_reports_failures_with_exit_1():
    code, payload = call("verify", "--only", "acceptance")
    failed = {c["key"] for c in payload["checks"] if not c["passed"]}
    assert code == (1 if failed else 0)


def test_fold_saddle_portrait(tmp_path):
    svg = tmp_path / "fs.svg"
    code, _ = call("portrait", "--lambda", "0", "--alpha", "-1", "--beta", "0", "--out", str(svg), "--fan", "5")
    assert code == 0
    ET.parse(svg)


def test_symmetric_sweep_contains_single_cycle_case(tmp_path):
    code, payload = call("diagram", "--alpha", "-1", "--resolution", "60x30", "--csv", str(tmp_path / "a.csv"),
                         "--json", str(tmp_path / "a.json"))
    assert code == 0 and "13_2" in payload["histogram"]


def test_runs_are_deterministic(tmp_path):
    outs = []
    for k in range(2):
        svg = tmp_path / f"p{k}.svg"
        call("portrait", "--lambda", "-0.1", "--alpha", "-0.6", "--beta", "0.4", "--out", str(svg), "--fan", "4")
        outs.append(svg.read_bytes())
    assert outs[0] == outs[1]
