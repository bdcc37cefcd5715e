"""SVG portraits and CSV/JSON tables."""
from __future__ import annotations

import csv
import json
import xml.etree.ElementTree as ET
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..bifurcation import CaseLabel, Diagram, SphereSample, topological_class
from ..family import FilippovSystem, TauKind, key_points
from ..flow import ArcSide, Trajectory, arc_points, integrate
from ..structures import find_canard_cycles

__all__ = [
    "PortraitStyle",
    "emit_portrait",
    "emit_tables",
    "read_table",
    "emit_sphere",
    "fmt",
]

SVG_NS = "http://www.w3.org/2000/svg"


def fmt(value: float) -> str:
    """Shortest decimal that round-trips to the same float."""
    return repr(float(value))


@dataclass(frozen=True)
class PortraitStyle:
    width: int = 640
    height: int = 640
    fan: int = 13
    max_time: float = 20.0
    max_arcs: int = 60


class _Canvas:
    """Window-to-viewBox map with the vertical axis flipped."""

    def __init__(self, system: FilippovSystem, style: PortraitStyle):
        self.w = system.window
        self.style = style

    def __call__(self, x: float, y: float) -> tuple[float, float]:
        sx = (x - self.w.xmin) / (self.w.xmax - self.w.xmin) * self.style.width
        sy = (self.w.ymax - y) / (self.w.ymax - self.w.ymin) * self.style.height
        return sx, sy

    def path(self, pts: np.ndarray) -> str:
        coords = [self(float(x), float(y)) for x, y in pts if np.isfinite(x) and np.isfinite(y)]
        return " ".join(f"{a:.3f},{b:.3f}" for a, b in coords)


def _line(parent, canvas, p, q, **attrs):
    (x1, y1), (x2, y2) = canvas(*p), canvas(*q)
    return ET.SubElement(parent, "line", x1=f"{x1:.3f}", y1=f"{y1:.3f}", x2=f"{x2:.3f}",
                         y2=f"{y2:.3f}", **attrs)


def _yf_locus(system: FilippovSystem) -> list[tuple[float, float]] | None:
    """Segment of ``Y.f = 0`` clipped to the window."""
    w, a, b = system.window, system.alpha, system.beta
    if a == -1.0:
        return [(0.0, w.ymin), (0.0, w.ymax)] if w.xmin <= 0.0 <= w.xmax else None
    slope = (1.0 - a) / (1.0 + a)
    xs = np.linspace(w.xmin, w.xmax, 401)
    ys = slope * xs - b
    keep = (ys >= w.ymin) & (ys <= w.ymax)
    if keep.sum() < 2:
        return None
    return [(float(xs[keep][0]), float(ys[keep][0])), (float(xs[keep][-1]), float(ys[keep][-1]))]


def _fan_starts(system: FilippovSystem, n: int) -> list[tuple[float, float]]:
    w = system.window
    xs = np.linspace(w.xmin, w.xmax, n + 2)[1:-1]
    starts = [(float(x), 0.0) for x in xs]
    starts += [(float(x), 0.5 * w.ymin) for x in xs[:: max(n // 4, 1)]]
    starts += [(float(x), 0.5 * w.ymax) for x in xs[:: max(n // 4, 1)]]
    return starts


def _draw_trajectory(group, canvas, system, traj: Trajectory, cls: str) -> None:
    for arc in traj.arcs:
        pts = arc_points(system, arc, 96)
        attrs = {"class": f"{cls} arc-{arc.side.value}", "fill": "none", "stroke": "#1f4e79",
                 "stroke-width": "1"}
        if arc.side is ArcSide.SLIDING:
            attrs.update({"stroke": "#b22222", "stroke-width": "3"})
        ET.SubElement(group, "polyline", points=canvas.path(pts), **attrs)


def emit_portrait(system: FilippovSystem, path, style: PortraitStyle | None = None) -> Path:
    """Write an SVG 1.1 phase portrait and return its path.

    The drawing contains the switching line (one element with id ``sigma``),
    dotted tangency loci, the named points, a fan of trajectories with
    sliding pieces drawn bold, and any canard cycles.
    """
    style = style or PortraitStyle()
    canvas = _Canvas(system, style)
    w = system.window
    ET.register_namespace("", SVG_NS)
    root = ET.Element("svg", xmlns=SVG_NS, version="1.1", width=str(style.width),
                      height=str(style.height), viewBox=f"0 0 {style.width} {style.height}")
    p = system.params
    ET.SubElement(root, "title").text = (
        f"tau={p.tau.value} lambda={fmt(p.lam)} alpha={fmt(p.alpha)} beta={fmt(p.beta)}"
    )
    ET.SubElement(root, "rect", x="0", y="0", width=str(style.width), height=str(style.height),
                  fill="white")
    loci = ET.SubElement(root, "g", id="loci", stroke="#777777", fill="none")
    dots = {"stroke-dasharray": "3,4", "stroke-width": "1"}
    for x in (system.lam, system.secondary_fold):
        if x is not None and w.xmin <= x <= w.xmax:
            _line(loci, canvas, (x, w.ymin), (x, w.ymax), **{"class": "locus-xf", **dots})
    seg = _yf_locus(system)
    if seg is not None:
        _line(loci, canvas, seg[0], seg[1], **{"class": "locus-yf", **dots})
    _line(root, canvas, (w.xmin, 0.0), (w.xmax, 0.0), id="sigma", stroke="black",
          **{"stroke-width": "2", "class": "sigma"})
    fan = ET.SubElement(root, "g", id="trajectories")
    for start in _fan_starts(system, style.fan):
        try:
            traj = integrate(system, start, style.max_time, max_arcs=style.max_arcs)
        except (ValueError, RuntimeError):
            continue
        _draw_trajectory(fan, canvas, system, traj, "orbit")
    if system.tau is TauKind.INV and system.beta > 0:
        group = ET.SubElement(root, "g", id="cycles")
        for cyc in find_canard_cycles(system):
            traj = integrate(system, (cyc.fixed_abscissa, 0.0), 100.0, max_arcs=4)
            sub = ET.SubElement(group, "g", **{"class": "cycle", "data-x": fmt(cyc.fixed_abscissa),
                                               "data-stability": cyc.stability.value})
            _draw_trajectory(sub, canvas, system, traj, "cycle-arc")
            for el in sub:
                el.set("stroke", "#2e8b57")
                el.set("stroke-width", "2.5")
    pts = ET.SubElement(root, "g", id="key-points")
    for name, (x, y) in key_points(system).as_dict().items():
        if not w.contains(x, y):
            continue
        cx, cy = canvas(x, y)
        ET.SubElement(pts, "circle", id=f"pt-{name}", cx=f"{cx:.3f}", cy=f"{cy:.3f}", r="4",
                      fill="black", **{"class": "key-point", "data-name": name})
        ET.SubElement(pts, "text", x=f"{cx + 6:.3f}", y=f"{cy - 6:.3f}",
                      **{"font-size": "14", "font-family": "serif"}).text = name
    path = Path(path)
    ET.ElementTree(root).write(path, encoding="utf-8", xml_declaration=True)
    return path


def emit_tables(diagram: Diagram, csv_path, json_path) -> tuple[Path, Path]:
    """CSV of every cell (row-major, ``beta`` rows) and a JSON summary."""
    csv_path, json_path = Path(csv_path), Path(json_path)
    with csv_path.open("w", newline="", encoding="utf-8") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(["lambda", "beta", "case", "class"])
        for r, b in enumerate(diagram.betas):
            for c, lam in enumerate(diagram.lambdas):
                out.writerow([fmt(lam), fmt(b), diagram.labels[r, c], diagram.classes[r, c]])
    rows = []
    for bd in diagram.rows:
        rows.append({
            "beta": bd.beta,
            "regime": bd.regime.name,
            "values": {n: v for n, v in bd.values},
            "printed": bd.printed,
            "notes": list(bd.notes),
        })
    summary = {
        "tau": diagram.tau.value,
        "alpha": diagram.alpha,
        "regimes": diagram.regime_name(),
        "shape": [len(diagram.betas), len(diagram.lambdas)],
        "histogram": diagram.histogram(),
        "generic_labels": sorted(diagram.generic_labels(), key=lambda s: CaseLabel.parse(s)),
        "boundaries": rows,
    }
    json_path.write_text(json.dumps(summary, indent=2), encoding="utf-8")
    return csv_path, json_path


def read_table(csv_path) -> list[dict]:
    """Rows of a CSV written by :func:`emit_tables` with numbers parsed."""
    with Path(csv_path).open(newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    for row in rows:
        row["lambda"] = float(row["lambda"])
        row["beta"] = float(row["beta"])
    return rows


def emit_sphere(samples: list[SphereSample], csv_path) -> Path:
    csv_path = Path(csv_path)
    with csv_path.open("w", newline="", encoding="utf-8") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(["lambda", "mu", "beta", "case", "class", "source"])
        for s in samples:
            lam, mu, beta = s.point
            out.writerow([fmt(lam), fmt(mu), fmt(beta), str(s.label),
                          str(topological_class(s.label)), s.source])
    return csv_path
