"""
Tests for the polar SVG plots
"""

import os
import sys
import xml.etree.ElementTree as ET

import pytest

# Add parent directory to path to import wfkit_cli
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from wfkit.geometry import Cone, ConeCover
from wfkit.wavefront import CellVerdict, WavefrontReport
from wfkit_cli.svg import COLORS, pick_detector, render_polar

SVG = "{http://www.w3.org/2000/svg}"


def make_report(cover, verdicts, ks=(0.5,), detector="WF_FL"):
    cells = []
    for point, by_cone in verdicts.items():
        for k in ks:
            for cone_id, classification in by_cone.items():
                cells.append(CellVerdict(point, cone_id, detector, k, 2.0, classification, 0.0))
    return WavefrontReport("test", {}, {"q": 2.0, "cover": cover.to_dict()}, cells)


class TestRenderPolar:
    """Test the rose layout and colors"""

    def test_valid_svg(self):
        """Parses as SVG 1.1"""
        report = make_report(ConeCover.uniform(1), {(0.0,): {"+": "singular", "-": "regular"}})
        root = ET.fromstring(render_polar(report).split("\n", 1)[1])
        assert root.tag == f"{SVG}svg"
        assert root.get("version") == "1.1"

    def test_one_sector_per_cone_and_panel(self):
        """points × k × cones sectors"""
        cover = ConeCover.uniform(2, 8)
        verdicts = {(0.0, 0.0): {c.cone_id: "regular" for c in cover.cones},
                    (1.0, 0.0): {c.cone_id: "singular" for c in cover.cones}}
        report = make_report(cover, verdicts, ks=(0.5, 1.0))
        root = ET.fromstring(render_polar(report).split("\n", 1)[1])
        assert len(root.findall(f"{SVG}path")) == 2 * 2 * 8

    def test_colors(self):
        """Red singular, green regular, gray when missing"""
        report = make_report(ConeCover.uniform(1), {(0.0,): {"+": "singular"}})
        svg = render_polar(report)
        assert svg.count(f'fill="{COLORS["singular"]}" fill-opacity') == 1
        assert svg.count(f'fill="{COLORS["indeterminate"]}" fill-opacity') == 1
        assert COLORS == {"singular": "#d62728", "regular": "#2ca02c", "indeterminate": "#7f7f7f"}

    def test_full_cone_is_a_disc(self):
        """Half-angle π draws a circle"""
        cover = ConeCover((Cone.full(2),))
        report = make_report(cover, {(0.0, 0.0): {cover.cones[0].cone_id: "regular"}})
        svg = render_polar(report)
        assert "<path" not in svg
        assert f'fill="{COLORS["regular"]}" fill-opacity' in svg

    def test_deterministic(self):
        report = make_report(ConeCover.uniform(1), {(0.0,): {"+": "singular", "-": "regular"}})
        assert render_polar(report) == render_polar(report)

    def test_labels_escaped(self):
        """Atom ids with markup characters stay well-formed"""
        report = make_report(ConeCover.uniform(1), {(0.0,): {"+": "singular"}})
        report.atom_id = "sum:[delta,jump]<&>"
        ET.fromstring(render_polar(report).split("\n", 1)[1])


class TestPickDetector:
    """Test the plotted detector"""

    def test_prefers_fourier_lebesgue(self):
        report = make_report(ConeCover.uniform(1), {(0.0,): {"+": "singular"}})
        assert pick_detector(report) == "WF_FL"

    def test_falls_back(self):
        report = make_report(ConeCover.uniform(1), {(0.0,): {"+": "singular"}}, detector="DF_Gabor")
        assert pick_detector(report) == "DF_Gabor"
        assert "DF_Gabor verdicts" in render_polar(report)


if __name__ == '__main__':
    pytest.main([__file__, '-v'])
