"""
Tests for the wave-front detectors, the WF_s estimate and the cross-checker
"""

import math
import os
import sys
from pathlib import Path
from unittest.mock import patch

import pytest

# Add parent directory to path to import wfkit
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from wfkit.atoms import Atom, corpus, gaussian_window, gevrey_bump
from wfkit.config import configure, reset_settings
from wfkit.errors import InvalidLatticePairError, WavefrontError
from wfkit.gabor import build_gabor_system
from wfkit.geometry import BoxGrid, ConeCover, make_pair
from wfkit.io import dumps_json
from wfkit.wavefront import (
    AnalysisParameters,
    CellVerdict,
    MicrolocalEntry,
    WavefrontReport,
    analyze,
    crosscheck,
    default_cutoffs,
    detect_df_fl,
    detect_df_gabor,
    detect_wf_fl,
    detect_wf_mod,
    estimate_wf_s,
    ground_truth_check,
)
from wfkit.weights import Weight


GRID = BoxGrid(1, 1024, 8.0)
PAIR = make_pair(1.0, math.pi / 2, 1)
RAYS = ConeCover.uniform(1)
W = Weight.subexponential(0.5, 2.0)
PARAMS = AnalysisParameters(grid=GRID, k_grid=(0.5,), threads=1)
GRID_2D = BoxGrid(2, 256, 4.0)
PARAMS_2D = AnalysisParameters(grid=GRID_2D, k_grid=(0.5,), microlocality=False, threads=1)


def classes(cells):
    return {c.cone_id: c.classification for c in cells}


@pytest.fixture(scope="module")
def jump_report():
    """Full analysis of the jump at its edge and away from it"""
    return analyze(Atom.jump(0.0), [0.0, 3.0], PARAMS)


class TestAnalysisParameters:
    """Test validation and defaults"""

    def test_k_grid_must_increase(self):
        """k values are positive and increasing"""
        with pytest.raises(WavefrontError):
            AnalysisParameters(k_grid=(1.0, 0.5))
        with pytest.raises(WavefrontError):
            AnalysisParameters(k_grid=(0.0, 1.0))

    def test_unknown_detector(self):
        """Only the four detectors exist"""
        with pytest.raises(WavefrontError, match="unknown detectors"):
            AnalysisParameters(detectors=("WF_FL", "WF_Tor"))

    def test_eps_range(self):
        """ε values lie in (0, 1]"""
        with pytest.raises(WavefrontError):
            AnalysisParameters(eps_list=(1.0, 2.0))

    def test_resolved_1d(self):
        """Two rays, a = 1, b = π/2 and four cutoffs"""
        params = AnalysisParameters(grid=GRID).resolved(1)
        assert params.s == 2.0
        assert [c.cone_id for c in params.cover.cones] == ["+", "-"]
        assert params.pair.steps == pytest.approx((1.0, math.pi / 2))
        assert len(params.cutoffs) == 4
        assert params.R_max == 128.0

    def test_default_cutoffs(self):
        """Radii {0.45a, 0.3a} × orders {1+(s−1)/2, 1+(s−1)/4}"""
        cutoffs = default_cutoffs(PAIR, 2.0, 1)
        assert [c.support_radius for c in cutoffs] == pytest.approx([0.45, 0.45, 0.3, 0.3])
        assert [c.order for c in cutoffs] == pytest.approx([1.5, 1.25, 1.5, 1.25])
        assert all(c.evaluate(0.0)[0] > 0 for c in cutoffs)

    def test_to_dict(self):
        """Resolved parameters serialize"""
        data = AnalysisParameters(grid=GRID).resolved(1).to_dict()
        assert data["k_grid"] == [0.5, 1.0, 2.0, 4.0]
        assert data["grid"] == {"dim": 1, "size": 1024, "half_width": 8.0}

    def test_resolved_2d_cover(self):
        """Sixteen overlapping sectors in the plane"""
        params = AnalysisParameters(grid=GRID_2D).resolved(2)
        assert len(params.cover.cones) == 16
        assert params.cover.covers()
        assert params.R_max == 64.0

    def test_truncation_radius_capped(self):
        """Default R_max never exceeds the frequency cap"""
        with patch("wfkit.config.SETTINGS_FILE", Path("/nonexistent/wfkit/settings.json")):
            reset_settings()
            try:
                configure(frequency_cap=50.0)
                assert AnalysisParameters(grid=GRID).resolved(1).R_max == 50.0
                assert AnalysisParameters(grid=GRID, R_max=32.0).resolved(1).R_max == 32.0
            finally:
                reset_settings()


class TestFourierLebesgueDetector:
    """Test WF_FL verdicts"""

    def test_delta(self):
        """δ is singular in every direction at its point"""
        cells = detect_wf_fl(Atom.delta(0.0), 0.0, RAYS, W, params=PARAMS)
        assert classes(cells) == {"+": "singular", "-": "singular"}

    def test_jump(self):
        """Singular at the jump, regular away from it"""
        at_jump = detect_wf_fl(Atom.jump(0.0), 0.0, RAYS, W, params=PARAMS)
        away = detect_wf_fl(Atom.jump(0.0), 3.0, RAYS, W, params=PARAMS)
        assert classes(at_jump) == {"+": "singular", "-": "singular"}
        assert classes(away) == {"+": "regular", "-": "regular"}

    def test_smooth_bump_at_larger_s(self):
        """Gevrey-2 bump has an empty 3-wave-front set"""
        params = AnalysisParameters(grid=GRID, s=3.0, k_grid=(0.5,), threads=1)
        w = Weight.subexponential(0.5, 3.0)
        for x0 in (0.0, 1.0):
            cells = detect_wf_fl(Atom.gevrey(2.0, 1.0), x0, RAYS, w, params=params)
            assert classes(cells) == {"+": "regular", "-": "regular"}

    def test_single_cutoff(self):
        """An explicit cutoff replaces the default family"""
        cut = gevrey_bump(1.5, 0.3, normalize=False)
        cells = detect_wf_fl(Atom.jump(0.0), 0.0, RAYS, W, cutoff=cut, params=PARAMS)
        assert list(cells[0].diagnostics["slopes"]) == [cut.window_id]


class TestModulationDetector:
    """Test WF_Mod verdicts"""

    def test_jump(self):
        """Same verdicts as WF_FL"""
        at_jump = detect_wf_mod(Atom.jump(0.0), 0.0, RAYS, W, params=PARAMS)
        away = detect_wf_mod(Atom.jump(0.0), 3.0, RAYS, W, params=PARAMS)
        assert classes(at_jump) == {"+": "singular", "-": "singular"}
        assert classes(away) == {"+": "regular", "-": "regular"}

    def test_p_independence(self):
        """Verdicts do not depend on p"""
        for x0 in (0.0, 3.0):
            verdicts = [classes(detect_wf_mod(Atom.jump(0.0), x0, RAYS, W, p=p, params=PARAMS))
                        for p in (1.0, 2.0, math.inf)]
            assert verdicts[0] == verdicts[1] == verdicts[2]

    def test_window_independence(self):
        """Gaussian and Gevrey windows agree on decided cells"""
        gevrey = detect_wf_mod(Atom.jump(0.0), 0.0, RAYS, W, params=PARAMS)
        gauss = detect_wf_mod(Atom.jump(0.0), 0.0, RAYS, W, window=gaussian_window(0.5), params=PARAMS)
        for a, b in zip(gevrey, gauss):
            if "indeterminate" not in (a.classification, b.classification):
                assert a.classification == b.classification


class TestDiscreteDetectors:
    """Test DF_FL and DF_Gabor verdicts"""

    def test_df_fl_jump(self):
        """Lattice sums see the jump"""
        at_jump = detect_df_fl(Atom.jump(0.0), 0.0, RAYS, W, params=PARAMS)
        away = detect_df_fl(Atom.jump(0.0), 3.0, RAYS, W, params=PARAMS)
        assert classes(at_jump) == {"+": "singular", "-": "singular"}
        assert classes(away) == {"+": "regular", "-": "regular"}

    def test_df_fl_lattice_density(self):
        """b = π/2 and b = π/4 give the same verdicts"""
        for x0 in (0.0, 3.0):
            coarse = detect_df_fl(Atom.jump(0.0), x0, RAYS, W, pair=make_pair(1.0, math.pi / 2, 1),
                                  params=PARAMS)
            fine = detect_df_fl(Atom.jump(0.0), x0, RAYS, W, pair=make_pair(1.0, math.pi / 4, 1),
                                params=PARAMS)
            assert classes(coarse) == classes(fine)

    def test_df_fl_zero_near_point(self):
        """f ≡ 0 around x₀ is regular"""
        cells = detect_df_fl(Atom.gevrey(2.0, 1.0, 4.0), 0.0, RAYS, W, params=PARAMS)
        assert classes(cells) == {"+": "regular", "-": "regular"}

    def test_df_fl_needs_strong_pair(self):
        """ab = 2π is rejected"""
        with pytest.raises(InvalidLatticePairError):
            detect_df_fl(Atom.jump(0.0), 0.0, RAYS, W, pair=make_pair(1.0, 2 * math.pi, 1), params=PARAMS)

    def test_df_fl_lattice_diagnostic(self):
        """x₀ ∉ Λ₁ is recorded"""
        on = detect_df_fl(Atom.jump(0.0), 0.0, RAYS, W, params=PARAMS)
        off = detect_df_fl(Atom.jump(0.0), 0.5, RAYS, W, params=PARAMS)
        assert on[0].diagnostics["avoids_lattice"] is False
        assert off[0].diagnostics["avoids_lattice"] is True

    def test_df_gabor_delta(self):
        """Singular at the point, regular outside every window support"""
        at_point = detect_df_gabor(Atom.delta(0.0), 0.0, RAYS, W, params=PARAMS)
        away = detect_df_gabor(Atom.delta(0.0), 3.0, RAYS, W, params=PARAMS)
        assert classes(at_point) == {"+": "singular", "-": "singular"}
        assert classes(away) == {"+": "regular", "-": "regular"}

    def test_df_gabor_eps_robust(self):
        """ε = 1 and ε = ½ agree on the jump"""
        base = build_gabor_system(gevrey_bump(1.5, 1.0), PAIR, 1.0, GRID)
        for x0 in (0.0, 3.0):
            one = detect_df_gabor(Atom.jump(0.0), x0, RAYS, W, sys=base, params=PARAMS)
            half = detect_df_gabor(Atom.jump(0.0), x0, RAYS, W, sys=base.at_scale(0.5), params=PARAMS)
            assert classes(one) == classes(half)
            assert list(half[0].diagnostics["slopes"]) == ["eps=0.5"]


class TestEstimate:
    """Test the intersection over k"""

    def test_bump_boundary_below_order(self):
        """s < σ: the boundary of a Gevrey-2 bump is in the estimate"""
        cells = estimate_wf_s(Atom.gevrey(2.0, 1.0), 1.0, RAYS, s=1.2, k_grid=(0.5,),
                              params=AnalysisParameters(grid=GRID, threads=1))
        plus = {c.cone_id: c for c in cells}["+"]
        assert plus.classification == "singular"
        assert plus.detector == "WF_s"

    def test_bump_above_order(self):
        """s ≥ σ: empty estimate"""
        cells = estimate_wf_s(Atom.gevrey(2.0, 1.0), 1.0, RAYS, s=3.0, k_grid=(0.5,),
                              params=AnalysisParameters(grid=GRID, threads=1))
        assert classes(cells) == {"+": "regular", "-": "regular"}
        assert "decay_exponent" in cells[0].diagnostics

    def test_per_k_diagnostics(self):
        """Each k verdict is kept"""
        cells = estimate_wf_s(Atom.jump(0.0), 0.0, RAYS, k_grid=(0.5, 1.0), params=PARAMS)
        assert set(cells[0].diagnostics["per_k"]) == {"0.5", "1"}
        assert cells[0].classification == "singular"


class TestAnalyze:
    """Test complete reports"""

    def test_every_cell_has_four_detectors(self, jump_report):
        """Same (point, cone, k, q) for all detectors"""
        keys = {}
        for cell in jump_report.cells:
            if cell.detector != "WF_s":
                keys.setdefault(cell.key, set()).add(cell.detector)
        assert len(keys) == 4
        assert all(v == {"WF_FL", "WF_Mod", "DF_FL", "DF_Gabor"} for v in keys.values())

    def test_four_way_agreement(self, jump_report):
        """All detectors agree on decided cells"""
        summary = crosscheck(jump_report)
        assert summary.passed
        assert summary.agreement["WF_FL"]["DF_Gabor"] in (None, 1.0)

    def test_matches_ground_truth(self, jump_report):
        """Singular at the jump only"""
        assert ground_truth_check(jump_report, Atom.jump(0.0)) == []

    def test_microlocality(self, jump_report):
        """One entry per cutoff, cone and k"""
        assert len(jump_report.microlocal) == 2 * 4 * 2
        assert all(not (m.localized == "singular" and m.parent == "regular") for m in jump_report.microlocal)

    def test_deterministic(self, jump_report):
        """Thread count does not change the report"""
        again = analyze(Atom.jump(0.0), [0.0, 3.0], AnalysisParameters(grid=GRID, k_grid=(0.5,), threads=4))
        assert dumps_json(again.to_dict()) == dumps_json(jump_report.to_dict())

    def test_q_grid(self):
        """Extra WF_FL cells for every q without q violations"""
        params = AnalysisParameters(grid=GRID, k_grid=(0.5,), q_grid=(1.0, 2.0, math.inf),
                                    detectors=("WF_FL",), microlocality=False, threads=1)
        report = analyze(Atom.jump(0.0), [0.0], params)
        assert sorted({c.q for c in report.cells_for("WF_FL")}) == [1.0, 2.0, math.inf]
        assert crosscheck(report).q_violations == []

    def test_round_trip(self, jump_report):
        """JSON form restores the report"""
        restored = WavefrontReport.from_dict(jump_report.to_dict())
        assert restored.cells == jump_report.cells
        assert restored.microlocal == jump_report.microlocal
        assert restored.points == [(0.0,), (3.0,)]

    def test_unknown_schema(self, jump_report):
        """Reports of another schema are rejected"""
        data = jump_report.to_dict()
        data["schema"] = "wfreport/0"
        with pytest.raises(WavefrontError, match="schema"):
            WavefrontReport.from_dict(data)

    def test_csv_rows(self, jump_report):
        """Header plus one row per cell"""
        rows = jump_report.to_csv_rows()
        assert rows[0][:3] == ["point", "cone_id", "detector"]
        assert len(rows) == len(jump_report.cells) + 1


CORPUS_POINTS = {
    "delta": [0.0, 2.0],
    "jump": [0.0, 3.0],
    "gevrey_bump": [0.0, 3.0],
    "modulated_bump": [0.0, 3.0],
    "sum": [-3.0, 2.0, 0.0],
}


class TestCorpusAgreement:
    """Test the one-dimensional corpus on and off its singular support"""

    @pytest.mark.parametrize("name", sorted(CORPUS_POINTS))
    def test_agreement_and_ground_truth(self, name):
        """Detectors agree and match the known wave-front set"""
        atom = corpus()[name]
        report = analyze(atom, CORPUS_POINTS[name], AnalysisParameters(grid=GRID, k_grid=(0.5,),
                                                                       microlocality=False, threads=1))
        assert crosscheck(report).passed
        assert ground_truth_check(report, atom) == []


EDGE_POINTS = [(0.0, 0.0), (1.0, 0.0), (2.0, 0.0), (0.0, 1.0), (0.0, -1.5)]


@pytest.fixture(scope="module")
def edge_report():
    """Half-plane analysis on its edge and off it, away from the origin"""
    return analyze(corpus()["half_plane"], EDGE_POINTS, PARAMS_2D)


def normal_cones():
    cones = PARAMS_2D.resolved(2).cover.cones
    return {c.cone_id for c in cones if abs(abs(c.axis[1]) - 1.0) < 1e-12}


class TestAnalyzePlane:
    """Test the half-plane on the default planar box"""

    def test_every_point_analyzed(self, edge_report):
        """Windows reaching past the box do not abort the analysis"""
        for detector in ("WF_FL", "WF_Mod", "DF_FL", "DF_Gabor"):
            cells = edge_report.cells_for(detector)
            assert len(cells) == len(EDGE_POINTS) * 16
            assert {c.point for c in cells} == set(EDGE_POINTS)

    def test_clipped_windows_flagged(self, edge_report):
        """WF_Mod marks cells whose STFT dropped nodes outside the box"""
        cells = [c for c in edge_report.cells_for("WF_Mod") if c.point == (2.0, 0.0)]
        assert cells
        assert all(c.diagnostics["flagged"] for c in cells)

    def test_edge_normal_singular(self, edge_report):
        """Every detector sees the edge in the normal cones"""
        normals = normal_cones()
        assert len(normals) == 2
        for point in ((0.0, 0.0), (1.0, 0.0), (2.0, 0.0)):
            for cell in edge_report.cells:
                if cell.point == point and cell.cone_id in normals and cell.detector != "WF_s":
                    assert cell.classification == "singular", (point, cell.cone_id, cell.detector)

    def test_off_edge_regular(self, edge_report):
        """Above the edge and in the empty half-plane nothing is singular"""
        for cell in edge_report.cells:
            if cell.point in ((0.0, 1.0), (0.0, -1.5)):
                assert cell.classification != "singular", (cell.point, cell.cone_id, cell.detector)
        assert all(c.classification == "regular" for c in edge_report.cells_for("WF_FL")
                   if c.point in ((0.0, 1.0), (0.0, -1.5)))

    def test_matches_ground_truth(self, edge_report):
        """Cones well away from the normal are regular everywhere"""
        assert ground_truth_check(edge_report, corpus()["half_plane"], resolution=math.pi / 4) == []


def cell(detector, classification, k=0.5, point=(0.0,)):
    return CellVerdict(point, "+", detector, k, 2.0, classification, 0.0)


class TestCrosscheck:
    """Test violation bookkeeping on hand-made reports"""

    def test_empty_report(self):
        """Nothing to check passes vacuously"""
        summary = crosscheck(WavefrontReport("empty", {}, {}))
        assert summary.passed
        assert summary.total_cells == 0
        assert not summary.all_indeterminate

    def test_disagreement(self):
        """Conflicting decided verdicts are reported"""
        report = WavefrontReport("made", {}, {}, [cell("WF_FL", "singular"), cell("WF_Mod", "regular")])
        summary = crosscheck(report)
        assert not summary.passed
        assert summary.disagreements[0]["verdicts"] == {"WF_FL": "singular", "WF_Mod": "regular"}
        assert summary.agreement["WF_FL"]["WF_Mod"] == 0.0

    def test_indeterminate_not_scored(self):
        """Indeterminate cells are listed, not counted against agreement"""
        report = WavefrontReport("made", {}, {}, [cell("WF_FL", "singular"), cell("WF_Mod", "indeterminate")])
        summary = crosscheck(report)
        assert summary.passed
        assert len(summary.indeterminate) == 1
        assert summary.agreement["WF_FL"]["WF_Mod"] is None

    def test_k_violation(self):
        """Regular after singular as k grows"""
        report = WavefrontReport("made", {}, {}, [cell("WF_FL", "singular", 0.5), cell("WF_FL", "regular", 1.0)])
        assert len(crosscheck(report).k_violations) == 2

    def test_q_violation(self):
        """Singular at larger q while regular at smaller q"""
        big = CellVerdict((0.0,), "+", "WF_FL", 0.5, 4.0, "singular", 1.0)
        small = CellVerdict((0.0,), "+", "WF_FL", 0.5, 1.0, "regular", -1.0)
        assert len(crosscheck(WavefrontReport("made", {}, {}, [big, small])).q_violations) == 1

    def test_microlocal_violation(self):
        """Localized singular where the atom is regular"""
        entry = MicrolocalEntry((0.0,), "+", 0.5, 2.0, "g", "regular", "singular", -1.0, 1.0)
        report = WavefrontReport("made", {}, {}, [], [entry])
        summary = crosscheck(report)
        assert len(summary.microlocal_violations) == 1
        assert not summary.passed

    def test_ground_truth_mismatch(self):
        """A regular verdict at the jump contradicts the known set"""
        report = WavefrontReport("made", {}, {"s": 2.0}, [cell("WF_FL", "regular")])
        mismatches = ground_truth_check(report, Atom.jump(0.0), cover=RAYS)
        assert mismatches[0]["expected"] == "singular"


if __name__ == '__main__':
    pytest.main([__file__, '-v'])
