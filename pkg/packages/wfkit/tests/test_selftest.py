"""
Tests for the invariant suite
"""

import os
import sys

import pytest

# Add parent directory to path to import wfkit
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from wfkit.errors import WavefrontError
from wfkit.selftest import CHECKS, FAULTS, run_selftest


class TestRegistry:
    """Test check and fault registration"""

    def test_checks_registered(self):
        """Ten checks in a fixed order"""
        assert list(CHECKS) == [
            "fft", "parseval", "adjoint", "delta_stft", "lattice", "frames",
            "normalization", "moderation", "beurling_domar", "agreement",
        ]

    def test_faults_name_their_check(self):
        """Every fault belongs to a registered check"""
        assert set(FAULTS.values()) <= set(CHECKS)
        assert FAULTS["flip_verdict"] == "agreement"


class TestRunSelftest:
    """Test running the suite"""

    def test_all_pass(self):
        """A healthy build passes every check"""
        results = run_selftest()
        failed = [r.name for r in results if not r.passed]
        assert failed == []
        assert all(r.seconds >= 0 for r in results)

    def test_selection(self):
        """Only the named checks run"""
        results = run_selftest(["fft", "lattice"])
        assert [r.name for r in results] == ["fft", "lattice"]

    @pytest.mark.parametrize("fault", sorted(FAULTS))
    def test_fault_is_caught(self, fault):
        """Each injected fault fails its check"""
        (result,) = run_selftest([FAULTS[fault]], fault=fault)
        assert not result.passed

    def test_empty_selection(self):
        """Nothing to run is an error"""
        with pytest.raises(WavefrontError, match="empty"):
            run_selftest([])

    def test_unknown_check(self):
        """Names must be registered"""
        with pytest.raises(WavefrontError, match="unknown self-test checks"):
            run_selftest(["fft", "speed"])

    def test_unknown_fault(self):
        """Faults must be registered"""
        with pytest.raises(WavefrontError, match="unknown fault"):
            run_selftest(["fft"], fault="cosmic_ray")

    def test_result_dict(self):
        """Results serialize for --format json"""
        data = run_selftest(["lattice"])[0].to_dict()
        assert set(data) == {"name", "passed", "value", "bound", "detail", "seconds"}


if __name__ == '__main__':
    pytest.main([__file__, '-v'])
