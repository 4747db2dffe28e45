"""
Tests for the DFT, STFT and its adjoint
"""

import math
import os
import sys

import numpy as np
import pytest

# Add parent directory to path to import wfkit
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from wfkit.atoms import Atom, Signal, gaussian_window, gevrey_bump
from wfkit.errors import TransformError, WindowOverflowError
from wfkit.geometry import BoxGrid, make_pair
from wfkit.transform import (
    dft,
    fft_radix2,
    frequency_period,
    idft,
    signal_inner,
    stft,
    stft_adjoint,
    stft_decay_probe,
    stft_inner,
    stft_space_support,
)


GRID = BoxGrid(1, 1024, 8.0)
PAIR = make_pair(1.0, math.pi / 2, 1)
WINDOW = gevrey_bump(1.5, 1.0)
INV_SQRT_2PI = 1 / math.sqrt(2 * math.pi)


class TestRadix2:
    """Test the radix-2 kernel"""

    def test_matches_numpy(self):
        """Forward and inverse agree with numpy.fft"""
        rng = np.random.default_rng(0)
        x = rng.normal(size=512) + 1j * rng.normal(size=512)
        assert np.allclose(fft_radix2(x), np.fft.fft(x), atol=1e-10)
        assert np.allclose(fft_radix2(x, inverse=True), np.fft.ifft(x), atol=1e-12)

    def test_along_axis(self):
        """Transforms one axis of a 2D array"""
        rng = np.random.default_rng(1)
        x = rng.normal(size=(8, 16))
        assert np.allclose(fft_radix2(x, axis=0), np.fft.fft(x, axis=0))

    def test_non_power_of_two(self):
        """Lengths must be powers of two"""
        with pytest.raises(TransformError, match="power-of-two"):
            fft_radix2(np.ones(12))


class TestDft:
    """Test the sampled Fourier transform"""

    def test_constant_is_a_spike(self):
        """1 on the box → mass only at ξ = 0"""
        spectrum = dft(Signal(GRID, np.ones(GRID.shape, dtype=complex)))
        center = GRID.size // 2
        assert spectrum.values[center] == pytest.approx(2 * GRID.half_width * INV_SQRT_2PI)
        rest = np.delete(spectrum.values, center)
        assert np.max(np.abs(rest)) < 1e-10

    def test_delta_is_flat(self):
        """|δ̂| = (2π)^{−1/2} at every grid frequency"""
        spectrum = dft(Atom.delta(0.0), GRID)
        assert np.allclose(np.abs(spectrum.values), INV_SQRT_2PI, rtol=1e-12)

    def test_parseval(self):
        """‖f̂‖₂ = ‖f‖₂ within 1e-9"""
        signal = Atom.jump(0.0).samples(GRID)
        spectrum = dft(signal)
        assert abs(spectrum.norm2() - signal.norm2()) / signal.norm2() < 1e-9

    def test_gaussian_peak(self):
        """e^{−x²/2} maps to e^{−ξ²/2}"""
        signal = Signal(GRID, np.exp(-GRID.axis ** 2 / 2).astype(complex))
        spectrum = dft(signal)
        xi = spectrum.frequency_points()[:, 0]
        assert np.allclose(spectrum.values, np.exp(-xi ** 2 / 2), atol=1e-6)

    def test_inverse(self):
        """idft undoes dft"""
        signal = Atom.modulated(4.0, 0.7, 1.0).samples(GRID)
        assert np.allclose(idft(dft(signal)).values, signal.values, atol=1e-12)

    def test_values_at_grid_frequency(self):
        """Lookup at multiples of π/L only"""
        spectrum = dft(Atom.delta(0.0), GRID)
        assert spectrum.values_at(math.pi / 8) == pytest.approx(INV_SQRT_2PI)
        with pytest.raises(TransformError):
            spectrum.values_at(0.1)

    def test_sample_arrays_need_power_of_two(self):
        """Raw arrays must have power-of-two sizes"""
        with pytest.raises(TransformError):
            dft(np.ones(1000))


class TestFrequencyPeriod:
    """Test commensurability of the frequency step with the box"""

    def test_default_pair(self):
        """b = π/2 on h = 1/64 repeats every 256 samples"""
        assert frequency_period(GRID, math.pi / 2) == 256

    def test_incommensurate_step(self):
        """b = 1 does not divide the DFT grid"""
        with pytest.raises(TransformError, match="commensurate"):
            frequency_period(GRID, 1.0)


class TestStft:
    """Test STFT sampling on ε·Λ₁ × Λ₂"""

    def test_window_against_itself(self):
        """V_φφ(0, 0) = (2π)^{−1/2}‖φ‖₂²"""
        signal = Signal(GRID, WINDOW.evaluate(GRID.points()).astype(complex))
        V = stft(signal, WINDOW, PAIR, indices=[[0]])
        value = V.values[0, V.period // 2]
        assert value == pytest.approx(INV_SQRT_2PI * signal.norm2() ** 2, rel=1e-10)

    def test_delta(self):
        """V_φδ(x, ξ) = (2π)^{−1/2}·φ(−x)·e^{0}: modulus independent of ξ"""
        V = stft(Atom.delta(0.0), WINDOW, PAIR, grid=GRID)
        expected = INV_SQRT_2PI * np.abs(WINDOW.evaluate(-V.points))
        moduli = np.abs(V.values)
        assert np.allclose(moduli, expected[:, None], atol=1e-12)

    def test_delta_support(self):
        """Nothing outside |x| < 1 for a radius-one window"""
        pair = make_pair(0.25, math.pi / 2, 1)
        V = stft(Atom.delta(0.0), WINDOW, pair, grid=GRID)
        lo, hi = stft_space_support(V)
        assert lo[0] > -1.0 and hi[0] < 1.0

    def test_scale_range(self):
        """ε must lie in (0, 1]"""
        with pytest.raises(TransformError):
            stft(Atom.delta(0.0), WINDOW, PAIR, eps=1.5, grid=GRID)

    def test_window_overflow(self):
        """Error carries the required half-width"""
        atom = Atom.gevrey(2.0, 1.0, 6.8)
        with pytest.raises(WindowOverflowError) as excinfo:
            stft(atom, WINDOW, PAIR, grid=GRID)
        assert excinfo.value.required_half_width > GRID.half_width
        assert "half-width" in str(excinfo.value)

    def test_frequency_axis(self):
        """ξ_l = b·l for l = −P/2 … P/2−1"""
        V = stft(Atom.delta(0.0), WINDOW, PAIR, grid=GRID)
        assert V.frequency_axis[0] == pytest.approx(-128 * math.pi / 2)
        assert V.values.shape[1] == 256


class TestStftEdges:
    """Test windows that reach past the sample box"""

    def test_inside_box_is_exact(self):
        """Nothing dropped, truncated or aliased well inside the box"""
        V = stft(Atom.delta(0.0), WINDOW, PAIR, grid=GRID)
        assert V.exact
        assert V.dropped == 0 and V.covered

    def test_clip_keeps_covering_nodes(self):
        """Dropping a node leaves the columns of the kept nodes unchanged"""
        atom = Atom.gevrey(2.0, 0.3, 6.5)
        with pytest.raises(WindowOverflowError):
            stft(atom, WINDOW, PAIR, grid=GRID)
        V = stft(atom, WINDOW, PAIR, grid=GRID, clip=True)
        assert V.dropped == 1
        assert V.covered
        assert not V.exact
        assert V.indices.ravel().tolist() == [6]
        reference = stft(atom, WINDOW, PAIR, grid=GRID, indices=[[6]])
        assert np.allclose(V.values, reference.values)

    def test_clip_reports_lost_cover(self):
        """Kept windows that miss part of the signal are reported"""
        V = stft(Atom.gevrey(2.0, 1.0, 6.8), WINDOW, PAIR, grid=GRID, clip=True)
        assert V.dropped == 2
        assert not V.covered

    def test_edge_signal_truncated(self):
        """A signal touching the edge is flagged rather than rejected"""
        V = stft(np.ones(GRID.size), WINDOW, PAIR, grid=GRID)
        assert V.truncated
        assert not V.exact
        assert V.dropped == 0

    def test_wide_window_aliased(self):
        """Products wider than 2π/b wrap around and are flagged"""
        pair = make_pair(0.5, math.pi, 1)
        V = stft(Atom.gevrey(2.0, 1.5), gevrey_bump(1.5, 1.5), pair, grid=GRID)
        assert V.aliased
        assert not V.truncated
        assert not V.exact


class TestAdjoint:
    """Test the Riemann-sum adjoint"""

    def test_adjoint_identity(self):
        """⟨Vf, F⟩ = ⟨f, V*F⟩ within 1e-8"""
        signal = Atom.gevrey(2.0, 1.0, 0.3).samples(GRID)
        V = stft(signal, WINDOW, PAIR)
        rng = np.random.default_rng(2)
        F = V.with_values(rng.normal(size=V.values.shape) + 1j * rng.normal(size=V.values.shape))
        lhs = stft_inner(V, F)
        rhs = signal_inner(signal, stft_adjoint(F), GRID)
        assert abs(lhs - rhs) / abs(lhs) < 1e-8

    def test_zero(self):
        """V*0 = 0"""
        V = stft(Atom.delta(0.0), WINDOW, PAIR, grid=GRID)
        assert not np.any(stft_adjoint(V.with_values(np.zeros_like(V.values))))

    def test_shape_checked(self):
        """Replacement values must keep the shape"""
        V = stft(Atom.delta(0.0), WINDOW, PAIR, grid=GRID)
        with pytest.raises(TransformError):
            V.with_values(np.zeros((1, 1)))


class TestDecayProbe:
    """Test fitted decay rates"""

    def test_delta_is_flat_in_frequency(self):
        """eps_fit = 0 for δ with a Gevrey window"""
        probe = stft_decay_probe(Atom.delta(0.0), WINDOW, s=2.0, grid=GRID)
        assert abs(probe.eps_fit) < 1e-3

    def test_bump_decays_in_frequency(self):
        """Gevrey-2 bump under a Gaussian window decays in ξ"""
        probe = stft_decay_probe(Atom.gevrey(2.0, 1.0), gaussian_window(1.0), s=2.0, grid=GRID)
        assert probe.eps_fit < 0

    def test_vanishing_signal(self):
        """Zero samples have no dynamic range"""
        with pytest.raises(TransformError, match="dynamic range"):
            stft_decay_probe(np.zeros(1024), WINDOW, s=2.0, grid=GRID)


if __name__ == '__main__':
    pytest.main([__file__, '-v'])
