"""
Tests for windows, atoms and their Fourier oracles
"""

import math
import os
import sys

import numpy as np
import pytest
from scipy import integrate

# Add parent directory to path to import wfkit
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from wfkit.atoms import (
    Atom,
    Signal,
    Window,
    corpus,
    expected_singular,
    fourier_oracle,
    fourier_quadrature,
    gaussian_window,
    gevrey_bump,
    gevrey_constants,
    ground_truth_wf,
    make_atom,
    plateau,
    tight_window,
)
from wfkit.errors import AtomError, OracleUnavailableError
from wfkit.geometry import BoxGrid, Cone, Lattice
from wfkit.transform import dft


SMALL_GRID = BoxGrid(1, 1024, 8.0)


class TestGevreyBump:
    """Test compactly supported Gevrey windows"""

    def test_support(self):
        """Positive inside the ball, zero outside"""
        phi = gevrey_bump(2.0, 1.0)
        assert phi.evaluate(0.0)[0] > 0
        assert np.all(phi.evaluate([[1.0], [-1.0], [1.5], [-3.0]]) == 0.0)

    def test_value_at_center(self):
        """Unnormalized bump equals e^{−1} at the centre"""
        assert gevrey_bump(2.0, 1.0, normalize=False).evaluate(0.0)[0] == pytest.approx(math.exp(-1.0))

    def test_normalized_integral(self):
        """∫φ = 1 within 1e-10"""
        phi = gevrey_bump(2.0, 1.0)
        value, _ = integrate.quad(lambda t: float(phi.evaluate(t)[0]), -1.0, 1.0, epsabs=1e-13, limit=400)
        assert value == pytest.approx(1.0, abs=1e-10)

    def test_quasi_analytic_rejected(self):
        """σ ≤ 1 has no compactly supported members"""
        with pytest.raises(AtomError, match="quasi-analytic"):
            gevrey_bump(1.0)

    def test_derivative_constants(self):
        """Spectral derivative bounds give finite Gevrey constants"""
        phi = gevrey_bump(2.0, 1.0)
        C, A = gevrey_constants(phi)
        assert C == pytest.approx(float(phi.evaluate(0.0)[0]), rel=1e-6)
        assert 0 < A < math.inf

    def test_scaled(self):
        """φ(·/ε) shrinks the support"""
        phi = gevrey_bump(2.0, 1.0).scaled(0.5)
        assert phi.support_radius == 0.5
        assert phi.evaluate(0.6)[0] == 0.0

    def test_round_trip(self):
        """JSON form restores the window"""
        phi = gevrey_bump(1.5, 2.0, 2)
        restored = Window.from_dict(phi.to_dict())
        assert restored.window_id == phi.window_id
        assert restored.amplitude == pytest.approx(phi.amplitude)


class TestOtherWindows:
    """Test Gaussian, plateau and tight partition windows"""

    def test_gaussian(self):
        """exp(−|x|²/(2w²))"""
        g = gaussian_window(2.0)
        assert g.evaluate(2.0)[0] == pytest.approx(math.exp(-0.5))
        assert not g.is_compact

    def test_plateau(self):
        """One on the inner ball, zero beyond the outer"""
        cut = plateau(0.5, 1.0)
        assert np.allclose(cut.evaluate([[0.0], [0.3], [0.5]]), 1.0)
        assert np.all(cut.evaluate([[1.0], [1.4]]) == 0.0)
        assert 0 < cut.evaluate(0.75)[0] < 1

    def test_tight_partition(self):
        """Squared translates of a tight window sum to one"""
        lattice = Lattice.scaled_integers(1.0, 1)
        psi = tight_window(gevrey_bump(2.0, 1.0), lattice)
        y = np.linspace(0.0, 1.0, 201)[:, None]
        total = sum(psi.evaluate(y - n) ** 2 for n in range(-3, 4))
        assert np.allclose(total, 1.0, atol=1e-10)

    def test_tight_partition_needs_compact_base(self):
        """Gaussian bases are rejected"""
        with pytest.raises(AtomError):
            tight_window(gaussian_window(1.0), Lattice.scaled_integers(1.0, 1))


class TestFourierOracle:
    """Test closed-form and quadrature transforms"""

    def test_delta_at_origin(self):
        """δ̂ = (2π)^{−d/2}"""
        assert Atom.delta(0.0).fourier(3.7) == pytest.approx(1 / math.sqrt(2 * math.pi))
        assert Atom.delta((0.0, 0.0), 2).fourier((1.0, 2.0)) == pytest.approx(1 / (2 * math.pi))

    def test_delta_translation(self):
        """δ_{x₀} picks up e^{−i⟨x₀,ξ⟩}"""
        value = Atom.delta(1.5).fourier(2.0)
        assert value == pytest.approx(np.exp(-3j) / math.sqrt(2 * math.pi))

    def test_jump_decays_like_one_over_xi(self):
        """|f̂(ξ)|·|ξ| is nearly constant on [10², 10³]"""
        xi = np.linspace(100.0, 1000.0, 50)
        products = np.abs(Atom.jump(0.0).fourier(xi[:, None])) * xi
        assert np.max(products) / np.min(products) < 1.05
        assert products[-1] == pytest.approx(1 / math.sqrt(2 * math.pi), rel=1e-3)

    def test_samples_match_oracle(self):
        """DFT of samples agrees with the closed form"""
        atom = Atom.modulated(8.0, 1.0)
        spectrum = dft(atom, SMALL_GRID)
        oracle = atom.fourier(spectrum.frequency_points())
        error = np.max(np.abs(spectrum.values.reshape(-1) - oracle)) / np.max(np.abs(oracle))
        assert error < 1e-3

    def test_bump_has_no_closed_form(self):
        """Gevrey bumps fall back to quadrature"""
        atom = Atom.gevrey(2.0, 1.0)
        with pytest.raises(OracleUnavailableError):
            atom.fourier(1.0)
        assert fourier_oracle(atom, 0.0) == pytest.approx(1 / math.sqrt(2 * math.pi), rel=1e-8)

    def test_quadrature_error_bound(self):
        """Quadrature reports a small error bound"""
        value, error = fourier_quadrature(Atom.gevrey(2.0, 1.0), 5.0)
        assert error < 1e-10
        assert abs(value) < 1 / math.sqrt(2 * math.pi)


class TestAtoms:
    """Test sampling, catalog and ground truth"""

    def test_delta_samples(self):
        """Mass 1/h at the nearest node"""
        signal = Atom.delta(0.0).samples(SMALL_GRID)
        assert np.count_nonzero(signal.values) == 1
        assert np.sum(signal.values) * SMALL_GRID.spacing == pytest.approx(1.0)

    def test_localized_samples(self):
        """f·g(·−x₀) pointwise"""
        atom = Atom.jump(0.0)
        cut = gevrey_bump(2.0, 0.5, normalize=False)
        local = atom.localize(cut, 0.25).samples(SMALL_GRID)
        expected = atom.samples(SMALL_GRID).values * cut.evaluate(SMALL_GRID.points() - 0.25)
        assert np.allclose(local.values, expected)
        assert local.support_box()[1][0] < 0.75

    def test_signal_shape_checked(self):
        """Samples must match the grid"""
        with pytest.raises(AtomError):
            Signal(SMALL_GRID, np.zeros(512))

    def test_make_atom_sum(self):
        """sum:[...] builds a sum atom"""
        atom = make_atom("sum:[delta,jump]")
        assert atom.kind == "sum"
        assert [t.kind for t in atom.terms] == ["delta", "jump"]

    def test_make_atom_parameters(self):
        """Parameter objects are validated"""
        atom = make_atom({"name": "gevrey_bump", "order": 1.5, "radius": 2.0, "center": 1.0})
        assert (atom.order, atom.radius, atom.center) == (1.5, 2.0, (1.0,))
        with pytest.raises(AtomError, match="unknown parameters"):
            make_atom({"name": "jump", "slope": 1})
        with pytest.raises(AtomError, match="unknown atom"):
            make_atom("cusp")

    def test_corpus(self):
        """Six reference atoms"""
        atoms = corpus()
        assert sorted(atoms) == ["delta", "gevrey_bump", "half_plane", "jump", "modulated_bump", "sum"]
        assert atoms["half_plane"].dim == 2

    def test_ground_truth(self):
        """Known wave-front sets of the corpus"""
        assert ground_truth_wf(Atom.delta(0.0)) == [((0.0,), "all")]
        assert ground_truth_wf(Atom.gevrey(2.0, 1.0), s=3.0) == []
        assert len(ground_truth_wf(Atom.gevrey(2.0, 1.0), s=1.5)) == 1

    def test_expected_singular_half_plane(self):
        """Edge of a half-plane is singular along ±n only"""
        atom = Atom.half_plane((0.0, 1.0))
        up = Cone((0.0, 1.0), math.pi / 8)
        side = Cone((1.0, 0.0), math.pi / 8)
        assert expected_singular(atom, (1.0, 0.0), up)
        assert expected_singular(atom, (1.0, 0.0), Cone((0.0, -1.0), math.pi / 8))
        assert not expected_singular(atom, (1.0, 0.0), side)
        assert not expected_singular(atom, (1.0, 1.0), up)

    def test_expected_singular_bump_boundary(self):
        """Gevrey bump singular on its boundary for s < σ, radially"""
        atom = Atom.gevrey(2.0, 1.0)
        assert expected_singular(atom, 1.0, Cone((1.0,), math.pi / 2), s=1.5)
        assert not expected_singular(atom, 1.0, Cone((1.0,), math.pi / 2), s=3.0)
        assert not expected_singular(atom, 0.0, Cone((1.0,), math.pi / 2), s=1.5)


if __name__ == '__main__':
    pytest.main([__file__, '-v'])
