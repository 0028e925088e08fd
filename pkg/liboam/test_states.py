"Test the states module: transfer, projections and ring patterns"
import math
import unittest

import numpy as np

from liboam import fields, states
from liboam.exceptions import (
    DegenerateTransferError, DomainError, OrthogonalProjectionError,
    UndefinedOrientationError)

SQRT_HALF = math.sqrt(0.5)


def projector(label):
    return states.PolarizationProjector.from_label(label)


class TestProjectors(unittest.TestCase):

    def test_labels(self):
        self.assertEqual(projector('D').partner().label, 'A')
        self.assertEqual(projector('R').partner().label, 'L')
        self.assertAlmostEqual(projector('D').overlap(projector('A')), 0.0)
        self.assertAlmostEqual(
            abs(projector('R').overlap(projector('D'))) ** 2, 0.5)
        with self.assertRaises(DomainError):
            projector('X')

    def test_from_waveplates(self):
        self.assertEqual(states.PolarizationProjector.from_waveplates(
            0.0, 0.0).label, 'H')
        self.assertEqual(states.PolarizationProjector.from_waveplates(
            math.radians(22.5), math.radians(45)).label, 'D')
        self.assertEqual(states.PolarizationProjector.from_config(
            {'hwp': '45 deg', 'qwp': '0 deg'}).label, 'V')
        odd = states.PolarizationProjector.from_waveplates(
            math.radians(10), 0.0)
        self.assertTrue(odd.label.startswith('HWP10.00'))


class TestTransfer(unittest.TestCase):

    def test_diagonal_input_is_maximally_entangled(self):
        state = states.transfer('D', 10, 10000)
        self.assertEqual(state.l, 10010)
        self.assertAlmostEqual(state.a, SQRT_HALF)
        self.assertAlmostEqual(state.b, SQRT_HALF)
        self.assertAlmostEqual(state.phi_rel, 0.0)
        self.assertFalse(state.is_product)

    def test_circular_input_sets_phase(self):
        self.assertAlmostEqual(states.transfer('R', 500).phi_rel, math.pi / 2)
        self.assertAlmostEqual(states.transfer('L', 500).phi_rel,
                               -math.pi / 2)

    def test_linear_input_is_product(self):
        self.assertTrue(states.transfer('H', 100).is_product)

    def test_degenerate_and_negative(self):
        with self.assertRaises(DegenerateTransferError):
            states.transfer('D', 5, -5)
        with self.assertRaises(DomainError):
            states.transfer('D', 5, -10)

    def test_state_validation(self):
        with self.assertRaises(DomainError):
            states.HybridState(0.5, 0.5, 0.0, 10)
        with self.assertRaises(DomainError):
            states.HybridState(SQRT_HALF, SQRT_HALF, 0.0, 0)
        state = states.HybridState.from_config({'l': 8, 'a': 1, 'b': 1})
        self.assertAlmostEqual(state.a, SQRT_HALF)


class TestConditionalModes(unittest.TestCase):

    def test_diagonal_projection(self):
        state = states.HybridState.maximally_entangled(500)
        mode, probability = states.conditional_mode(state, projector('D'))
        self.assertAlmostEqual(probability, 0.5)
        self.assertAlmostEqual(mode.contrast, 1.0)
        self.assertAlmostEqual(states.pattern_orientation(mode), 0.0)

    def test_orientation_for_pi_phase(self):
        state = states.HybridState.maximally_entangled(500, phi_rel=math.pi)
        mode, _ = states.conditional_mode(state, projector('D'))
        self.assertAlmostEqual(states.pattern_orientation(mode), 0.18)

    def test_orientation_law(self):
        for charge in (10, 500, 10010):
            period = 180.0 / charge
            for step in range(16):
                theta = 2 * math.pi * step / 16
                mode = states.RingMode.superposition(charge, theta)
                expected = math.degrees(theta / (2 * charge)) % period
                error = abs(states.pattern_orientation(mode) - expected)
                self.assertLess(min(error, period - error), 0.01 * period)

    def test_basis_shifts(self):
        state = states.HybridState.maximally_entangled(1000)
        period = 180.0 / 1000
        for label, shift in (('A', 0.5), ('R', 0.75), ('L', 0.25)):
            mode, _ = states.conditional_mode(state, projector(label))
            self.assertAlmostEqual(states.pattern_orientation(mode),
                                   shift * period)

    def test_orthogonal_projection(self):
        state = states.transfer('H', 10)
        with self.assertRaises(OrthogonalProjectionError):
            states.conditional_mode(state, projector('V'))
        mode, _ = states.conditional_mode(state, projector('D'))
        with self.assertRaises(UndefinedOrientationError):
            states.pattern_orientation(mode)

    def test_mixture_has_no_fringes(self):
        mixture = states.StateMixture.classically_correlated(10)
        modes = states.conditional_modes(mixture, projector('D'))
        self.assertEqual(len(modes), 2)
        self.assertAlmostEqual(sum(p for p, _ in modes), 0.5)
        for _, mode in modes:
            self.assertAlmostEqual(mode.contrast, 0.0)
        self.assertEqual(
            len(states.conditional_modes(mixture, projector('H'))), 1)

    def test_mixture_validation(self):
        with self.assertRaises(DomainError):
            states.StateMixture(())
        with self.assertRaises(DomainError):
            states.StateMixture(
                ((1, states.HybridState.maximally_entangled(10)),
                 (1, states.HybridState.maximally_entangled(20))))


class TestRingPatterns(unittest.TestCase):

    def test_maxima_count(self):
        mode = states.RingMode.superposition(8)
        theta, values = states.sample_ring(mode, 1024)
        self.assertEqual(len(theta), 1024)
        self.assertAlmostEqual(values.max(), 2.0)
        self.assertAlmostEqual(values.mean(), 1.0)

    def test_max_to_min_rotation(self):
        for charge in (1, 10, 100, 1000, 10000):
            degrees = math.degrees(states.max_to_min_rotation(charge))
            self.assertTrue(math.isclose(degrees, 180.0 / charge,
                                         rel_tol=1e-9))

    def test_rotation_fringe(self):
        state = states.HybridState.maximally_entangled(1000)
        alpha = np.array([0.0, math.pi / 1000, 2 * math.pi / 1000])
        fringe = states.rotation_fringe(state, alpha)
        self.assertTrue(np.allclose(fringe, [2.0, 0.0, 2.0]))
        self.assertTrue(np.allclose(
            states.rotation_fringe(state, alpha, l=500),
            [2.0, 1.0 + math.cos(math.pi / 2), 0.0]))

    def test_rotated_mode_matches_fringe(self):
        mode = states.RingMode.superposition(50, 0.3)
        theta = np.linspace(0, 0.1, 7)
        for alpha in (0.0, 0.01, 0.2):
            self.assertTrue(np.allclose(
                states.ring_intensity(states.rotated_mode(mode, alpha),
                                      theta),
                states.rotation_fringe(mode, alpha, theta_fixed=theta)))

    def test_grid_model_matches_ring(self):
        grid = fields.GridSpec.square(256, 10e-6, 810e-9)
        mode = states.RingMode.superposition(3, 1.0)
        field = states.superposition_field(mode, grid, 400e-6)
        image = fields.intensity(field)
        radius = fields.peak_ring_radius(image, grid)
        profile = fields.azimuthal_profile(image, grid, radius, 720)
        theta = 2 * math.pi * np.arange(720) / 720
        correlation = np.corrcoef(
            profile, states.ring_intensity(mode, theta))[0, 1]
        self.assertGreater(correlation, 0.999)


if __name__ == '__main__':
    unittest.main()
