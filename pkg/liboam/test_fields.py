"Test the fields module: grids, beams, sampling guards and propagation"
import math
import unittest

import numpy as np

from liboam import fields
from liboam.exceptions import DomainError, SamplingError

WAVELENGTH = 810e-9


def vortex(charge):
    return lambda x, y: charge * np.arctan2(y, x)


class TestGridSpec(unittest.TestCase):

    def test_coordinates(self):
        grid = fields.GridSpec.square(64, 1e-5, WAVELENGTH)
        self.assertEqual(grid.shape, (64, 64))
        self.assertEqual(grid.x[32], 0.0)
        ix, iy = grid.to_index(0.0, 0.0)
        self.assertEqual((ix, iy), (32.0, 32.0))
        self.assertAlmostEqual(grid.inscribed_radius(), 31e-5)
        self.assertTrue(grid.contains(0.0, 0.0))
        self.assertFalse(grid.contains(1.0, 0.0))

    def test_invalid_grids(self):
        with self.assertRaises(DomainError):
            fields.GridSpec(1, 64, 1e-5, 1e-5, WAVELENGTH)
        with self.assertRaises(DomainError):
            fields.GridSpec(64, 64, 0.0, 1e-5, WAVELENGTH)
        with self.assertRaises(DomainError):
            fields.GridSpec(64, 64, 1e-5, 1e-5, -1.0)


class TestBeams(unittest.TestCase):

    def setUp(self):
        self.grid = fields.GridSpec.square(128, 10e-6, WAVELENGTH)

    def test_gaussian_unit_power(self):
        beam = fields.gaussian_beam(self.grid, 200e-6)
        self.assertAlmostEqual(beam.power(), 1.0)
        self.assertAlmostEqual(fields.second_moment_radius(beam), 200e-6,
                               delta=2e-6)

    def test_waist_guards(self):
        with self.assertRaises(SamplingError):
            fields.gaussian_beam(self.grid, 20e-6)
        with self.assertRaises(DomainError):
            fields.gaussian_beam(self.grid, -1.0)
        with self.assertRaises(DomainError):
            fields.gaussian_beam(self.grid, 200e-6, center=(1.0, 0.0))

    def test_laguerre_gaussian_ring(self):
        waist = 160e-6
        beam = fields.laguerre_gaussian_beam(self.grid, waist, 4)
        self.assertAlmostEqual(beam.power(), 1.0)
        radius = fields.peak_ring_radius(fields.intensity(beam), self.grid)
        self.assertAlmostEqual(radius, waist * math.sqrt(2), delta=1.5e-5)
        self.assertLess(beam.aliased_fraction, 1e-6)

    def test_field_arithmetic(self):
        beam = fields.gaussian_beam(self.grid, 200e-6)
        double = beam + beam
        self.assertAlmostEqual(double.power(), 4.0)
        self.assertAlmostEqual((0.5j * beam).power(), 0.25)
        other = fields.gaussian_beam(
            fields.GridSpec.square(64, 10e-6, WAVELENGTH), 100e-6)
        with self.assertRaises(DomainError):
            beam + other


class TestSampling(unittest.TestCase):

    def test_low_charge_is_resolved(self):
        grid = fields.GridSpec.square(128, 10e-6, WAVELENGTH)
        beam = fields.apply_phase(fields.gaussian_beam(grid, 300e-6),
                                  vortex(3))
        self.assertLess(beam.aliased_fraction, fields.ALIAS_POWER_TOLERANCE)
        self.assertIs(fields.check_sampling(beam), beam)

    def test_high_charge_names_grid_size(self):
        grid = fields.GridSpec.square(64, 50e-6, WAVELENGTH)
        beam = fields.apply_phase(fields.gaussian_beam(grid, 800e-6),
                                  vortex(500))
        self.assertGreater(beam.aliased_fraction, 0.5)
        with self.assertRaises(SamplingError) as ctx:
            fields.propagate(beam, 0.1)
        size = ctx.exception.suggested_size
        self.assertGreater(size, 64)
        self.assertEqual(size & (size - 1), 0)
        self.assertIn("grid of at least", str(ctx.exception))

    def test_suggested_grid_size(self):
        self.assertEqual(fields.suggested_grid_size(512, 0.5), 512)
        self.assertEqual(fields.suggested_grid_size(512, 3.0), 2048)

    def test_supersampled_vortex_keeps_power(self):
        grid = fields.GridSpec.square(128, 10e-6, WAVELENGTH)
        beam = fields.gaussian_beam(grid, 300e-6)
        masked = fields.apply_phase(beam, vortex(8),
                                    supersample=fields.SUPERSAMPLE)
        self.assertAlmostEqual(masked.power(), 1.0, places=12)
        for supersample in (0, 1.5):
            with self.assertRaises(DomainError):
                fields.apply_phase(beam, vortex(8), supersample=supersample)

    def test_singular_samples_do_not_block_propagation(self):
        grid = fields.GridSpec.square(128, 10e-6, WAVELENGTH)
        steps = fields.local_phase_step(vortex(8), grid)
        self.assertGreaterEqual(steps[65, 64], math.pi)
        beam = fields.apply_phase(fields.gaussian_beam(grid, 300e-6),
                                  vortex(8), supersample=fields.SUPERSAMPLE)
        self.assertGreater(beam.aliased_fraction, 0.0)
        self.assertIs(fields.check_sampling(beam), beam)

    def test_ramp_resets_are_not_steps(self):
        grid = fields.GridSpec.square(64, 10e-6, WAVELENGTH)
        steps = fields.local_phase_step(
            lambda x, y: np.mod(1e4 * x, 2 * math.pi), grid)
        self.assertTrue(np.allclose(steps, 0.1, atol=1e-6))


class TestPropagation(unittest.TestCase):

    def setUp(self):
        self.grid = fields.GridSpec.square(256, 10e-6, WAVELENGTH)
        self.waist = 200e-6
        self.beam = fields.gaussian_beam(self.grid, self.waist)

    def test_zero_and_negative_distance(self):
        same = fields.propagate(self.beam, 0.0)
        self.assertTrue(np.array_equal(same.amplitudes, self.beam.amplitudes))
        self.assertIsNot(same.amplitudes, self.beam.amplitudes)
        with self.assertRaises(DomainError):
            fields.propagate(self.beam, -0.1)

    def test_gaussian_spreads_by_root_two_at_rayleigh_range(self):
        rayleigh = math.pi * self.waist ** 2 / WAVELENGTH
        far = fields.propagate(self.beam, rayleigh)
        self.assertAlmostEqual(far.power(), 1.0, places=6)
        self.assertAlmostEqual(fields.second_moment_radius(far) / self.waist,
                               math.sqrt(2), delta=0.01)

    def test_propagation_is_linear(self):
        other = fields.gaussian_beam(self.grid, self.waist,
                                     center=(150e-6, -100e-6))
        mixed = fields.propagate(0.6 * self.beam + 0.8j * other, 0.05)
        parts = (0.6 * fields.propagate(self.beam, 0.05)
                 + 0.8j * fields.propagate(other, 0.05))
        scale = np.abs(parts.amplitudes).max()
        self.assertLess(
            np.abs(mixed.amplitudes - parts.amplitudes).max() / scale, 1e-9)

    def test_propagation_conserves_power(self):
        for distance in (0.01, 0.1, 0.5):
            self.assertAlmostEqual(
                fields.propagate(self.beam, distance).power(), 1.0, delta=1e-6)

    def test_wide_gaussian_second_moment(self):
        grid = fields.GridSpec.square(1024, 100e-6, WAVELENGTH)
        waist = 12.7e-3
        beam = fields.gaussian_beam(grid, waist)
        self.assertAlmostEqual(fields.second_moment_radius(beam) / waist,
                               1.0, delta=0.005)
        rayleigh = math.pi * waist ** 2 / WAVELENGTH
        spread = waist * math.sqrt(1 + (1.0 / rayleigh) ** 2)
        self.assertAlmostEqual(
            fields.second_moment_radius(fields.propagate(beam, 1.0)) / spread,
            1.0, delta=0.005)

    def test_far_field_conserves_power(self):
        lens_plane = fields.far_field(self.beam, 0.5, pad=2)
        self.assertEqual(lens_plane.grid.shape, (512, 512))
        self.assertAlmostEqual(lens_plane.grid.dx,
                               WAVELENGTH * 0.5 / (512 * 10e-6))
        self.assertAlmostEqual(lens_plane.power(), 1.0, places=6)
        with self.assertRaises(DomainError):
            fields.far_field(self.beam, 0.5, pad=0)

    def test_vortex_has_dark_core(self):
        grid = fields.GridSpec.square(256, 50e-6, WAVELENGTH)
        for charge in (1, 8):
            beam = fields.apply_phase(fields.gaussian_beam(grid, 2e-3),
                                      vortex(charge),
                                      supersample=fields.SUPERSAMPLE)
            image = fields.intensity(fields.far_field(beam, 0.5))
            self.assertLess(image[128, 128] / image.max(), 1e-6)


class TestProfiles(unittest.TestCase):

    def setUp(self):
        self.grid = fields.GridSpec.square(128, 10e-6, WAVELENGTH)

    def test_symmetric_ring_profile_is_flat(self):
        image = fields.intensity(fields.gaussian_beam(self.grid, 300e-6))
        profile = fields.azimuthal_profile(image, self.grid, 200e-6, 360)
        self.assertLess(np.ptp(profile) / profile.mean(), 0.01)

    def test_profile_guards(self):
        image = np.ones(self.grid.shape)
        with self.assertRaises(DomainError):
            fields.azimuthal_profile(image, self.grid, 1.0, 64)
        with self.assertRaises(DomainError):
            fields.azimuthal_profile(image, self.grid, 1e-4, 0)
        with self.assertLogs('liboam.fields', 'WARNING'):
            fields.azimuthal_profile(image, self.grid, 1e-4, 4)


if __name__ == '__main__':
    unittest.main()
