"Test the detection module: masks, count simulation and ICCD stacks"
import math
import unittest

import numpy as np

from liboam import detection, states
from liboam.exceptions import (
    ApproximationError, ConfigError, DomainError, SamplingError)

#: Visibility ceiling of a 1/7 duty-cycle mask, sinc(pi/7).
SINC_CEILING = math.sin(math.pi / 7) / (math.pi / 7)


def diagonal_mode(l):
    state = states.HybridState.maximally_entangled(l)
    alice = states.PolarizationProjector.from_label('D')
    return states.conditional_mode(state, alice)[0]


def small_detector(**changes):
    config = {'pair_rate': 1e6, 'efficiency_bob': 0.05, 'exposure': 4.0}
    config.update(changes)
    return detection.DetectorConfig(config)


class TestSlitMask(unittest.TestCase):

    def test_fringe_matched_geometry(self):
        mask = detection.SlitMask.fringe_matched(1000, 25)
        self.assertAlmostEqual(mask.angular_pitch, math.pi / 1000)
        self.assertAlmostEqual(mask.slit_width, math.pi / 7000)
        start, end = mask.slit_edges()
        self.assertEqual(len(start), 25)
        centers = (start + end) / 2
        self.assertTrue(np.allclose(centers,
                                    np.arange(25) * math.pi / 1000))

    def test_invalid_masks(self):
        with self.assertRaises(DomainError):
            detection.SlitMask(0, 0.1, 0.01)
        with self.assertRaises(DomainError):
            detection.SlitMask(3, 0.1, 0.2)
        with self.assertRaises(DomainError):
            detection.SlitMask(100, 0.1, 0.01)
        with self.assertRaises(DomainError):
            detection.SlitMask(3, 0.1, 0.01, mode='curved')
        with self.assertRaises(DomainError):
            detection.SlitMask(3, 0.1, 0.01, mode='linearized')

    def test_from_config(self):
        mask = detection.SlitMask.from_config(
            {'n_slits': 60, 'ratio': 0.25}, l=500)
        self.assertAlmostEqual(mask.angular_pitch, math.pi / 500)
        self.assertAlmostEqual(mask.slit_width, 0.25 * math.pi / 500)
        with self.assertRaises(ConfigError):
            detection.SlitMask.from_config({'n_slits': 3})

    def test_closed_form_matches_quadrature(self):
        rng = np.random.default_rng(23)
        for _ in range(20):
            l = int(rng.integers(1, 200))
            mode = states.RingMode.superposition(
                l, rng.uniform(-math.pi, math.pi))
            pitch = math.pi / l
            mask = detection.SlitMask(
                int(rng.integers(1, l + 1)), pitch,
                rng.uniform(0.05, 0.5) * pitch, rng.uniform(0, pitch))
            contrast = rng.uniform(0.2, 1.0)
            self.assertAlmostEqual(
                detection.mask_transmission(mode, mask, contrast),
                detection.mask_transmission_numeric(mode, mask, contrast),
                places=9)

    def test_linearized_closed_form_matches_quadrature(self):
        mode = states.RingMode.superposition(100, 0.4)
        mask = detection.linearize_mask(
            detection.SlitMask.fringe_matched(100, 5, arc_offset=0.001),
            arc_span_check=0.5, radius=0.02)
        self.assertEqual(mask.mode, 'linearized')
        self.assertAlmostEqual(
            detection.mask_transmission(mode, mask),
            detection.mask_transmission_numeric(mode, mask), places=9)

    def test_visibility_ceiling(self):
        mode = diagonal_mode(1000)
        mask = detection.SlitMask.fringe_matched(1000, 25)
        bright = detection.mask_transmission(mode, mask)
        dark = detection.mask_transmission(
            mode, mask.shifted(math.pi / 2000))
        self.assertAlmostEqual((bright - dark) / (bright + dark),
                               SINC_CEILING)
        self.assertAlmostEqual(SINC_CEILING, 0.9667, delta=5e-4)

    def test_transmission_repeats_every_fringe(self):
        rng = np.random.default_rng(7)
        for l in (1, 10, 1000, 10010):
            mode = states.RingMode.superposition(
                l, rng.uniform(-math.pi, math.pi))
            mask = detection.SlitMask.fringe_matched(l, min(l, 25))
            for offset in rng.uniform(0, math.pi / l, 4):
                here = detection.mask_transmission(mode, mask.shifted(offset))
                self.assertAlmostEqual(
                    detection.mask_transmission(
                        mode, mask.shifted(offset + math.pi / l)),
                    here, places=12)
                self.assertAlmostEqual(
                    detection.mask_transmission(
                        mode, mask.shifted(offset - 3 * math.pi / l)),
                    here, places=12)

    def test_linearization_refuses_long_arcs(self):
        mask = detection.SlitMask.fringe_matched(10010, 600)
        with self.assertRaises(ApproximationError) as ctx:
            detection.linearize_mask(mask, 0.1, radius=0.02)
        expected = 0.02 * (1 - math.cos(mask.arc_span / 2))
        self.assertAlmostEqual(ctx.exception.sagitta, expected)
        with self.assertRaises(DomainError):
            detection.linearize_mask(mask, 1.0)


class TestDetectorConfig(unittest.TestCase):

    def test_derived_rates(self):
        cfg = small_detector()
        self.assertAlmostEqual(cfg.alice_rate, 1e5)
        self.assertAlmostEqual(cfg.bob_rate, 5e4)
        self.assertAlmostEqual(cfg.accidental_rate, 1e5 * 5e4 * 4.68e-9)
        cfg = small_detector(singles_rate_alice=3e5, singles_rate_bob=65e3)
        self.assertAlmostEqual(cfg.accidental_rate, 3e5 * 65e3 * 4.68e-9)

    def test_validation(self):
        with self.assertRaises(ConfigError):
            detection.DetectorConfig(pair_rate=1e6, exposure=4.0)
        with self.assertRaises(ConfigError):
            small_detector(efficiency_bob=1.5)
        with self.assertRaises(ConfigError):
            small_detector(coincidence_window=0.0)
        with self.assertRaises(ConfigError):
            small_detector(mode_contrast={'D': 1.2})

    def test_per_basis_factors(self):
        cfg = small_detector(mode_contrast={'D': 0.8}, basis_efficiency=0.5)
        self.assertAlmostEqual(cfg.contrast_for('D'), 0.8)
        self.assertAlmostEqual(cfg.contrast_for('R'), 1.0)
        self.assertAlmostEqual(cfg.basis_efficiency_for('L'), 0.5)


class TestCountRecord(unittest.TestCase):

    def test_labels(self):
        self.assertEqual(detection.CountRecord.label('D', 3), 'D:3')
        record = detection.CountRecord(
            setting='R:2', duration_s=1.0, singles_alice=10, singles_bob=5,
            coincidences=1)
        self.assertEqual(record.basis, 'R')
        self.assertEqual(record.block, 2)
        self.assertFalse(record.is_delayed)
        self.assertEqual(record.row()[0], 'R:2')
        delayed = record.replace(setting=detection.DELAYED_SETTING)
        self.assertTrue(delayed.is_delayed)

    def test_rejects_negative_counts(self):
        with self.assertRaises(ConfigError):
            detection.CountRecord(setting='D:0', duration_s=1.0,
                                  singles_alice=1, singles_bob=1,
                                  coincidences=-1)


class TestCountSimulation(unittest.TestCase):

    def setUp(self):
        self.state = states.HybridState.maximally_entangled(100)
        self.mask = detection.SlitMask.fringe_matched(100, 10)
        self.cfg = small_detector()
        self.offsets = np.arange(4) * math.pi / 400

    def test_mixture_rates_do_not_follow_the_mask(self):
        mixture = states.StateMixture.classically_correlated(100)
        alice = states.PolarizationProjector.from_label('D')
        bright, _ = detection.expected_rates(mixture, alice, self.mask,
                                             self.cfg)
        dark, _ = detection.expected_rates(
            mixture, alice, self.mask.shifted(math.pi / 200), self.cfg)
        self.assertAlmostEqual(bright, dark)
        entangled, _ = detection.expected_rates(self.state, alice,
                                                self.mask, self.cfg)
        self.assertGreater(entangled, 1.5 * bright)

    def test_scan_layout(self):
        records = detection.simulate_scan(
            self.state, self.mask, self.cfg, self.offsets, n_blocks=2,
            seed=5, delayed_duration=10.0)
        self.assertEqual(len(records), 4 * 4 * 2 + 1)
        self.assertTrue(records[-1].is_delayed)
        self.assertEqual(records[-1]['duration_s'], 10.0)
        self.assertEqual(records[0]['setting'], 'D:0')
        self.assertEqual(records[1]['setting'], 'D:1')
        self.assertEqual(records[0]['duration_s'], 2.0)
        with self.assertRaises(DomainError):
            detection.simulate_scan(self.state, self.mask, self.cfg,
                                    self.offsets, n_blocks=0, seed=5)

    def test_scan_is_reproducible(self):
        first = detection.simulate_scan(self.state, self.mask, self.cfg,
                                        self.offsets, seed=9)
        second = detection.simulate_scan(self.state, self.mask, self.cfg,
                                         self.offsets, seed=9)
        self.assertEqual([r.row() for r in first], [r.row() for r in second])
        other = detection.simulate_scan(self.state, self.mask, self.cfg,
                                        self.offsets, seed=10)
        self.assertNotEqual([r.row() for r in first],
                            [r.row() for r in other])

    def test_settings_draw_from_their_own_streams(self):
        alone = detection.simulate_scan(self.state, self.mask, self.cfg,
                                        self.offsets, bases=('D',), seed=3)
        together = detection.simulate_scan(
            self.state, self.mask, self.cfg, self.offsets, bases=('D', 'A'),
            seed=3)
        self.assertEqual([r.row() for r in alone],
                         [r.row() for r in together[:len(alone)]])

    def test_delayed_record_holds_accidentals_only(self):
        record = detection.simulate_delayed(
            self.cfg, np.random.default_rng(1), 100.0)
        self.assertEqual(record['expected_true'], 0.0)
        self.assertAlmostEqual(record['expected_accidental'],
                               100.0 * self.cfg.accidental_rate)


class TestIccd(unittest.TestCase):

    def setUp(self):
        self.state = states.HybridState.maximally_entangled(500)
        self.alice = states.PolarizationProjector.from_label('D')
        self.sector = detection.RingSector(0.02, 1e-3, 160, 160, 13e-6)
        self.cfg = detection.IccdConfig(trigger_rate=5e5,
                                        collection_efficiency=4e-4)

    def test_pixels_per_fringe(self):
        self.assertAlmostEqual(self.sector.pixels_per_fringe(500),
                               0.02 * math.pi / (500 * 13e-6))
        r, theta = self.sector.coordinates()
        self.assertEqual(r.shape, (160, 160))
        self.assertLessEqual(self.sector.envelope().max(), 1.0)
        with self.assertRaises(DomainError):
            detection.RingSector(0.02, 1e-3, 1, 160)

    def test_signal_budget(self):
        self.assertAlmostEqual(self.cfg.signal_per_frame('D'), 400.0)
        capped = self.cfg.replace(trigger_rate=2e6)
        self.assertAlmostEqual(capped.signal_per_frame('D'), 400.0)
        expected = detection.expected_iccd_image(
            self.state, self.alice, self.sector, self.cfg)
        self.assertAlmostEqual(expected.sum(), 60 * (400.0 + 200.0))

    def test_stack_shapes(self):
        rng = np.random.default_rng(7)
        stack = detection.simulate_iccd_stack(
            self.state, self.alice, self.sector, self.cfg, rng)
        self.assertEqual(stack.shape, (160, 160))
        self.assertEqual(stack.dtype, np.int64)
        background = detection.simulate_iccd_background(
            self.sector, self.cfg, rng)
        self.assertEqual(background.shape, (160, 160))
        self.assertLess(background.sum(), stack.sum())

    def test_unresolved_fringes(self):
        state = states.HybridState.maximally_entangled(10010)
        with self.assertRaises(SamplingError):
            detection.expected_iccd_image(state, self.alice, self.sector,
                                          self.cfg)


if __name__ == '__main__':
    unittest.main()
