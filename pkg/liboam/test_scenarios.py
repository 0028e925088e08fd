"Test scenario loading and the section accessors"
import math
import os
import tempfile
import unittest
from unittest.mock import patch

import liboam
from liboam import detection, states
from liboam.exceptions import ConfigError
from liboam.scenarios import *


class TestPresets(unittest.TestCase):

    def test_every_preset_loads(self):
        self.assertIn('fig5', list_presets())
        for name in list_presets():
            scenario = load_scenario(name)
            self.assertIn(scenario['kind'], KINDS)
            self.assertEqual(scenario['name'], name)
            self.assertIsNotNone(scenario.state())

    def test_charges(self):
        self.assertEqual(load_scenario('fig2').charge(), 8)
        self.assertEqual(load_scenario('fig3').charge(), 500)
        self.assertEqual(load_scenario('fig4').charge(), 1000)
        self.assertEqual(load_scenario('fig5').charge(), 10010)
        self.assertEqual(load_scenario('figS1').charge(), 10010)

    def test_transfer_from_mirrors(self):
        state = load_scenario('fig5').state()
        self.assertIsInstance(state, states.HybridState)
        self.assertEqual(state.l, 10010)
        self.assertAlmostEqual(state.a, state.b)
        self.assertIsInstance(load_scenario('fig4-separable').state(),
                              states.StateMixture)

    def test_sections(self):
        scenario = load_scenario('fig5')
        mask = scenario.mask()
        self.assertEqual(mask.n_slits, 600)
        self.assertAlmostEqual(mask.angular_pitch, math.pi / 10010)
        cfg = scenario.detector_config()
        self.assertIsInstance(cfg, detection.DetectorConfig)
        self.assertAlmostEqual(cfg['coincidence_window'], 4.68e-9)
        self.assertAlmostEqual(cfg.bob_rate, 534.0)
        self.assertEqual(cfg['rng_seed'], scenario['seed'])
        sector = load_scenario('fig3').ring_sector()
        self.assertAlmostEqual(sector.radius, 0.02)
        self.assertAlmostEqual(load_scenario('fig2').grid().dx, 50e-6)

    def test_overrides(self):
        scenario = load_scenario('fig4', seed=11, out=None)
        self.assertEqual(scenario['seed'], 11)
        self.assertIsNone(scenario['out'])
        self.assertTrue(load_scenario('fig2', ring_model=True)['ring_model'])


class TestValidation(unittest.TestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()

    def tearDown(self):
        self.tmp.cleanup()

    def write(self, text):
        path = os.path.join(self.tmp.name, 'scenario.yaml')
        with open(path, 'w') as stream:
            stream.write(text)
        return path

    def test_unknown_name(self):
        with self.assertRaises(ConfigError):
            load_scenario('fig99')

    def test_stochastic_runs_need_a_seed(self):
        path = self.write("kind: mask-entanglement\nstate: {l: 100}\n")
        with self.assertRaises(ConfigError) as ctx:
            load_scenario(path)
        self.assertEqual(ctx.exception.key, 'seed')
        self.assertEqual(load_scenario(path, seed=3)['seed'], 3)
        with self.assertRaises(ConfigError):
            load_scenario(path, seed=-1)

    def test_bad_documents(self):
        with self.assertRaises(ConfigError):
            load_scenario(self.write("kind: [unclosed\n"))
        with self.assertRaises(ConfigError):
            load_scenario(self.write("- just a list\n"))
        with self.assertRaises(ConfigError):
            load_scenario(self.write("kind: teleport\nstate: {l: 1}\n"))
        with self.assertRaises(ConfigError):
            load_scenario(self.write("kind: render-mode\n"))

    def test_missing_sections(self):
        scenario = load_scenario(self.write(
            "kind: render-mode\nstate: {l: 20}\nmixture: quantum-soup\n"))
        with self.assertRaises(ConfigError):
            scenario.grid()
        with self.assertRaises(ConfigError):
            scenario.state()
        self.assertEqual(scenario.section('lens', required=False), {})

    def test_linearized_mask(self):
        path = self.write(
            "kind: mask-entanglement\nseed: 1\nstate: {l: 100}\n"
            "mask: {n_slits: 5, linearize: true, "
            "linearization_radius: 20 mm}\n")
        mask = load_scenario(path).mask()
        self.assertEqual(mask.mode, 'linearized')
        self.assertGreater(mask.sagitta, 0.0)


class TestEnvironment(unittest.TestCase):

    @patch.dict(os.environ, {liboam.SCENARIO_ENVVAR: 'fig4'})
    def test_scenario_from_env(self):
        self.assertEqual(liboam.get_scenario_from_env(), 'fig4')

    def test_missing_env(self):
        with patch.dict(os.environ):
            os.environ.pop(liboam.SCENARIO_ENVVAR, None)
            with self.assertRaises(ConfigError):
                liboam.get_scenario_from_env()


if __name__ == '__main__':
    unittest.main()
