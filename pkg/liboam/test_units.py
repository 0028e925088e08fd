"Test the units module"
import math
import unittest

import numpy as np

from liboam.units import *


class TestQuantities(unittest.TestCase):

    def test_parse_quantity(self):
        self.assertTrue(math.isclose(parse_quantity('810 nm'), 810e-9))
        self.assertTrue(math.isclose(parse_quantity('4.68ns'), 4.68e-9))
        self.assertTrue(math.isclose(parse_quantity('1.2 MHz'), 1.2e6))
        self.assertTrue(math.isclose(parse_quantity('500 kHz'), 5e5))
        self.assertTrue(math.isclose(parse_quantity('20 mm'), 0.02))
        self.assertTrue(math.isclose(parse_quantity('30 cm'), 0.3))
        self.assertTrue(math.isclose(parse_quantity('10 s'), 10.0))
        self.assertTrue(math.isclose(parse_quantity('0.016 deg'),
                                     math.radians(0.016)))
        self.assertEqual(parse_quantity(3), 3.0)
        self.assertEqual(parse_quantity('1e-3'), 1e-3)

    def test_parse_quantity_rejects_garbage(self):
        with self.assertRaises(ValueError):
            parse_quantity('fast')
        with self.assertRaises(ValueError):
            parse_quantity('many nm')

    def test_format_quantity(self):
        self.assertEqual(format_quantity(4.68e-9, 0.34e-9, 'ns', 1e-9),
                         '4.68 +- 0.34 ns')
        self.assertEqual(format_quantity(1.128, digits=3), '1.128')


class TestAngles(unittest.TestCase):

    def test_wrap_angle(self):
        self.assertAlmostEqual(wrap_angle(-0.25, 1.0), 0.75)
        self.assertEqual(wrap_angle(TWO_PI), 0.0)
        self.assertIsInstance(wrap_angle(1.0), float)
        wrapped = wrap_angle(np.array([-1.0, 0.5, 7.0]), TWO_PI)
        self.assertTrue(np.all((wrapped >= 0) & (wrapped < TWO_PI)))

    def test_wrap_phase(self):
        self.assertAlmostEqual(float(wrap_phase(0.5 + TWO_PI)), 0.5)
        self.assertAlmostEqual(float(wrap_phase(-0.5 - 3 * TWO_PI)), -0.5)


if __name__ == '__main__':
    unittest.main()
