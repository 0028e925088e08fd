#!/usr/bin/env python3
"""usage:
  oamsim calibrate-oam [options]

Estimate the OAM charge from rotation fringes. At each angular position one
mirror is turned step by step while the intensity at a fixed azimuth is
recorded; the fitted fringe period gives l = 2 pi / period. Rotation stage
systematics (a squeeze/stretch of the step scale that depends on the
angular position, an absolute positioning error and step jitter) are taken
from the scenario's ``systematics`` section.

Options:
  --scenario=PATH   scenario file or preset name (default: $OAMSIM_SCENARIO)
  --seed=N          override the scenario seed
  --out=DIR         output directory
  --format=LIST     comma separated output formats among csv,pgm,json
                    [default: csv,pgm,json]

Standard options:
  -h --help         show this screen
  -d --debug        enable debug logging (low-level)

"""
import logging
import math

import numpy as np
import pandas

from liboam import analysis, detection, states
from liboam.base import ConfigObject
from liboam.units import TWO_PI, parse_quantity
from .common import OutputWriter, print_report, report_header
from .util import output_dir, parse_formats, scenario_from_args

LOG = logging.getLogger('liboam.cli.calibrate')


class RotationSettings(ConfigObject):
    """How the rotation fringes are recorded. ``peak_counts`` of 0 records
    noiseless intensities."""

    _defaults = {
        'positions': 12,
        'fringes': 5,
        'samples': 200,
        'peak_counts': 5000,
        'squeeze_amplitude': 0.0,
        'squeeze_phase': 0.0,
        'scale_bias': 0.0,
        'absolute_offset': 0.0,
        'step_jitter': 0.0,
    }

    def validate(self):
        super(RotationSettings, self).validate()
        self.require_range('positions', 2)
        self.require_range('samples', 4)
        self.require_range('fringes', 0, inclusive_low=False)
        self.require_range('peak_counts', 0)
        for key in ('absolute_offset', 'step_jitter'):
            self.require_range(key, 0)

    @classmethod
    def from_scenario(cls, scenario):
        data = dict(scenario.section('rotation', required=False))
        data.update(scenario.section('systematics', required=False))
        return cls({k: parse_quantity(v) if isinstance(v, str) else v
                    for k, v in data.items()})

    def step_scale(self, position_angle):
        "Actual over nominal rotation step at one angular position"
        return 1.0 + self['scale_bias'] + self['squeeze_amplitude'] * math.sin(
            position_angle + self['squeeze_phase'])


def record_position(mode, settings, position_angle, rng):
    """Rotation series at one angular position. Returns (nominal angles,
    recorded intensities, sigmas or None)"""
    n = int(settings['samples'])
    span = settings['fringes'] * TWO_PI / mode.l
    nominal = span * np.arange(n) / n
    actual = nominal * settings.step_scale(position_angle)
    actual = actual + rng.normal(0.0, settings['absolute_offset'])
    if settings['step_jitter']:
        actual = actual + rng.normal(
            0.0, settings['step_jitter'] * span / n, size=n)
    fringe = states.rotation_fringe(mode, actual, theta_fixed=position_angle)
    peak = float(settings['peak_counts'])
    if not peak:
        return nominal, fringe, None
    counts = rng.poisson(peak / 2 * fringe).astype(float)
    return nominal, counts, np.sqrt(np.maximum(counts, 1.0))


def run_rotation_calibration(scenario, writer):
    """Simulate rotation fringes at every angular position and estimate the
    charge from them"""
    state = scenario.state()
    settings = RotationSettings.from_scenario(scenario)
    mode, _ = states.conditional_mode(
        state, states.PolarizationProjector.from_label('D'))
    positions = int(settings['positions'])
    angles = TWO_PI * np.arange(positions) / positions
    streams = detection.seed_streams(int(scenario['seed']), positions)
    series = []
    rows = []
    for index, (angle, rng) in enumerate(zip(angles, streams)):
        alpha, values, sigma = record_position(mode, settings, angle, rng)
        series.append((alpha, values) if sigma is None
                      else (alpha, values, sigma))
        rows.append(pandas.DataFrame({
            'position': index, 'alpha': alpha, 'intensity': values}))
    writer.frame('rotation_fringes.csv', pandas.concat(rows,
                                                       ignore_index=True))
    estimate = analysis.estimate_oam(series)
    per_position = [None if c is None else
                    {'l': c.nominal_value, 'sigma': c.std_dev}
                    for c in estimate['positions']]
    report = report_header(scenario)
    report.update({
        'true_charge': mode.l,
        'positions': [{'angle_deg': math.degrees(a), 'estimate': e}
                      for a, e in zip(angles, per_position)],
        'failed_positions': estimate['failed'],
        'mean': estimate['mean'],
        'std': estimate['std'],
        'within_one_sigma': bool(
            abs(estimate['mean'] - mode.l) <= estimate['std']),
        'max_to_min_rotation_deg': math.degrees(
            states.max_to_min_rotation(mode.l)),
    })
    LOG.info("estimated l = %.1f +- %.1f (true %d)", estimate['mean'],
             estimate['std'], mode.l)
    return writer.report(report)


def main(**args):
    """Run the calibrate-oam action"""
    if not args.get('calibrate-oam', False):
        raise RuntimeError("no valid action in args")
    scenario = scenario_from_args(args)
    writer = OutputWriter(output_dir(args, scenario),
                          parse_formats(args.get('--format')))
    print_report(run_rotation_calibration(scenario, writer))
    return 0
