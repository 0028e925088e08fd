#!/usr/bin/env python3
"""usage:
  oamsim mask-scan [options]

Measure Alice's polarization in coincidence with Bob's transferred photons
behind a slit mask. The mask is swept across the fringes for each Alice
basis (D, A, R, L), counts are split into time blocks, and a delayed-trigger
measurement calibrates the coincidence window. The counts are then fitted
(Method 1) and, with several blocks, evaluated block by block at the
extremal mask positions (Method 2).

Options:
  --scenario=PATH   scenario file or preset name (default: $OAMSIM_SCENARIO)
  --seed=N          override the scenario seed
  --out=DIR         output directory
  --db=URL          archive the records and witness blocks to an SQLAlchemy
                    database url
  --format=LIST     comma separated output formats among csv,pgm,json
                    [default: csv,pgm,json]

Standard options:
  -h --help         show this screen
  -d --debug        enable debug logging (low-level)

"""
import logging
import math

import numpy as np

from liboam import detection, states
from liboam.base import ConfigObject
from liboam.units import parse_quantity
from .analyze import analyze_records
from .common import OutputWriter, archive_run, print_report, report_header
from .util import output_dir, parse_formats, scenario_from_args

LOG = logging.getLogger('liboam.cli.mask_scan')


class ScanSettings(ConfigObject):
    """Mask sweep: ``points`` equally spaced offsets over ``fringes`` fringe
    periods starting at ``start``, split into ``blocks`` time blocks, plus an
    optional delayed-trigger measurement of ``delayed_duration`` seconds"""

    _defaults = {
        'points': 16,
        'fringes': 2,
        'start': 0.0,
        'blocks': 1,
        'delayed_duration': 0.0,
        'bases': ['D', 'A', 'R', 'L'],
    }

    def validate(self):
        super(ScanSettings, self).validate()
        self.require_range('points', 3)
        self.require_range('blocks', 1)
        self.require_range('fringes', 0, inclusive_low=False)
        self.require_range('delayed_duration', 0)

    @classmethod
    def from_scenario(cls, scenario):
        return cls({k: parse_quantity(v) if isinstance(v, str) else v
                    for k, v in scenario.section('scan').items()})

    def offsets(self, period):
        span = self['fringes'] * period
        return self['start'] + span * np.arange(int(self['points'])) \
            / int(self['points'])


def ideal_visibility(mask, l, cfg):
    """Visibility of the D fringe for a noiseless maximally entangled state:
    transmission with the slits on the bright fringes against the slits on
    the dark ones"""
    mode, _ = states.conditional_mode(
        states.HybridState.maximally_entangled(l),
        states.PolarizationProjector.from_label('D'))
    contrast = cfg.contrast_for('D')
    bright = detection.mask_transmission(mode, mask.shifted(0.0), contrast)
    dark = detection.mask_transmission(
        mode, mask.shifted(math.pi / (2 * abs(l))), contrast)
    return (bright - dark) / (bright + dark)


def run_mask_entanglement(scenario, writer, db=None):
    """Simulate the mask sweep, write the count records and analyse them"""
    state = scenario.state()
    mask = scenario.mask()
    cfg = scenario.detector_config()
    settings = ScanSettings.from_scenario(scenario)
    period = math.pi / abs(state.l)
    records = detection.simulate_scan(
        state, mask, cfg, settings.offsets(period), tuple(settings['bases']),
        n_blocks=int(settings['blocks']), seed=int(scenario['seed']),
        delayed_duration=float(settings['delayed_duration']))
    writer.records('counts.csv', records)
    analysis_config = scenario.section('analysis', required=False)
    tau = analysis_config.get('tau')
    results, blocks = analyze_records(
        records, period, writer, subtract=analysis_config.get('subtract'),
        tau=parse_quantity(tau) if tau is not None else None)
    report = report_header(scenario)
    report.update({
        'charge': state.l,
        'mask': {'n_slits': mask.n_slits, 'pitch_rad': mask.angular_pitch,
                 'slit_width_rad': mask.slit_width, 'mode': mask.mode,
                 'sagitta_m': mask.sagitta if mask.mode == 'linearized'
                 else None},
        'ideal_visibility': ideal_visibility(mask, state.l, cfg),
        'rates': {'singles_alice': cfg.alice_rate,
                  'singles_bob': cfg.bob_rate,
                  'accidentals': cfg.accidental_rate,
                  'coincidence_window_s': cfg['coincidence_window']},
    })
    report.update(results)
    if db:
        archive_run(db, "{}-{}".format(scenario.get('name', 'scan'),
                                       scenario['seed']),
                    records, blocks['values'] if blocks else None)
    return writer.report(report)


def main(**args):
    """Run the mask-scan action"""
    if not args.get('mask-scan', False):
        raise RuntimeError("no valid action in args")
    scenario = scenario_from_args(args)
    writer = OutputWriter(output_dir(args, scenario),
                          parse_formats(args.get('--format')))
    print_report(run_mask_entanglement(scenario, writer, db=args.get('--db')))
    return 0
