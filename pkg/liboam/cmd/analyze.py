#!/usr/bin/env python3
"""usage:
  oamsim analyze <counts> [options]

Run the analysis chain on an existing count-record CSV (as written by
``oamsim mask-scan``): coincidence window from the delayed-trigger record,
joint sin^2 fringe fit of all bases (Method 1) and, for data split into time
blocks, the per-block witness at the extremal mask positions (Method 2).

The fringe period comes from --period, from --l (period pi/l) or from the
charge of the --scenario.

Options:
  --period=RAD      fringe period of the mask offset, in radians
  --l=N             OAM charge; the fringe period is pi/N
  --scenario=PATH   take the charge and analysis settings from a scenario
  --subtract        subtract accidentals before fitting (default: when a
                    delayed-trigger record is present)
  --no-subtract     never subtract accidentals
  --tau=SECONDS     coincidence window to use instead of the estimate
  --db=URL          archive the records and witness blocks to an SQLAlchemy
                    database url
  --out=DIR         output directory
  --format=LIST     comma separated output formats among csv,pgm,json
                    [default: csv,pgm,json]

Standard options:
  -h --help         show this screen
  -d --debug        enable debug logging (low-level)

"""
import logging
import math
import os

import liboam
from liboam import analysis, exports
from liboam.exceptions import ConfigError
from liboam.units import format_quantity, parse_quantity
from .common import OutputWriter, archive_run, print_report, report_header
from .util import output_dir, parse_formats, scenario_from_args

LOG = logging.getLogger('liboam.cli.analyze')


def analyze_records(records, period, writer, subtract=None, tau=None):
    """Fit the fringes of a list of CountRecords and evaluate the witness by
    Method 1 and, when the records span several blocks, Method 2. Returns
    (report fields, BlockWitness or None)."""
    data = analysis.FringeDataset.from_records(records, tau=tau)
    if subtract is None:
        subtract = data.tau > 0
    if subtract and data.tau <= 0:
        raise ConfigError("subtracting accidentals needs a delayed-trigger "
                          "record or --tau", key='tau')
    if data.tau > 0:
        LOG.info("coincidence window %s", format_quantity(
            data.tau, data.tau_sigma, 'ns', 1e-9))
    merged = data.merged()
    fit = analysis.fit_fringes(merged, period, subtract=subtract)
    offsets = [p.offset for rows in merged.points.values() for p in rows]
    span = max(offsets) - min(offsets) if offsets else 0.0
    writer.frame('fringes.csv', fit.curves_frame(span=max(span, period)))
    writer.frame('points.csv', data.to_frame())
    method1 = analysis.fit_witness(fit)
    report = {
        'period_rad': period,
        'coincidence_window_s': data.tau,
        'coincidence_window_sigma_s': data.tau_sigma,
        'subtracted': bool(subtract),
        'fit': {
            'x0': fit['x0'],
            'x0_sigma': fit['x0_sigma'],
            'redchi': fit['redchi'],
            'at_bound': fit['at_bound'],
            'visibilities': {
                label: {'value': v['visibility'].nominal_value,
                        'sigma': v['visibility'].std_dev,
                        'tau_sigma': v['visibility_tau_sigma']}
                for label, v in fit['bases'].items()},
        },
        'method1': method1.summary(),
    }
    LOG.info("method 1: W = %.3f +- %.3f (stat) +- %.3f (window)",
             method1.value, method1.sigma, method1['w_sigma_tau'])
    blocks = None
    if data.n_blocks > 1:
        if data.tau <= 0:
            raise ConfigError("block analysis needs a coincidence window",
                              key='tau')
        blocks = analysis.witness_blocks(
            data, period, pilot=fit if subtract else None)
        report['method2'] = {
            'blocks': [None if w is None else w.summary()
                       for w in blocks['values']],
            'excluded': blocks['excluded'],
            'mean': blocks['mean'],
            'sem': blocks['sem'],
            'extrema': {k: list(v) for k, v in blocks['extrema'].items()},
        }
        LOG.info("method 2: W = %.3f +- %.3f over %d blocks",
                 blocks['mean'], blocks['sem'], data.n_blocks)
    return report, blocks


def fringe_period(args, scenario=None):
    "Fringe period from --period, --l or the scenario charge"
    if args.get('--period'):
        period = parse_quantity(args['--period'])
    elif args.get('--l'):
        period = math.pi / abs(int(args['--l']))
    elif scenario is not None:
        period = math.pi / abs(scenario.charge())
    else:
        raise ConfigError("give --period, --l or --scenario", key='--period')
    if not period > 0:
        raise ConfigError("fringe period must be positive", key='--period')
    return period


def subtract_flag(args, scenario=None):
    if args.get('--subtract'):
        return True
    if args.get('--no-subtract'):
        return False
    if scenario is not None:
        return scenario.section('analysis', required=False).get('subtract')
    return None


def main(**args):
    """Run the analyze action"""
    if not args.get('analyze', False):
        raise RuntimeError("no valid action in args")
    scenario = scenario_from_args(args, required=False)
    records = exports.read_records_csv(args['<counts>'])
    LOG.debug("read %d records from %s", len(records), args['<counts>'])
    writer = OutputWriter(output_dir(args, scenario),
                          parse_formats(args.get('--format')))
    tau = parse_quantity(args['--tau']) if args.get('--tau') else None
    results, blocks = analyze_records(
        records, fringe_period(args, scenario), writer,
        subtract=subtract_flag(args, scenario), tau=tau)
    report = report_header(scenario) if scenario is not None else {
        'version': liboam.__version__, 'kind': 'analysis'}
    report['counts'] = args['<counts>']
    report.update(results)
    if args.get('--db'):
        archive_run(args['--db'], os.path.basename(args['<counts>']),
                    records, blocks['values'] if blocks else None)
    print_report(writer.report(report))
    return 0
