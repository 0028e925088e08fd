"""
Utility functions used by the other command-related modules.
"""
import logging
import os

import liboam
from liboam.exceptions import ConfigError
from liboam.scenarios import load_scenario

FORMATS = ('csv', 'pgm', 'json')


def parse_formats(value):
    """Given a --format value such as 'csv,json', return the list of
    formats, rejecting unknown ones"""
    if not value:
        return list(FORMATS)
    formats = [f.strip().lower() for f in value.split(',') if f.strip()]
    for fmt in formats:
        if fmt not in FORMATS:
            raise ConfigError("unknown output format '{}'".format(fmt),
                              key='--format')
    return formats


def parse_seed(value):
    "Parse --seed as a non-negative integer (None passes through)"
    if value is None:
        return None
    try:
        seed = int(value)
    except ValueError:
        raise ConfigError("--seed must be an integer", key='--seed')
    if seed < 0 or seed >= 2 ** 64:
        raise ConfigError("--seed must fit in 64 unsigned bits", key='--seed')
    return seed


def scenario_from_args(args, required=True):
    """Load the scenario named by --scenario (or the OAMSIM_SCENARIO
    environment variable) with the command-line overrides applied"""
    name = args.get('--scenario')
    if not name:
        if not required and liboam.SCENARIO_ENVVAR not in os.environ:
            return None
        name = liboam.get_scenario_from_env()
    overrides = {'seed': parse_seed(args.get('--seed')),
                 'out': args.get('--out')}
    if args.get('--ring-model'):
        overrides['ring_model'] = True
    return load_scenario(name, **overrides)


def output_dir(args, scenario=None):
    """The directory results go to: --out, the scenario's ``out`` key, or
    ./oamsim-<scenario name>"""
    out = args.get('--out')
    if not out and scenario is not None:
        out = scenario.get('out') or "oamsim-{}".format(
            scenario.get("name", scenario["kind"]))
    out = out or "oamsim-output"
    os.makedirs(out, exist_ok=True)
    return out


def configure_logging(args):
    "INFO by default, DEBUG with -d/--debug"
    level = logging.DEBUG if args.get('--debug') else logging.INFO
    logging.basicConfig(
        level=level, format="%(asctime)s %(name)s %(levelname)s %(message)s")
