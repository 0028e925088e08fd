"""
Scenario files: YAML documents describing one end-to-end run. A scenario
names its experiment ``kind`` and carries nested sections for the source,
the mirrors, the mask, detector or camera, and the analysis. Quantities may
be given with unit suffixes (``810 nm``, ``4.68 ns``, ``0.016 deg``).

Presets ship with the package and can be referred to by name::

    from liboam import scenarios
    scenario = scenarios.load_scenario('fig4', seed=11)
    scenario.state()      # HybridState with l=1000

"""
import glob
import logging
import math
import os

import yaml

from . import detection, mirrors, states
from .base import ConfigObject
from .exceptions import ConfigError
from .fields import GridSpec
from .units import parse_quantity

LOG = logging.getLogger('liboam.scenarios')

PRESET_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)),
                          'presets')

RENDER = 'render-mode'
ROTATION = 'rotation-calibration'
ICCD = 'iccd-entanglement'
MASK = 'mask-entanglement'

KINDS = (RENDER, ROTATION, ICCD, MASK)

#: Kinds that draw random numbers and therefore need a seed.
STOCHASTIC_KINDS = (ROTATION, ICCD, MASK)


def list_presets():
    "Names of the scenarios shipped with the package"
    return sorted(os.path.splitext(os.path.basename(p))[0]
                  for p in glob.glob(os.path.join(PRESET_DIR, '*.yaml')))


def preset_path(name):
    return os.path.join(PRESET_DIR, name + '.yaml')


def load_scenario(name_or_path, **overrides):
    """Load a scenario from a YAML path or a preset name, applying
    ``overrides`` (seed, out, ring_model, format) on top"""
    if os.path.isfile(name_or_path):
        path = name_or_path
    elif os.path.isfile(preset_path(name_or_path)):
        path = preset_path(name_or_path)
    else:
        raise ConfigError(
            "no scenario file or preset called '{}' (presets: {})".format(
                name_or_path, ", ".join(list_presets())))
    LOG.debug("loading scenario from %s", path)
    try:
        with open(path) as stream:
            data = yaml.safe_load(stream)
    except yaml.YAMLError as err:
        raise ConfigError("can't parse {}: {}".format(path, err))
    if not isinstance(data, dict):
        raise ConfigError("{} does not hold a mapping".format(path))
    data.setdefault('name', os.path.splitext(os.path.basename(path))[0])
    data.update({k: v for k, v in overrides.items() if v is not None})
    return Scenario(data)


class Scenario(ConfigObject):
    """A resolved scenario. Section accessors build the library objects the
    run needs and raise ConfigError for missing or inconsistent keys."""

    _defaults = {
        'ring_model': False,
        'out': None,
        'seed': None,
    }
    _required = ('kind',)

    def validate(self):
        super(Scenario, self).validate()
        if self['kind'] not in KINDS:
            raise ConfigError("unknown experiment kind '{}'".format(
                self['kind']), key='kind')
        if self['kind'] in STOCHASTIC_KINDS and self.get('seed') is None:
            raise ConfigError("stochastic runs need a seed", key='seed')
        if self.get('seed') is not None:
            try:
                seed = int(self['seed'])
            except (TypeError, ValueError):
                raise ConfigError("seed must be an integer", key='seed')
            if seed < 0:
                raise ConfigError("seed must be non-negative", key='seed')
        if not self.get('mirrors') and 'state' not in self:
            raise ConfigError("scenario needs mirrors or a state",
                              key='mirrors')

    def section(self, key, required=True):
        value = self.get(key)
        if value is None:
            if required:
                raise ConfigError("missing section", key=key)
            return {}
        if not isinstance(value, dict):
            raise ConfigError("section must be a mapping", key=key)
        return value

    @property
    def wavelength(self):
        return parse_quantity(self.get('wavelength', 810e-9))

    def mirrors(self):
        "SpmProfiles of the transfer stages, in beam order"
        retval = []
        for index, config in enumerate(self.get('mirrors') or []):
            config = dict(config)
            config.setdefault('wavelength', self.wavelength)
            try:
                retval.append(mirrors.SpmProfile.from_config(config))
            except KeyError as err:
                raise ConfigError("mirror {} lacks {}".format(index, err),
                                  key='mirrors')
        return retval

    def input_polarization(self):
        source = self.section('source', required=False)
        return states.PolarizationProjector.from_config(
            source.get('input', 'D'))

    def charge(self):
        "Net OAM charge carried by the hybrid state"
        if 'state' in self:
            return int(self['state']['l'])
        return sum(m.charge for m in self.mirrors())

    def state(self):
        """The hybrid state, either given directly under ``state`` or made by
        transferring the source polarization through the mirrors. With
        ``mixture: classically-correlated`` a separable mixture of the same
        charge is returned instead."""
        mixture = self.get('mixture')
        if mixture:
            if mixture != 'classically-correlated':
                raise ConfigError("unknown mixture '{}'".format(mixture),
                                  key='mixture')
            return states.StateMixture.classically_correlated(self.charge())
        if 'state' in self:
            return states.HybridState.from_config(self['state'])
        charges = [m.charge for m in self.mirrors()]
        first, rest = charges[0], sum(charges[1:])
        return states.transfer(self.input_polarization(), first, rest)

    def grid(self):
        config = self.section('grid')
        n = int(config.get('n', 512))
        return GridSpec(n, n, parse_quantity(config['pitch']),
                        parse_quantity(config['pitch']), self.wavelength)

    def mask(self):
        config = self.section('mask')
        mask = detection.SlitMask.from_config(config, l=self.charge())
        if config.get('linearize'):
            radius = parse_quantity(config['linearization_radius'])
            limit = parse_quantity(config.get('arc_span_limit', math.pi / 4))
            mask = detection.linearize_mask(mask, limit, radius)
        return mask

    def detector_config(self):
        config = {k: _parse_value(v)
                  for k, v in self.section('detector').items()}
        config.setdefault('rng_seed', self.get('seed'))
        return detection.DetectorConfig(config)

    def iccd_config(self):
        config = {k: _parse_value(v) for k, v in self.section('iccd').items()}
        config.setdefault('rng_seed', self.get('seed'))
        return detection.IccdConfig(config)

    def ring_sector(self):
        pitch = self.iccd_config()['pixel_pitch'] if 'iccd' in self \
            else parse_quantity(self.section('sector').get('pixel_pitch', 13e-6))
        return detection.RingSector.from_config(self.section('sector'), pitch)

    def echo(self):
        "The resolved scenario, for embedding in reports"
        return dict(self)


def _parse_value(value):
    "Parse unit strings, leaving mappings of per-basis factors intact"
    if isinstance(value, dict):
        return {k: _parse_value(v) for k, v in value.items()}
    if isinstance(value, str):
        try:
            return parse_quantity(value)
        except ValueError:
            return value
    return value
