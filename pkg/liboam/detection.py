"""
Detector and mask physics: slit-mask transmission of ring fringes, ICCD
coincidence imaging of a ring sector, and Monte Carlo generation of singles,
true coincidences and accidentals.

Everything stochastic draws from :class:`numpy.random.Generator` instances.
Runs that cover several settings split one seed into independent
sub-streams with :func:`seed_streams`, so results never depend on the order
settings are simulated in.
"""
import dataclasses
import logging
import math

import numpy as np
from scipy import integrate

from . import fields, states
from .base import ConfigObject
from .exceptions import ApproximationError, ConfigError, DomainError, SamplingError
from .units import TWO_PI, parse_quantity

LOG = logging.getLogger('liboam.detection')

#: Slit width to pitch ratio of the masks used for the high-charge runs.
DEFAULT_SLIT_RATIO = 1.0 / 7.0

#: Setting label of an accidentals-only (delayed trigger) measurement.
DELAYED_SETTING = 'delayed'

#: Columns of the count-record CSV, in order.
RECORD_COLUMNS = ('setting', 'mask_offset', 'duration_s', 'singles_alice',
                  'singles_bob', 'coincidences')

MASK_MODES = ('angular', 'linearized')


def seed_streams(seed, count):
    """Split one seed into ``count`` independent generators, in a fixed
    order"""
    children = np.random.SeedSequence(seed).spawn(count)
    return [np.random.default_rng(child) for child in children]


@dataclasses.dataclass(frozen=True)
class SlitMask:
    """An arc of equally spaced slits. Angles are in radians; in linearized
    mode the slits sit on a straight line tangent to the ring at the middle
    of the arc and ``arc_offset`` becomes a lateral translation of
    ``linearization_radius * arc_offset``."""

    n_slits: int
    angular_pitch: float
    slit_width: float
    arc_offset: float = 0.0
    mode: str = 'angular'
    linearization_radius: float = 0.0

    def __post_init__(self):
        if int(self.n_slits) != self.n_slits or self.n_slits < 1:
            raise DomainError("a mask needs at least one slit")
        if not 0 < self.slit_width < self.angular_pitch:
            raise DomainError("slit width must be positive and below the pitch")
        if self.n_slits * self.angular_pitch > TWO_PI * (1 + 1e-12):
            raise DomainError("slits overlap round the full circle")
        if self.mode not in MASK_MODES:
            raise DomainError("unknown mask mode '{}'".format(self.mode))
        if self.mode == 'linearized':
            if not self.linearization_radius > 0:
                raise DomainError("a linearized mask needs a positive radius")
            half = self.arc_span / 2 + abs(self.arc_offset) + self.slit_width
            if half >= 1.0:
                raise DomainError("linearized mask wraps past the tangent")

    @classmethod
    def fringe_matched(cls, l, n_slits, ratio=DEFAULT_SLIT_RATIO,
                       arc_offset=0.0):
        "A mask with one slit per bright fringe of a charge-l superposition"
        pitch = math.pi / abs(int(l))
        return cls(int(n_slits), pitch, ratio * pitch, arc_offset)

    @classmethod
    def from_config(cls, config, l=None):
        """Build from scenario keys. Without an explicit ``pitch`` the mask
        is fringe matched to charge l."""
        n_slits = int(config.get('n_slits', 1))
        if 'pitch' in config:
            pitch = parse_quantity(config['pitch'])
        elif l is not None:
            pitch = math.pi / abs(int(l))
        else:
            raise ConfigError("mask needs a pitch or a charge", key='pitch')
        if 'slit_width' in config:
            width = parse_quantity(config['slit_width'])
        else:
            width = float(config.get('ratio', DEFAULT_SLIT_RATIO)) * pitch
        return cls(n_slits, pitch, width,
                   parse_quantity(config.get('arc_offset', 0.0)),
                   config.get('mode', 'angular'),
                   parse_quantity(config.get('linearization_radius', 0.0)))

    @property
    def arc_span(self):
        return self.n_slits * self.angular_pitch

    @property
    def sagitta(self):
        """Worst-case distance between the slit line and the ring arc it
        replaces, for a linearized mask"""
        return self.linearization_radius * (1 - math.cos(self.arc_span / 2))

    def shifted(self, offset):
        "Returns the same mask moved to ``arc_offset = offset``"
        return dataclasses.replace(self, arc_offset=offset)

    def slit_edges(self):
        "Returns (start, end) azimuths of every slit as two arrays"
        index = np.arange(self.n_slits) - (self.n_slits - 1) / 2
        if self.mode == 'angular':
            middle = (self.n_slits - 1) / 2 * self.angular_pitch
            centers = self.arc_offset + middle + index * self.angular_pitch
            return (centers - self.slit_width / 2,
                    centers + self.slit_width / 2)
        radius = self.linearization_radius
        tangent = (self.n_slits - 1) / 2 * self.angular_pitch
        lateral = radius * (self.arc_offset + index * self.angular_pitch)
        half = radius * self.slit_width / 2
        return (tangent + np.arcsin((lateral - half) / radius),
                tangent + np.arcsin((lateral + half) / radius))


def linearize_mask(mask, arc_span_check, radius=None):
    """Switch a mask to the linear slit arrangement at ``radius`` (defaults
    to the mask's own linearization radius). Arcs longer than
    ``arc_span_check`` raise an ApproximationError carrying the sagitta."""
    radius = mask.linearization_radius if radius is None else radius
    if not radius > 0:
        raise DomainError("linearization needs a positive radius")
    sagitta = radius * (1 - math.cos(mask.arc_span / 2))
    if mask.arc_span > arc_span_check:
        raise ApproximationError(mask.arc_span, arc_span_check, sagitta)
    LOG.debug("linearizing %d-slit mask at r=%.4g m, sagitta %.3g m",
              mask.n_slits, radius, sagitta)
    return dataclasses.replace(mask, mode='linearized',
                               linearization_radius=radius)


def mask_transmission(mode, mask, contrast=1.0):
    """Share of the ring power a mask transmits, integrated in closed form
    over every slit. ``contrast`` scales the fringe visibility to model
    imperfect superposition fidelity."""
    start, end = mask.slit_edges()
    fringe = contrast * mode.contrast
    # sin(2l*end - d) - sin(2l*start - d), written to avoid cancellation
    difference = 2 * np.cos(mode.l * (start + end) - mode.delta) * np.sin(
        mode.l * (end - start))
    total = np.sum(end - start) + fringe / (2 * mode.l) * np.sum(difference)
    return float(np.clip(total / TWO_PI, 0.0, 1.0))


def mask_transmission_numeric(mode, mask, contrast=1.0):
    "Transmission by adaptive quadrature of the ring intensity"
    fringe = contrast * mode.contrast
    total = 0.0
    for a, b in zip(*mask.slit_edges()):
        value, _ = integrate.quad(
            lambda t: 1.0 + fringe * math.cos(2 * mode.l * t - mode.delta),
            a, b, epsabs=1e-14, epsrel=1e-12, limit=400)
        total += value
    return total / TWO_PI


def _fraction_of(value, key):
    try:
        value = float(value)
    except (TypeError, ValueError):
        raise ConfigError("not a number: {!r}".format(value), key=key)
    if not 0 <= value <= 1:
        raise ConfigError("{} is outside [0, 1]".format(value), key=key)
    return value


class _BasisFactors(ConfigObject):
    """Base for configs that carry per-basis efficiency and mode-contrast
    factors, each either one number or a mapping from Alice's label to a
    number"""

    def _per_basis(self, key, label):
        value = self.get(key, 1.0)
        if isinstance(value, dict):
            return _fraction_of(value.get(label, 1.0), key)
        return _fraction_of(value, key)

    def basis_efficiency_for(self, label):
        return self._per_basis('basis_efficiency', label)

    def contrast_for(self, label):
        return self._per_basis('mode_contrast', label)

    def validate(self):
        super(_BasisFactors, self).validate()
        for key in ('basis_efficiency', 'mode_contrast'):
            value = self.get(key, 1.0)
            values = value.values() if isinstance(value, dict) else [value]
            for item in values:
                _fraction_of(item, key)


class DetectorConfig(_BasisFactors):
    """Rates (Hz), efficiencies, coincidence window (s), exposure per
    setting (s) and seed of a mask coincidence measurement. When the singles
    rates are omitted they are derived from the pair rate: Alice sees
    ``pair_rate*efficiency_alice`` and Bob ``pair_rate*efficiency_bob``
    plus ``dark_rate_bob``."""

    _defaults = {
        'singles_rate_alice': None,
        'singles_rate_bob': None,
        'efficiency_alice': 0.1,
        'dark_rate_bob': 0.0,
        'coincidence_window': 4.68e-9,
        'basis_efficiency': 1.0,
        'mode_contrast': 1.0,
        'rng_seed': None,
    }
    _required = ('pair_rate', 'efficiency_bob', 'exposure')

    def validate(self):
        super(DetectorConfig, self).validate()
        self.require_range('pair_rate', 0)
        self.require_range('efficiency_bob', 0, 1)
        self.require_range('efficiency_alice', 0, 1)
        self.require_range('dark_rate_bob', 0)
        self.require_range('coincidence_window', 0, inclusive_low=False)
        self.require_range('exposure', 0, inclusive_low=False)
        for key in ('singles_rate_alice', 'singles_rate_bob'):
            if self.get(key) is not None:
                self.require_range(key, 0)

    @property
    def alice_rate(self):
        if self.get('singles_rate_alice') is not None:
            return float(self['singles_rate_alice'])
        return self['pair_rate'] * self['efficiency_alice']

    @property
    def bob_rate(self):
        if self.get('singles_rate_bob') is not None:
            return float(self['singles_rate_bob'])
        return self['pair_rate'] * self['efficiency_bob'] + self['dark_rate_bob']

    @property
    def accidental_rate(self):
        "S1*S2*tau_c"
        return self.alice_rate * self.bob_rate * self['coincidence_window']


class CountRecord(ConfigObject):
    """Singles and coincidences of one measurement setting. ``setting`` is
    ``'<basis>:<block>'`` (eg. ``'D:3'``) or ``'delayed'``."""

    _defaults = {'mask_offset': 0.0}
    _required = ('setting', 'duration_s', 'singles_alice', 'singles_bob',
                 'coincidences')

    def validate(self):
        super(CountRecord, self).validate()
        self.require_range('duration_s', 0, inclusive_low=False)
        for key in ('singles_alice', 'singles_bob', 'coincidences'):
            self.require_range(key, 0)

    @classmethod
    def label(cls, basis, block=0):
        return "{}:{}".format(basis, int(block))

    @property
    def basis(self):
        return self['setting'].split(':')[0]

    @property
    def block(self):
        parts = self['setting'].split(':')
        return int(parts[1]) if len(parts) > 1 else 0

    @property
    def is_delayed(self):
        return self['setting'] == DELAYED_SETTING

    def row(self):
        "Values in RECORD_COLUMNS order"
        return [self[column] for column in RECORD_COLUMNS]


def expected_rates(state, alice, mask, cfg):
    """Returns (true, accidental) coincidence rates (Hz) for one setting"""
    transmitted = sum(
        probability * mask_transmission(
            mode, mask, cfg.contrast_for(alice.label))
        for probability, mode in states.conditional_modes(state, alice))
    true_rate = (cfg['pair_rate'] * transmitted * cfg['efficiency_bob']
                 * cfg.basis_efficiency_for(alice.label))
    return true_rate, cfg.accidental_rate


def simulate_counts(state, alice, mask, cfg, rng=None, duration=None,
                    block=0):
    """Poisson-sample singles and coincidences for one setting. ``state``
    may be a HybridState or a StateMixture."""
    if rng is None:
        rng = np.random.default_rng(cfg.get('rng_seed'))
    duration = float(cfg['exposure'] if duration is None else duration)
    true_rate, accidental_rate = expected_rates(state, alice, mask, cfg)
    coincidences = rng.poisson(duration * (true_rate + accidental_rate))
    singles_alice = rng.poisson(duration * cfg.alice_rate)
    singles_bob = rng.poisson(duration * cfg.bob_rate)
    return CountRecord(
        setting=CountRecord.label(alice.label, block),
        mask_offset=float(mask.arc_offset),
        duration_s=duration,
        singles_alice=int(singles_alice),
        singles_bob=int(singles_bob),
        coincidences=int(coincidences),
        expected_true=true_rate * duration,
        expected_accidental=accidental_rate * duration)


def simulate_delayed(cfg, rng=None, duration=None):
    """Accidentals-only measurement: the trigger is delayed well past the
    coincidence window so no true pair can coincide"""
    if rng is None:
        rng = np.random.default_rng(cfg.get('rng_seed'))
    duration = float(cfg['exposure'] if duration is None else duration)
    coincidences = rng.poisson(duration * cfg.accidental_rate)
    singles_alice = rng.poisson(duration * cfg.alice_rate)
    singles_bob = rng.poisson(duration * cfg.bob_rate)
    return CountRecord(
        setting=DELAYED_SETTING, mask_offset=0.0, duration_s=duration,
        singles_alice=int(singles_alice), singles_bob=int(singles_bob),
        coincidences=int(coincidences),
        expected_true=0.0,
        expected_accidental=cfg.accidental_rate * duration)


def simulate_scan(state, mask, cfg, offsets, bases=('D', 'A', 'R', 'L'),
                  n_blocks=1, seed=None, delayed_duration=None):
    """Sweep the mask over ``offsets`` for every Alice basis, splitting each
    setting's exposure into ``n_blocks`` equal records. A delayed-trigger
    record of ``delayed_duration`` seconds is appended when requested.
    Every (basis, offset, block) draws from its own sub-stream."""
    if n_blocks < 1:
        raise DomainError("n_blocks must be at least 1")
    seed = cfg.get('rng_seed') if seed is None else seed
    offsets = list(offsets)
    streams = seed_streams(seed, len(bases) * len(offsets) * n_blocks + 1)
    duration = float(cfg['exposure']) / n_blocks
    records = []
    index = 0
    for label in bases:
        alice = states.PolarizationProjector.from_label(label)
        for offset in offsets:
            moved = mask.shifted(offset)
            for block in range(n_blocks):
                records.append(simulate_counts(
                    state, alice, moved, cfg, rng=streams[index],
                    duration=duration, block=block))
                index += 1
    if delayed_duration:
        records.append(simulate_delayed(cfg, streams[index], delayed_duration))
    LOG.debug("simulated %d records", len(records))
    return records


class IccdConfig(_BasisFactors):
    """Gated intensified camera triggered by Alice's detections.
    ``collection_efficiency`` is the chance that Bob's partner photon reaches
    the imaged region; ``trigger_rate`` is the rate of Alice's heralds."""

    _defaults = {
        'quantum_efficiency': 0.2,
        'pixel_pitch': 13e-6,
        'max_trigger_rate': 5e5,
        'gate_window': 5e-9,
        'accidental_rate_per_image': 200.0,
        'frames': 60,
        'exposure_per_frame': 10.0,
        'basis_efficiency': 1.0,
        'mode_contrast': 1.0,
        'rng_seed': None,
    }
    _required = ('trigger_rate', 'collection_efficiency')

    def validate(self):
        super(IccdConfig, self).validate()
        self.require_range('quantum_efficiency', 0, 1)
        self.require_range('collection_efficiency', 0, 1)
        self.require_range('trigger_rate', 0)
        self.require_range('accidental_rate_per_image', 0)
        for key in ('pixel_pitch', 'max_trigger_rate', 'gate_window',
                    'exposure_per_frame', 'frames'):
            self.require_range(key, 0, inclusive_low=False)

    def signal_per_frame(self, label):
        "Expected detected partner photons per frame (trigger-rate capped)"
        triggers = min(float(self['trigger_rate']),
                       float(self['max_trigger_rate']))
        return (triggers * self['exposure_per_frame']
                * self['collection_efficiency'] * self['quantum_efficiency']
                * self.basis_efficiency_for(label))


@dataclasses.dataclass(frozen=True)
class RingSector:
    """Camera window onto part of a ring of the given radius. The window is
    ``width`` x ``height`` pixels centered on the ring at ``center_angle``;
    light is confined radially by a Gaussian of 1/e^2 half-width
    ``radial_width``."""

    radius: float
    radial_width: float
    width: int
    height: int
    pixel_pitch: float = 13e-6
    center_angle: float = 0.0

    def __post_init__(self):
        if not (self.radius > 0 and self.radial_width > 0
                and self.pixel_pitch > 0):
            raise DomainError("ring sector dimensions must be positive")
        if self.width < 2 or self.height < 2:
            raise DomainError("ring sector needs at least 2x2 pixels")

    @classmethod
    def from_config(cls, config, pixel_pitch):
        return cls(parse_quantity(config['radius']),
                   parse_quantity(config['radial_width']),
                   int(config['width']), int(config['height']),
                   float(pixel_pitch),
                   parse_quantity(config.get('center_angle', 0.0)))

    def coordinates(self):
        "Returns (R, THETA) of each pixel center about the ring axis"
        u = (np.arange(self.width) - (self.width - 1) / 2) * self.pixel_pitch
        v = (np.arange(self.height) - (self.height - 1) / 2) * self.pixel_pitch
        u, v = np.meshgrid(u, v, indexing='ij')
        x = self.radius * math.cos(self.center_angle) + u
        y = self.radius * math.sin(self.center_angle) + v
        return np.hypot(x, y), np.arctan2(y, x)

    def envelope(self):
        r, _ = self.coordinates()
        return np.exp(-2 * ((r - self.radius) / self.radial_width) ** 2)

    def pixels_per_fringe(self, l):
        return self.radius * math.pi / (abs(l) * self.pixel_pitch)


def _check_fringe_sampling(pixels_per_fringe):
    if pixels_per_fringe < 2:
        raise SamplingError(
            "fringes span only {:.3g} pixels".format(pixels_per_fringe),
            nyquist_ratio=2.0 / pixels_per_fringe)


def _detector_geometry(detector, l):
    """Returns (envelope, theta) for a RingSector or for the intensity of a
    ComplexField sampled at the camera plane"""
    if isinstance(detector, RingSector):
        _check_fringe_sampling(detector.pixels_per_fringe(l))
        _, theta = detector.coordinates()
        return detector.envelope(), theta
    if isinstance(detector, fields.ComplexField):
        image = fields.intensity(detector)
        radius = fields.peak_ring_radius(image, detector.grid)
        pitch = max(detector.dx, detector.dy)
        _check_fringe_sampling(radius * math.pi / (abs(l) * pitch))
        _, theta = detector.grid.polar()
        return image, theta
    raise DomainError("detector must be a RingSector or a ComplexField")


def expected_iccd_image(state, alice, detector, cfg):
    """Expected summed counts per pixel over all frames: the heralded
    signal spread over the conditional ring pattern, plus uniform
    accidentals"""
    envelope, theta = _detector_geometry(detector, state.l)
    contrast = cfg.contrast_for(alice.label)
    pattern = np.zeros_like(envelope, dtype=float)
    for probability, mode in states.conditional_modes(state, alice):
        pattern += probability * (
            1.0 + contrast * mode.contrast
            * np.cos(2 * mode.l * theta - mode.delta))
    pattern *= envelope
    total = pattern.sum()
    frames = int(cfg['frames'])
    background = np.full(pattern.shape,
                         cfg['accidental_rate_per_image'] * frames / pattern.size)
    if total <= 0:
        return background
    signal = cfg.signal_per_frame(alice.label) * frames
    return signal * pattern / total + background


def simulate_iccd_stack(state, alice, detector, cfg, rng=None):
    """Photon-count image summed over all frames, triggered on Alice's
    ``alice`` outcomes. ``detector`` is a RingSector (ring model, any
    charge) or a ComplexField whose intensity sets the radial envelope."""
    if rng is None:
        rng = np.random.default_rng(cfg.get('rng_seed'))
    expected = expected_iccd_image(state, alice, detector, cfg)
    LOG.debug("ICCD %s stack: %.1f expected counts", alice.label,
              expected.sum())
    return rng.poisson(expected).astype(np.int64)


def simulate_iccd_background(detector, cfg, rng=None):
    """Delayed-trigger stack: accidentals only"""
    if rng is None:
        rng = np.random.default_rng(cfg.get('rng_seed'))
    if isinstance(detector, RingSector):
        shape = (detector.width, detector.height)
    else:
        shape = detector.grid.shape
    frames = int(cfg['frames'])
    expected = cfg['accidental_rate_per_image'] * frames / (shape[0] * shape[1])
    return rng.poisson(np.full(shape, expected)).astype(np.int64)
