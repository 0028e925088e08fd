"""
The hybrid polarization/OAM two-photon state and the conditional OAM modes
Bob's photon is projected into when Alice measures her polarization.

Conventions: Alice's H is paired with +l and V with -l, and
``R = (H + iV)/sqrt(2)``. A conditional mode ``c+|+l> + c-|-l>`` observed on
a ring has the azimuthal intensity ``1 + 2|c+||c-|cos(2*l*theta - delta)``
with ``delta = arg(c-) - arg(c+)``, so the first of its ``2l`` maxima sits
at ``delta/(2l)``. The ring representation carries no radial profile and is
exact for any charge.
"""
import dataclasses
import logging
import math

import numpy as np

from . import fields
from .exceptions import (
    DegenerateTransferError, DomainError, OrthogonalProjectionError,
    UndefinedOrientationError)
from .units import TWO_PI, parse_quantity, wrap_angle, wrap_phase

LOG = logging.getLogger('liboam.states')

#: Heralding probabilities below this mean Alice's projector never fires.
MIN_HERALDING_PROBABILITY = 1e-15

_NORM_TOLERANCE = 1e-12
_SQRT_HALF = math.sqrt(0.5)

#: Jones vectors of the standard polarization labels on the {H, V} basis.
STANDARD_POLARIZATIONS = {
    'H': (1.0 + 0j, 0j),
    'V': (0j, 1.0 + 0j),
    'D': (_SQRT_HALF + 0j, _SQRT_HALF + 0j),
    'A': (_SQRT_HALF + 0j, -_SQRT_HALF + 0j),
    'R': (_SQRT_HALF + 0j, 1j * _SQRT_HALF),
    'L': (_SQRT_HALF + 0j, -1j * _SQRT_HALF),
}

#: Orthogonal partner of each standard label.
PARTNERS = {'H': 'V', 'V': 'H', 'D': 'A', 'A': 'D', 'R': 'L', 'L': 'R'}


def _fix_global_phase(vector):
    "Rotate a Jones vector so its first non-zero component is real positive"
    pivot = vector[0] if abs(vector[0]) > 1e-12 else vector[1]
    return vector * np.exp(-1j * np.angle(pivot))


def half_wave_plate(angle):
    "Jones matrix of a half-wave plate with its fast axis at ``angle``"
    c, s = math.cos(2 * angle), math.sin(2 * angle)
    return np.array([[c, s], [s, -c]], dtype=complex)


def quarter_wave_plate(angle):
    "Jones matrix of a quarter-wave plate with its fast axis at ``angle``"
    c, s = math.cos(angle), math.sin(angle)
    return np.exp(-1j * math.pi / 4) * np.array(
        [[c * c + 1j * s * s, (1 - 1j) * s * c],
         [(1 - 1j) * s * c, s * s + 1j * c * c]], dtype=complex)


@dataclasses.dataclass(frozen=True)
class PolarizationProjector:
    """A polarization projector: a unit Jones vector on the {H, V} basis and
    a label (one of H, V, D, A, R, L, or a waveplate description)"""

    label: str
    vector: tuple

    def __post_init__(self):
        vector = tuple(complex(v) for v in self.vector)
        if len(vector) != 2:
            raise DomainError("a Jones vector has two components")
        norm = math.hypot(abs(vector[0]), abs(vector[1]))
        if abs(norm - 1.0) > _NORM_TOLERANCE:
            raise DomainError(
                "projector {} is not normalized (norm {})".format(
                    self.label, norm))
        object.__setattr__(self, 'vector', vector)

    @classmethod
    def from_label(cls, label):
        try:
            return cls(label, STANDARD_POLARIZATIONS[label])
        except KeyError:
            raise DomainError("unknown polarization label '{}'".format(label))

    @classmethod
    def from_waveplates(cls, hwp, qwp):
        """Projector selected by a quarter-wave plate at ``qwp`` followed by
        a half-wave plate at ``hwp`` (radians) and the transmitted port of a
        polarizing beam splitter. Matching standard labels are recognised,
        eg. hwp=22.5 deg with qwp=45 deg selects D."""
        optics = half_wave_plate(hwp) @ quarter_wave_plate(qwp)
        vector = _fix_global_phase(optics.conj().T @ np.array([1.0, 0.0]))
        for label, standard in STANDARD_POLARIZATIONS.items():
            if abs(abs(np.vdot(standard, vector)) - 1.0) < 1e-9:
                return cls(label, tuple(_fix_global_phase(np.array(standard))))
        return cls("HWP{:.2f}/QWP{:.2f}".format(
            math.degrees(hwp), math.degrees(qwp)), tuple(vector))

    @classmethod
    def from_config(cls, config):
        "A label string, or a mapping with hwp and qwp angles"
        if isinstance(config, str):
            return cls.from_label(config)
        return cls.from_waveplates(parse_quantity(config['hwp']),
                                   parse_quantity(config['qwp']))

    @property
    def h(self):
        return self.vector[0]

    @property
    def v(self):
        return self.vector[1]

    def partner(self):
        "The orthogonal projector, completing the basis"
        if self.label in PARTNERS:
            return self.from_label(PARTNERS[self.label])
        h, v = self.vector
        return PolarizationProjector(
            "perp({})".format(self.label), (-v.conjugate(), h.conjugate()))

    def overlap(self, other):
        "Returns <self|other>"
        return complex(np.vdot(self.vector, other.vector))


@dataclasses.dataclass(frozen=True)
class HybridState:
    """``a|H>|+l> + exp(i*phi_rel)*b|V>|-l>``: Alice holds the polarization,
    Bob the OAM"""

    a: float
    b: float
    phi_rel: float = 0.0
    l: int = 1

    def __post_init__(self):
        if self.a < 0 or self.b < 0:
            raise DomainError("amplitudes a and b must be non-negative")
        if abs(self.a ** 2 + self.b ** 2 - 1.0) > _NORM_TOLERANCE:
            raise DomainError("a^2 + b^2 must equal 1")
        if int(self.l) != self.l or self.l < 1:
            raise DomainError("charge l must be a positive integer")

    @classmethod
    def maximally_entangled(cls, l, phi_rel=0.0):
        return cls(_SQRT_HALF, _SQRT_HALF, phi_rel, int(l))

    @classmethod
    def from_config(cls, config):
        a = float(config.get('a', _SQRT_HALF))
        b = float(config.get('b', math.sqrt(max(0.0, 1 - a * a))))
        norm = math.hypot(a, b)
        return cls(a / norm, b / norm, parse_quantity(config.get('phi_rel', 0)),
                   int(config['l']))

    def to_config(self):
        return {'a': self.a, 'b': self.b, 'phi_rel': self.phi_rel, 'l': self.l}

    @property
    def is_product(self):
        return self.a < _NORM_TOLERANCE or self.b < _NORM_TOLERANCE

    def components(self):
        "A pure state is a one-element mixture"
        return [(1.0, self)]


@dataclasses.dataclass(frozen=True)
class StateMixture:
    """Classical mixture of hybrid states, given as (weight, HybridState)
    pairs. Weights are normalized on construction."""

    members: tuple

    def __post_init__(self):
        members = tuple((float(w), s) for w, s in self.members)
        if not members:
            raise DomainError("a mixture needs at least one member")
        total = sum(w for w, _ in members)
        if total <= 0 or any(w < 0 for w, _ in members):
            raise DomainError("mixture weights must be non-negative")
        charges = {s.l for _, s in members}
        if len(charges) != 1:
            raise DomainError("all mixture members must share one charge")
        object.__setattr__(
            self, 'members', tuple((w / total, s) for w, s in members))

    @classmethod
    def classically_correlated(cls, l, weight_h=0.5):
        """``|H>|+l>`` and ``|V>|-l>`` mixed without coherence: perfect
        correlation in the H/V basis and none in D/A or R/L"""
        return cls(((weight_h, HybridState(1.0, 0.0, 0.0, l)),
                    (1.0 - weight_h, HybridState(0.0, 1.0, 0.0, l))))

    @property
    def l(self):
        return self.members[0][1].l

    def components(self):
        return list(self.members)


@dataclasses.dataclass(frozen=True)
class RingMode:
    """Normalized conditional OAM superposition ``c+|+l> + c-|-l>``"""

    c_plus: complex
    c_minus: complex
    l: int
    ring_radius: float = 0.0

    def __post_init__(self):
        norm = abs(self.c_plus) ** 2 + abs(self.c_minus) ** 2
        if abs(norm - 1.0) > _NORM_TOLERANCE:
            raise DomainError("ring mode is not normalized")
        if int(self.l) != self.l or self.l < 1:
            raise DomainError("charge l must be a positive integer")

    @classmethod
    def superposition(cls, l, theta=0.0, ring_radius=0.0):
        "Equal-weight superposition ``|+l> + exp(i*theta)|-l>``"
        return cls(_SQRT_HALF + 0j, _SQRT_HALF * np.exp(1j * theta), int(l),
                   ring_radius)

    @property
    def delta(self):
        "Relative phase arg(c-) - arg(c+)"
        return float(np.angle(self.c_minus) - np.angle(self.c_plus))

    @property
    def contrast(self):
        "Fringe visibility 2|c+||c-| of the ring pattern"
        return 2 * abs(self.c_plus) * abs(self.c_minus)

    @property
    def fringe_period(self):
        "Angular distance between neighbouring maxima, pi/l"
        return math.pi / self.l


def _polarization_vector(pol_in):
    if isinstance(pol_in, PolarizationProjector):
        return np.array(pol_in.vector)
    if isinstance(pol_in, str):
        return np.array(PolarizationProjector.from_label(pol_in).vector)
    vector = np.asarray(pol_in, dtype=complex)
    norm = np.linalg.norm(vector)
    if vector.shape != (2,) or norm == 0:
        raise DomainError("input polarization must be a non-zero 2-vector")
    return vector / norm


def transfer(pol_in, l1, l2=0):
    """Cascaded polarization-to-OAM transfer: the H part of the input picks
    up ``+(l1 + l2)`` quanta and the V part ``-(l1 + l2)``."""
    charge = int(l1) + int(l2)
    if charge == 0:
        raise DegenerateTransferError(l1, l2)
    if charge < 0:
        raise DomainError(
            "net transfer charge {} is negative; swap the arm convention "
            "instead".format(charge))
    h, v = _polarization_vector(pol_in)
    a, b = abs(h), abs(v)
    norm = math.hypot(a, b)
    phi_rel = 0.0
    if a > _NORM_TOLERANCE and b > _NORM_TOLERANCE:
        phi_rel = float(wrap_phase(np.angle(v) - np.angle(h)))
    LOG.debug("transfer %d + %d: a=%.6g b=%.6g phi=%.6g", l1, l2, a, b,
              phi_rel)
    return HybridState(a / norm, b / norm, phi_rel, charge)


def conditional_mode(state, alice, ring_radius=0.0):
    """Project Alice's photon onto ``alice``. Returns Bob's normalized
    conditional RingMode and the heralding probability."""
    c_plus = state.a * alice.h.conjugate()
    c_minus = np.exp(1j * state.phi_rel) * state.b * alice.v.conjugate()
    probability = abs(c_plus) ** 2 + abs(c_minus) ** 2
    if probability < MIN_HERALDING_PROBABILITY:
        raise OrthogonalProjectionError(alice.label, probability)
    norm = math.sqrt(probability)
    return RingMode(complex(c_plus / norm), complex(c_minus / norm), state.l,
                    ring_radius), probability


def conditional_modes(state, alice, ring_radius=0.0):
    """Conditional modes of a pure state or mixture as (probability,
    RingMode) pairs, skipping members Alice's projector can't herald. The
    probabilities sum to the total heralding probability."""
    retval = []
    for weight, member in state.components():
        try:
            mode, probability = conditional_mode(member, alice, ring_radius)
        except OrthogonalProjectionError:
            continue
        retval.append((weight * probability, mode))
    return retval


def ring_intensity(mode, theta):
    "Intensity on the ring at azimuth theta (scalar or array)"
    theta = np.asarray(theta, dtype=float)
    return 1.0 + mode.contrast * np.cos(2 * mode.l * theta - mode.delta)


def pattern_orientation(mode):
    """Angular position (degrees) of the first maximum of the ring pattern,
    in ``[0, 360/(2l))``"""
    if abs(mode.c_plus) < _NORM_TOLERANCE or abs(mode.c_minus) < _NORM_TOLERANCE:
        raise UndefinedOrientationError(
            "a pure vortex ring has no intensity maxima")
    gamma = wrap_angle(mode.delta / (2 * mode.l), mode.fringe_period)
    return math.degrees(gamma)


def rotated_mode(mode, alpha):
    """Mode produced when the mirror imprinting +l is rotated by alpha: the
    +l component picks up ``exp(-i*l*alpha)``"""
    return dataclasses.replace(
        mode, c_plus=complex(mode.c_plus * np.exp(-1j * mode.l * alpha)))


def rotation_fringe(source, alpha, theta_fixed=0.0, l=None):
    """Intensity at a fixed azimuth while one arm's mirror is rotated by
    alpha (scalar or array). ``source`` is a RingMode or a HybridState; for
    the latter (and for a diagonally polarized laser) the D-projected mode
    is used. ``l`` overrides the charge."""
    if isinstance(source, RingMode):
        mode = source
    else:
        mode, _ = conditional_mode(source, PolarizationProjector.from_label('D'))
    charge = mode.l if l is None else int(l)
    alpha = np.asarray(alpha, dtype=float)
    return 1.0 + mode.contrast * np.cos(
        2 * charge * theta_fixed - charge * alpha - mode.delta)


def max_to_min_rotation(l):
    "Mirror rotation (radians) that turns a fringe maximum into a minimum"
    return math.pi / abs(int(l))


def sample_ring(mode, n_samples):
    "Returns (theta, intensity) at n equally spaced azimuths"
    theta = TWO_PI * np.arange(n_samples) / n_samples
    return theta, ring_intensity(mode, theta)


def superposition_field(mode, grid, waist, center=(0.0, 0.0)):
    """Grid model of a conditional mode: Laguerre-Gaussian rings of charge
    +l and -l weighted by c+ and c-. Subject to the usual sampling limits."""
    plus = fields.laguerre_gaussian_beam(grid, waist, mode.l, center)
    minus = fields.laguerre_gaussian_beam(grid, waist, -mode.l, center)
    return plus * mode.c_plus + minus * mode.c_minus
