"""
Segmented spiral phase mirrors. The mirror surface is cut into ``n`` equal
angular segments, each a ramp whose depth grows linearly with azimuth
(``d = l*s*wavelength/(4*pi)`` for segment-local angle ``s``) and resets to
zero at the next segment. On reflection the path difference ``2d`` imprints
the phase ``4*pi*d/wavelength``, which modulo 2 pi is the spiral phase
``l*phi`` whenever ``l/n`` is an integer.

Positive charges ramp up with azimuth; negative charges ramp down, so depth
is always in ``[0, |l|*wavelength/(2n)]``. A central disk of radius
``uncut_radius`` is left flat.
"""
import dataclasses
import functools
import logging
import math

import numpy as np

from . import fields
from .exceptions import DomainError
from .units import TWO_PI, parse_quantity

LOG = logging.getLogger('liboam.mirrors')


@dataclasses.dataclass(frozen=True)
class SpmProfile:
    """Description of one segmented spiral phase mirror"""

    charge: int
    segments: int = 1
    wavelength: float = 810e-9
    uncut_radius: float = 0.0
    rotation: float = 0.0
    center: tuple = (0.0, 0.0)

    def __post_init__(self):
        if int(self.charge) != self.charge:
            raise DomainError("charge must be an integer")
        if int(self.segments) != self.segments or self.segments < 1:
            raise DomainError("segments must be a positive integer")
        if not self.wavelength > 0:
            raise DomainError("wavelength must be positive")
        if self.uncut_radius < 0:
            raise DomainError("uncut radius must be non-negative")
        object.__setattr__(self, 'center', tuple(self.center))
        if self.seam_defect:
            LOG.warning(
                "charge %d over %d segments is not an integer ramp: each "
                "seam carries a %.4g rad phase defect", self.charge,
                self.segments, self.seam_defect)

    @classmethod
    def from_config(cls, config):
        """Build a profile from scenario keys l, n, wavelength,
        uncut_radius, rotation and center"""
        return cls(
            charge=int(config['l']),
            segments=int(config.get('n', 1)),
            wavelength=parse_quantity(config.get('wavelength', 810e-9)),
            uncut_radius=parse_quantity(config.get('uncut_radius', 0.0)),
            rotation=parse_quantity(config.get('rotation', 0.0)),
            center=tuple(parse_quantity(c)
                         for c in config.get('center', (0.0, 0.0))))

    def to_config(self):
        return {'l': self.charge, 'n': self.segments,
                'wavelength': self.wavelength,
                'uncut_radius': self.uncut_radius,
                'rotation': self.rotation, 'center': list(self.center)}

    @property
    def segment_angle(self):
        "Azimuthal extent of one segment (radians)"
        return TWO_PI / self.segments

    @property
    def segment_phase_span(self):
        "Phase ramp imprinted across one segment, 2*pi*l/n (signed)"
        return TWO_PI * self.charge / self.segments

    @property
    def max_depth(self):
        "Deepest cut of any segment, |l|*wavelength/(2n)"
        return abs(self.charge) * self.wavelength / (2 * self.segments)

    @property
    def seam_defect(self):
        """Phase jump left at each segment boundary, 2*pi*frac(|l|/n);
        zero for integer ramps"""
        remainder = abs(self.charge) % self.segments
        return TWO_PI * remainder / self.segments

    def rotated(self, delta):
        "Returns a copy mounted ``delta`` radians further round"
        return dataclasses.replace(self, rotation=self.rotation + delta)


def surface_depth(profile, phi, r):
    """Surface depth (meters) at azimuth ``phi`` and radius ``r`` measured
    from the mirror center; accepts arrays"""
    phi = np.asarray(phi, dtype=float)
    local = np.mod(np.mod(phi - profile.rotation, TWO_PI),
                   profile.segment_angle)
    scale = abs(profile.charge) * profile.wavelength / (4 * math.pi)
    if profile.charge >= 0:
        depth = scale * local
    else:
        depth = scale * (profile.segment_angle - local)
    return np.where(np.asarray(r) < profile.uncut_radius, 0.0, depth)


def reflection_phase(profile, x, y):
    "Phase (radians) imprinted on reflection at lab coordinates (x, y)"
    dx = np.asarray(x) - profile.center[0]
    dy = np.asarray(y) - profile.center[1]
    depth = surface_depth(profile, np.arctan2(dy, dx), np.hypot(dx, dy))
    return 4 * math.pi * depth / profile.wavelength


def phase_map(profile):
    "Returns a callable (x, y) -> phase suitable for fields.apply_phase"
    return functools.partial(reflection_phase, profile)


def reflect(field, profile, supersample=1):
    """Reflect a field off the mirror (unit reflectivity); ``supersample``
    is passed to :func:`fields.apply_phase`"""
    return fields.apply_phase(field, phase_map(profile), supersample)


def export_heightmap(profile, grid):
    "Sampled surface depth (meters) over the grid"
    x, y = grid.mesh()
    x = x - profile.center[0]
    y = y - profile.center[1]
    return surface_depth(profile, np.arctan2(y, x), np.hypot(x, y))


def count_ramp_resets(heightmap, grid, radius, n_samples=None,
                      center=(0.0, 0.0)):
    """Count segment boundaries crossed by a circle on a sampled height map.
    The map is sampled at nearest pixels around the circle and every jump
    larger than half the depth range is a ridge crossing. Crossings against
    the ramp direction cancel pixel-level back-steps, so the net count is
    the number of ridges."""
    if radius <= 0 or radius > grid.inscribed_radius(center):
        raise DomainError("radius {:.4g} m leaves the grid".format(radius))
    if n_samples is None:
        n_samples = int(8 * math.ceil(TWO_PI * radius / min(grid.dx, grid.dy)))
    theta = TWO_PI * np.arange(n_samples) / n_samples
    ix, iy = grid.to_index(center[0] + radius * np.cos(theta),
                           center[1] + radius * np.sin(theta))
    ix = np.clip(np.rint(ix).astype(int), 0, grid.nx - 1)
    iy = np.clip(np.rint(iy).astype(int), 0, grid.ny - 1)
    ring = np.asarray(heightmap)[ix, iy]
    span = ring.max() - ring.min()
    if span <= 0:
        return 0
    jumps = np.diff(np.append(ring, ring[0]))
    drops = int(np.count_nonzero(jumps < -span / 2))
    rises = int(np.count_nonzero(jumps > span / 2))
    LOG.debug("ramp resets on r=%.4g: %d drops, %d rises", radius, drops,
              rises)
    return abs(drops - rises)
