"""
Sampled complex scalar fields on a regular grid, Gaussian and
Laguerre-Gaussian sources, phase-mask application and angular-spectrum
propagation.

Sample ``(i, j)`` of a grid sits at ``((i - nx/2)*dx, (j - ny/2)*dy)`` and
arrays are indexed ``[i, j]`` (x first). Every phase mask applied to a field
is checked for sampling validity: the local phase step between neighbouring
samples is measured from the analytic mask, and the share of beam power
sitting on samples whose step reaches pi is carried with the field. Any
operation that relies on the sampled spectrum refuses to run when that share
exceeds :data:`ALIAS_POWER_TOLERANCE`, e.g.::

    from liboam import fields
    grid = fields.GridSpec(512, 512, 50e-6, 50e-6, 810e-9)
    beam = fields.gaussian_beam(grid, 2.5e-3)
    vortex = fields.apply_phase(beam, lambda x, y: 8 * np.arctan2(y, x),
                                supersample=fields.SUPERSAMPLE)
    lens_plane = fields.far_field(vortex, focal_length=0.5, pad=2)

"""
import dataclasses
import logging
import math

import numpy as np
from scipy import fft, ndimage

from .exceptions import DomainError, SamplingError
from .units import TWO_PI, wrap_phase

LOG = logging.getLogger('liboam.fields')

#: Largest share of beam power allowed on samples whose local phase step is
#: at least pi before propagation refuses to run. The step rule is applied to
#: the brightest samples holding the rest of the power: the samples next to a
#: phase singularity always step by pi or more, whatever the grid.
ALIAS_POWER_TOLERANCE = 0.05

#: Sub-samples per cell side used when a vortex mask is applied for the
#: rendered mode. The cell-averaged singularity leaves the on-axis far-field
#: intensity below 1e-6 of the ring peak.
SUPERSAMPLE = 16

#: A waist must span at least this many samples.
MIN_WAIST_SAMPLES = 4

#: Relative finite-difference step used to measure local phase gradients.
_GRADIENT_STEP = 1e-3


@dataclasses.dataclass(frozen=True)
class GridSpec:
    """Sample counts, sample pitch (meters) and wavelength (meters) of a
    regular transverse grid."""

    nx: int
    ny: int
    dx: float
    dy: float
    wavelength: float

    def __post_init__(self):
        if int(self.nx) != self.nx or int(self.ny) != self.ny:
            raise DomainError("grid sample counts must be integers")
        if self.nx < 2 or self.ny < 2:
            raise DomainError(
                "grid needs at least 2x2 samples, got {}x{}".format(
                    self.nx, self.ny))
        if not (self.dx > 0 and self.dy > 0):
            raise DomainError("sample pitch must be positive")
        if not self.wavelength > 0:
            raise DomainError("wavelength must be positive")

    @classmethod
    def square(cls, n, pitch, wavelength):
        "Returns an n x n grid with equal pitch along both axes"
        return cls(int(n), int(n), float(pitch), float(pitch),
                   float(wavelength))

    @property
    def shape(self):
        return (self.nx, self.ny)

    @property
    def x(self):
        "1-D sample positions along x"
        return (np.arange(self.nx) - self.nx / 2) * self.dx

    @property
    def y(self):
        "1-D sample positions along y"
        return (np.arange(self.ny) - self.ny / 2) * self.dy

    @property
    def area(self):
        "Area of one sample cell"
        return self.dx * self.dy

    @property
    def wavenumber(self):
        return TWO_PI / self.wavelength

    def mesh(self):
        "Returns (X, Y) coordinate arrays of shape (nx, ny)"
        return np.meshgrid(self.x, self.y, indexing='ij')

    def polar(self, center=(0.0, 0.0)):
        "Returns (R, THETA) arrays about ``center``"
        x, y = self.mesh()
        x = x - center[0]
        y = y - center[1]
        return np.hypot(x, y), np.arctan2(y, x)

    def contains(self, x, y):
        "True when the point lies within the sampled plane"
        return (self.x[0] <= x <= self.x[-1]) and (self.y[0] <= y <= self.y[-1])

    def inscribed_radius(self, center=(0.0, 0.0)):
        "Radius of the largest circle about center that stays on the grid"
        return min(center[0] - self.x[0], self.x[-1] - center[0],
                   center[1] - self.y[0], self.y[-1] - center[1])

    def to_index(self, x, y):
        "Convert physical coordinates to fractional array indices"
        return (np.asarray(x) / self.dx + self.nx / 2,
                np.asarray(y) / self.dy + self.ny / 2)

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)


@dataclasses.dataclass(frozen=True)
class ComplexField:
    """A sampled complex scalar field. ``aliased_fraction`` is the share of
    power on samples whose applied phase steps by pi or more between
    neighbours, ``nyquist_ratio`` the local step (in units of pi) that all
    but :data:`ALIAS_POWER_TOLERANCE` of the power stays below."""

    amplitudes: np.ndarray
    grid: GridSpec
    aliased_fraction: float = 0.0
    nyquist_ratio: float = 0.0

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=np.complex128)
        if amps.shape != self.grid.shape:
            raise DomainError("amplitude shape {} does not match grid {}".format(
                amps.shape, self.grid.shape))
        object.__setattr__(self, 'amplitudes', amps)

    @property
    def nx(self):
        return self.grid.nx

    @property
    def ny(self):
        return self.grid.ny

    @property
    def dx(self):
        return self.grid.dx

    @property
    def dy(self):
        return self.grid.dy

    @property
    def wavelength(self):
        return self.grid.wavelength

    def power(self):
        "Total power, the sum of |amplitude|^2 dx dy"
        return float(np.sum(np.abs(self.amplitudes) ** 2) * self.grid.area)

    def normalized(self):
        "Returns the field scaled to unit total power"
        power = self.power()
        if power <= 0:
            raise DomainError("can't normalize a field with zero power")
        return self.with_amplitudes(self.amplitudes / math.sqrt(power))

    def with_amplitudes(self, amplitudes, **changes):
        "Returns a field on the same grid, keeping the sampling metadata"
        return dataclasses.replace(self, amplitudes=amplitudes, **changes)

    def copy(self):
        return self.with_amplitudes(self.amplitudes.copy())

    def __add__(self, other):
        if not isinstance(other, ComplexField):
            return NotImplemented
        if other.grid != self.grid:
            raise DomainError("can't add fields sampled on different grids")
        return ComplexField(
            self.amplitudes + other.amplitudes, self.grid,
            aliased_fraction=max(self.aliased_fraction, other.aliased_fraction),
            nyquist_ratio=max(self.nyquist_ratio, other.nyquist_ratio))

    def __mul__(self, scalar):
        if not np.isscalar(scalar):
            return NotImplemented
        return self.with_amplitudes(self.amplitudes * scalar)

    __rmul__ = __mul__


def _weighted_quantile(values, weights, quantile):
    order = np.argsort(values, axis=None)
    values = values.ravel()[order]
    cumulative = np.cumsum(weights.ravel()[order])
    if cumulative[-1] <= 0:
        return 0.0
    cumulative /= cumulative[-1]
    return float(values[min(np.searchsorted(cumulative, quantile),
                            len(values) - 1)])


def suggested_grid_size(n, nyquist_ratio):
    """Smallest power-of-two sample count that brings a grid of ``n``
    samples (same physical extent) below a Nyquist ratio of 1."""
    if nyquist_ratio < 1:
        required = n
    else:
        required = int(math.ceil(n * nyquist_ratio * 1.05))
    return 2 ** int(math.ceil(math.log2(required)))


def local_phase_step(phase_map, grid):
    """Measure the magnitude of the phase change between neighbouring
    samples of an analytic phase map. The map is evaluated at a small offset
    around each sample, so ramp resets by whole multiples of 2 pi are
    invisible while genuine gradients are not. Returns the larger of the x
    and y steps, in radians per sample."""
    x, y = grid.mesh()
    hx = _GRADIENT_STEP * grid.dx
    hy = _GRADIENT_STEP * grid.dy
    step_x = np.abs(wrap_phase(
        np.asarray(phase_map(x + hx, y)) - np.asarray(phase_map(x - hx, y))))
    step_y = np.abs(wrap_phase(
        np.asarray(phase_map(x, y + hy)) - np.asarray(phase_map(x, y - hy))))
    step = np.maximum(step_x * grid.dx / (2 * hx), step_y * grid.dy / (2 * hy))
    return np.broadcast_to(step, grid.shape)


def _cell_phasor(phase_map, grid, supersample):
    """Mean of ``exp(i*phase_map)`` over a ``supersample`` x ``supersample``
    lattice of sub-samples centred in each cell. One sub-sample reduces to
    the value at the sample itself."""
    x, y = grid.mesh()
    offsets = (np.arange(supersample) + 0.5) / supersample - 0.5
    total = np.zeros(grid.shape, dtype=np.complex128)
    for ox in offsets:
        for oy in offsets:
            total += np.exp(1j * np.asarray(
                phase_map(x + ox * grid.dx, y + oy * grid.dy), dtype=float))
    return total / supersample ** 2


def apply_phase(field, phase_map, supersample=1):
    """Multiply the field by ``exp(i*phase_map(x, y))``. ``phase_map`` takes
    coordinate arrays (meters) and returns phases in radians; it may return
    a scalar. Power is unchanged. The sampling metadata of the result
    describes the worse of the incoming field and this mask.

    With ``supersample`` above 1 each sample takes the mask averaged over its
    cell, the way a pixelated mask acts, and the result is rescaled to the
    incoming power. A phase singularity then has a dark core of its own
    instead of one sample of arbitrary phase; see :data:`SUPERSAMPLE`."""
    if supersample < 1 or int(supersample) != supersample:
        raise DomainError("supersample must be a positive integer")
    amplitudes = field.amplitudes * _cell_phasor(
        phase_map, field.grid, int(supersample))
    if supersample > 1:
        before = np.sum(np.abs(field.amplitudes) ** 2)
        after = np.sum(np.abs(amplitudes) ** 2)
        if after > 0:
            amplitudes *= math.sqrt(before / after)
    step = local_phase_step(phase_map, field.grid)
    weights = np.abs(field.amplitudes) ** 2
    total = weights.sum()
    if total > 0:
        aliased = float(weights[step >= math.pi].sum() / total)
        ratio = _weighted_quantile(
            step / math.pi, weights, 1.0 - ALIAS_POWER_TOLERANCE)
    else:
        aliased, ratio = 0.0, 0.0
    LOG.debug("phase mask: aliased power %.3g, nyquist ratio %.3g",
              aliased, ratio)
    return ComplexField(
        amplitudes, field.grid,
        aliased_fraction=max(field.aliased_fraction, aliased),
        nyquist_ratio=max(field.nyquist_ratio, ratio))


def check_sampling(field, tolerance=ALIAS_POWER_TOLERANCE):
    """Raise a :class:`SamplingError` when too much of the field's power sits
    on under-sampled phase structure"""
    if field.aliased_fraction > tolerance:
        raise SamplingError(
            "{:.1%} of the beam power lies on samples whose phase steps by "
            "pi or more".format(field.aliased_fraction),
            nyquist_ratio=field.nyquist_ratio,
            suggested_size=suggested_grid_size(
                max(field.nx, field.ny), field.nyquist_ratio))
    return field


def gaussian_beam(grid, waist, center=(0.0, 0.0)):
    """Returns a unit-power Gaussian field with amplitude
    ``exp(-r^2/waist^2)`` about ``center``."""
    if waist <= 0:
        raise DomainError("waist must be positive")
    if waist < MIN_WAIST_SAMPLES * max(grid.dx, grid.dy):
        raise SamplingError(
            "waist of {:.3g} m spans fewer than {} samples".format(
                waist, MIN_WAIST_SAMPLES))
    if not grid.contains(*center):
        raise DomainError("beam center {} lies outside the grid".format(center))
    r, _ = grid.polar(center)
    return ComplexField(np.exp(-(r / waist) ** 2), grid).normalized()


def laguerre_gaussian_beam(grid, waist, charge, center=(0.0, 0.0)):
    """Returns a unit-power Laguerre-Gaussian ring mode (radial index 0)
    carrying ``charge`` quanta of OAM"""
    beam = gaussian_beam(grid, waist, center)
    r, _ = grid.polar(center)
    radial = (math.sqrt(2) * r / waist) ** abs(charge)
    ring = beam.with_amplitudes(beam.amplitudes * radial).normalized()
    cx, cy = center
    return apply_phase(
        ring, lambda x, y: charge * np.arctan2(y - cy, x - cx))


def intensity(field):
    "Returns |amplitude|^2 elementwise"
    return np.abs(field.amplitudes) ** 2


def propagate(field, distance):
    """Angular-spectrum propagation over ``distance`` meters. Evanescent
    spatial frequencies are discarded."""
    if distance < 0:
        raise DomainError("propagation distance must be non-negative")
    check_sampling(field)
    if distance == 0:
        return field.copy()
    grid = field.grid
    kx = TWO_PI * fft.fftfreq(grid.nx, grid.dx)
    ky = TWO_PI * fft.fftfreq(grid.ny, grid.dy)
    kx, ky = np.meshgrid(kx, ky, indexing='ij')
    kz_squared = grid.wavenumber ** 2 - kx ** 2 - ky ** 2
    propagating = kz_squared > 0
    transfer = np.zeros(grid.shape, dtype=np.complex128)
    transfer[propagating] = np.exp(
        1j * distance * np.sqrt(kz_squared[propagating]))
    LOG.debug("propagating %.4g m on %dx%d grid", distance, grid.nx, grid.ny)
    spectrum = fft.fft2(field.amplitudes)
    return field.with_amplitudes(fft.ifft2(spectrum * transfer))


def far_field(field, focal_length, pad=1):
    """Field in the back focal plane of a thin lens of the given focal
    length, computed with one (zero-padded) Fourier transform. The output
    grid pitch is ``wavelength*focal_length/(pad*n*pitch)``; power is
    conserved."""
    if focal_length <= 0:
        raise DomainError("focal length must be positive")
    if pad < 1 or int(pad) != pad:
        raise DomainError("pad must be a positive integer")
    check_sampling(field)
    grid = field.grid
    nx, ny = int(pad * grid.nx), int(pad * grid.ny)
    padded = np.zeros((nx, ny), dtype=np.complex128)
    ox, oy = nx // 2 - grid.nx // 2, ny // 2 - grid.ny // 2
    padded[ox:ox + grid.nx, oy:oy + grid.ny] = field.amplitudes
    out_grid = GridSpec(
        nx, ny,
        grid.wavelength * focal_length / (nx * grid.dx),
        grid.wavelength * focal_length / (ny * grid.dy),
        grid.wavelength)
    spectrum = fft.fftshift(fft.fft2(fft.ifftshift(padded)))
    scale = math.sqrt(grid.area / (nx * ny * out_grid.area))
    return ComplexField(spectrum * scale, out_grid,
                        aliased_fraction=field.aliased_fraction,
                        nyquist_ratio=field.nyquist_ratio)


def azimuthal_profile(image, grid, radius, n_samples, center=(0.0, 0.0)):
    """Bilinear samples of a 2-D array at ``n_samples`` equally spaced angles
    (starting at 0) on the circle of the given radius. Fewer than 8 samples
    per circle is allowed but usually aliases any fringe pattern."""
    if n_samples < 1:
        raise DomainError("n_samples must be at least 1")
    if n_samples < 8:
        LOG.warning("azimuthal profile with only %d samples", n_samples)
    if radius < 0 or radius > grid.inscribed_radius(center):
        raise DomainError(
            "radius {:.4g} m leaves the sampled grid".format(radius))
    theta = TWO_PI * np.arange(n_samples) / n_samples
    ix, iy = grid.to_index(center[0] + radius * np.cos(theta),
                           center[1] + radius * np.sin(theta))
    return ndimage.map_coordinates(
        np.asarray(image, dtype=float), [ix, iy], order=1, mode='nearest')


def second_moment_radius(field):
    """Beam radius ``sqrt(2<r^2>)`` about the intensity centroid; equals the
    1/e amplitude waist for a Gaussian"""
    weights = intensity(field)
    total = weights.sum()
    if total <= 0:
        raise DomainError("field has no power")
    x, y = field.grid.mesh()
    cx = (weights * x).sum() / total
    cy = (weights * y).sum() / total
    r2 = (weights * ((x - cx) ** 2 + (y - cy) ** 2)).sum() / total
    return math.sqrt(2 * r2)


def peak_ring_radius(image, grid, center=(0.0, 0.0)):
    """Radius (meters) of the brightest ring, from the azimuthally averaged
    radial profile binned at one sample pitch"""
    r, _ = grid.polar(center)
    pitch = min(grid.dx, grid.dy)
    bins = np.rint(r / pitch).astype(int).ravel()
    sums = np.bincount(bins, weights=np.asarray(image, dtype=float).ravel())
    counts = np.bincount(bins)
    limit = int(grid.inscribed_radius(center) / pitch)
    means = sums[:limit + 1] / np.maximum(counts[:limit + 1], 1)
    return float(np.argmax(means) * pitch)
