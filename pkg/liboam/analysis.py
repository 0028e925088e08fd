"""
Analysis chain for coincidence data: coincidence-window estimation,
accidental subtraction, constrained sin^2 fringe fitting, visibilities and
the two-basis entanglement witness, block statistics, and OAM estimation
from mirror-rotation fringes.

Counts carry Poisson uncertainties through :mod:`uncertainties`; fits use
:mod:`lmfit` with bounded parameters. Fringe fits describe every Alice basis
``k`` with one shared offset ``x0`` and fixed relative shifts::

    R_k(x) = o_k + a_k * sin^2(pi * (x - x0 - s_k) / P)

parameterized by the mean level ``m_k`` and visibility ``V_k`` so that
``o_k = m_k(1 - V_k) >= 0`` and ``0 <= V_k <= 1`` hold by construction.
"""
import collections
import logging
import math

import lmfit
import numpy as np
import pandas
from scipy import ndimage, signal
from uncertainties import correlated_values, ufloat, unumpy

from .base import ConfigObject
from .detection import CountRecord
from .exceptions import (
    DomainError, FitError, SamplingError, UndefinedVisibilityError)
from .units import TWO_PI

LOG = logging.getLogger('liboam.analysis')

#: Shift of each basis' fringe maximum relative to D, in fringe periods.
BASIS_SHIFTS = {'D': 0.0, 'A': 0.5, 'R': 0.75, 'L': 0.25, 'H': 0.0, 'V': 0.5}

#: Basis pairs entering the witness, first member defines the extrema.
WITNESS_PAIRS = (('D', 'A'), ('R', 'L'))

#: Number of x0 starting points tried by fit_fringes.
DEFAULT_STARTS = 8

#: Tolerances handed to the least-squares solver.
LEASTSQ_OPTIONS = {'xtol': 1e-10, 'ftol': 1e-10}

#: Distance from a bound below which a fitted parameter counts as pinned.
BOUND_TOLERANCE = 1e-6

#: Largest standard deviation a quantity confined to [0, 1] can have.
MAX_VISIBILITY_SIGMA = 0.5


def _poisson(count):
    "Poisson ufloat with the 1-count floor on the uncertainty"
    return ufloat(count, math.sqrt(max(count, 1)))


def estimate_coincidence_window(acc_counts, singles_alice, singles_bob,
                                duration):
    """Coincidence window from an accidentals-only measurement,
    ``tau = acc*T/(S1*S2)``. Returns (tau, sigma) in seconds. With no
    accidentals tau is zero and sigma the one-count bound."""
    if singles_alice <= 0 or singles_bob <= 0:
        raise DomainError("singles counts must be positive")
    if duration <= 0 or acc_counts < 0:
        raise DomainError("need a positive duration and acc >= 0")
    scale = duration / (float(singles_alice) * float(singles_bob))
    tau = acc_counts * scale
    sigma = scale * math.sqrt(
        max(acc_counts, 1) + acc_counts ** 2 / singles_alice
        + acc_counts ** 2 / singles_bob)
    return tau, sigma


def window_from_record(record):
    "Coincidence window estimate from a delayed-trigger CountRecord"
    return estimate_coincidence_window(
        record['coincidences'], record['singles_alice'],
        record['singles_bob'], record['duration_s'])


def _window(tau, tau_sigma=0.0):
    "The coincidence window as a ufloat; ufloats pass through"
    if hasattr(tau, 'std_dev'):
        return tau
    return ufloat(tau, tau_sigma)


def expected_accidentals(record, tau, tau_sigma=0.0):
    """Accidental coincidences S1*S2*tau/T for a record, as a ufloat. ``tau``
    may be a ufloat, which keeps its correlation with other records."""
    return (_poisson(record['singles_alice']) * _poisson(record['singles_bob'])
            * _window(tau, tau_sigma) / record['duration_s'])


def subtract_accidentals(record, tau, clamp=False, tau_sigma=0.0):
    """Coincidences minus expected accidentals. With ``clamp`` negative
    results are set to zero, keeping their uncertainty."""
    corrected = _poisson(record['coincidences']) - expected_accidentals(
        record, tau, tau_sigma)
    if clamp and corrected.nominal_value < 0:
        return ufloat(0.0, corrected.std_dev)
    return corrected


def correct_counts(counts, background, clamp=False):
    """Subtract an independently measured background from counts
    (scalars or arrays), both Poisson. Returns ufloat(s)."""
    scalar = np.ndim(counts) == 0 and np.ndim(background) == 0
    counts = np.atleast_1d(np.asarray(counts, dtype=float))
    background = np.atleast_1d(np.asarray(background, dtype=float))
    corrected = (unumpy.uarray(counts, np.sqrt(np.maximum(counts, 1)))
                 - unumpy.uarray(background, np.sqrt(background)))
    if clamp:
        values = np.maximum(unumpy.nominal_values(corrected), 0.0)
        corrected = unumpy.uarray(values, unumpy.std_devs(corrected))
    if scalar:
        return corrected[0]
    return corrected


def visibility_from_extrema(maximum, minimum):
    """``(max - min)/(max + min)`` with first-order error propagation.
    Plain numbers are taken as exact. Noisy extrema may give a negative
    visibility; it is returned as is."""
    if not hasattr(maximum, 'std_dev'):
        maximum = ufloat(maximum, 0.0)
    if not hasattr(minimum, 'std_dev'):
        minimum = ufloat(minimum, 0.0)
    if maximum.nominal_value < 0 or minimum.nominal_value < 0:
        raise DomainError("fringe extrema must be non-negative")
    if maximum.nominal_value == 0 and minimum.nominal_value == 0:
        raise UndefinedVisibilityError("both fringe extrema are zero")
    return (maximum - minimum) / (maximum + minimum)


def pair_visibility(first, second):
    """Visibility of a basis pair from two fitted fringes: their mean. Any
    correlation carried by the ufloats is kept."""
    return (first + second) / 2


def extrema_pair_visibility(first_at_max, first_at_min, second_at_max,
                            second_at_min):
    """Visibility of a basis pair from counts at the extremal mask positions
    ``x*`` (maximum of the first basis) and ``x* + P/2``:
    max = first(x*) + second(x* + P/2), min = first(x* + P/2) + second(x*)"""
    return visibility_from_extrema(first_at_max + second_at_min,
                                   first_at_min + second_at_max)


class WitnessResult(ConfigObject):
    """Visibilities of the D/A and R/L pairs, their sum W and the
    significance (W - 1)/sigma of exceeding the separable bound"""

    _required = ('v_da', 'v_rl', 'w')

    @property
    def value(self):
        return self['w'].nominal_value

    @property
    def sigma(self):
        return self['w'].std_dev

    @property
    def significance(self):
        if self.sigma == 0:
            return math.copysign(math.inf, self.value - 1.0)
        return (self.value - 1.0) / self.sigma

    def summary(self):
        "Plain-number dictionary for reports"
        return {
            'v_da': self['v_da'].nominal_value,
            'v_da_sigma': self['v_da'].std_dev,
            'v_rl': self['v_rl'].nominal_value,
            'v_rl_sigma': self['v_rl'].std_dev,
            'w': self.value,
            'w_sigma': self.sigma,
            'significance': self.significance,
            'w_sigma_tau': self.get('w_sigma_tau', 0.0),
        }


def witness(v_da, v_rl, strict=True):
    """``W = V_DA + V_RL``; values above 1 witness entanglement. Arguments
    are ufloats or plain numbers. ``strict`` rejects visibilities outside
    [0, 1]."""
    if not hasattr(v_da, 'std_dev'):
        v_da = ufloat(v_da, 0.0)
    if not hasattr(v_rl, 'std_dev'):
        v_rl = ufloat(v_rl, 0.0)
    if strict:
        for v in (v_da, v_rl):
            if not 0 <= v.nominal_value <= 1:
                raise DomainError(
                    "visibility {:.4g} outside [0, 1]".format(v.nominal_value))
    return WitnessResult(v_da=v_da, v_rl=v_rl, w=v_da + v_rl)


class FringePoint(collections.namedtuple(
        'FringePoint', 'offset coincidences singles_alice singles_bob '
        'duration block')):
    "One mask position of one basis"

    @property
    def record(self):
        return {'coincidences': self.coincidences,
                'singles_alice': self.singles_alice,
                'singles_bob': self.singles_bob,
                'duration_s': self.duration}


class FringeDataset(object):
    """Coincidence fringes per Alice basis plus a shared coincidence-window
    estimate (seconds, with its uncertainty). ``tau`` may be given as a
    ufloat; the same ufloat then enters every subtraction made from this
    dataset and the blocks split off it, so its error is counted once."""

    def __init__(self, points, tau=0.0, tau_sigma=0.0):
        self.points = {basis: sorted(rows, key=lambda p: (p.block, p.offset))
                       for basis, rows in points.items()}
        if hasattr(tau, 'std_dev'):
            self.window = tau
        else:
            self.window = ufloat(float(tau), float(tau_sigma), 'tau')
        self.tau = float(self.window.nominal_value)
        self.tau_sigma = float(self.window.std_dev)

    @classmethod
    def from_records(cls, records, tau=None, tau_sigma=0.0):
        """Group CountRecords by basis. A delayed-trigger record, when
        present and ``tau`` is not given, provides the window estimate."""
        points = collections.defaultdict(list)
        delayed = None
        for record in records:
            if not isinstance(record, CountRecord):
                record = CountRecord(record)
            if record.is_delayed:
                delayed = record
                continue
            points[record.basis].append(FringePoint(
                float(record['mask_offset']), int(record['coincidences']),
                int(record['singles_alice']), int(record['singles_bob']),
                float(record['duration_s']), record.block))
        if tau is None:
            if delayed is None:
                tau, tau_sigma = 0.0, 0.0
            else:
                tau, tau_sigma = window_from_record(delayed)
        return cls(dict(points), tau, tau_sigma)

    @property
    def bases(self):
        return sorted(self.points, key=lambda b: list(BASIS_SHIFTS).index(b)
                      if b in BASIS_SHIFTS else len(BASIS_SHIFTS))

    @property
    def n_blocks(self):
        return 1 + max((p.block for rows in self.points.values()
                        for p in rows), default=0)

    def block(self, index):
        "Dataset restricted to one time block"
        return FringeDataset(
            {b: [p for p in rows if p.block == index]
             for b, rows in self.points.items()}, self.window)

    def merged(self):
        "Dataset with all blocks of each (basis, offset) summed"
        merged = {}
        for basis, rows in self.points.items():
            acc = collections.OrderedDict()
            for p in rows:
                key = round(p.offset, 15)
                if key in acc:
                    q = acc[key]
                    acc[key] = FringePoint(
                        q.offset, q.coincidences + p.coincidences,
                        q.singles_alice + p.singles_alice,
                        q.singles_bob + p.singles_bob,
                        q.duration + p.duration, 0)
                else:
                    acc[key] = p._replace(block=0)
            merged[basis] = list(acc.values())
        return FringeDataset(merged, self.window)

    def series(self, basis, subtract=False, clamp=False):
        """Returns (offsets, counts as ufloats) for one basis, optionally
        with accidentals subtracted"""
        rows = sorted(self.points[basis], key=lambda p: p.offset)
        offsets = np.array([p.offset for p in rows])
        if subtract:
            counts = [subtract_accidentals(p.record, self.window, clamp)
                      for p in rows]
        else:
            counts = [_poisson(p.coincidences) for p in rows]
        return offsets, counts

    def fit_arrays(self, basis, subtract=False):
        """Plain arrays for a weighted fit of one basis: offsets, counts
        (minus ``a*tau`` when subtracting), Poisson sigmas of the raw counts
        and the accidental coefficients ``a = S1*S2/T`` (zero when not
        subtracting). The window's error is common to every point and is
        left out of the sigmas; :func:`fit_fringes` carries it separately."""
        rows = sorted(self.points[basis], key=lambda p: p.offset)
        offsets = np.array([p.offset for p in rows], dtype=float)
        raw = np.array([p.coincidences for p in rows], dtype=float)
        if subtract:
            coefficients = np.array(
                [float(p.singles_alice) * float(p.singles_bob) / p.duration
                 for p in rows])
        else:
            coefficients = np.zeros_like(raw)
        return (offsets, raw - coefficients * self.tau,
                np.sqrt(np.maximum(raw, 1.0)), coefficients)

    def to_frame(self):
        "One row per point, for CSV export"
        rows = [dict(basis=b, **p._asdict())
                for b in self.bases for p in self.points[b]]
        return pandas.DataFrame(rows)


def _sin2_model(x, x0, shift, period, mean, visibility):
    phase = math.pi * (x - x0 - shift) / period
    return mean * (1 - visibility) + 2 * mean * visibility * np.sin(phase) ** 2


def _fringe_jacobian(x, x0, shift, period, mean, visibility):
    "Derivatives of the sin^2 model by (x0, mean, visibility)"
    phase = math.pi * (x - x0 - shift) / period
    s2 = np.sin(phase) ** 2
    d_x0 = -2 * mean * visibility * np.sin(2 * phase) * math.pi / period
    d_mean = 1 - visibility + 2 * visibility * s2
    d_vis = mean * (2 * s2 - 1)
    return d_x0, d_mean, d_vis


class FringeFit(ConfigObject):
    """Result of :func:`fit_fringes`. Per-basis entries live under
    ``bases[label]`` with the keys visibility (ufloat), mean, amplitude,
    offset and shift."""

    _required = ('period', 'x0', 'bases')

    def visibility(self, label):
        return self['bases'][label]['visibility']

    def curve(self, label, x):
        "Fitted counts of one basis at mask offsets x"
        basis = self['bases'][label]
        return _sin2_model(np.asarray(x, dtype=float), self['x0'],
                           basis['shift'], self['period'], basis['mean'],
                           basis['visibility'].nominal_value)

    def maximum_offset(self, label):
        "Mask offset of the first fitted maximum of a basis in [0, P)"
        shift = self['bases'][label]['shift']
        return float(np.mod(self['x0'] + shift + self['period'] / 2,
                            self['period']))

    def curves_frame(self, n_points=200, span=None):
        "Fitted curves of all bases over ``span`` (default two periods)"
        span = 2 * self['period'] if span is None else span
        x = np.linspace(0.0, span, n_points)
        frame = pandas.DataFrame({'mask_offset': x})
        for label in self['bases']:
            frame[label] = self.curve(label, x)
        return frame


def _moved(result, starts):
    "True when the solver changed at least one parameter"
    return any(abs(result.params[name].value - value)
               > 1e-9 * max(1.0, abs(value)) for name, value in starts.items())


def fit_fringes(data, period, subtract=False, n_starts=DEFAULT_STARTS):
    """Joint weighted sin^2 fit of every basis in ``data`` with the fringe
    period fixed, relative shifts fixed by :data:`BASIS_SHIFTS` and one free
    shared offset, tried from ``n_starts`` offsets spread over one period.

    Points are weighted by the Poisson error of their raw counts (floor of
    one count). The coincidence-window error shifts every subtracted point
    together, so it is not part of the weights: its effect on each
    parameter is returned as ``tau_sensitivity`` and ``tau_sigma``. A start
    is discarded when the solver reports failure or leaves every parameter
    where it began; FitError lists all starts when none is usable."""
    if not period > 0:
        raise DomainError("fringe period must be positive")
    if n_starts < 1:
        raise DomainError("need at least one starting offset")
    series = {}
    for basis in data.bases:
        offsets, values, sigmas, coefficients = data.fit_arrays(
            basis, subtract)
        if len(offsets) < 3:
            raise DomainError(
                "basis {} has {} points, need at least 3".format(
                    basis, len(offsets)))
        series[basis] = (offsets / period, values, sigmas, coefficients,
                         BASIS_SHIFTS.get(basis, 0.0))
    if not series:
        raise DomainError("no fringe data to fit")

    # offsets and x0 are in fringe periods while fitting
    def residual(params):
        x0 = params['x0'].value
        return np.concatenate([
            (_sin2_model(u, x0, shift, 1.0, params['m_' + basis].value,
                         params['v_' + basis].value) - y) / s
            for basis, (u, y, s, _, shift) in series.items()])

    best = None
    attempts = []
    for start in np.arange(n_starts) / n_starts:
        params = lmfit.Parameters()
        params.add('x0', value=start)
        for basis, (_, y, _, _, _) in series.items():
            params.add('m_' + basis, value=max(float(np.mean(y)), 1e-9),
                       min=0.0)
            params.add('v_' + basis, value=0.5, min=0.0, max=1.0)
        starts = {name: p.value for name, p in params.items()}
        try:
            result = lmfit.minimize(residual, params, method='leastsq',
                                    **LEASTSQ_OPTIONS)
        except (ValueError, FloatingPointError) as err:
            attempts.append({'start': float(start), 'rejected': str(err)})
            continue
        reason = None
        if not result.success:
            reason = "solver failed: {}".format(result.message)
        elif not np.isfinite(result.chisqr):
            reason = "chi-square is not finite"
        elif not _moved(result, starts):
            reason = "parameters never left their starting values"
        attempts.append({
            'start': float(start),
            'chisqr': float(result.chisqr) if np.isfinite(result.chisqr)
            else None,
            'rejected': reason})
        if reason is not None:
            LOG.debug("fringe fit from x0=%.3g periods rejected: %s", start,
                      reason)
        elif best is None or result.chisqr < best.chisqr:
            best = result
    if best is None:
        raise FitError(
            "fringe fit did not converge from any of {} starts".format(
                n_starts),
            diagnostics={'starts': attempts, 'period': period})
    return _fringe_fit_result(best, series, period,
                              data.tau_sigma if subtract else 0.0)


def _fringe_fit_result(result, series, period, tau_sigma=0.0):
    """Parameter covariance from the weighted Jacobian at the optimum.
    Visibilities pinned at 0 or 1 take the conditional error ``1/sqrt(H_jj)``
    and are left out of the joint inversion; an offset the data carry no
    information on gets the spread of a uniform over one period. The
    window sensitivity is the shift of the free parameters per unit tau."""
    labels = list(series)
    names = ['x0'] + [p + b for b in labels for p in ('m_', 'v_')]
    values = np.array([float(result.params[n].value) for n in names])
    values[0] = np.mod(values[0], 1.0)
    rows = []
    tau_column = []
    for i, basis in enumerate(labels):
        u, _, s, coefficients, shift = series[basis]
        d_x0, d_mean, d_vis = _fringe_jacobian(
            u, values[0], shift, 1.0, values[1 + 2 * i], values[2 + 2 * i])
        block = np.zeros((len(u), len(names)))
        block[:, 0] = d_x0 / s
        block[:, 1 + 2 * i] = d_mean / s
        block[:, 2 + 2 * i] = d_vis / s
        rows.append(block)
        tau_column.append(coefficients / s)
    jacobian = np.vstack(rows)
    tau_column = np.concatenate(tau_column)
    n_points, n_params = jacobian.shape
    dof = max(n_points - n_params, 1)
    redchi = float(result.chisqr) / dof
    hessian = jacobian.T @ jacobian
    information = np.diag(hessian)
    floor = 1e-12 * max(float(information.max()), 1e-300)
    at_bound, unconstrained = [], []
    for j, name in enumerate(names):
        if name[0] in 'xv' and information[j] <= floor:
            unconstrained.append(j)
        elif name.startswith('v_') and min(
                values[j], 1.0 - values[j]) < BOUND_TOLERANCE:
            at_bound.append(j)
        elif name.startswith('m_') and values[j] < BOUND_TOLERANCE:
            at_bound.append(j)
    free = [j for j in range(n_params)
            if j not in at_bound and j not in unconstrained]
    covariance = np.zeros((n_params, n_params))
    sensitivity = np.zeros(n_params)
    if free:
        inverse = np.linalg.pinv(hessian[np.ix_(free, free)])
        covariance[np.ix_(free, free)] = inverse
        sensitivity[free] = -inverse @ (jacobian[:, free].T @ tau_column)
    for j in at_bound:
        covariance[j, j] = 1.0 / information[j] if information[j] > 0 else 0.0
    if redchi > 1:
        covariance *= redchi
    for j in unconstrained:
        covariance[j, j] = 1.0 / 12
    sigmas = np.sqrt(np.abs(np.diag(covariance)))
    for j, name in enumerate(names):
        if name.startswith('v_') and sigmas[j] > MAX_VISIBILITY_SIGMA:
            scale = MAX_VISIBILITY_SIGMA / sigmas[j]
            covariance[j, :] *= scale
            covariance[:, j] *= scale
    # back to mask-offset units
    covariance[0, :] *= period
    covariance[:, 0] *= period
    sensitivity[0] *= period
    sigmas = np.sqrt(np.abs(np.diag(covariance)))
    v_index = [names.index('v_' + b) for b in labels]
    visibilities = correlated_values(
        values[v_index], covariance[np.ix_(v_index, v_index)])
    bases = {}
    for i, basis in enumerate(labels):
        mean, vis = values[1 + 2 * i], values[2 + 2 * i]
        bases[basis] = {
            'visibility': visibilities[i],
            'mean': float(mean),
            'mean_sigma': float(sigmas[1 + 2 * i]),
            'amplitude': float(2 * mean * vis),
            'offset': float(mean * (1 - vis)),
            'shift': series[basis][4] * period,
            'tau_sensitivity': float(sensitivity[2 + 2 * i]),
            'visibility_tau_sigma':
                abs(float(sensitivity[2 + 2 * i])) * tau_sigma,
        }
    if at_bound or unconstrained:
        LOG.info("fringe fit: %s at a bound, %s unconstrained",
                 [names[j] for j in at_bound],
                 [names[j] for j in unconstrained])
    LOG.debug("fringe fit: x0=%.6g chi2_red=%.3g", values[0] * period, redchi)
    return FringeFit(period=period, x0=float(values[0] * period),
                     x0_sigma=float(sigmas[0]), bases=bases,
                     chisqr=float(result.chisqr), redchi=redchi,
                     covariance=covariance.tolist(), parameters=names,
                     at_bound=[names[j] for j in at_bound],
                     unconstrained=[names[j] for j in unconstrained],
                     tau_sigma=float(tau_sigma))


def fit_witness(fit):
    """Method 1 witness: basis-pair visibilities are the means of the two
    fitted visibilities of each pair. ``w_sigma_tau`` is the systematic
    spread of W from the coincidence-window error, kept apart from the
    statistical sigma."""
    v_da = pair_visibility(fit.visibility('D'), fit.visibility('A'))
    v_rl = pair_visibility(fit.visibility('R'), fit.visibility('L'))
    result = witness(v_da, v_rl, strict=False)
    slope = 0.5 * sum(fit['bases'][b].get('tau_sensitivity', 0.0)
                      for b in ('D', 'A', 'R', 'L'))
    result['w_sigma_tau'] = abs(slope) * fit.get('tau_sigma', 0.0)
    return result


def nearest_offset(offsets, target, period):
    """The measured offset closest to any periodic image of ``target``"""
    offsets = np.asarray(offsets)
    distance = np.abs((offsets - target + period / 2) % period - period / 2)
    return float(offsets[np.argmin(distance)])


def extremal_offsets(fit, offsets, first):
    """Measured offsets nearest the fitted maximum and minimum of basis
    ``first``"""
    period = fit['period']
    maximum = fit.maximum_offset(first)
    return (nearest_offset(offsets, maximum, period),
            nearest_offset(offsets, maximum + period / 2, period))


class BlockWitness(ConfigObject):
    """Per-block witness values (None where undefined), the excluded block
    indices and the mean with its standard error"""

    _required = ('values', 'mean', 'sem')


def summarize_blocks(values):
    """Mean and standard error (sample std over sqrt(n)) of a list of
    witness values"""
    values = np.asarray([v for v in values if v is not None], dtype=float)
    if len(values) == 0:
        raise DomainError("no witness values to summarize")
    if len(values) == 1:
        return float(values[0]), 0.0
    return (float(values.mean()),
            float(values.std(ddof=1) / math.sqrt(len(values))))


def witness_blocks(data, period, n_blocks=None, pilot=None):
    """Method 2: split the data into time blocks, subtract accidentals with
    clamping at the extremal mask positions found by a pilot fit of all
    data, and evaluate the witness per block. Blocks with an undefined
    visibility are excluded and reported."""
    if pilot is None:
        pilot = fit_fringes(data.merged(), period, subtract=True)
    n_blocks = data.n_blocks if n_blocks is None else int(n_blocks)
    if n_blocks > data.n_blocks:
        LOG.warning("asked for %d blocks but data holds %d", n_blocks,
                    data.n_blocks)
        n_blocks = data.n_blocks
    extrema = {}
    for first, second in WITNESS_PAIRS:
        offsets = [p.offset for p in data.points[first]]
        extrema[first] = extremal_offsets(pilot, offsets, first)
    values = []
    excluded = []
    for index in range(n_blocks):
        count = _block_counter(data.block(index))
        try:
            pairs = []
            for first, second in WITNESS_PAIRS:
                x_max, x_min = extrema[first]
                pairs.append(extrema_pair_visibility(
                    count(first, x_max), count(first, x_min),
                    count(second, x_max), count(second, x_min)))
            values.append(witness(pairs[0], pairs[1], strict=False))
        except UndefinedVisibilityError:
            LOG.warning("block %d has no corrected counts at the extrema; "
                        "excluded", index)
            values.append(None)
            excluded.append(index)
    mean, sem = summarize_blocks(
        [v.value for v in values if v is not None])
    return BlockWitness(values=values, excluded=excluded, mean=mean, sem=sem,
                        extrema=extrema)


def _block_counter(block):
    def count(basis, offset):
        for p in block.points[basis]:
            if abs(p.offset - offset) < 1e-15 + 1e-12 * abs(offset):
                return subtract_accidentals(p.record, block.window, True)
        raise DomainError("no {} point at offset {:.6g}".format(basis, offset))
    return count


def fold_image(image, theta, l, n_bins=32, delta=0.0):
    """Fold an image onto one fringe period using each pixel's azimuth.
    Returns (bin phase centers in [0, 2 pi), summed counts per bin, pixels
    per bin)."""
    phase = np.mod(2 * l * np.asarray(theta) - delta, TWO_PI)
    bins = np.minimum((phase / TWO_PI * n_bins).astype(int), n_bins - 1)
    sums = np.bincount(bins.ravel(), weights=np.asarray(image, float).ravel(),
                       minlength=n_bins)
    pixels = np.bincount(bins.ravel(), minlength=n_bins)
    centers = (np.arange(n_bins) + 0.5) * TWO_PI / n_bins
    return centers, sums, pixels


def image_pair_visibility(first, second, background, theta, l, n_bins=32,
                          clamp=True):
    """Basis-pair visibility from two triggered image stacks and a
    delayed-trigger background stack. Images are folded onto one fringe
    period and each bin is reduced to its mean count per pixel, since bins
    hold unequal numbers of pixels; ``x*`` is the bin of ``first`` with the
    highest corrected mean."""
    _, first_sum, pixels = fold_image(first, theta, l, n_bins)
    _, second_sum, _ = fold_image(second, theta, l, n_bins)
    _, background_sum, _ = fold_image(background, theta, l, n_bins)
    if not np.any(pixels):
        raise DomainError("no pixels to fold")
    pixels = np.maximum(pixels, 1).astype(float)
    first_corr = correct_counts(first_sum, background_sum, clamp) / pixels
    second_corr = correct_counts(second_sum, background_sum, clamp) / pixels
    peak = int(np.argmax(unumpy.nominal_values(first_corr)))
    trough = (peak + n_bins // 2) % n_bins
    corrected = extrema_pair_visibility(first_corr[peak], first_corr[trough],
                                        second_corr[peak], second_corr[trough])
    raw = extrema_pair_visibility(
        _poisson(first_sum[peak]) / pixels[peak],
        _poisson(first_sum[trough]) / pixels[trough],
        _poisson(second_sum[peak]) / pixels[peak],
        _poisson(second_sum[trough]) / pixels[trough])
    return corrected, raw


def _lomb_scargle_period(alpha, values):
    span = alpha.max() - alpha.min()
    if span <= 0:
        raise DomainError("rotation series needs a range of angles")
    step = np.median(np.diff(np.sort(alpha)))
    low, high = TWO_PI / span, math.pi / step
    frequencies = np.linspace(low, high, int(40 * (high - low) / low) + 1)
    power = signal.lombscargle(alpha, values - values.mean(), frequencies)
    return TWO_PI / frequencies[np.argmax(power)]


def fit_rotation_fringe(alpha, intensity, sigma=None):
    """Weighted sin^2 fit of intensity against mirror rotation with a free
    period. Returns a dict with the period, its uncertainty and the implied
    charge ``l = 2*pi/period`` as a ufloat."""
    alpha = np.asarray(alpha, dtype=float)
    values = np.asarray(intensity, dtype=float)
    if len(alpha) < 4:
        raise DomainError("need at least 4 samples per rotation series")
    if sigma is None:
        sigma = np.ones_like(values)
    sigma = np.maximum(np.asarray(sigma, dtype=float), 1e-12)
    guess = _lomb_scargle_period(alpha, values)
    omega = TWO_PI / guess
    design = np.column_stack([np.ones_like(alpha), np.cos(omega * alpha),
                              np.sin(omega * alpha)])
    (level, c, s), *_ = np.linalg.lstsq(design, values, rcond=None)
    radius = math.hypot(c, s)
    params = lmfit.Parameters()
    params.add('offset', value=max(level - radius, 0.0), min=0.0)
    params.add('amplitude', value=max(2 * radius, 1e-12), min=0.0)
    params.add('alpha0', value=(math.atan2(s, c) + math.pi) / omega)
    params.add('period', value=guess, min=0.5 * guess, max=2.0 * guess)

    def residual(p):
        phase = math.pi * (alpha - p['alpha0'].value) / p['period'].value
        model = p['offset'].value + p['amplitude'].value * np.sin(phase) ** 2
        return (model - values) / sigma

    result = lmfit.minimize(residual, params, method='leastsq',
                            **LEASTSQ_OPTIONS)
    if not result.success or not np.isfinite(result.chisqr):
        raise FitError("rotation fringe fit failed",
                       diagnostics={'message': result.message,
                                    'period_guess': guess})
    period = float(result.params['period'].value)
    period_sigma = result.params['period'].stderr
    period_sigma = float(period_sigma) if period_sigma is not None else 0.0
    charge = TWO_PI / ufloat(period, period_sigma)
    return {'period': period, 'period_sigma': period_sigma, 'charge': charge,
            'chisqr': float(result.chisqr), 'redchi': float(result.redchi)}


def estimate_oam(rotation_fringes):
    """OAM charge from rotation fringes recorded at several angular
    positions. Each entry is ``(alpha, intensity)`` or ``(alpha, intensity,
    sigma)``. Positions whose fit fails are excluded and reported. The
    aggregate is the plain mean with the population standard deviation."""
    if len(rotation_fringes) < 2:
        raise DomainError("need rotation fringes from at least 2 positions")
    charges = []
    failed = []
    for index, series in enumerate(rotation_fringes):
        alpha, intensity = series[0], series[1]
        sigma = series[2] if len(series) > 2 else None
        try:
            charges.append(fit_rotation_fringe(alpha, intensity, sigma)['charge'])
        except FitError as err:
            LOG.warning("rotation fringe at position %d excluded: %s", index,
                        err)
            charges.append(None)
            failed.append(index)
    values = np.array([c.nominal_value for c in charges if c is not None])
    if len(values) == 0:
        raise FitError("no rotation fringe could be fitted",
                       diagnostics={'failed': failed})
    return {'positions': charges, 'failed': failed,
            'mean': float(values.mean()), 'std': float(values.std())}


def count_ring_maxima(profile, prominence=0.1, smoothing=0):
    """Count fringe maxima on a closed azimuthal profile. Peaks must rise
    ``prominence`` times the profile's range above their surroundings; a
    ``smoothing`` window (samples) is applied first."""
    profile = np.asarray(profile, dtype=float)
    if smoothing and smoothing > 1:
        profile = ndimage.uniform_filter1d(profile, int(smoothing),
                                           mode='wrap')
    if len(profile) == 0:
        return 0
    span = np.ptp(profile)
    if span <= 1e-12 * max(1.0, np.abs(profile).max()):
        return 0
    n = len(profile)
    peaks, _ = signal.find_peaks(np.tile(profile, 3),
                                 prominence=prominence * span)
    count = int(np.count_nonzero((peaks >= n) & (peaks < 2 * n)))
    if count and n < 4 * count:
        raise SamplingError(
            "{} samples can't resolve {} fringes".format(n, count),
            nyquist_ratio=4.0 * count / n)
    return count
