#!/usr/bin/env python3
"""usage:
  oamsim render [options]

Render the OAM superposition made by sending a diagonally polarized beam
through the transfer stages and a 45 degree polarizer. With a full grid the
beam is reflected off every mirror, Fourier transformed by a lens and the
paddle pattern on the brightest ring is counted. Charges beyond the grid's
band limit need --ring-model, which evaluates the ring pattern exactly.

Options:
  --scenario=PATH   scenario file or preset name (default: $OAMSIM_SCENARIO)
  --seed=N          override the scenario seed
  --out=DIR         output directory
  --ring-model      use the exact ring representation instead of a grid
  --format=LIST     comma separated output formats among csv,pgm,json
                    [default: csv,pgm,json]

Standard options:
  -h --help         show this screen
  -d --debug        enable debug logging (low-level)

"""
import dataclasses
import logging
import math

import numpy as np
import pandas

from liboam import analysis, fields, mirrors, states
from liboam.exceptions import SamplingError
from liboam.units import parse_quantity
from .common import OutputWriter, print_report, report_header
from .util import output_dir, parse_formats, scenario_from_args

LOG = logging.getLogger('liboam.cli.render')

DIAGONAL = states.PolarizationProjector.from_label('D')


def grid_arms(scenario, beam, charge):
    """Returns the (+l, -l) fields leaving the transfer stages, carried over
    the optional free-space ``propagation.distance`` before the lens"""
    supersample = int(scenario.section('grid').get(
        'supersample', fields.SUPERSAMPLE))
    profiles = scenario.mirrors()
    if not profiles:
        plus = fields.apply_phase(
            beam, lambda x, y: charge * np.arctan2(y, x), supersample)
        minus = fields.apply_phase(
            beam, lambda x, y: -charge * np.arctan2(y, x), supersample)
    else:
        plus, minus = beam, beam
        for profile in profiles:
            plus = mirrors.reflect(plus, profile, supersample)
            minus = mirrors.reflect(
                minus, dataclasses.replace(profile, charge=-profile.charge),
                supersample)
    distance = parse_quantity(scenario.section(
        'propagation', required=False).get('distance', 0.0))
    if distance != 0:
        LOG.debug("propagating both arms %.4g m before the lens", distance)
        plus = fields.propagate(plus, distance)
        minus = fields.propagate(minus, distance)
    return plus, minus


def render_grid(scenario, mode, writer):
    "Full-grid simulation up to the lens plane"
    settings = scenario.section('analysis', required=False)
    grid = scenario.grid()
    beam = fields.gaussian_beam(
        grid, parse_quantity(scenario.section('beam')['waist']))
    plus, minus = grid_arms(scenario, beam, mode.l)
    lens = scenario.section('lens')
    focal_length = parse_quantity(lens.get('focal_length', 0.5))
    pad = int(lens.get('pad', 1))
    lens_plane = fields.far_field(
        plus * mode.c_plus + minus * mode.c_minus, focal_length, pad)
    image = fields.intensity(lens_plane)
    vortex = fields.intensity(fields.far_field(plus, focal_length, pad))
    center = tuple(s // 2 for s in vortex.shape)
    on_axis = float(vortex[center] / vortex.max())
    radius = fields.peak_ring_radius(image, lens_plane.grid)
    n_samples = int(settings.get('profile_samples', max(1024, 32 * mode.l)))
    profile = fields.azimuthal_profile(image, lens_plane.grid, radius,
                                       n_samples)
    theta = 2 * math.pi * np.arange(n_samples) / n_samples
    writer.image('intensity', image, dx=lens_plane.dx, dy=lens_plane.dy,
                 wavelength=lens_plane.wavelength)
    writer.frame('profile.csv', pandas.DataFrame(
        {'theta': theta, 'intensity': profile}))
    correlation = float(np.corrcoef(
        profile, states.ring_intensity(mode, theta))[0, 1]) \
        if mode.contrast > 0 else None
    return {
        'model': 'grid',
        'maxima': analysis.count_ring_maxima(
            profile, float(settings.get('prominence', 0.1))),
        'ring_radius_m': radius,
        'on_axis_null': on_axis,
        'ring_model_correlation': correlation,
        'aliased_fraction': lens_plane.aliased_fraction,
        'nyquist_ratio': lens_plane.nyquist_ratio,
    }


def render_ring(scenario, mode, writer):
    "Exact ring representation; any charge"
    settings = scenario.section('analysis', required=False)
    n_samples = max(int(settings.get('profile_samples', 0)), 16 * mode.l)
    theta, profile = states.sample_ring(mode, n_samples)
    writer.frame('profile.csv', pandas.DataFrame(
        {'theta': theta, 'intensity': profile}))
    report = {
        'model': 'ring',
        'maxima': analysis.count_ring_maxima(
            profile, float(settings.get('prominence', 0.1))),
    }
    if mode.contrast > 0:
        report['orientation_deg'] = states.pattern_orientation(mode)
    if 'sector' in scenario:
        sector = scenario.ring_sector()
        try:
            if sector.pixels_per_fringe(mode.l) < 2:
                raise SamplingError("sector pixels can't resolve the fringes")
            _, theta_map = sector.coordinates()
            writer.image('sector', sector.envelope() * states.ring_intensity(
                mode, theta_map), pixel_pitch=sector.pixel_pitch)
        except SamplingError as err:
            LOG.warning("sector image skipped: %s", err)
    return report


def export_heightmaps(scenario, writer):
    "Height maps of every mirror, with the number of ridges found on each"
    config = scenario.section('heightmap')
    grid = fields.GridSpec.square(
        int(config.get('n', 512)), parse_quantity(config['pitch']),
        scenario.wavelength)
    retval = []
    for index, profile in enumerate(scenario.mirrors()):
        heightmap = mirrors.export_heightmap(profile, grid)
        writer.image('heightmap_{}'.format(index), heightmap, dx=grid.dx,
                     dy=grid.dy, max_depth=profile.max_depth)
        radius = 0.9 * grid.inscribed_radius()
        retval.append({
            'charge': profile.charge,
            'segments': profile.segments,
            'max_depth_m': profile.max_depth,
            'segment_phase_span_rad': profile.segment_phase_span,
            'ridges_detected': mirrors.count_ramp_resets(
                heightmap, grid, radius),
        })
    return retval


def run_render_mode(scenario, writer):
    """Render the scenario's superposition mode and count its maxima"""
    state = scenario.state()
    mode, _ = states.conditional_mode(state, DIAGONAL)
    report = report_header(scenario)
    report.update({
        'charge': mode.l,
        'expected_maxima': 2 * mode.l,
        'max_to_min_rotation_deg': math.degrees(
            states.max_to_min_rotation(mode.l)),
    })
    if scenario['ring_model']:
        report.update(render_ring(scenario, mode, writer))
    else:
        report.update(render_grid(scenario, mode, writer))
    if 'heightmap' in scenario:
        report['mirrors'] = export_heightmaps(scenario, writer)
    LOG.info("%s model: %d maxima for l=%d", report['model'],
             report['maxima'], mode.l)
    return writer.report(report)


def main(**args):
    """Run the render action"""
    if not args.get('render', False):
        raise RuntimeError("no valid action in args")
    scenario = scenario_from_args(args)
    writer = OutputWriter(output_dir(args, scenario),
                          parse_formats(args.get('--format')))
    print_report(run_render_mode(scenario, writer))
    return 0
