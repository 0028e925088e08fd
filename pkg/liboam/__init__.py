"""
Base module for liboam, a simulator and analysis toolkit for very-high-charge
OAM modes made with segmented spiral phase mirrors and for hybrid
polarization/OAM entanglement. This module imports the user-facing classes
and functions from the other modules, so you only need to import this one
to use the full suite, eg::

    import liboam
    state = liboam.transfer('D', 10, 10000)
    mode, probability = liboam.conditional_mode(
        state, liboam.PolarizationProjector.from_label('R'))
    print(liboam.pattern_orientation(mode))

Scenario-driven runs are available from the ``oamsim`` command.

"""
import os

from .fields import (
    GridSpec,
    ComplexField,
    gaussian_beam,
    laguerre_gaussian_beam,
    apply_phase,
    propagate,
    far_field,
    intensity,
    azimuthal_profile,
    second_moment_radius,
    peak_ring_radius,
    check_sampling,
)
from .mirrors import (
    SpmProfile,
    surface_depth,
    reflection_phase,
    export_heightmap,
    count_ramp_resets,
    reflect,
)
from .states import (
    HybridState,
    StateMixture,
    PolarizationProjector,
    RingMode,
    transfer,
    conditional_mode,
    conditional_modes,
    ring_intensity,
    pattern_orientation,
    rotated_mode,
    rotation_fringe,
    max_to_min_rotation,
    superposition_field,
)
from .detection import (
    SlitMask,
    DetectorConfig,
    IccdConfig,
    CountRecord,
    RingSector,
    mask_transmission,
    mask_transmission_numeric,
    linearize_mask,
    simulate_counts,
    simulate_delayed,
    simulate_scan,
    simulate_iccd_stack,
    simulate_iccd_background,
    seed_streams,
)
from .analysis import (
    FringeDataset,
    WitnessResult,
    estimate_coincidence_window,
    subtract_accidentals,
    correct_counts,
    fit_fringes,
    visibility_from_extrema,
    pair_visibility,
    witness,
    witness_blocks,
    summarize_blocks,
    estimate_oam,
    fit_rotation_fringe,
    count_ring_maxima,
    fold_image,
)
from .scenarios import Scenario, load_scenario, list_presets
from . import exceptions
from . import units

__version__ = "20261018"

#: Name of the environment variable consulted for a scenario (path or
#: preset name) when none is given on the command line.
SCENARIO_ENVVAR = "OAMSIM_SCENARIO"


def get_scenario_from_env():
    """Returns the SCENARIO_ENVVAR environment variable, raises a
    ConfigError if it is missing"""
    try:
        return os.environ[SCENARIO_ENVVAR]
    except KeyError:
        raise exceptions.ConfigError(
            "no --scenario given and {} is not set".format(SCENARIO_ENVVAR))
