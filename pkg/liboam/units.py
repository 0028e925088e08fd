"""
Utilities for angles and physical quantities. Everything inside liboam is in
SI units and radians; these helpers convert at the edges (scenario files,
reports and log messages).
"""
import math

import numpy as np

TWO_PI = 2.0 * math.pi

#: Scale factors for the unit suffixes accepted in scenario files.
SI_PREFIXES = {
    'm': 1.0,
    'cm': 1e-2,
    'mm': 1e-3,
    'um': 1e-6,
    'nm': 1e-9,
    's': 1.0,
    'ms': 1e-3,
    'us': 1e-6,
    'ns': 1e-9,
    'Hz': 1.0,
    'kHz': 1e3,
    'MHz': 1e6,
    'rad': 1.0,
    'deg': math.pi / 180.0,
}


def wrap_angle(angle, period=TWO_PI):
    """Wrap an angle (or array of angles) into [0, period). Floating point
    wraps that land on the period itself are folded back to 0."""
    wrapped = np.mod(angle, period)
    wrapped = np.where(wrapped >= period, 0.0, wrapped)
    if np.ndim(wrapped) == 0:
        return float(wrapped)
    return wrapped


def wrap_phase(phase):
    """Wrap a phase (or array of phases) into (-pi, pi]."""
    return np.angle(np.exp(1j * np.asarray(phase)))


def parse_quantity(value):
    """Given a number or a string such as ``'810 nm'`` or ``'4.68ns'``,
    return the value as a float in SI units. Plain numbers pass through."""
    if isinstance(value, (int, float)):
        return float(value)
    text = str(value).strip()
    for suffix in sorted(SI_PREFIXES, key=len, reverse=True):
        if text.endswith(suffix):
            number = text[:-len(suffix)].strip()
            try:
                return float(number) * SI_PREFIXES[suffix]
            except ValueError:
                break
    try:
        return float(text)
    except ValueError:
        raise ValueError("can't parse '{}' as a physical quantity".format(
            value))


def format_quantity(value, sigma=None, unit='', scale=1.0, digits=2):
    """Format ``value +- sigma`` for reports, eg. ``4.68 +- 0.34 ns`` with
    scale=1e-9. The unit is appended verbatim."""
    text = "{:.{d}f}".format(value / scale, d=digits)
    if sigma is not None:
        text += " +- {:.{d}f}".format(sigma / scale, d=digits)
    if unit:
        text += " " + unit
    return text
