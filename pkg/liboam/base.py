"""
Establish base classes shared by the configuration and record objects in
liboam. They are plain dictionaries underneath, so they print, compare and
serialize like the scenario data they were loaded from, while still offering
attribute access and validation.
"""
import numpy as np

from .exceptions import ConfigError


def to_serializable(value):
    """Convert numpy scalars/arrays, complex numbers and uncertainties values
    into something :func:`json.dumps` can handle. Intended for use as the
    ``default=`` hook."""
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, (complex, np.complexfloating)):
        return {'re': float(value.real), 'im': float(value.imag)}
    if hasattr(value, 'nominal_value') and hasattr(value, 'std_dev'):
        return {'value': float(value.nominal_value),
                'sigma': float(value.std_dev)}
    if isinstance(value, (tuple, set, frozenset)):
        return list(value)
    raise TypeError("{!r} is not JSON serializable".format(value))


class ConfigObject(dict):
    """
    A dict-like object populated from scenario data. Subclasses declare
    ``_defaults`` (merged underneath the supplied values) and ``_required``
    (keys that must be present after merging), and may extend
    :meth:`validate` with range checks that raise
    :class:`~liboam.exceptions.ConfigError`.
    """

    _defaults = {}
    _required = ()

    def __init__(self, *args, **kwargs):
        data = dict(self._defaults)
        data.update(*args, **kwargs)
        super(ConfigObject, self).__init__(data)
        self.validate()

    def __getattr__(self, name):
        try:
            return self[name]
        except KeyError:
            raise AttributeError(name)

    def validate(self):
        "Ensure required keys are present; subclasses add range checks"
        for key in self._required:
            if self.get(key) is None:
                raise ConfigError(
                    "{} requires a value".format(self.__class__.__name__),
                    key=key)

    def require_range(self, key, low=None, high=None, inclusive_low=True):
        """Raise a ConfigError unless ``low <= self[key] <= high``. Set
        ``inclusive_low=False`` for strictly positive quantities."""
        value = self.get(key)
        try:
            value = float(value)
        except (TypeError, ValueError):
            raise ConfigError("not a number: {!r}".format(value), key=key)
        too_low = low is not None and (
            value < low if inclusive_low else value <= low)
        if too_low or (high is not None and value > high):
            raise ConfigError(
                "{} is outside [{}, {}]".format(value, low, high), key=key)

    def replace(self, **changes):
        "Return a copy of this object with some keys replaced"
        data = dict(self)
        data.update(changes)
        return self.__class__(data)
