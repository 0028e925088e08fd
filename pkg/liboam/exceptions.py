"""
Exceptions raised by liboam. Every error derives from :class:`OAMError`, so
callers that don't care about the specifics can catch that one class. The
command-line front end maps the classes below onto distinct exit codes.
"""


class OAMError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(OAMError):
    """A scenario or configuration object is missing keys or holds values
    that are inconsistent with each other."""

    def __init__(self, message, key=None):
        super(ConfigError, self).__init__(message)
        self.message = message
        self.key = key

    def __str__(self):
        if self.key:
            return "{} (key: {})".format(self.message, self.key)
        return self.message


class DomainError(OAMError, ValueError):
    """An argument lies outside the domain an operation is defined on, such
    as a radius outside the grid or a beam center off the sampled plane."""


class SamplingError(OAMError):
    """Raised whenever a sampled representation can't resolve the structure
    it is asked to carry. Where possible the offending Nyquist ratio (local
    phase step divided by pi) and a grid size that would resolve it are
    attached for the error message."""

    def __init__(self, message, nyquist_ratio=None, suggested_size=None):
        super(SamplingError, self).__init__(message)
        self.message = message
        self.nyquist_ratio = nyquist_ratio
        self.suggested_size = suggested_size

    def __str__(self):
        retval = self.message
        if self.nyquist_ratio is not None:
            retval += " (Nyquist ratio {:.3g})".format(self.nyquist_ratio)
        if self.suggested_size is not None:
            retval += "; a grid of at least {0}x{0} samples is required".format(
                self.suggested_size)
        return retval

    def __repr__(self):
        return "{}({!r}, nyquist_ratio={!r}, suggested_size={!r})".format(
            self.__class__.__name__, self.message, self.nyquist_ratio,
            self.suggested_size)


class DegenerateTransferError(OAMError):
    """The cascaded transfer was asked to imprint zero net charge."""

    def __init__(self, l1, l2):
        super(DegenerateTransferError, self).__init__(l1, l2)
        self.l1 = l1
        self.l2 = l2

    def __str__(self):
        return "transfer charges {} and {} cancel: no OAM is imprinted".format(
            self.l1, self.l2)


class OrthogonalProjectionError(OAMError):
    """Alice's projector is orthogonal to the polarization part of the state,
    so no conditional mode exists."""

    def __init__(self, projector, probability):
        super(OrthogonalProjectionError, self).__init__(projector, probability)
        self.projector = projector
        self.probability = probability

    def __str__(self):
        return "projection onto {} heralds with probability {:.3g}".format(
            self.projector, self.probability)


class UndefinedOrientationError(OAMError):
    """A pure vortex (one superposition coefficient zero) has no paddle
    pattern and hence no orientation."""


class UndefinedVisibilityError(OAMError):
    """Both fringe extrema are zero."""


class ApproximationError(OAMError):
    """The linear-translation approximation of a mask rotation was requested
    for an arc that is too long. The worst-case sagitta is attached."""

    def __init__(self, span, limit, sagitta):
        super(ApproximationError, self).__init__(span, limit, sagitta)
        self.span = span
        self.limit = limit
        self.sagitta = sagitta

    def __str__(self):
        return ("mask arc span {:.4g} rad exceeds {:.4g} rad; "
                "linearization sagitta would be {:.4g} m").format(
                    self.span, self.limit, self.sagitta)


class FitError(OAMError):
    """A fit failed to converge. ``diagnostics`` is a dictionary describing
    the attempted starts and the best residual reached."""

    def __init__(self, message, diagnostics=None):
        super(FitError, self).__init__(message)
        self.message = message
        self.diagnostics = diagnostics or {}

    def pretty_diagnostics(self):
        """Return the diagnostics dictionary as a key: value listing."""
        retval = ""
        for key, value in self.diagnostics.items():
            retval += f"{key}: {value}\n"
        return retval

    def __str__(self):
        if self.diagnostics:
            return "{}\n{}".format(self.message, self.pretty_diagnostics())
        return self.message
