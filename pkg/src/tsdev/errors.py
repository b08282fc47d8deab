"""Exception types raised by the toolkit.

Plain parameter problems raise :class:`ValueError`. The subclasses below
exist for conditions a caller (or the command line front end) needs to tell
apart from a generic bad argument.
"""


class AlignmentError(ValueError):
    """A time value does not fall on the sample grid."""

    def __init__(self, message, nearest=()):
        super().__init__(message)
        self.nearest = tuple(nearest)


class CoverageError(ValueError):
    """The second channel does not cover every shifted analysis window.

    ``missing_before`` and ``missing_after`` are sample counts that would
    have to be added to the front and back of the channel.
    """

    def __init__(self, message, missing_before=0, missing_after=0):
        super().__init__(message)
        self.missing_before = int(missing_before)
        self.missing_after = int(missing_after)


class DegeneratePowerError(ValueError):
    """A windowed segment has zero power where a power ratio is needed."""


class OutOfLinkError(ValueError):
    """A delay maps to a position outside the fiber link."""

    def __init__(self, message, tau_s, position_m):
        super().__init__(message)
        self.tau_s = float(tau_s)
        self.position_m = float(position_m)
