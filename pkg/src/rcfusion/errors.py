"""Exception types shared across the library."""


class FusionError(Exception):
    """Base class for all library errors."""


class PointBehindCamera(FusionError):
    """A point with non-positive camera-frame depth was projected."""


class FullyBehindCamera(FusionError):
    """No corner of a 3D box lies in front of the camera."""


class DegeneratePosition(FusionError):
    """A BEV position with zero norm has no line of sight."""


class InvalidDepth(FusionError):
    """An estimated depth is non-positive."""


class DegenerateBox(FusionError):
    """A 2D box with zero area cannot gate a frustum."""


class ShapeMismatch(FusionError):
    """Array arguments do not share the required shape."""


class MissingSecondary(FusionError):
    """Secondary head values were requested but are absent on a record."""
