"""Exception types raised by the medax operations."""

from __future__ import annotations


class MedaxError(Exception):
    """Base class for all medax errors."""


class ShapeError(MedaxError):
    """Unknown shape kind or inconsistent shape parameters."""


class RefinementError(MedaxError):
    """Sample count too small to cover the shape at the requested fill."""


class OracleUnavailableError(MedaxError):
    """The shape kind has no exact nearest-point oracle."""


class EmptyCloudError(MedaxError):
    """A spatial index was requested over an empty cloud."""


class UndefinedGradientError(MedaxError):
    """Distance gradient requested on the set itself (d = 0)."""


class MedialPointError(MedaxError):
    """Query point is flagged medial; the closest-point map is multivalued."""


class MedialCrossingError(MedaxError):
    """A segment operation crossed the detected medial set.

    ``point`` is the first flagged sample point along the segment.
    """

    def __init__(self, message: str, point=None):
        super().__init__(message)
        self.point = point


class NoJumpError(MedaxError):
    """Bisection found no closest-point jump across the segment."""


class DoubleJumpError(MedaxError):
    """Both halves of a bisection bracket carry jumps; shorten the segment."""


class GraphRadiusError(MedaxError):
    """Geodesic-graph connect radius below the enforced 4*fill floor."""


class NoPathError(MedaxError):
    """Endpoints lie in different graph components; inner metric undefined."""


class SnapError(MedaxError):
    """A query point is too far from the cloud to snap onto it."""


class BallTooSmallError(MedaxError):
    """A probe ball captures fewer than two connected sample points."""


class RegionInvalidError(MedaxError):
    """A probe region intersects detected medial samples."""


class ConfigError(MedaxError):
    """Invalid experiment configuration; ``field`` names the offender."""

    def __init__(self, message: str, field: str | None = None):
        super().__init__(message if field is None else f"{field}: {message}")
        self.field = field
