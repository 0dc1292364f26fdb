"""Exception types raised by the trackfuse library."""


class TrackFuseError(Exception):
    """Base class for all trackfuse errors."""


class EmptyCostMatrixError(TrackFuseError):
    """Assignment requested on a cost matrix with zero rows or columns."""


class BehindCameraError(TrackFuseError):
    """Projection requested for a point at or behind the camera plane."""


class InsufficientDataError(TrackFuseError):
    """Not enough samples (or not enough distinct samples) for a fit."""


class ConvergenceError(TrackFuseError):
    """Iterative solver exhausted its iteration budget without converging."""


class DistanceRangeError(TrackFuseError):
    """Subject distance left the domain of the height/distance hyperbola."""


class NoOverlapError(TrackFuseError):
    """Track pair has no usable common frames."""


class EmptyPatchError(TrackFuseError):
    """Temperature reading requested on an empty pixel patch."""


class IncompleteWindowError(TrackFuseError):
    """Gait feature window is missing frames or contains empty frames."""


class StoreError(TrackFuseError):
    """Feature store cannot support the requested operation (empty, one class...)."""


class NoFeaturesError(TrackFuseError):
    """Re-identification requested without the required feature windows."""


class NoMatchedFramesError(TrackFuseError):
    """Metric requested but no frame has both an estimate and ground truth."""


class ScenarioError(TrackFuseError):
    """Scenario description is invalid (bad waypoints, bad ranges...)."""
