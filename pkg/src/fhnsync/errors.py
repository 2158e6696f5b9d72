"""Exception hierarchy shared by every module.

Each class carries a short ``kind`` tag so the command line can print a
single machine-parsable error line.
"""


class FhnSyncError(Exception):
    kind = "error"


class GridMismatchError(FhnSyncError):
    kind = "grid_mismatch"


class InvalidSizeError(FhnSyncError):
    kind = "invalid_size"


class ShapeError(FhnSyncError):
    kind = "shape"


class AssumptionViolation(FhnSyncError):
    kind = "assumption_violation"


class ConnectivityError(FhnSyncError):
    kind = "connectivity"


class DegenerateDampingError(FhnSyncError):
    kind = "degenerate_damping"


class StabilityError(FhnSyncError):
    kind = "stability"


class BlowUpError(FhnSyncError):
    kind = "blow_up"

    def __init__(self, message, step=None, node=None, partial=None):
        super().__init__(message)
        self.step = step
        self.node = node
        # (trace, snapshots) collected before the failure
        self.partial = partial


class BracketError(FhnSyncError):
    kind = "bracket"

    def __init__(self, message, lo_verdict=None, hi_verdict=None):
        super().__init__(message)
        self.lo_verdict = lo_verdict
        self.hi_verdict = hi_verdict


class InsufficientDataError(FhnSyncError):
    kind = "insufficient_data"


class EmptyTraceError(FhnSyncError):
    kind = "empty_trace"


class ConfigError(FhnSyncError):
    kind = "config"
