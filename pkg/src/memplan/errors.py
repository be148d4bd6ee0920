"""Exception hierarchy shared by all planner modules."""


class PlannerError(Exception):
    """Base class for every domain error raised by memplan."""


class MalformedTrace(PlannerError):
    pass


class InvariantViolation(PlannerError):
    def __init__(self, message, index=None):
        super().__init__(message if index is None else f"op {index}: {message}")
        self.index = index


class BlockOutOfRange(PlannerError):
    pass


class ZeroBandwidth(PlannerError):
    pass


class ChunkTooSmall(PlannerError):
    pass


class NoFeasibleChunkSize(PlannerError):
    pass


class OutOfRange(PlannerError):
    pass


class InfeasibleLayout(PlannerError):
    pass


class InvalidConfig(PlannerError):
    pass


class NoFeasibleConfig(PlannerError):
    pass


class DeadlockDetected(PlannerError):
    pass


class LedgerUnderflow(PlannerError):
    pass


class UnknownPreset(PlannerError):
    pass
