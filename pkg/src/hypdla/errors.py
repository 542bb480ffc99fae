"""Exception hierarchy shared by all hypdla modules."""


class HypDLAError(Exception):
    """Base class for every error raised by this package."""


class EmptyAggregate(HypDLAError):
    pass


class DegenerateBoundary(HypDLAError):
    pass


class StartInsideAggregate(HypDLAError):
    pass


class StartBelowFloor(HypDLAError):
    pass


class NoAcceptanceWithinBudget(HypDLAError):
    pass


class MalformedRecord(HypDLAError):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class InvariantViolation(HypDLAError):
    def __init__(self, message: str, index: int):
        super().__init__(f"particle {index}: {message}")
        self.index = index


class SpacingFailure(HypDLAError):
    pass


class InsufficientData(HypDLAError):
    pass


class StepFailed(HypDLAError):
    def __init__(self, message: str, index: int):
        super().__init__(f"growing particle {index}: {message}")
        self.index = index
