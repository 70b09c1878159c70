"""Exception hierarchy. Each family maps onto one CLI exit code."""

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_PARSE = 2
EXIT_PRECONDITION = 3
EXIT_NUMERICAL = 4


class LabError(Exception):
    exit_code = EXIT_FAILED


class ParseError(LabError):
    exit_code = EXIT_PARSE

    def __init__(self, message, source=None, line=None):
        self.source = source
        self.line = line
        if source is not None and line is not None:
            message = '%s:%d: %s' % (source, line, message)
        elif source is not None:
            message = '%s: %s' % (source, message)
        LabError.__init__(self, message)


class PreconditionError(LabError):
    exit_code = EXIT_PRECONDITION

    def __init__(self, message, witness=None):
        self.witness = witness
        if witness is not None:
            message = '%s (witness: %s)' % (message, witness)
        LabError.__init__(self, message)


class SpacetimeStructureError(PreconditionError):
    pass


class DomainError(PreconditionError):
    pass


class ParameterError(PreconditionError):
    pass


class UnsupportedDualityError(PreconditionError):
    pass


class NonMonotonePathError(PreconditionError):
    pass


class IntermediatePointError(PreconditionError):
    pass


class PlanLiftError(PreconditionError):
    pass


class NotSteepError(PreconditionError):
    pass


class NotCausalError(PreconditionError):
    pass


class NumericalError(LabError):
    exit_code = EXIT_NUMERICAL


class TimeoutError(NumericalError):
    pass
