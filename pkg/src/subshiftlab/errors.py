"""Exception hierarchy shared by every module.

Each error carries the name of the module that raised it so the CLI can
report it, and an exit code: 1 for domain/contract problems, 2 for cap and
precision exhaustion.
"""


class WorkbenchError(Exception):
    exit_code = 1
    module = "subshiftlab"

    def __init__(self, message, *, module=None):
        super().__init__(message)
        if module is not None:
            self.module = module

    def __str__(self):
        return f"[{self.module}] {super().__str__()}"


class ContractViolation(WorkbenchError, ValueError):
    """Arguments break an operation's precondition (alphabet, dimension...)."""


class DomainError(WorkbenchError, ValueError):
    pass


class ParseError(WorkbenchError, ValueError):
    def __init__(self, message, line=None, *, module=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message, module=module)
        self.line = line


class ScheduleError(DomainError):
    pass


class InfeasibleSchedule(ScheduleError):
    pass


class ConversionError(DomainError):
    pass


class LayoutError(DomainError):
    def __init__(self, message, minimum=None, *, module=None):
        super().__init__(message, module=module)
        self.minimum = minimum


class BoundaryExit(DomainError):
    def __init__(self, message, step=None, *, module=None):
        super().__init__(message, module=module)
        self.step = step


class AlignmentError(DomainError):
    pass


class InapplicableError(DomainError):
    pass


class ReducibilityError(DomainError):
    def __init__(self, message, classes=(), *, module=None):
        super().__init__(message, module=module)
        self.classes = list(classes)


class CapExceeded(WorkbenchError):
    """A configured size cap would be exceeded; nothing is silently truncated."""

    exit_code = 2

    def __init__(self, message, cap=None, partial=None, *, module=None):
        super().__init__(message, module=module)
        self.cap = cap
        self.partial = partial


class EnumerationOverflow(CapExceeded):
    pass


class CountingOverflow(CapExceeded):
    pass


class PrecisionError(WorkbenchError):
    exit_code = 2


class UndecidedCondition(PrecisionError):
    def __init__(self, message, condition=None, *, module=None):
        super().__init__(message, module=module)
        self.condition = condition


class ConvergenceError(PrecisionError):
    pass
