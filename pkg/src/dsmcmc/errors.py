"""Exception types shared across the package."""


class ParameterError(ValueError):
    """A parameter is outside its documented domain."""


class NumericError(ValueError):
    """A numeric input or result is unusable (non-finite, quantile overflow)."""


class StreamExhaustedError(RuntimeError):
    """A finite stream ran out of values in error mode."""


class StreamFormatError(ValueError):
    """A stream file contains an unparseable entry."""

    def __init__(self, message, line=None):
        super().__init__(message)
        self.line = line


class KernelError(ValueError):
    """A transition kernel violated its contract."""


class DegenerateKernelError(KernelError):
    """A zero-probability interval was selected in a discrete kernel step."""


class BalanceViolationError(KernelError):
    """Forward and reverse kernels are inconsistent with the target."""


class SupportError(KernelError):
    """The target has zero mass where the kernel needs it."""


class ProposalSupportError(KernelError):
    """A proposal density is zero at the proposed move."""


class ExpansionLimitError(RuntimeError):
    """Slice bracket expansion exceeded its iteration cap."""


class InvalidStateError(ValueError):
    """The chain is at a point where the target has no mass."""


class ReplayError(ValueError):
    """A recorded draw log does not match the step being reversed."""


class DegenerateTraceError(ValueError):
    """A trace has no variation, so autocorrelation-based summaries are undefined."""
