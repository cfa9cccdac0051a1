"""Error taxonomy shared by the library and the CLI.

Every failure mode raises a subclass of :class:`RelusetError` carrying a
machine-parsable ``tag`` and the process exit code the CLI maps it to.
Exit-code classes: 3 for size limits, 4 for convergence failures, 2 for
every other validation error.
"""

from __future__ import annotations


class RelusetError(Exception):
    """Base class for all library errors."""

    tag = "ERROR"
    exit_code = 2

    def __str__(self) -> str:
        msg = super().__str__()
        return f"{self.tag}: {msg}" if msg else self.tag


class LimitExceeded(RelusetError):
    """A configured size cap (pattern count, generator count) was surpassed."""

    tag = "LIMIT_EXCEEDED"
    exit_code = 3


class DegenerateData(RelusetError):
    """The design matrix has a zero row; no strict activation witness exists."""

    tag = "DEGENERATE_DATA"


class NoConvergence(RelusetError):
    """An iterative routine exhausted its budget before reaching tolerance."""

    tag = "NO_CONVERGENCE"
    exit_code = 4


class Infeasible(RelusetError):
    """An interpolation target is unreachable by the model class."""

    tag = "INFEASIBLE"


class ShapeMismatch(RelusetError):
    """Inconsistent array shapes between a dataset and a solution/model."""

    tag = "SHAPE_MISMATCH"


class CertificateFailed(RelusetError):
    """No feasible dual vector within tolerance; signals solver inaccuracy."""

    tag = "CERTIFICATE_FAILED"
    exit_code = 4


class NotOptimal(RelusetError):
    """The supplied solution is not a member of the optimal set."""

    tag = "NOT_OPTIMAL"


class EmptySubset(RelusetError):
    """A subsampled analysis received an empty pattern subset."""

    tag = "EMPTY_SUBSET"


class NoSolution(RelusetError):
    """No generator subset reproduces the optimal fit (upstream inconsistency)."""

    tag = "NO_SOLUTION"


class PreconditionViolated(RelusetError):
    """An explicit operation precondition does not hold for the inputs."""

    tag = "PRECONDITION_VIOLATED"


class WidthTooSmall(RelusetError):
    """The requested network width cannot hold the construction."""

    tag = "WIDTH_TOO_SMALL"


class NotConnected(RelusetError):
    """No optimal path exists (or was found) at the requested width."""

    tag = "NOT_CONNECTED"


class NotNearOptimal(RelusetError):
    """A descent phase terminated too far above the certified optimum."""

    tag = "NOT_NEAR_OPTIMAL"


class Diverged(RelusetError):
    """Training objective blew up beyond the divergence guard."""

    tag = "DIVERGED"
    exit_code = 4


class InvalidGeometry(RelusetError):
    """Construction premises on the input geometry are violated."""

    tag = "INVALID_GEOMETRY"
