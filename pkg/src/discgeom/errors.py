"""Exception types shared across the toolkit."""


class DiscGeomError(Exception):
    """Base class for all errors raised by discgeom."""


class DegenerateMetric(DiscGeomError):
    """The tangent vectors fail the rank-2 condition (area element below threshold)."""


class NotConformal(DiscGeomError):
    """An operation valid only in conformal parameters was applied at a non-conformal point."""


class FrameMismatch(DiscGeomError):
    """A normal frame is not actually normal (or not orthonormal) for the given jet."""


class MissingDerivatives(DiscGeomError):
    """A frame without derivative data was passed where derivatives are required."""


class ExpressionSyntaxError(DiscGeomError):
    """Malformed expression text.

    Attributes:
        offset: byte offset of the offending token.
        expected: set of token descriptions that would have been accepted.
    """

    def __init__(self, message, offset, expected=()):
        super().__init__(message)
        self.offset = offset
        self.expected = frozenset(expected)


class UnknownIdentifier(ExpressionSyntaxError):
    """Identifier other than x, y, pi, e or a known function name."""


class DomainError(DiscGeomError):
    """Evaluation left the real domain of an operation (log of a non-positive value, etc.).

    Attributes:
        node: pretty-printed subexpression where evaluation failed, or None.
    """

    def __init__(self, message, node=None):
        super().__init__(message if node is None else f"{message} in '{node}'")
        self.node = node


class UnknownSurface(DiscGeomError):
    """Requested built-in surface name does not exist."""


class BadParameter(DiscGeomError):
    """Invalid parameter value (non-positive radius, even grid resolution, ...)."""


class StencilOutOfDomain(DiscGeomError):
    """A finite-difference stencil needs points where the evaluator is undefined."""


class NormBelowThreshold(DiscGeomError):
    """A raw normal vector is too short to orthonormalize safely (anchor nearly tangent)."""


class AngleThreshold(DiscGeomError):
    """Two normalized raw normals are too far from orthogonal to orthonormalize safely."""


class EmptyGrid(DiscGeomError):
    """A grid reduction was requested on a grid with no valid points."""


class DisconnectedMask(DiscGeomError):
    """The grid mask does not connect the center to the boundary."""


class BadSpacing(DiscGeomError):
    """Disc grid spacing outside the supported range."""


class LinearSolveDiverged(DiscGeomError):
    """The linear solve did not reach the requested residual tolerance."""


class FrameFailure(DiscGeomError):
    """Frame construction failed during a solver iteration.

    Attributes:
        iteration: outer iteration index at which the failure occurred.
    """

    def __init__(self, message, iteration=None):
        super().__init__(message)
        self.iteration = iteration
