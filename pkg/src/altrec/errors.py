"""Exception types shared across the package."""


class AltrecError(Exception):
    """Base class for all package errors."""


class DegenerateExtent(AltrecError):
    """Point cloud has zero extent on every axis."""


class EmptyMesh(AltrecError):
    """Mesh has no usable (positive-area) faces."""


class EmptySurface(AltrecError):
    """Scalar grid has no crossing of the requested isovalue."""


class EmptyInput(AltrecError):
    """An operation received an empty collection."""


class LengthMismatch(AltrecError):
    """Paired collections differ in length."""


class MissingNormals(AltrecError):
    """A point cloud that requires normals has none."""


class TooFewPoints(AltrecError):
    """Fewer points than the operation's minimum."""


class PointOutsideDomain(AltrecError):
    """A sample lies outside the grid domain."""

    def __init__(self, index: int):
        self.index = index
        super().__init__(f"point {index} lies outside the grid domain")


class SolverDiverged(AltrecError):
    """Linear solver failed to reach the requested residual."""

    def __init__(self, achieved: float, tolerance: float, iterations: int):
        self.achieved = achieved
        self.tolerance = tolerance
        self.iterations = iterations
        super().__init__(
            f"solver reached relative residual {achieved:.3e} "
            f"(tolerance {tolerance:.3e}) after {iterations} iterations"
        )


class NotSymmetric(AltrecError):
    """Matrix expected to be symmetric is not."""


class OutOfRange(AltrecError):
    """Scalar parameter outside its documented range."""


class ParseError(AltrecError):
    """File could not be parsed; carries the offending location."""

    def __init__(self, path, line: int, message: str):
        self.path = path
        self.line = line
        super().__init__(f"{path}:{line}: {message}")


class UnsupportedFormat(AltrecError):
    """Unknown file format name or extension."""
