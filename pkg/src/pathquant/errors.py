"""Exception types shared across the toolkit."""


class PathquantError(Exception):
    """Base class for all toolkit errors."""


class ChartDomainError(PathquantError):
    """A point lies outside the interior of its chart box."""


class DimensionError(PathquantError):
    """Component-length mismatch between vectors, points, or grids."""


class DegenerateFormError(PathquantError):
    """The symplectic matrix is numerically singular at a sampled point."""


class PartitionDomainError(PathquantError):
    """A path segment leaves the domain of its assigned local potential."""


class DegreeError(PathquantError):
    """A form was applied to the wrong number of vector arguments."""


class BoundaryMismatchError(PathquantError):
    """A spanning surface fails to trace its boundary loop on the grid."""


class NonCompactDomainError(PathquantError):
    """A compact-domain integral was requested without a bounding box."""


class ConfigError(PathquantError):
    """A scenario file violates the documented schema."""


class SuiteUnknownError(ConfigError):
    """The requested verification suite does not exist."""
