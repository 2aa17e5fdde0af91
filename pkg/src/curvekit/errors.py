"""Exception hierarchy for curvekit.

Every domain error derives from :class:`CurvekitError` so callers (CLI,
service) can map failures to structured responses with one handler.
"""


class CurvekitError(Exception):
    """Base class for all curvekit errors."""


# --- tensor / bundle I/O ---

class MagicMismatch(CurvekitError):
    """File does not start with a known magic and is not parseable CSV."""


class ShapeMismatch(CurvekitError):
    """Declared shape disagrees with the payload (or trailing bytes exist)."""


class NonFiniteValue(CurvekitError):
    """A NaN or Inf was found while loading."""


class IoFailure(CurvekitError):
    """Underlying read/write failed."""


class DuplicateLayerIndex(CurvekitError):
    """Two bundle records share the same layer index."""


class OrdinalOutOfRange(CurvekitError):
    """A bundle record's layer index is not smaller than total_layers."""


# --- synthetic manifolds ---

class InvalidRadius(CurvekitError):
    """Sphere radius must be positive."""


class InvalidSpec(CurvekitError):
    """Generator specification violates its invariants."""


class OffSurface(CurvekitError):
    """Point does not satisfy the surface equation within tolerance."""


# --- neighborhoods ---

class EmptyMaskSet(CurvekitError):
    """A truncation plan must contain at least one mask."""


class KTooLarge(CurvekitError):
    """Requested more neighbors than available points."""


class SizeTooLarge(CurvekitError):
    """Requested subsample size exceeds the neighborhood size."""


# --- dimension estimation ---

class TooFewPoints(CurvekitError):
    """Not enough (distinct) points for the estimator."""


class AllPointsDuplicate(CurvekitError):
    """Every row of the input is identical."""


class DegenerateData(CurvekitError):
    """Data carries no variance (or an estimator denominator vanished)."""


# --- curvature estimation ---

class RankDeficient(CurvekitError):
    """Neighborhood cannot span a d+1 dimensional space."""


class DTooLarge(CurvekitError):
    """Intrinsic dimension must be smaller than the ambient dimension."""


class TooFewNeighbors(CurvekitError):
    """Fewer neighbors than unknowns in the quadratic regression."""


# --- curvature metrics ---

class EmptyInput(CurvekitError):
    """An aggregate was requested over zero curvature values."""


class WrongDimensions(CurvekitError):
    """Metric requires a specific (d, codimension) combination."""


class DimensionTooLarge(CurvekitError):
    """Riemann tensor would exceed the configured d**4 budget."""


class DegeneratePlane(CurvekitError):
    """Sectional curvature needs two linearly independent vectors."""


# --- profiles ---

class ZeroMeanMapc(CurvekitError):
    """Gap normalization is undefined when the mean curvature is zero."""


class MisalignedBundle(CurvekitError):
    """Bundle layers do not describe one common sample set."""
