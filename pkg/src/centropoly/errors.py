"""Exception types shared across the package."""


class GeometryError(Exception):
    """Base class for all polygon-geometry errors."""


class DegenerateSign(GeometryError):
    """A sign predicate landed inside the tolerance dead-band."""


class NotGeneric(GeometryError):
    """Four consecutive nodes are coplanar (a torsion volume has no strict sign)."""


class NotParallel(GeometryError):
    """The transversal field's increments are not tangential."""


class NotExact(GeometryError):
    """A planar field is not exact with respect to its polygon."""


class NonTransversal(GeometryError):
    """A field fails the positive-volume transversality requirement."""


class NotLocallyConvex(GeometryError):
    """A polygon fails the positive-volume local convexity requirement."""


class NotEqualVolume(GeometryError):
    """The polygon's node volumes are not identically one."""


class IntegrationInconsistent(GeometryError):
    """A cyclic integration does not close up around the polygon."""


class DecompositionResidual(GeometryError):
    """A vector did not lie in its expected span within tolerance."""


class DualityResidual(GeometryError):
    """A defining incidence relation of the dual pair failed numerically."""


class IdentityCheckFailed(GeometryError):
    """An internal cross-check identity exceeded its residual tolerance."""


class NotPlanarDual(GeometryError):
    """The dual polygon is not planar, so no inverse pedal exists."""


class NonProjectable(GeometryError):
    """A node cannot be radially projected onto the reference plane."""


class SingularNormalization(GeometryError):
    """The rescaling system is singular and the data is incompatible."""


class GenerationFailed(GeometryError):
    """Random instance construction exhausted its retry budget."""


class ValidationError(GeometryError):
    """An input document violates its schema or an invariant."""
