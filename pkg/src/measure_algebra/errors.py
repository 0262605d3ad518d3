"""Exception hierarchy.

Every error carries a module-qualified ``code`` (``"measure_core.UnsupportedFramePair"``)
which the CLI prints verbatim.
"""

from __future__ import annotations


class MeasureAlgebraError(Exception):
    module = "measure_algebra"

    @property
    def code(self) -> str:
        return f"{self.module}.{type(self).__name__}"


# measure_core
class MeasureCoreError(MeasureAlgebraError):
    module = "measure_core"


class DimensionMismatch(MeasureCoreError, ValueError):
    pass


class UnsupportedFramePair(MeasureCoreError):
    """Two slabs with different frames met in a convolution.

    This is a limit of the gridded representation, not a statement that the
    convolution does not exist.
    """


class UnsupportedProductPair(MeasureCoreError):
    pass


class UnsupportedProjection(MeasureCoreError):
    pass


class NotOrthogonal(MeasureCoreError, ValueError):
    pass


class SupportOverflow(MeasureCoreError):
    pass


class GridMismatch(MeasureCoreError):
    """Densities live on incompatible sample lattices."""


# charfn
class CharfnError(MeasureAlgebraError):
    module = "charfn"


class ZeroOnGrid(CharfnError):
    pass


class PhaseStepTooLarge(CharfnError):
    pass


class NotStabilized(CharfnError):
    pass


class NotNearInteger(CharfnError):
    pass


# sigma_primitives
class PowerTooLarge(MeasureAlgebraError, ValueError):
    module = "sigma_primitives"


# ac_algebra / lattice_gfs / banach_gfs share a few names
class ResidualTooLarge(MeasureAlgebraError):
    module = "numerics"


class NotInvertible(MeasureAlgebraError):
    module = "factorization"


class TorusDimTooLarge(MeasureAlgebraError, ValueError):
    module = "lattice_gfs"


class NoDominantAtom(MeasureAlgebraError):
    module = "lattice_gfs"


class NoDominantCoefficient(MeasureAlgebraError):
    module = "banach_gfs"


class NonzeroWindingInCoefficient(MeasureAlgebraError):
    module = "banach_gfs"


class UnsupportedClass(MeasureAlgebraError):
    module = "factorization"


class HasSigmaFactors(MeasureAlgebraError):
    module = "factorization"


class ParseError(MeasureAlgebraError, ValueError):
    module = "cli"
