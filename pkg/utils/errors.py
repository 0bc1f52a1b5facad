"""Exception hierarchy shared by every module.

Validation errors mean the caller handed in something unusable (exit code 1
from the CLI); computation errors mean the input was fine but the numerics
could not finish (exit code 2).
"""


class CalculusError(Exception):
    """Base class for all errors raised by this package"""


class ValidationError(CalculusError):
    """Input rejected before any computation"""


class ComputationError(CalculusError):
    """Computation failed on accepted input"""


# Validation errors

class BuildError(ValidationError):
    """Simplicial complex could not be built"""


class OutsideComplexError(ValidationError):
    """Point lies outside the realized complex"""


class UnknownElementError(ValidationError, LookupError):
    """Element is not part of the poset"""


class LevelError(ValidationError):
    """Object lives on the wrong refinement level"""


class ParityError(ValidationError):
    """Graded matrix has no definite parity"""


class AdmissibilityError(ValidationError):
    """Dirac weights do not follow the vertex graph"""


class SizeError(ValidationError):
    """Model size below the allowed minimum"""


class MetricError(ValidationError):
    """Metric weight is not strictly positive"""


class SynthesisError(ValidationError):
    """Stencil cannot be written as a density matrix"""


class ExpressionError(ValidationError):
    """Function expression does not parse"""


class UsageError(ValidationError):
    """Bad command line"""


# Computation errors

class GeometryError(ComputationError):
    """Degenerate geometric realization"""


class ConsistencyError(ComputationError):
    """Map between levels is not order preserving"""


class CapacityError(ComputationError):
    """Problem exceeds a configured size cap"""


class EvaluationError(ComputationError):
    """Function could not be evaluated at a vertex"""


class NormalizationError(ComputationError):
    """Density matrix has zero graded trace"""


class RateError(ComputationError):
    """Not enough data to fit a convergence rate"""
