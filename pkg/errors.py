"""
ConeCalc error hierarchy
Every guard in the library raises one of these; the CLI maps them to exit codes.
"""


class ConeCalcError(Exception):
    """Base class for all library errors"""


class ConfigError(ConeCalcError, ValueError):
    """Invalid run configuration"""


class FieldFormatError(ConeCalcError, ValueError):
    """Malformed field payload (JSON or binary)"""


# cone geometry
class NonPositiveScale(ConeCalcError, ValueError):
    """kplus or M is not strictly positive"""


class DegenerateScale(ConeCalcError, ValueError):
    """Projective scale too close to zero to divide by"""


class OffCone(ConeCalcError, ValueError):
    """Point violates the cone condition beyond tolerance"""


class NotLorentz(ConeCalcError, ValueError):
    """Matrix does not preserve the Minkowski metric"""


class NullMomentumInversion(ConeCalcError, ValueError):
    """Inversion of a four-momentum with q^2 = 0"""


class SingularDenominator(ConeCalcError, ValueError):
    """Special conformal denominator vanishes"""


# domains
class DomainMismatch(ConeCalcError, ValueError):
    """Label does not match the domain of q^2"""


class NullSquare(ConeCalcError, ValueError):
    """Domain inversion of q^2 = 0"""


# fields
class EmptyGrid(ConeCalcError, ValueError):
    """Quadrature grid has no points"""


class NonPositiveKPlus(ConeCalcError, ValueError):
    """Quadrature grid is not strictly positive and ascending"""


class NegativeQ5Squared(ConeCalcError):
    """Internal consistency failure: a site produced q5^2 < 0"""


class LatticeMismatch(ConeCalcError, ValueError):
    """Fields live on different lattices"""


# constraints
class ZeroBeta(ConeCalcError, ValueError):
    """beta_plus = 0 in a formula that divides by it"""


class InconsistentParams(ConeCalcError, ValueError):
    """Parameters violate the charged consistency relations"""


class MassBoundViolated(ConeCalcError, ValueError):
    """m_plus * m_minus exceeds M^2"""


class NonPositiveMass(ConeCalcError, ValueError):
    """Mass must be strictly positive"""


class NegativeMass(ConeCalcError, ValueError):
    """Squared mass must be non-negative"""


class ZeroAlpha(ConeCalcError, ValueError):
    """alpha = 0 in the neutral source transfer"""


# dynamics
class RealityViolation(ConeCalcError, ValueError):
    """Real field translated by a non-imaginary momentum"""
