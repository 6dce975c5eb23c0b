"""
Constraint Solver
Closed-form algebra of the linear x5-derivative constraints and the mass and
source relations they induce.

Charged scalars:  (i/M) d5 phi_+- = alpha_+- phi_+ + beta_+- phi_- + C_+-
    m_+^2 = -2 M^2 alpha_+ (1 - alpha_+^2) / beta_+,   m_-^2 = -2 M^2 alpha_+ beta_+
    alpha_+^2 + alpha_- beta_+ = 1,   beta_-^2 + alpha_- beta_+ = 1   (so alpha_+ = beta_-)

Neutral scalars:  (1/M) d5 phi_+- = alpha_+- phi_+ + beta_+- phi_- + C_+-
    m_+^2 = -2 M^2 alpha_+ (1 + alpha_+^2) / beta_+,   m_-^2 = 2 M^2 alpha_+ beta_+
    alpha_+^2 + alpha_- beta_+ = -1,  beta_-^2 + alpha_- beta_+ = -1

On lattice fields x5 derivatives act on exp(-i Q x5):
    (i/M) d5 -> Q/M,   (1/M) d5 -> -i Q/M
"""

import logging
import math
from typing import Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from cone_geometry import ConePoint, minkowski_dot
from config import Config
from domain_partition import q5_squared_array
from errors import (
    DegenerateScale,
    InconsistentParams,
    LatticeMismatch,
    MassBoundViolated,
    NegativeMass,
    NonPositiveMass,
    ZeroAlpha,
    ZeroBeta,
)
from field_decomposition import DecomposedField, MomentumLatticeField, assemble_pm
from spectral_verifier import ResidualReport, build_report

logger = logging.getLogger(__name__)


class ConstraintParams(BaseModel):
    """Coefficients of the linear x5-derivative constraints"""

    model_config = ConfigDict(frozen=True)

    alpha_plus: float
    alpha_minus: float
    beta_plus: float
    beta_minus: float
    M: float = Field(gt=0)

    @classmethod
    def charged(cls, alpha_plus: float, beta_plus: float, M: float = 1.0) -> "ConstraintParams":
        """Complete alpha_-, beta_- from the charged consistency pair"""
        if beta_plus == 0:
            raise ZeroBeta("beta_plus = 0")
        return cls(alpha_plus=alpha_plus, alpha_minus=(1.0 - alpha_plus * alpha_plus) / beta_plus,
                   beta_plus=beta_plus, beta_minus=alpha_plus, M=M)

    @classmethod
    def neutral(cls, alpha_plus: float, beta_plus: float, M: float = 1.0) -> "ConstraintParams":
        """Complete alpha_-, beta_- from the neutral consistency pair"""
        if beta_plus == 0:
            raise ZeroBeta("beta_plus = 0")
        return cls(alpha_plus=alpha_plus, alpha_minus=-(1.0 + alpha_plus * alpha_plus) / beta_plus,
                   beta_plus=beta_plus, beta_minus=alpha_plus, M=M)

    def charged_defects(self) -> Tuple[float, float]:
        """Deviations of the charged consistency pair from 1"""
        cross = self.alpha_minus * self.beta_plus
        return self.alpha_plus ** 2 + cross - 1.0, self.beta_minus ** 2 + cross - 1.0


class MassPair(BaseModel):
    """Squared masses in units of M^2"""

    model_config = ConfigDict(frozen=True)

    m_plus2: float
    m_minus2: float

    @property
    def physical(self) -> bool:
        return self.m_plus2 >= 0 and self.m_minus2 >= 0


def _require_beta(p: ConstraintParams) -> None:
    if p.beta_plus == 0:
        raise ZeroBeta("beta_plus = 0")


def charged_masses(p: ConstraintParams, tol: float = 1e-10) -> MassPair:
    """
    Masses generated by the charged constraint

    Args:
        p: parameters satisfying the charged consistency pair
        tol: allowed deviation of the consistency pair

    Returns:
        MassPair; physical when both squared masses are >= 0, which for
        |alpha_+| < 1 means alpha_+ beta_+ <= 0
    """
    _require_beta(p)
    defects = p.charged_defects()
    if max(abs(d) for d in defects) > tol:
        logger.warning(f"⚠️ charged consistency violated: {defects}")
        raise InconsistentParams(f"consistency defects {defects[0]:.3e}, {defects[1]:.3e} exceed {tol}")
    M2 = p.M * p.M
    a, b = p.alpha_plus, p.beta_plus
    # + 0.0 normalizes -0.0 in the massless case
    return MassPair(m_plus2=-2.0 * M2 * a * (1.0 - a * a) / b + 0.0, m_minus2=-2.0 * M2 * a * b + 0.0)


def _alpha_squared_branches(x: float) -> Tuple[float, float]:
    """Roots of a (1 - a) = x / 4; the lower one without cancellation"""
    upper = 0.5 + 0.5 * math.sqrt(max(0.0, 1.0 - x))
    return upper, x / (4.0 * upper)


def _product_ratio(m_plus2: float, m_minus2: float, M: float) -> float:
    if not M > 0:
        raise ValueError(f"M must be > 0, got {M}")
    if not (m_plus2 > 0 and m_minus2 > 0):
        raise NonPositiveMass(f"masses must be > 0, got {m_plus2}, {m_minus2}")
    x = m_plus2 * m_minus2 / M ** 4
    if x > 1.0:
        logger.warning(f"⚠️ mass bound violated: m+ m- / M^2 = {math.sqrt(x):.6g}")
        raise MassBoundViolated(f"m+ m- = {math.sqrt(x) * M * M:.6g} exceeds M^2 = {M * M:.6g}")
    return x


def charged_params_from_masses(m: MassPair, M: float, branch: str = "+") -> ConstraintParams:
    """
    Charged constraint parameters that reproduce the given masses

    alpha_+^2 = 1/2 +- 1/2 sqrt(1 - m_+^2 m_-^2 / M^4), alpha_+ < 0 < beta_+,
    beta_+^2 = (1 - alpha_+^2) m_-^2 / m_+^2

    Args:
        m: target squared masses, both > 0
        M: scale parameter
        branch: "+" for the larger alpha_+^2, "-" for the smaller
    """
    x = _product_ratio(m.m_plus2, m.m_minus2, M)
    upper, lower = _alpha_squared_branches(x)
    if branch == "+":
        alpha2 = upper
    elif branch == "-":
        alpha2 = lower
    else:
        raise ValueError(f"branch must be '+' or '-', got {branch!r}")
    alpha_plus = -math.sqrt(alpha2)
    beta_plus = math.sqrt((1.0 - alpha2) * m.m_minus2 / m.m_plus2)
    return ConstraintParams.charged(alpha_plus, beta_plus, M)


def neutral_mass_ratio(p: ConstraintParams) -> float:
    """m_+^2 / m_-^2 = -(1 + alpha_+^2) / beta_+^2; negative for every real input"""
    _require_beta(p)
    return -(1.0 + p.alpha_plus ** 2) / p.beta_plus ** 2


def neutral_masses(p: ConstraintParams) -> MassPair:
    _require_beta(p)
    M2 = p.M * p.M
    a, b = p.alpha_plus, p.beta_plus
    return MassPair(m_plus2=-2.0 * M2 * a * (1.0 + a * a) / b + 0.0, m_minus2=2.0 * M2 * a * b + 0.0)


def neutral_alt_mass(alpha: float, m_minus2: float) -> float:
    """m_+^2 = alpha^2 m_-^2 for the constraint phi_- = alpha phi_+ + G"""
    if m_minus2 < 0:
        raise NegativeMass(f"m_minus2 must be >= 0, got {m_minus2}")
    return alpha * alpha * m_minus2


def neutral_source_transfer(alpha: float, j_plus: MomentumLatticeField,
                            F: MomentumLatticeField) -> MomentumLatticeField:
    """j_- = (j_+ + F) / alpha"""
    if alpha == 0:
        raise ZeroAlpha("source transfer needs alpha != 0")
    if not j_plus.same_lattice(F):
        raise LatticeMismatch("j_plus and F live on different lattices")
    return j_plus.with_values((j_plus.values + F.values) / alpha)


def fermion_alpha_branches(m_plus: float, m_minus: float, M: float) -> Tuple[float, float]:
    """
    Both alpha_+^2 branches for fermion masses m_+, m_-

    Each lies in (0, 1) and satisfies alpha_+^2 (1 - alpha_+^2) = m_+^2 m_-^2 / (4 M^4).

    Returns:
        (larger, smaller)
    """
    if not (m_plus > 0 and m_minus > 0):
        raise NonPositiveMass(f"masses must be > 0, got {m_plus}, {m_minus}")
    return _alpha_squared_branches(_product_ratio(m_plus * m_plus, m_minus * m_minus, M))


def fermion_mass_ratio(p: ConstraintParams) -> float:
    """m_+^2 / m_-^2 = (1 - alpha_+^2) / beta_+^2"""
    _require_beta(p)
    return (1.0 - p.alpha_plus ** 2) / p.beta_plus ** 2


# Source assembly on lattice fields

def _fifth(C: MomentumLatticeField, q5: Optional[np.ndarray]) -> np.ndarray:
    if q5 is None:
        q5 = np.sqrt(q5_squared_array(C.mode_q2, C.M))
    return np.asarray(q5, dtype=float)[..., np.newaxis]


def charged_sources(p: ConstraintParams, C_plus: MomentumLatticeField, C_minus: MomentumLatticeField,
                    q5: Optional[np.ndarray] = None) -> Tuple[MomentumLatticeField, MomentumLatticeField]:
    """
    j_+ = M^2 [ (1 - alpha_+^2)/beta_+ C_+ + alpha_+ C_- + (i/M) d5 C_- ]
    j_- = M^2 [ alpha_+ C_+ + beta_+ C_- + (i/M) d5 C_+ ]

    Args:
        p: charged parameters
        C_plus, C_minus: constraint sources at x5 = 0
        q5: per-site fifth momentum (default: on-shell Q of each site's domain)
    """
    _require_beta(p)
    if not C_plus.same_lattice(C_minus):
        raise LatticeMismatch("C_plus and C_minus live on different lattices")
    derivative = _fifth(C_plus, q5) / p.M
    M2 = p.M * p.M
    a, b = p.alpha_plus, p.beta_plus
    cp, cm = C_plus.values, C_minus.values
    j_plus = M2 * ((1.0 - a * a) / b * cp + a * cm + derivative * cm)
    j_minus = M2 * (a * cp + b * cm + derivative * cp)
    return C_plus.with_values(j_plus), C_plus.with_values(j_minus)


def neutral_sources(p: ConstraintParams, C_plus: MomentumLatticeField, C_minus: MomentumLatticeField,
                    q5: Optional[np.ndarray] = None) -> Tuple[MomentumLatticeField, MomentumLatticeField]:
    """
    j_+ = M^2 [ (1 + alpha_+^2)/beta_+ C_+ + alpha_+ C_- + (1/M) d5 C_- ]
    j_- = M^2 [ alpha_+ C_+ + beta_+ C_- + (1/M) d5 C_+ ]
    """
    _require_beta(p)
    if not C_plus.same_lattice(C_minus):
        raise LatticeMismatch("C_plus and C_minus live on different lattices")
    derivative = -1j * _fifth(C_plus, q5) / p.M
    M2 = p.M * p.M
    a, b = p.alpha_plus, p.beta_plus
    cp, cm = C_plus.values, C_minus.values
    j_plus = M2 * ((1.0 + a * a) / b * cp + a * cm + derivative * cm)
    j_minus = M2 * (a * cp + b * cm + derivative * cp)
    return C_plus.with_values(j_plus), C_plus.with_values(j_minus)


def check_charged_constraint(phi: DecomposedField, C_plus: MomentumLatticeField,
                             C_minus: MomentumLatticeField, j_plus: MomentumLatticeField,
                             j_minus: MomentumLatticeField, m_plus2: float, m_minus2: float,
                             tol: Optional[float] = None) -> ResidualReport:
    """
    Check at x5 = 0, with (i/M) d5 -> Q/M:
        (1 - (i/M) d5) phi_+- = C_+-
        M^2 (1 + (i/M) d5) C_-+ = m_+-^2 phi_+- - j_+-
    """
    base = phi.lattice
    for f in (C_plus, C_minus, j_plus, j_minus):
        if not base.same_lattice(f):
            raise LatticeMismatch("constraint fields live on different lattices")
    ratio = (phi.q5() / phi.M)[..., np.newaxis]
    M2 = phi.M * phi.M
    phi_plus, phi_minus = assemble_pm(phi, "+").values, assemble_pm(phi, "-").values
    residuals = [
        (1.0 - ratio) * phi_plus - C_plus.values,
        (1.0 - ratio) * phi_minus - C_minus.values,
        M2 * (1.0 + ratio) * C_minus.values - (m_plus2 * phi_plus - j_plus.values),
        M2 * (1.0 + ratio) * C_plus.values - (m_minus2 * phi_minus - j_minus.values),
    ]
    reference = max(phi.sup_norm() * max(M2, abs(m_plus2), abs(m_minus2)),
                    C_plus.sup_norm() * M2, C_minus.sup_norm() * M2,
                    j_plus.sup_norm(), j_minus.sup_norm())
    return build_report("charged_constraint", residuals, reference,
                        Config.CONSTRAINT_TOL if tol is None else tol)


# Fifth gauge component

def a5_from_a4(a_nu, kappa: ConePoint, e: float) -> Tuple[complex, complex]:
    """
    Fifth gauge component that keeps kplus fixed under k -> k - e a, a6 = -a5

    a5 = (-a.k - k.a + e a.a) / (2 M kplus)

    Returns:
        (a5, kminus' / kplus) with kminus' = kminus - 2 e a5 / M
    """
    if abs(kappa.kplus) < Config.DEGENERATE_EPS:
        raise DegenerateScale(f"kplus={kappa.kplus} below {Config.DEGENERATE_EPS}")
    a = np.asarray(a_nu)
    if a.shape != (4,):
        raise ValueError(f"a_nu needs 4 entries, got shape {a.shape}")
    k = kappa.kmu
    a_dot_k = minkowski_dot(a, k)
    k_dot_a = minkowski_dot(k, a)
    a5 = (-a_dot_k - k_dot_a + e * minkowski_dot(a, a)) / (2.0 * kappa.M * kappa.kplus)
    kminus_shifted = kappa.kminus - 2.0 * e * a5 / kappa.M
    return complex(a5), complex(kminus_shifted / kappa.kplus)


def translate_cone_point(kappa: ConePoint, a_nu, e: float) -> ConePoint:
    """Apply k' = k - e (a_nu, a5, -a5) for a real gauge sample a_nu"""
    a = np.asarray(a_nu)
    if np.iscomplexobj(a) and np.any(a.imag != 0):
        raise ValueError("cone points need a real gauge sample")
    a = a.real.astype(float)
    a5, ratio = a5_from_a4(a, kappa, e)
    return ConePoint.from_light_cone(kappa.kmu - e * a, kappa.kplus, ratio.real * kappa.kplus, kappa.M)
