"""
Spectral Verifier
Numerical certificates for the coupled 5D condition
    d^2 phi_+-/dx^2 + (d^2/dx5^2 + M^2) phi_-+ = 0,
the source condition, the x5 consistency relation, the x5 = 0 boundary
condition and the projector algebra.

Derivatives act analytically on the exp(-i q.x - i Q x5) basis:
    d^2/dx^2 -> -q^2,   d^2/dx5^2 -> -Q^2
"""

import logging
from typing import Iterable, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from config import Config
from errors import LatticeMismatch
from field_decomposition import (
    DecomposedField,
    MomentumLatticeField,
    assemble_pm,
    extend_5d,
    lattice_q2,
    projector_apply,
)

logger = logging.getLogger(__name__)

TINY = np.finfo(float).tiny


class ResidualReport(BaseModel):
    """Outcome of one numerical check; serialized with the key "pass" """

    model_config = ConfigDict(validate_by_name=True, validate_by_alias=True, frozen=True)

    name: str
    linf: float
    l2: float
    tolerance: float
    passed: bool = Field(alias="pass")

    @model_validator(mode="after")
    def _pass_matches_linf(self) -> "ResidualReport":
        if self.passed != (self.linf <= self.tolerance):
            raise ValueError("pass must equal linf <= tolerance")
        return self

    def to_dict(self) -> dict:
        return self.model_dump(by_alias=True)


def build_report(name: str, residual: Union[np.ndarray, Iterable[np.ndarray]],
                 reference: float, rel_tol: float) -> ResidualReport:
    """
    Summarize residual arrays against rel_tol * max(reference, tiny)

    Args:
        name: check identifier
        residual: one array or several arrays of residual values
        reference: scale the tolerance is relative to (usually a sup-norm)
        rel_tol: relative tolerance

    Returns:
        ResidualReport
    """
    if isinstance(residual, np.ndarray):
        flat = np.abs(residual).reshape(-1)
    else:
        parts = [np.abs(np.asarray(r)).reshape(-1) for r in residual]
        flat = np.concatenate(parts) if parts else np.zeros(0)
    linf = float(flat.max()) if flat.size else 0.0
    l2 = float(np.sqrt(np.mean(flat * flat))) if flat.size else 0.0
    tolerance = rel_tol * max(float(reference), TINY)
    report = ResidualReport(name=name, linf=linf, l2=l2, tolerance=tolerance, passed=linf <= tolerance)
    logger.debug(f"🔍 {name}: linf={linf:.3e} tol={tolerance:.3e} pass={report.passed}")
    return report


def _coupled_residual(plus: np.ndarray, minus: np.ndarray, q2: np.ndarray,
                      Q: np.ndarray, M: float) -> Tuple[np.ndarray, np.ndarray]:
    q2 = q2[..., np.newaxis]
    mass_term = (M * M - Q * Q)[..., np.newaxis]
    return -q2 * plus + mass_term * minus, -q2 * minus + mass_term * plus


def _lattice_q2(d: DecomposedField) -> np.ndarray:
    # rebuilt from the lattice, not read from the cached mode_q2
    return lattice_q2(d.lattice.dims, d.lattice.spacing)


def check_coupled_condition(d: DecomposedField, x5_samples: Sequence[float],
                            tol: Optional[float] = None, mode: str = "analytic",
                            t5: float = 0.0) -> ResidualReport:
    """
    Certify the coupled condition on phi_+- = extend_5d(d, x5, +-)

    Args:
        d: decomposed field
        x5_samples: fifth coordinates to evaluate at
        tol: relative tolerance (default Config.IDENTITY_TOL, or
            Config.FD_TOL scaled by max(1, Qmax^2/M^2) in finite_difference mode)
        mode: "analytic" substitutes -Q^2 for d^2/dx5^2; "finite_difference"
            takes a central second difference in x5
        t5: boundary offset passed to extend_5d

    Returns:
        ResidualReport named "coupled_condition"
    """
    M = d.M
    q2 = _lattice_q2(d)
    Q = d.q5()
    residuals = []
    if mode == "analytic":
        rel_tol = Config.IDENTITY_TOL if tol is None else tol
        for x5 in x5_samples:
            plus = extend_5d(d, x5, "+", t5).values
            minus = extend_5d(d, x5, "-", t5).values
            residuals.extend(_coupled_residual(plus, minus, q2, Q, M))
    elif mode == "finite_difference":
        q_max = float(np.max(Q)) if Q.size else 0.0
        rel_tol = (Config.FD_TOL if tol is None else tol) * max(1.0, q_max * q_max / (M * M))
        step = 1e-4 / max(q_max, M)
        q2c = q2[..., np.newaxis]
        for x5 in x5_samples:
            fields = {}
            for sign in ("+", "-"):
                lo, mid, hi = (extend_5d(d, x5 + s * step, sign, t5).values for s in (-1.0, 0.0, 1.0))
                fields[sign] = (mid, (hi - 2.0 * mid + lo) / (step * step))
            for this, other in (("+", "-"), ("-", "+")):
                value, _ = fields[this]
                partner, partner_d2 = fields[other]
                residuals.append(-q2c * value + partner_d2 + M * M * partner)
    else:
        raise ValueError(f"mode must be 'analytic' or 'finite_difference', got {mode!r}")
    return build_report("coupled_condition", residuals, d.sup_norm(), rel_tol)


def _require_same_lattice(a: DecomposedField, b: DecomposedField) -> None:
    if not a.lattice.same_lattice(b.lattice):
        raise LatticeMismatch("fields live on different lattices")


def check_source_condition(j_parts: DecomposedField, phi_parts: DecomposedField,
                           m_plus2: float, m_minus2: float,
                           x5_samples: Sequence[float] = (0.0,),
                           tol: Optional[float] = None) -> ResidualReport:
    """Certify that tilde-j_+- = j_+- - m_+-^2 phi_+- obeys the coupled condition"""
    _require_same_lattice(j_parts, phi_parts)
    M = phi_parts.M
    q2 = _lattice_q2(phi_parts)
    Q = phi_parts.q5()
    residuals = []
    for x5 in x5_samples:
        tj_plus = extend_5d(j_parts, x5, "+").values - m_plus2 * extend_5d(phi_parts, x5, "+").values
        tj_minus = extend_5d(j_parts, x5, "-").values - m_minus2 * extend_5d(phi_parts, x5, "-").values
        residuals.extend(_coupled_residual(tj_plus, tj_minus, q2, Q, M))
    reference = max(j_parts.sup_norm(), max(abs(m_plus2), abs(m_minus2)) * phi_parts.sup_norm())
    return build_report("source_condition", residuals, reference,
                        Config.IDENTITY_TOL if tol is None else tol)


def check_consistency_4_10(phi: DecomposedField, j: DecomposedField, m_plus2: float,
                           m_minus2: float, x5: float = 0.0,
                           tol: Optional[float] = None) -> ResidualReport:
    """
    Certify M^2 (1 + (d5/M)^2) phi_+- = m_-+^2 phi_-+ - j_-+ at x5

    The left side is evaluated as (M^2 - Q^2) phi_+- per site.
    """
    _require_same_lattice(phi, j)
    M = phi.M
    Q = phi.q5()
    mass_term = (M * M - Q * Q)[..., np.newaxis]
    phi_plus, phi_minus = extend_5d(phi, x5, "+").values, extend_5d(phi, x5, "-").values
    j_plus, j_minus = extend_5d(j, x5, "+").values, extend_5d(j, x5, "-").values
    residual_plus = mass_term * phi_plus - (m_minus2 * phi_minus - j_minus)
    residual_minus = mass_term * phi_minus - (m_plus2 * phi_plus - j_plus)
    reference = max(M * M, abs(m_plus2), abs(m_minus2)) * phi.sup_norm() + j.sup_norm()
    return build_report("consistency_x5", [residual_plus, residual_minus], reference,
                        Config.IDENTITY_TOL if tol is None else tol)


def check_boundary(dp: DecomposedField, sign: str, t5: float = 0.0,
                   reference: Optional[MomentumLatticeField] = None,
                   tol: Optional[float] = None) -> ResidualReport:
    """
    Compare extend_5d(dp, 0, sign, t5) with the 4D field

    Args:
        dp: decomposed field
        sign: "+" or "-"
        t5: boundary offset; any t5 != 0 moves the boundary away from x5 = 0
        reference: 4D field to compare against (default assemble_pm(dp, sign))
        tol: relative tolerance (default Config.IDENTITY_TOL)
    """
    expected = assemble_pm(dp, sign) if reference is None else reference
    if not expected.same_lattice(dp.lattice):
        raise LatticeMismatch("reference field lives on a different lattice")
    residual = extend_5d(dp, 0.0, sign, t5).values - expected.values
    return build_report(f"boundary{sign}", residual, dp.sup_norm(),
                        Config.IDENTITY_TOL if tol is None else tol)


def check_projector_algebra(f: MomentumLatticeField, tol: Optional[float] = None) -> ResidualReport:
    """P1 P2 = P2 P1 = 0, Pa Pa = Pa and P1 + P2 = 1 applied to f"""
    p1 = projector_apply(1, f)
    p2 = projector_apply(2, f)
    residuals = [
        projector_apply(1, p2).values,
        projector_apply(2, p1).values,
        projector_apply(1, p1).values - p1.values,
        projector_apply(2, p2).values - p2.values,
        p1.values + p2.values - f.values,
    ]
    return build_report("projector_algebra", residuals, f.sup_norm(),
                        Config.IDENTITY_TOL if tol is None else tol)


def corrupt_fifth_momentum(d: DecomposedField, site: Union[int, Sequence[int]], eps: float,
                           relative: bool = False) -> DecomposedField:
    """
    Copy of d whose fifth momentum at one site is shifted by eps
    (or by eps * Q when relative)

    Args:
        d: decomposed field
        site: flat row-major site index or a 4-tuple of lattice indices
        eps: perturbation size
        relative: scale the perturbation by the site's Q
    """
    q5 = np.array(d.q5(), dtype=float)
    index = np.unravel_index(site, q5.shape) if np.isscalar(site) else tuple(site)
    q5[index] += eps * q5[index] if relative else eps
    logger.debug(f"🔍 planted fifth-momentum shift {eps} at site {index}")
    return d.with_fifth_momentum(q5)
