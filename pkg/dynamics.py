"""
Dynamics
Momentum-space equations of motion on the lattice: the sourced Klein-Gordon
solve, source decomposition, the gauge-translation duality and the Dirac
residual.

Sign conventions (metric +,-,-,-):
    d^2/dx^mu dx_mu -> -q^2, so (d^2 + m^2) Phi = J reads (m^2 - q^2) Phi = J
    i gamma^mu d_mu -> gamma^mu q_mu on exp(-i q.x)
"""

import logging
from typing import Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from config import Config
from errors import LatticeMismatch, RealityViolation
from field_decomposition import (
    DecomposedField,
    MomentumLatticeField,
    PositionLatticeField,
    decompose,
    from_position,
    to_position,
)
from spectral_verifier import ResidualReport, build_report

logger = logging.getLogger(__name__)

_SIGMA = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


class PoleRegularization(BaseModel):
    """i epsilon prescription; principal_value_band > 0 zeroes near-pole sites instead"""

    model_config = ConfigDict(frozen=True)

    epsilon: float = Field(default=Config.POLE_EPSILON, gt=0)
    principal_value_band: float = Field(default=0.0, ge=0)


def kg_solve(J: MomentumLatticeField, m2: float,
             reg: Optional[PoleRegularization] = None) -> MomentumLatticeField:
    """
    Phi(q) = J(q) / (m^2 - q^2 - i epsilon)

    Args:
        J: source on the momentum lattice
        m2: squared mass
        reg: pole handling (default epsilon = Config.POLE_EPSILON * M^2)

    Returns:
        field on the same lattice
    """
    reg = reg or PoleRegularization(epsilon=Config.POLE_EPSILON * J.M * J.M)
    gap = (m2 - J.mode_q2)[..., np.newaxis]
    phi = J.values / (gap - 1j * reg.epsilon)
    if reg.principal_value_band > 0:
        phi = np.where(np.abs(gap) <= reg.principal_value_band, 0, phi)
    near = int(np.count_nonzero(np.abs(gap) <= 1e3 * reg.epsilon))
    if near:
        logger.debug(f"🔍 kg_solve: {near} sites within 1e3 epsilon of the pole")
    return J.with_values(phi)


def kg_forward(phi: MomentumLatticeField, m2: float,
               reg: Optional[PoleRegularization] = None) -> MomentumLatticeField:
    """Forward operator (m^2 - q^2) Phi, or (m^2 - q^2 - i epsilon) Phi when reg is given"""
    gap = (m2 - phi.mode_q2)[..., np.newaxis]
    if reg is not None:
        gap = gap - 1j * reg.epsilon
    return phi.with_values(gap * phi.values)


def check_kg_reconstruction(phi: MomentumLatticeField, J: MomentumLatticeField, m2: float,
                            reg: PoleRegularization, tol: float = 1e-12) -> ResidualReport:
    """
    Plain forward operator (m^2 - q^2) Phi against J away from the pole

    Only sites with |m^2 - q^2| > 1e3 epsilon (and outside the principal-value
    band) are checked. The i epsilon shift leaves a defect of at most
    epsilon / |m^2 - q^2| * |J| per site; the residual is what exceeds it.
    """
    if not phi.same_lattice(J) or phi.components != J.components:
        raise LatticeMismatch("solution and source live on different lattices")
    gap = np.abs(m2 - J.mode_q2)[..., np.newaxis]
    away = (gap > 1e3 * reg.epsilon) & (gap > reg.principal_value_band)
    error = np.abs(kg_forward(phi, m2).values - J.values)
    safe_gap = np.where(away, gap, 1.0)
    allowance = (reg.epsilon / safe_gap + 4 * np.finfo(float).eps) * np.abs(J.values)
    excess = np.where(away, np.maximum(error - allowance, 0.0), 0.0)
    return build_report("kg_forward", excess, J.sup_norm(), tol)


def source_decompose(Jfull: MomentumLatticeField) -> DecomposedField:
    """Split an on-shell source into its four domain parts"""
    return decompose(Jfull)


def gauge_translate(f: PositionLatticeField, h: Sequence[complex]) -> PositionLatticeField:
    """
    Phi'(x) = exp(i h.x) Phi(x)

    For a lattice-mode h the spectrum shifts: Phi'(p) = Phi(p + h).
    A real field only accepts pure imaginary h = i r, giving exp(-r.x) Phi(x).
    """
    h = np.asarray(h, dtype=complex)
    if h.shape != (4,):
        raise ValueError(f"h needs 4 entries, got shape {h.shape}")
    x = f.coordinates()
    if f.is_real:
        if np.any(h.real != 0):
            logger.warning(f"⚠️ real field translated by non-imaginary h={h}")
            raise RealityViolation("a real field needs a pure imaginary translation")
        r = h.imag
        factor = np.exp(-(r[0] * x[0] - r[1] * x[1] - r[2] * x[2] - r[3] * x[3]))
    else:
        factor = np.exp(1j * (h[0] * x[0] - h[1] * x[1] - h[2] * x[2] - h[3] * x[3]))
    return f.with_values(f.values * factor[..., np.newaxis])


def gamma_matrices() -> np.ndarray:
    """gamma^mu in the Dirac representation, shape (4, 4, 4)"""
    zero = np.zeros((2, 2), dtype=complex)
    eye = np.eye(2, dtype=complex)
    gammas = [np.block([[eye, zero], [zero, -eye]])]
    gammas.extend(np.block([[zero, s], [-s, zero]]) for s in _SIGMA)
    return np.array(gammas)


GAMMA = gamma_matrices()


def slash(q: Sequence[float]) -> np.ndarray:
    """gamma^mu q_mu for contravariant q^mu"""
    q = np.asarray(q)
    return GAMMA[0] * q[0] - GAMMA[1] * q[1] - GAMMA[2] * q[2] - GAMMA[3] * q[3]


def dirac_residual_field(psi: MomentumLatticeField, A: Optional[PositionLatticeField],
                         m: float, e: float) -> PositionLatticeField:
    """(i gamma^mu d_mu - e gamma^mu A_mu - m) Psi on the position lattice"""
    if psi.components != 4:
        raise ValueError(f"Dirac fields need 4 components, got {psi.components}")
    q0, q1, q2, q3 = psi.momenta()
    # gamma^mu q_mu contracted with the spinor index
    qslash = (GAMMA[0] * q0[..., None, None] - GAMMA[1] * q1[..., None, None]
              - GAMMA[2] * q2[..., None, None] - GAMMA[3] * q3[..., None, None])
    free = np.einsum("...ab,...b->...a", qslash, psi.values) - m * psi.values
    residual = to_position(psi.with_values(free))
    if A is None or e == 0:
        return residual
    psi_x = to_position(psi)
    if A.dims != psi.dims or A.components != 4:
        raise LatticeMismatch(f"gauge field must be 4 components on {psi.dims}")
    if not A.same_lattice(psi_x):
        raise LatticeMismatch("gauge field lives on a different position lattice")
    aslash = np.einsum("mab,...m->...ab", GAMMA, A.values)
    coupling = np.einsum("...ab,...b->...a", aslash, psi_x.values)
    return residual.with_values(residual.values - e * coupling)


def dirac_residual(psi: MomentumLatticeField, A: Optional[PositionLatticeField], m: float, e: float,
                   tol: Optional[float] = None) -> ResidualReport:
    """
    Residual of the Dirac equation with gauge coupling

    Args:
        psi: 4-component spinor field in momentum representation
        A: covariant gauge components A_mu as a 4-component position field (None for A = 0)
        m: fermion mass
        e: coupling

    Returns:
        ResidualReport named "dirac"
    """
    residual = dirac_residual_field(psi, A, m, e)
    reference = to_position(psi).values
    scale = float(np.max(np.abs(reference))) if reference.size else 0.0
    return build_report("dirac", residual.values, scale * max(1.0, abs(m)),
                        Config.IDENTITY_TOL if tol is None else tol)


def phi4_source(phi_plus: MomentumLatticeField, a: float, b: float) -> MomentumLatticeField:
    """J_+ = a Phi_+^2 + b Phi_+^3, evaluated pointwise in position space"""
    x = to_position(phi_plus)
    values = a * x.values ** 2 + b * x.values ** 3
    J = from_position(x.with_values(values), phi_plus.M)
    return phi_plus.with_values(J.values)


def rest_spinor_field(dims, spacing, m: float, M: float, spin: int = 0,
                      amplitude: complex = 1.0) -> MomentumLatticeField:
    """
    Plane-wave spinor at rest: q = (m, 0, 0, 0), u = e_spin with spin in {0, 1}

    m must be a multiple of the time-axis momentum spacing.
    """
    if spin not in (0, 1):
        raise ValueError(f"spin must be 0 or 1, got {spin}")
    k0 = m / spacing[0]
    if abs(k0 - round(k0)) > 1e-9:
        raise ValueError(f"m={m} is not a lattice momentum for spacing {spacing[0]}")
    k0 = int(round(k0))
    if not -dims[0] // 2 <= k0 < dims[0] // 2:
        raise ValueError(f"m={m} lies outside the lattice")
    values = np.zeros(tuple(dims) + (4,), dtype=complex)
    values[k0 + dims[0] // 2, dims[1] // 2, dims[2] // 2, dims[3] // 2, spin] = amplitude
    return MomentumLatticeField(dims, spacing, M, values)
