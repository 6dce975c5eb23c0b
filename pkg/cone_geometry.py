"""
Cone Geometry
Four-momenta, points on the 6D cone, and conformal transformations in both
their 4D form and their 6D rotation form.

Conventions:
    g4 = diag(+1, -1, -1, -1) acting on (q0, q1, q2, q3)
    g6 = diag(+1, -1, -1, -1, +1, -1) acting on (k0, k1, k2, k3, k5, k6)
    kplus = (k5 + k6) / M,  kminus = (k5 - k6) / M,  q_mu = k_mu / kplus
"""

import logging
import math
from dataclasses import dataclass
from typing import Iterable, Sequence, Tuple, Union

import numpy as np

from config import Config
from errors import (
    DegenerateScale,
    NonPositiveScale,
    NotLorentz,
    NullMomentumInversion,
    OffCone,
    SingularDenominator,
)

logger = logging.getLogger(__name__)

G4 = np.diag([1.0, -1.0, -1.0, -1.0])
G6 = np.diag([1.0, -1.0, -1.0, -1.0, 1.0, -1.0])


def minkowski_dot(a: Sequence[complex], b: Sequence[complex]) -> complex:
    """Bilinear (+,-,-,-) product; no complex conjugation"""
    return a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3]


@dataclass(frozen=True)
class FourMomentum:
    """Four-momentum q_mu in units of M"""

    q0: float
    q1: float
    q2: float
    q3: float

    @classmethod
    def of(cls, values: Iterable[float]) -> "FourMomentum":
        q0, q1, q2, q3 = (float(v) for v in values)
        return cls(q0, q1, q2, q3)

    def as_array(self) -> np.ndarray:
        return np.array([self.q0, self.q1, self.q2, self.q3], dtype=float)


def minkowski_square(q: FourMomentum) -> float:
    """q0^2 - q1^2 - q2^2 - q3^2"""
    return q.q0 * q.q0 - q.q1 * q.q1 - q.q2 * q.q2 - q.q3 * q.q3


@dataclass(frozen=True)
class ConePoint:
    """
    Point on the 6D cone.

    Stored in light-cone form (k_mu, kplus, kminus) so that kplus is carried
    exactly through translations and Lorentz rotations; k5 and k6 are derived.
    """

    k0: float
    k1: float
    k2: float
    k3: float
    kplus: float
    kminus: float
    M: float

    def __post_init__(self):
        if not self.M > 0:
            raise NonPositiveScale(f"M must be > 0, got {self.M}")
        if not self.kplus > 0:
            raise DegenerateScale(f"kplus must be > 0, got {self.kplus}")

    @classmethod
    def from_light_cone(cls, kmu: Sequence[float], kplus: float, kminus: float, M: float) -> "ConePoint":
        k0, k1, k2, k3 = (float(v) for v in kmu)
        return cls(k0, k1, k2, k3, float(kplus), float(kminus), float(M))

    @classmethod
    def from_components(cls, k0: float, k1: float, k2: float, k3: float,
                        k5: float, k6: float, M: float) -> "ConePoint":
        """Build from the six Cartesian cone coordinates"""
        if not M > 0:
            raise NonPositiveScale(f"M must be > 0, got {M}")
        return cls(k0, k1, k2, k3, (k5 + k6) / M, (k5 - k6) / M, M)

    @property
    def kmu(self) -> np.ndarray:
        return np.array([self.k0, self.k1, self.k2, self.k3], dtype=float)

    @property
    def k5(self) -> float:
        return self.M * (self.kplus + self.kminus) / 2.0

    @property
    def k6(self) -> float:
        return self.M * (self.kplus - self.kminus) / 2.0

    def components(self) -> np.ndarray:
        """(k0, k1, k2, k3, k5, k6)"""
        return np.array([self.k0, self.k1, self.k2, self.k3, self.k5, self.k6], dtype=float)

    def euclidean_norm_sq(self) -> float:
        return float(np.dot(self.kmu, self.kmu) + self.M ** 2 * (self.kplus ** 2 + self.kminus ** 2) / 2.0)


# Conformal transformations

@dataclass(frozen=True)
class Translation:
    h: FourMomentum


@dataclass(frozen=True, eq=False)
class Lorentz:
    """q'_mu = matrix @ q, with matrix^T g4 matrix = g4"""

    matrix: np.ndarray

    def __post_init__(self):
        arr = np.array(self.matrix, dtype=float)
        if arr.shape != (4, 4):
            raise NotLorentz(f"expected a 4x4 matrix, got shape {arr.shape}")
        scale = 1.0 + float(np.max(np.abs(arr))) ** 2
        defect = float(np.max(np.abs(arr.T @ G4 @ arr - G4)))
        if defect > 1e-12 * scale:
            raise NotLorentz(f"matrix violates the metric by {defect:.3e}")
        arr.setflags(write=False)
        object.__setattr__(self, "matrix", arr)


@dataclass(frozen=True)
class Dilatation:
    lam: float


@dataclass(frozen=True)
class Inversion:
    pass


@dataclass(frozen=True)
class SpecialConformal:
    h: FourMomentum


@dataclass(frozen=True)
class Composition:
    """Steps applied in order, first element first"""

    steps: Tuple["ConformalTransform", ...]


ConformalTransform = Union[Translation, Lorentz, Dilatation, Inversion, SpecialConformal, Composition]


def compose(*steps: ConformalTransform) -> Composition:
    return Composition(tuple(steps))


def boost(axis: int, rapidity: float) -> Lorentz:
    """Pure boost along spatial axis 1, 2 or 3"""
    if axis not in (1, 2, 3):
        raise ValueError(f"axis must be 1, 2 or 3, got {axis}")
    m = np.eye(4)
    ch, sh = math.cosh(rapidity), math.sinh(rapidity)
    m[0, 0] = m[axis, axis] = ch
    m[0, axis] = m[axis, 0] = sh
    return Lorentz(m)


def rotation(axis: int, angle: float) -> Lorentz:
    """Spatial rotation about axis 1, 2 or 3"""
    if axis not in (1, 2, 3):
        raise ValueError(f"axis must be 1, 2 or 3, got {axis}")
    i, j = [a for a in (1, 2, 3) if a != axis]
    m = np.eye(4)
    c, s = math.cos(angle), math.sin(angle)
    m[i, i] = m[j, j] = c
    m[i, j] = -s
    m[j, i] = s
    return Lorentz(m)


# Embedding and projection

def embed(q: FourMomentum, kplus: float, M: float) -> ConePoint:
    """
    Lift a four-momentum onto the cone at scale kplus

    k_mu = q_mu kplus,  kminus = -q^2 kplus / M^2
    """
    if not kplus > 0 or not M > 0:
        raise NonPositiveScale(f"kplus and M must be > 0, got kplus={kplus}, M={M}")
    kminus = -minkowski_square(q) * kplus / (M * M)
    return ConePoint.from_light_cone(q.as_array() * kplus, kplus, kminus, M)


def project(k: ConePoint) -> FourMomentum:
    """q_mu = k_mu / kplus"""
    if abs(k.kplus) < Config.DEGENERATE_EPS:
        raise DegenerateScale(f"kplus={k.kplus} below {Config.DEGENERATE_EPS}")
    return FourMomentum.of(k.kmu / k.kplus)


def cone_form(k: ConePoint) -> float:
    """k_mu k^mu + k5^2 - k6^2, evaluated as k_mu k^mu + M^2 kplus kminus"""
    kmu = k.kmu
    return float(minkowski_dot(kmu, kmu) + k.M * k.M * k.kplus * k.kminus)


def surface_form(k: ConePoint) -> float:
    """q_mu q^mu + M^2 kminus / kplus; zero exactly when k is on the cone"""
    q = project(k)
    return minkowski_square(q) + k.M * k.M * k.kminus / k.kplus


def q5_squared_from_cone(k: ConePoint, hyperboloid: int) -> float:
    """q5^2 / M^2 = 1 + kminus/kplus on hyperboloid 1, 1 - kminus/kplus on hyperboloid 2"""
    ratio = k.kminus / k.kplus
    if hyperboloid == 1:
        return k.M * k.M * (1.0 + ratio)
    if hyperboloid == 2:
        return k.M * k.M * (1.0 - ratio)
    raise ValueError(f"hyperboloid must be 1 or 2, got {hyperboloid}")


def is_on_cone(k: ConePoint, tol: float = None) -> bool:
    tol = Config.CONE_TOL if tol is None else tol
    return abs(cone_form(k)) <= tol * (1.0 + k.euclidean_norm_sq())


# 6D action

def apply_cone(t: ConformalTransform, k: ConePoint, tol: float = None) -> ConePoint:
    """
    Apply a conformal transformation as a rotation on the cone

    Args:
        t: transformation
        k: on-cone point
        tol: relative on-cone tolerance (default Config.CONE_TOL)

    Returns:
        transformed on-cone point with kplus > 0
    """
    if not is_on_cone(k, tol):
        logger.warning(f"⚠️ apply_cone rejected off-cone point, form={cone_form(k):.3e}")
        raise OffCone(f"cone_form={cone_form(k):.3e} exceeds tolerance")
    return _rotate(t, k)


def _rotate(t: ConformalTransform, k: ConePoint) -> ConePoint:
    M2 = k.M * k.M
    if isinstance(t, Translation):
        h = t.h.as_array()
        kmu = k.kmu + h * k.kplus
        kminus = k.kminus - (2.0 * minkowski_dot(h, k.kmu) + minkowski_dot(h, h) * k.kplus) / M2
        return ConePoint.from_light_cone(kmu, k.kplus, kminus, k.M)
    if isinstance(t, Lorentz):
        return ConePoint.from_light_cone(t.matrix @ k.kmu, k.kplus, k.kminus, k.M)
    if isinstance(t, Dilatation):
        return ConePoint.from_light_cone(k.kmu, math.exp(-t.lam) * k.kplus, math.exp(t.lam) * k.kminus, k.M)
    if isinstance(t, Inversion):
        if abs(k.kminus) <= Config.DEGENERATE_EPS * k.kplus:
            raise DegenerateScale("inversion of a point with kminus = 0 (q^2 = 0)")
        if k.kminus > 0:
            return ConePoint.from_light_cone(k.kmu, k.kminus, k.kplus, k.M)
        # projective representative with kplus > 0
        return ConePoint.from_light_cone(-k.kmu, -k.kminus, -k.kplus, k.M)
    if isinstance(t, SpecialConformal):
        inv = Inversion()
        return _rotate(inv, _rotate(Translation(t.h), _rotate(inv, k)))
    if isinstance(t, Composition):
        for step in t.steps:
            k = _rotate(step, k)
        return k
    raise TypeError(f"unknown transformation {type(t).__name__}")


# 4D action

def apply_4d(t: ConformalTransform, q: FourMomentum, M: float) -> FourMomentum:
    """Apply the closed-form 4D conformal transformation"""
    if not M > 0:
        raise NonPositiveScale(f"M must be > 0, got {M}")
    arr = q.as_array()
    if isinstance(t, Translation):
        return FourMomentum.of(arr + t.h.as_array())
    if isinstance(t, Lorentz):
        return FourMomentum.of(t.matrix @ arr)
    if isinstance(t, Dilatation):
        return FourMomentum.of(math.exp(t.lam) * arr)
    if isinstance(t, Inversion):
        q2 = minkowski_square(q)
        if abs(q2) <= Config.DEGENERATE_EPS * (1.0 + float(np.dot(arr, arr))):
            raise NullMomentumInversion(f"q^2 = {q2} cannot be inverted")
        return FourMomentum.of(-M * M * arr / q2)
    if isinstance(t, SpecialConformal):
        h = t.h.as_array()
        q2 = minkowski_square(q)
        M2 = M * M
        denom = 1.0 - 2.0 * minkowski_dot(arr, h) / M2 + minkowski_dot(h, h) * q2 / (M2 * M2)
        if abs(denom) < Config.DEGENERATE_EPS:
            raise SingularDenominator(f"special conformal denominator {denom:.3e}")
        return FourMomentum.of((arr - h * q2 / M2) / denom)
    if isinstance(t, Composition):
        for step in t.steps:
            q = apply_4d(step, q, M)
        return q
    raise TypeError(f"unknown transformation {type(t).__name__}")


def isomorphism_residual(t: ConformalTransform, q: FourMomentum, kplus: float, M: float) -> float:
    """Euclidean distance between the projected 6D result and the 4D result"""
    via_cone = project(apply_cone(t, embed(q, kplus, M))).as_array()
    direct = apply_4d(t, q, M).as_array()
    residual = float(np.linalg.norm(via_cone - direct))
    logger.debug(f"🔍 isomorphism residual {residual:.3e} for {type(t).__name__}")
    return residual
