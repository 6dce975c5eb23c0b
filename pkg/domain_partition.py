"""
Domain Partition
Exact split of q^2 into the four domains that distribute momenta between the
hyperboloids q^2 + q5^2 = M^2 (hyperboloid 1) and q^2 - q5^2 = -M^2
(hyperboloid 2).

    I   : 0 <= q^2 <= M^2      hyperboloid 1
    II  : M^2 < q^2            hyperboloid 2
    III : q^2 < -M^2           hyperboloid 1
    IV  : -M^2 <= q^2 < 0      hyperboloid 2

Boundaries are compared exactly on the stored value; there is no tolerance band.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Tuple

import numpy as np

from errors import DomainMismatch, NonPositiveScale, NullSquare

logger = logging.getLogger(__name__)


class Domain(str, Enum):
    I = "I"
    II = "II"
    III = "III"
    IV = "IV"

    @property
    def code(self) -> int:
        return _CODES[self]

    @property
    def hyperboloid(self) -> int:
        return 1 if self in (Domain.I, Domain.III) else 2


DOMAINS = (Domain.I, Domain.II, Domain.III, Domain.IV)
_CODES = {d: i for i, d in enumerate(DOMAINS)}

# sign regions of (k5, k6); informational only
KAPPA_REGIONS = {
    Domain.I: "0 <= k5 <= k6",
    Domain.II: "k6 > 0, k5 < 0, k5 + k6 > 0",
    Domain.III: "k5 > 0, k6 < 0, k5 + k6 > 0",
    Domain.IV: "0 <= k6 < k5",
}


@dataclass(frozen=True)
class DomainLabel:
    label: Domain

    @property
    def hyperboloid(self) -> int:
        return self.label.hyperboloid

    @property
    def kappa_region(self) -> str:
        return KAPPA_REGIONS[self.label]

    def __str__(self) -> str:
        return self.label.value


def _check_scale(M: float) -> None:
    if not M > 0:
        raise NonPositiveScale(f"M must be > 0, got {M}")


def classify(q2: float, M: float) -> DomainLabel:
    """Domain of q^2; total over the reals (NaN is rejected)"""
    _check_scale(M)
    if math.isnan(q2):
        raise ValueError("q^2 is NaN")
    M2 = M * M
    if q2 >= 0:
        return DomainLabel(Domain.I if q2 <= M2 else Domain.II)
    return DomainLabel(Domain.IV if q2 >= -M2 else Domain.III)


def classify_array(q2: np.ndarray, M: float) -> np.ndarray:
    """Vectorized classify; returns integer codes 0..3 in DOMAINS order"""
    _check_scale(M)
    q2 = np.asarray(q2, dtype=float)
    M2 = M * M
    codes = np.full(q2.shape, Domain.III.code, dtype=np.int8)
    codes[(q2 >= 0) & (q2 <= M2)] = Domain.I.code
    codes[q2 > M2] = Domain.II.code
    codes[(q2 < 0) & (q2 >= -M2)] = Domain.IV.code
    return codes


def q5_squared(label: DomainLabel, q2: float, M: float) -> float:
    """On-shell q5^2: M^2 - q^2 on hyperboloid 1, M^2 + q^2 on hyperboloid 2"""
    actual = classify(q2, M)
    if actual.label != label.label:
        raise DomainMismatch(f"q^2={q2} lies in {actual}, not {label}")
    M2 = M * M
    return M2 - q2 if label.hyperboloid == 1 else M2 + q2


def q5_squared_array(q2: np.ndarray, M: float) -> np.ndarray:
    """Sitewise on-shell q5^2 for the domain of each q^2"""
    q2 = np.asarray(q2, dtype=float)
    M2 = M * M
    hyp1 = lambda_mask(1, q2, M)
    return np.where(hyp1, M2 - q2, M2 + q2)


def lambda_indicator(a: int, q2: float, M: float) -> int:
    """Characteristic function of hyperboloid a's domains"""
    if a not in (1, 2):
        raise ValueError(f"a must be 1 or 2, got {a}")
    return int(classify(q2, M).hyperboloid == a)


def lambda_mask(a: int, q2: np.ndarray, M: float) -> np.ndarray:
    """Vectorized lambda_indicator as a boolean mask"""
    if a not in (1, 2):
        raise ValueError(f"a must be 1 or 2, got {a}")
    codes = classify_array(q2, M)
    on_first = (codes == Domain.I.code) | (codes == Domain.III.code)
    return on_first if a == 1 else ~on_first


def invert_domain(q2: float, M: float) -> Tuple[float, DomainLabel]:
    """q'^2 = M^4 / q^2; maps I\\{0} <-> II and III <-> IV, fixes +-M^2"""
    _check_scale(M)
    if q2 == 0:
        raise NullSquare("inversion of q^2 = 0")
    M2 = M * M
    if q2 == M2 or q2 == -M2:
        image = q2
    else:
        image = M2 * M2 / q2
    return image, classify(image, M)


def reflect_domain(q2: float, M: float) -> Tuple[float, DomainLabel]:
    """q'^2 = -q^2; maps I <-> IV and II <-> III on interiors"""
    image = -q2 if q2 != 0 else 0.0
    return image, classify(image, M)
