"""
Field Decomposition
Lattice-sampled momentum fields, the four-domain split, the doubled fields
Phi_+- = (Phi_I + Phi_III) +- (Phi_II + Phi_IV), their analytic 5D extension,
the hyperboloid projectors, and the lattice Fourier transform.

Lattice conventions:
    sites are stored in centered order, index i <-> k = i - N/2, k in [-N/2, N/2)
    q_mu = k_mu * dq_mu  (dq is the momentum spacing, units of M)
    dx_mu = 2 pi / (N_mu dq_mu)
    Phi(x) = (1 / N0 N1 N2 N3) sum_q Phi(q) exp(-i q.x),  q.x = q0 x0 - q.x (vector)
"""

import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from domain_partition import DOMAINS, Domain, classify_array, lambda_mask, q5_squared_array
from errors import EmptyGrid, LatticeMismatch, NegativeQ5Squared, NonPositiveKPlus

logger = logging.getLogger(__name__)

AXES = (0, 1, 2, 3)


def lattice_momenta(dims: Sequence[int], spacing: Sequence[float]) -> Tuple[np.ndarray, ...]:
    """Centered per-axis momenta, each broadcastable against the 4D lattice"""
    axes = []
    for mu, (n, dq) in enumerate(zip(dims, spacing)):
        shape = [1, 1, 1, 1]
        shape[mu] = n
        axes.append((np.arange(n) - n // 2).astype(float).reshape(shape) * dq)
    return tuple(axes)


def lattice_q2(dims: Sequence[int], spacing: Sequence[float]) -> np.ndarray:
    """Minkowski square of every site momentum"""
    q0, q1, q2, q3 = lattice_momenta(dims, spacing)
    return q0 * q0 - q1 * q1 - q2 * q2 - q3 * q3


def position_spacing(dims: Sequence[int], spacing: Sequence[float]) -> Tuple[float, ...]:
    return tuple(2.0 * math.pi / (n * dq) for n, dq in zip(dims, spacing))


def _same_lattice(dims_a, spacing_a, dims_b, spacing_b) -> bool:
    return tuple(dims_a) == tuple(dims_b) and np.allclose(spacing_a, spacing_b, rtol=1e-12, atol=0.0)


@dataclass(frozen=True, eq=False)
class MomentumLatticeField:
    """Complex multi-component field on the periodic momentum lattice"""

    dims: Tuple[int, int, int, int]
    spacing: Tuple[float, float, float, float]
    M: float
    values: np.ndarray

    def __post_init__(self):
        dims = tuple(int(n) for n in self.dims)
        spacing = tuple(float(d) for d in self.spacing)
        values = np.array(self.values, dtype=complex)
        if values.ndim == 4:
            values = values[..., np.newaxis]
        if values.shape[:4] != dims or values.ndim != 5 or values.shape[4] < 1:
            raise LatticeMismatch(f"values shape {values.shape} does not match dims {dims}")
        if not np.all(np.isfinite(values)):
            raise ValueError("field values must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "spacing", spacing)
        object.__setattr__(self, "M", float(self.M))
        object.__setattr__(self, "values", values)

    @classmethod
    def zeros(cls, dims, spacing, M: float, components: int = 1) -> "MomentumLatticeField":
        return cls(dims, spacing, M, np.zeros(tuple(dims) + (components,), dtype=complex))

    @property
    def components(self) -> int:
        return self.values.shape[4]

    @cached_property
    def mode_q2(self) -> np.ndarray:
        return lattice_q2(self.dims, self.spacing)

    def momenta(self) -> Tuple[np.ndarray, ...]:
        return lattice_momenta(self.dims, self.spacing)

    def with_values(self, values: np.ndarray) -> "MomentumLatticeField":
        return MomentumLatticeField(self.dims, self.spacing, self.M, values)

    def same_lattice(self, other: "MomentumLatticeField") -> bool:
        return _same_lattice(self.dims, self.spacing, other.dims, other.spacing) and self.M == other.M

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values))) if self.values.size else 0.0


@dataclass(frozen=True, eq=False)
class PositionLatticeField:
    """Field on the position lattice x_mu = n_mu dx_mu, n in [0, N)"""

    dims: Tuple[int, int, int, int]
    spacing: Tuple[float, float, float, float]
    values: np.ndarray

    def __post_init__(self):
        dims = tuple(int(n) for n in self.dims)
        values = np.array(self.values)
        if values.ndim == 4:
            values = values[..., np.newaxis]
        if values.shape[:4] != dims or values.ndim != 5:
            raise LatticeMismatch(f"values shape {values.shape} does not match dims {dims}")
        values.setflags(write=False)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "spacing", tuple(float(d) for d in self.spacing))
        object.__setattr__(self, "values", values)

    @property
    def components(self) -> int:
        return self.values.shape[4]

    @property
    def is_real(self) -> bool:
        return np.isrealobj(self.values)

    def coordinates(self) -> Tuple[np.ndarray, ...]:
        """Per-axis coordinates, each broadcastable against the lattice"""
        coords = []
        for mu, (n, dx) in enumerate(zip(self.dims, self.spacing)):
            shape = [1, 1, 1, 1]
            shape[mu] = n
            coords.append(np.arange(n, dtype=float).reshape(shape) * dx)
        return tuple(coords)

    def with_values(self, values: np.ndarray) -> "PositionLatticeField":
        return PositionLatticeField(self.dims, self.spacing, values)

    def same_lattice(self, other: "PositionLatticeField") -> bool:
        return _same_lattice(self.dims, self.spacing, other.dims, other.spacing)


# Scale profiles for the 6D -> 5D reduction

@dataclass(frozen=True)
class DeltaAt:
    scale: float

    def __post_init__(self):
        if not self.scale > 0:
            raise ValueError(f"scale must be > 0, got {self.scale}")


@dataclass(frozen=True)
class ThetaAbove:
    scale: float

    def __post_init__(self):
        if not self.scale > 0:
            raise ValueError(f"scale must be > 0, got {self.scale}")


@dataclass(frozen=True)
class Tabulated:
    """Profile weight w(kplus), linearly interpolated, zero outside its samples"""

    kplus: Tuple[float, ...]
    weights: Tuple[float, ...]


ScaleProfile = Union[DeltaAt, ThetaAbove, Tabulated]


def _interp_last_axis(grid: np.ndarray, samples: np.ndarray, at: float) -> np.ndarray:
    if at < grid[0] or at > grid[-1]:
        raise ValueError(f"kplus={at} outside grid [{grid[0]}, {grid[-1]}]")
    j = int(np.searchsorted(grid, at))
    if j < len(grid) and grid[j] == at:
        return samples[..., j]
    w = (at - grid[j - 1]) / (grid[j] - grid[j - 1])
    return (1.0 - w) * samples[..., j - 1] + w * samples[..., j]


def reduce_6d(kplus_grid: Sequence[float], samples: np.ndarray, M: float,
              profile: Optional[ScaleProfile] = None) -> np.ndarray:
    """
    Reduce tabulated 6D samples to the 5D field phi(q, q5^2)

    phi = (M^2 / 2) * integral kplus^3 * sigma(kplus) dkplus, trapezoidal on the grid

    Args:
        kplus_grid: strictly positive ascending kplus nodes
        samples: sigma values, kplus along the last axis
        M: scale parameter
        profile: optional kplus dependence (DeltaAt, ThetaAbove, Tabulated)

    Returns:
        complex array of shape samples.shape[:-1]
    """
    grid = np.asarray(kplus_grid, dtype=float)
    if grid.size == 0:
        raise EmptyGrid("kplus grid is empty")
    if np.any(grid <= 0) or np.any(np.diff(grid) <= 0):
        raise NonPositiveKPlus("kplus grid must be strictly positive and ascending")
    samples = np.asarray(samples, dtype=complex)
    if samples.shape[-1] != grid.size:
        raise LatticeMismatch(f"samples last axis {samples.shape[-1]} != grid size {grid.size}")
    half_M2 = 0.5 * M * M

    if isinstance(profile, DeltaAt):
        at_scale = _interp_last_axis(grid, samples, profile.scale)
        return half_M2 * profile.scale ** 3 * at_scale

    if isinstance(profile, ThetaAbove):
        at_scale = _interp_last_axis(grid, samples, profile.scale)
        nodes = np.concatenate([[profile.scale], grid[grid > profile.scale]])
        return half_M2 * np.trapezoid(nodes ** 3, nodes) * at_scale

    integrand = grid ** 3 * samples
    if isinstance(profile, Tabulated):
        weights = np.interp(grid, profile.kplus, profile.weights, left=0.0, right=0.0)
        integrand = integrand * weights
    elif profile is not None:
        raise TypeError(f"unknown profile {type(profile).__name__}")
    if grid.size == 1:
        return np.zeros(samples.shape[:-1], dtype=complex)
    return half_M2 * np.trapezoid(integrand, grid, axis=-1)


# Decomposition

@dataclass(frozen=True, eq=False)
class DecomposedField:
    """
    Four domain parts (I, II, III, IV) on one lattice.

    fifth_momentum optionally overrides the per-site Q used for x5 phases;
    by default Q is the on-shell sqrt(q5^2) of each site's domain.
    """

    parts: Tuple[MomentumLatticeField, ...]
    fifth_momentum: Optional[np.ndarray] = field(default=None)

    def __post_init__(self):
        parts = tuple(self.parts)
        if len(parts) != 4:
            raise ValueError(f"expected 4 parts, got {len(parts)}")
        first = parts[0]
        for p in parts[1:]:
            if not first.same_lattice(p) or p.components != first.components:
                raise LatticeMismatch("all parts must share one lattice and component count")
        object.__setattr__(self, "parts", parts)
        if self.fifth_momentum is not None:
            q5 = np.array(self.fifth_momentum, dtype=float)
            if q5.shape != first.dims:
                raise LatticeMismatch(f"fifth momentum shape {q5.shape} != {first.dims}")
            q5.setflags(write=False)
            object.__setattr__(self, "fifth_momentum", q5)

    @property
    def M(self) -> float:
        return self.parts[0].M

    @property
    def lattice(self) -> MomentumLatticeField:
        return self.parts[0]

    def part(self, domain: Domain) -> MomentumLatticeField:
        return self.parts[domain.code]

    def hyperboloid_sum(self, a: int) -> np.ndarray:
        """I + III for a = 1, II + IV for a = 2"""
        if a == 1:
            return self.parts[0].values + self.parts[2].values
        if a == 2:
            return self.parts[1].values + self.parts[3].values
        raise ValueError(f"a must be 1 or 2, got {a}")

    def q5(self) -> np.ndarray:
        """Per-site fifth momentum Q"""
        if self.fifth_momentum is not None:
            return self.fifth_momentum
        q5sq = q5_squared_array(self.lattice.mode_q2, self.M)
        if np.any(q5sq < 0):
            raise NegativeQ5Squared("a lattice site produced q5^2 < 0")
        return np.sqrt(q5sq)

    def with_fifth_momentum(self, q5: np.ndarray) -> "DecomposedField":
        return DecomposedField(self.parts, q5)

    def is_disjoint(self) -> bool:
        nonzero = sum((p.values != 0).any(axis=-1).astype(int) for p in self.parts)
        return bool(np.all(nonzero <= 1))

    def reconstruct(self) -> MomentumLatticeField:
        return self.lattice.with_values(sum(p.values for p in self.parts))

    def sup_norm(self) -> float:
        return max(p.sup_norm() for p in self.parts)

    def map_parts(self, fn) -> "DecomposedField":
        return DecomposedField(tuple(p.with_values(fn(p.values)) for p in self.parts), self.fifth_momentum)

    @classmethod
    def from_pm(cls, plus: MomentumLatticeField, minus: MomentumLatticeField) -> "DecomposedField":
        """
        Inverse of assembly: A = (plus + minus)/2 goes to I/III and
        B = (plus - minus)/2 to II/IV, split by the sign of q^2 so that
        support outside the matching domains is preserved
        """
        if not plus.same_lattice(minus):
            raise LatticeMismatch("plus and minus live on different lattices")
        a = 0.5 * (plus.values + minus.values)
        b = 0.5 * (plus.values - minus.values)
        timelike = (plus.mode_q2 >= 0)[..., np.newaxis]
        return cls((
            plus.with_values(np.where(timelike, a, 0)),
            plus.with_values(np.where(timelike, b, 0)),
            plus.with_values(np.where(timelike, 0, a)),
            plus.with_values(np.where(timelike, 0, b)),
        ))


def decompose(f: MomentumLatticeField) -> DecomposedField:
    """Split f into its four domain parts by the domain of each site's q^2"""
    codes = classify_array(f.mode_q2, f.M)[..., np.newaxis]
    parts = tuple(f.with_values(np.where(codes == d.code, f.values, 0)) for d in DOMAINS)
    logger.debug(f"🔍 decomposed field on {f.dims} into {len(parts)} parts")
    return DecomposedField(parts)


def _sign(sign: str) -> float:
    if sign == "+":
        return 1.0
    if sign == "-":
        return -1.0
    raise ValueError(f"sign must be '+' or '-', got {sign!r}")


def assemble_pm(d: DecomposedField, sign: str) -> MomentumLatticeField:
    """Phi_+- = (Phi_I + Phi_III) +- (Phi_II + Phi_IV)"""
    s = _sign(sign)
    return d.lattice.with_values(d.hyperboloid_sum(1) + s * d.hyperboloid_sum(2))


def extend_5d(d: DecomposedField, x5: float, sign: str = "+", t5: float = 0.0) -> MomentumLatticeField:
    """
    Momentum-space 5D field at fifth coordinate x5

    Each site picks up exp(-i Q (x5 - t5)); at x5 = t5 the phase is exactly 1
    and the result equals assemble_pm bit for bit.
    """
    phase = np.exp(-1j * d.q5() * (x5 - t5))[..., np.newaxis]
    return assemble_pm(d.map_parts(lambda v: v * phase), sign)


def projector_apply(a: int, f: MomentumLatticeField) -> MomentumLatticeField:
    """Momentum form of the hyperboloid projector: f * Lambda_a(q^2)"""
    mask = lambda_mask(a, f.mode_q2, f.M)[..., np.newaxis]
    return f.with_values(np.where(mask, f.values, 0))


# Fourier transform

def to_position(f: MomentumLatticeField) -> PositionLatticeField:
    """Lattice form of Phi(x) = sum_q Phi(q) exp(-i q.x) / N"""
    standard = np.fft.ifftshift(f.values, axes=AXES)
    spatial = np.fft.ifftn(standard, axes=(1, 2, 3))
    values = np.fft.fft(spatial, axis=0) / f.dims[0]
    return PositionLatticeField(f.dims, position_spacing(f.dims, f.spacing), values)


def from_position(p: PositionLatticeField, M: float) -> MomentumLatticeField:
    """Inverse of to_position"""
    temporal = np.fft.ifft(p.values, axis=0) * p.dims[0]
    standard = np.fft.fftn(temporal, axes=(1, 2, 3))
    values = np.fft.fftshift(standard, axes=AXES)
    return MomentumLatticeField(p.dims, position_spacing(p.dims, p.spacing), M, values)


def convolve_position(f: PositionLatticeField, kernel: PositionLatticeField) -> PositionLatticeField:
    """Circular convolution sum_y f(x - y) kernel(y) on the position lattice"""
    if not f.same_lattice(kernel):
        raise LatticeMismatch("field and kernel live on different lattices")
    product = np.fft.fftn(f.values, axes=AXES) * np.fft.fftn(kernel.values, axes=AXES)
    return f.with_values(np.fft.ifftn(product, axes=AXES))
