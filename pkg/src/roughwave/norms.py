"""Weighted cube norms, mixed time-frequency norms, and the product estimate.

The basic object is the weighted ell^2 sum over frequency cubes

    ||f|| = ( sum_k ( <k>^s 2^{alpha |k|} ||cube_k f||_{L^2} )^2 )^{1/2},

with <k> = (1+|k|^2)^{1/2} and |k| Euclidean, evaluated at the cube corner.
Only the rough side alpha <= 0 is supported.  The mixed norm takes an
L^gamma norm in time inside the cube sum (trapezoidal quadrature on the
stored grid; gamma = inf as the sample max), optionally restricted to a
cube set.

The p-linear product estimate bounds the gamma=1 mixed norm of a pointwise
product of octant-supported factors by the product of their gamma=p norms at
regularity s + beta_p, valid once s >= n/2 - p/(p-1) * beta_p.  Its weighted
index sum has a finite supremum exactly in that range, which
`product_weight_sum` probes by direct summation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import PreconditionError, ZeroFieldError
from .kernels import ModelParams
from .spectral import (
    GridSpec,
    SpectralField,
    cube_index_vectors,
    decompose,
    physical_norm,
    pointwise_product,
    require_octant_support,
)


@dataclass(frozen=True)
class NormSpec:
    """Weight parameters (alpha <= 0, s) of the cube-weighted norm."""

    alpha: float
    s: float

    def __post_init__(self):
        if self.alpha > 0:
            raise ValueError("only the rough side alpha <= 0 is implemented")


@dataclass(frozen=True)
class MixedNormSpec:
    """Time exponent gamma in [1, inf], weights (alpha, s), optional cube set."""

    gamma: float
    alpha: float
    s: float
    cube_set: frozenset[tuple[int, ...]] | None = None

    def __post_init__(self):
        if self.gamma < 1:
            raise ValueError("gamma must be >= 1")
        if self.alpha > 0:
            raise ValueError("only the rough side alpha <= 0 is implemented")
        if self.cube_set is not None and not isinstance(self.cube_set, frozenset):
            object.__setattr__(self, "cube_set", frozenset(map(tuple, self.cube_set)))


class TimeSeries:
    """A spectral field sampled on a strictly increasing time grid from 0.

    Stores the stacked coefficient array (T,) + grid.shape; snapshots share
    one GridSpec.  Instances are treated as immutable values.
    """

    __slots__ = ("grid", "times", "coeffs")

    def __init__(self, grid: GridSpec, times, coeffs):
        times = np.asarray(times, dtype=float)
        coeffs = np.asarray(coeffs, dtype=np.complex128)
        if times.ndim != 1 or times.size == 0:
            raise ValueError("times must be a nonempty 1-d array")
        if times[0] != 0.0:
            raise ValueError("time grids start at 0")
        if np.any(np.diff(times) <= 0):
            raise ValueError("times must be strictly increasing")
        if coeffs.shape != (times.size,) + grid.shape:
            raise ValueError(
                f"coefficient stack shape {coeffs.shape} != {(times.size,) + grid.shape}"
            )
        times = times.copy()
        coeffs = coeffs.copy()
        times.setflags(write=False)
        coeffs.setflags(write=False)
        self.grid = grid
        self.times = times
        self.coeffs = coeffs

    @classmethod
    def from_fields(cls, times, fields: Sequence[SpectralField]) -> "TimeSeries":
        if not fields:
            raise ValueError("need at least one snapshot")
        grid = fields[0].grid
        for f in fields:
            if f.grid != grid:
                raise ValueError("snapshots live on different grids")
        return cls(grid, times, np.stack([f.coeffs for f in fields]))

    @property
    def n_times(self) -> int:
        return int(self.times.size)

    def field(self, i: int) -> SpectralField:
        return SpectralField(self.grid, self.coeffs[i])

    def __add__(self, other: "TimeSeries") -> "TimeSeries":
        self._compatible(other)
        return TimeSeries(self.grid, self.times, self.coeffs + other.coeffs)

    def __sub__(self, other: "TimeSeries") -> "TimeSeries":
        self._compatible(other)
        return TimeSeries(self.grid, self.times, self.coeffs - other.coeffs)

    def __mul__(self, scalar: complex) -> "TimeSeries":
        return TimeSeries(self.grid, self.times, self.coeffs * scalar)

    __rmul__ = __mul__

    def _compatible(self, other: "TimeSeries"):
        if other.grid != self.grid or not np.array_equal(other.times, self.times):
            raise ValueError("series are not on the same grid and time axis")


def _cube_weights(grid: GridSpec, alpha: float, s: float) -> np.ndarray:
    kvec = cube_index_vectors(grid)
    k2 = (kvec.astype(float) ** 2).sum(axis=0)
    return (1.0 + k2) ** (s / 2) * 2.0 ** (alpha * np.sqrt(k2))


def _per_cube_mass_stack(grid: GridSpec, coeffs: np.ndarray) -> np.ndarray:
    """Cube L^2 masses for a (T,)+shape stack, result (T,) + (K,)*n."""
    power = np.abs(coeffs) ** 2
    shape = [coeffs.shape[0]]
    for _ in range(grid.n):
        shape.extend([grid.K, grid.M])
    power = power.reshape(shape)
    for axis in range(grid.n - 1, -1, -1):
        power = power.sum(axis=2 * axis + 2)
    return np.sqrt(power * grid.M ** (-grid.n))


def _cube_set_mask(grid: GridSpec, cube_set) -> np.ndarray:
    kvec = cube_index_vectors(grid)
    mask = np.zeros(kvec.shape[1:], dtype=bool)
    lo, _ = grid.cube_range()
    for k in cube_set:
        mask[tuple(int(kj) - lo for kj in k)] = True
    return mask


def e_norm(f: SpectralField, spec: NormSpec) -> float:
    """Weighted ell^2-over-cubes norm of a single field."""
    from .spectral import per_cube_l2

    mass = per_cube_l2(f)
    w = _cube_weights(f.grid, spec.alpha, spec.s)
    return float(np.sqrt(((w * mass) ** 2).sum()))


def mixed_norm(u: TimeSeries, spec: MixedNormSpec, t_window: tuple[float, float] | None = None) -> float:
    """Weighted cube sum of per-cube L^gamma time norms.

    Finite gamma integrates by the trapezoidal rule on the stored grid;
    gamma = inf takes the sample max.  `t_window` restricts integration to
    stored times inside [t_lo, t_hi].
    """
    mass = _per_cube_mass_stack(u.grid, u.coeffs)
    times = u.times
    if t_window is not None:
        lo, hi = t_window
        keep = (times >= lo) & (times <= hi)
        if not np.any(keep):
            return 0.0
        mass, times = mass[keep], times[keep]
    if math.isinf(spec.gamma):
        per_cube = mass.max(axis=0)
    elif times.size == 1:
        raise ValueError("finite-gamma time norm needs at least two stored times")
    else:
        per_cube = np.trapezoid(mass**spec.gamma, times, axis=0) ** (1.0 / spec.gamma)
    w = _cube_weights(u.grid, spec.alpha, spec.s)
    if spec.cube_set is not None:
        per_cube = np.where(_cube_set_mask(u.grid, spec.cube_set), per_cube, 0.0)
    return float(np.sqrt(((w * per_cube) ** 2).sum()))


def bernstein_ratio(f: SpectralField, k: Sequence[int], m: float, q: float) -> float:
    """||cube_k f||_{L^q} / ||cube_k f||_{L^m} with Lebesgue norms on the box."""
    if not (1 < m <= q):
        raise ValueError("need 1 < m <= q")
    piece = decompose(f, k)
    if piece.is_zero():
        raise ZeroFieldError(f"cube {tuple(k)} carries no mass, ratio undefined")
    return physical_norm(piece, q) / physical_norm(piece, m)


def s_threshold_for_product(params: ModelParams, beta_p: float) -> float:
    """Regularity floor n/2 - p/(p-1) * beta_p for the p-linear product estimate."""
    if beta_p < 0:
        raise ValueError("beta_p must be nonnegative")
    return params.n / 2 - params.p / (params.p - 1) * beta_p


def product_series(us: Sequence[TimeSeries]) -> TimeSeries:
    """Pointwise product of p series, dealiased snapshot by snapshot."""
    base = us[0]
    for u in us[1:]:
        base._compatible(u)
    fields = [
        pointwise_product([SpectralField(u.grid, u.coeffs[i]) for u in us])
        for i in range(base.n_times)
    ]
    return TimeSeries.from_fields(base.times, fields)


def product_estimate_ratio(
    us: Sequence[TimeSeries],
    alpha: float,
    s: float,
    beta_p: float,
) -> tuple[float, float, float]:
    """Measured two sides of the p-linear product estimate and their ratio.

    lhs: gamma=1 mixed norm of the pointwise product at (alpha, s).
    rhs: product of the factors' gamma=p mixed norms at (alpha, s + beta_p).
    Octant support of every factor is a precondition; the estimate is not
    claimed otherwise.
    """
    p = len(us)
    if p < 2:
        raise ValueError("need at least two factors")
    n = us[0].grid.n
    floor = n / 2 - p / (p - 1) * beta_p
    if s < floor - 1e-12:
        raise PreconditionError(f"s = {s} below the product-estimate floor {floor}")
    for j, u in enumerate(us):
        for i in range(u.n_times):
            require_octant_support(u.field(i), 0.0, tol=0.0, what=f"factor {j} at t index {i}")
    lhs = mixed_norm(product_series(us), MixedNormSpec(1.0, alpha, s))
    rhs = 1.0
    for u in us:
        rhs *= mixed_norm(u, MixedNormSpec(float(p), alpha, s + beta_p))
    if lhs == 0.0:
        return 0.0, rhs, 0.0
    if rhs == 0.0:
        raise ZeroFieldError("nonzero product with zero factor norms")
    return lhs, rhs, lhs / rhs


def product_weight_sum(n: int, p: int, s: float, beta_p: float, box: int) -> float:
    """Direct-summation probe of the product estimate's weighted index sum.

    Evaluates sup over octant indices k* with |k*| <= box of

        <k*>^{-2 beta_p} * ( sum_{k octant, |k| <= |k*|} <k>^{-2(s+beta_p)} )^{p-1}.

    The p-1 inner sums factor because the radius constraint binds each index
    separately.  Finite, box-stable values certify summability; growth under
    box doubling flags divergence.
    """
    if box < 1:
        raise ValueError("box must be >= 1")
    axes = [np.arange(0, box + 1)] * n
    mesh = np.meshgrid(*axes, indexing="ij")
    r2 = sum(m.astype(float) ** 2 for m in mesh).ravel()
    order = np.argsort(r2, kind="stable")
    r2s = r2[order]
    terms = (1.0 + r2s) ** (-(s + beta_p))
    inner = np.cumsum(terms)
    uniq = np.unique(r2s)
    last = np.searchsorted(r2s, uniq, side="right") - 1
    probe = (1.0 + uniq) ** (-beta_p) * inner[last] ** (p - 1)
    return float(probe.max())


def sobolev_cube_norm(f: SpectralField, s0: float) -> float:
    """Cube-weighted Sobolev-type norm (the alpha = 0 member of the family)."""
    return e_norm(f, NormSpec(0.0, s0))


def norm_report(f: SpectralField, spec: NormSpec, per_cube: bool = False) -> dict:
    """JSON-ready report {spec, value, per_cube_breakdown?}."""
    from .spectral import per_cube_l2

    report: dict = {
        "spec": {"alpha": spec.alpha, "s": spec.s},
        "value": e_norm(f, spec),
    }
    if per_cube:
        mass = per_cube_l2(f)
        w = _cube_weights(f.grid, spec.alpha, spec.s)
        kvec = cube_index_vectors(f.grid)
        breakdown = {}
        for pos in np.argwhere(mass > 0):
            pos = tuple(pos)
            key = ",".join(str(int(kvec[(j, *pos)])) for j in range(f.grid.n))
            breakdown[key] = float(w[pos] * mass[pos])
        report["per_cube_breakdown"] = breakdown
    return report
