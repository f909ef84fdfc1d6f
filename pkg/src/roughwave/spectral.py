"""Finite frequency-lattice fields, cube decomposition, and dealiased products.

A field is stored through its Fourier data on the centered lattice
{m/M : m integer, -K*M/2 <= m < K*M/2}^n with n in {1,2,3}.  Stored values are
samples of the continuum Fourier density, so every spectral L^2 quantity uses
the lattice measure M^{-n} and physical Lebesgue norms use the normalized box
measure M^n per period.  Under this convention the indicator of a unit cube
has L^2 mass exactly 1 and an exact integer dilation of the lattice matches
the distributional scaling of Fourier transforms.

The half-open frequency cube k + [0,1)^n holds exactly M^n lattice points, so
the cube projection is an exact coefficient mask and the cubes tile the
lattice.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    AliasingError,
    CubeRangeError,
    NumericRangeError,
    SupportError,
)

_BINARY_MAGIC = b"RWF1"


@dataclass(frozen=True)
class GridSpec:
    """Lattice geometry: n dimensions, M points per unit cube edge, K cubes per axis.

    Points per axis N = K*M must be a power of two.  Lattice spacing is 1/M,
    frequencies run over [-K/2, K/2) per axis, and the physical box has
    normalized measure M^n.
    """

    n: int
    M: int
    K: int

    def __post_init__(self):
        if self.n not in (1, 2, 3):
            raise ValueError(f"dimension n must be 1, 2 or 3, got {self.n}")
        if self.M < 1 or self.K < 1:
            raise ValueError("M and K must be positive integers")
        N = self.M * self.K
        if N & (N - 1) != 0:
            raise ValueError(f"points per axis N = K*M = {N} must be a power of two")

    @property
    def points_per_axis(self) -> int:
        return self.M * self.K

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.points_per_axis,) * self.n

    @property
    def box_measure(self) -> float:
        return float(self.M**self.n)

    def cube_range(self) -> tuple[int, int]:
        """Valid cube indices per axis: [-K/2, K/2) as integers."""
        return (-self.K // 2, self.K // 2)


@lru_cache(maxsize=32)
def _lattice(grid: GridSpec):
    """Cached index machinery for a grid.

    Returns (m_axis, m_mesh, xi_mesh, kvec_axis): the centered integer index
    per axis, the stacked integer index mesh of shape (n,) + grid.shape, the
    matching frequency mesh, and the cube-index values per axis.
    """
    N = grid.points_per_axis
    m = np.arange(-N // 2, N // 2)
    mesh = np.stack(np.meshgrid(*([m] * grid.n), indexing="ij"))
    xi = mesh / grid.M
    kvals = np.arange(-grid.K // 2, grid.K // 2)
    for arr in (m, mesh, xi, kvals):
        arr.setflags(write=False)
    return m, mesh, xi, kvals


def index_mesh(grid: GridSpec) -> np.ndarray:
    """Centered integer lattice indices, shape (n,) + grid.shape."""
    return _lattice(grid)[1]


def frequency_mesh(grid: GridSpec) -> np.ndarray:
    """Frequency vectors, shape (n,) + grid.shape."""
    return _lattice(grid)[2]


def radial_mesh(grid: GridSpec) -> np.ndarray:
    """Euclidean |xi| per lattice point."""
    xi = frequency_mesh(grid)
    return np.sqrt((xi**2).sum(axis=0))


@dataclass(frozen=True)
class SpectralField:
    """Immutable complex field given by Fourier data on a GridSpec lattice.

    `octant_floor` records, when set, that the field was produced by an
    octant mask at that threshold; operations that need the support
    condition still verify it numerically.
    """

    grid: GridSpec
    coeffs: np.ndarray
    octant_floor: float | None = None

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=np.complex128)
        if c.shape != self.grid.shape:
            raise ValueError(f"coefficient shape {c.shape} != grid shape {self.grid.shape}")
        c = c.copy()
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    def l2(self) -> float:
        """Spectral L^2 norm with lattice measure M^{-n}."""
        return float(np.linalg.norm(self.coeffs) * self.grid.M ** (-self.grid.n / 2))

    def is_zero(self) -> bool:
        return not np.any(self.coeffs)

    def replace(self, coeffs: np.ndarray, octant_floor: float | None = None) -> "SpectralField":
        return SpectralField(self.grid, coeffs, octant_floor)

    def __add__(self, other: "SpectralField") -> "SpectralField":
        self._check_same_grid(other)
        return SpectralField(self.grid, self.coeffs + other.coeffs)

    def __sub__(self, other: "SpectralField") -> "SpectralField":
        self._check_same_grid(other)
        return SpectralField(self.grid, self.coeffs - other.coeffs)

    def __mul__(self, scalar: complex) -> "SpectralField":
        return SpectralField(self.grid, self.coeffs * scalar, self.octant_floor)

    __rmul__ = __mul__

    def _check_same_grid(self, other: "SpectralField"):
        if other.grid != self.grid:
            raise ValueError("fields live on different grids")


def zero_field(grid: GridSpec) -> SpectralField:
    return SpectralField(grid, np.zeros(grid.shape, dtype=np.complex128))


def to_physical(f: SpectralField) -> np.ndarray:
    """Physical samples u(x_j) = M^{-n} sum_m c_m e^{2 pi i j.m/N}."""
    g = f.grid
    N = g.points_per_axis
    spec = np.fft.ifftshift(f.coeffs)
    return np.fft.ifftn(spec) * (N**g.n) * (g.M ** (-g.n))


def from_physical(grid: GridSpec, samples: np.ndarray) -> SpectralField:
    """Inverse of :func:`to_physical`."""
    N = grid.points_per_axis
    spec = np.fft.fftn(samples) * (grid.M**grid.n) / (N**grid.n)
    return SpectralField(grid, np.fft.fftshift(spec))


def physical_norm(f: SpectralField, q: float) -> float:
    """Physical Lebesgue L^q norm on the box, normalized measure M^n."""
    g = f.grid
    u = np.abs(to_physical(f))
    if np.isinf(q):
        return float(u.max())
    w = (g.M / g.points_per_axis) ** g.n
    return float((w * (u**q).sum()) ** (1.0 / q))


def _cube_slices(grid: GridSpec, k: Sequence[int]) -> tuple[slice, ...]:
    lo, hi = grid.cube_range()
    k = tuple(int(x) for x in k)
    if len(k) != grid.n:
        raise CubeRangeError(f"cube index has length {len(k)}, grid dimension is {grid.n}")
    for kj in k:
        if not (lo <= kj < hi):
            raise CubeRangeError(f"cube index {k} outside per-axis range [{lo}, {hi})")
    return tuple(slice((kj - lo) * grid.M, (kj - lo + 1) * grid.M) for kj in k)


def decompose(f: SpectralField, k: Sequence[int]) -> SpectralField:
    """Restrict f to the half-open frequency cube k + [0,1)^n.

    The cubes tile the lattice, so summing over all k recovers f exactly.
    """
    sl = _cube_slices(f.grid, k)
    out = np.zeros_like(f.coeffs)
    out[sl] = f.coeffs[sl]
    return SpectralField(f.grid, out)


def per_cube_l2(f: SpectralField) -> np.ndarray:
    """L^2 mass of every cube at once, shape (K,)*n, same norm as field.l2()."""
    g = f.grid
    power = np.abs(f.coeffs) ** 2
    shape = []
    for _ in range(g.n):
        shape.extend([g.K, g.M])
    power = power.reshape(shape)
    for axis in range(g.n - 1, -1, -1):
        power = power.sum(axis=2 * axis + 1)
    return np.sqrt(power * g.M ** (-g.n))


def cube_index_vectors(grid: GridSpec) -> np.ndarray:
    """Cube index vectors aligned with per_cube_l2's layout, shape (n,) + (K,)*n."""
    kvals = _lattice(grid)[3]
    return np.stack(np.meshgrid(*([kvals] * grid.n), indexing="ij"))


def cube_slices(grid: GridSpec, k: Sequence[int]) -> tuple[slice, ...]:
    """Array slices selecting the lattice block of cube k (validates range)."""
    return _cube_slices(grid, k)


def octant_mask(f: SpectralField, R: float) -> SpectralField:
    """Zero all coefficients outside {xi_j >= 0 for all j, |xi|_inf >= R}."""
    if R < 0:
        raise ValueError("R must be nonnegative")
    xi = frequency_mesh(f.grid)
    keep = np.all(xi >= 0, axis=0) & (np.max(xi, axis=0) >= R)
    return SpectralField(f.grid, np.where(keep, f.coeffs, 0.0), octant_floor=R)


def octant_violation(f: SpectralField, R: float = 0.0) -> float:
    """Relative spectral mass outside the admissible set {octant, |xi|_inf >= R}."""
    total = float(np.linalg.norm(f.coeffs))
    if total == 0.0:
        return 0.0
    xi = frequency_mesh(f.grid)
    keep = np.all(xi >= 0, axis=0) & (np.max(xi, axis=0) >= R)
    return float(np.linalg.norm(np.where(keep, 0.0, f.coeffs)) / total)


def require_octant_support(f: SpectralField, R: float = 0.0, tol: float = 0.0, what: str = "field"):
    bad = octant_violation(f, R)
    if bad > tol:
        raise SupportError(
            f"{what} has relative mass {bad:.3e} outside the octant set with |xi|_inf >= {R}"
        )


def _pad_embed(coeffs: np.ndarray, n: int, N: int, Npad: int) -> np.ndarray:
    out_shape = (Npad,) * n
    out = np.zeros(out_shape, dtype=np.complex128)
    off = (Npad - N) // 2
    sl = tuple(slice(off, off + N) for _ in range(n))
    out[sl] = coeffs
    return out


def _pad_extract(coeffs: np.ndarray, n: int, N: int, Npad: int) -> np.ndarray:
    off = (Npad - N) // 2
    sl = tuple(slice(off, off + N) for _ in range(n))
    return coeffs[sl]


def _padded_points(N: int, p: int, pad_factor: float | None) -> int:
    need = (p + 1) / 2
    if pad_factor is None:
        pad_factor = 2 ** int(np.ceil(np.log2(need)))
    if pad_factor < need:
        raise AliasingError(
            f"padding factor {pad_factor} below the exact dealiasing bound (p+1)/2 = {need}"
        )
    return int(round(N * pad_factor))


def pointwise_product(fields: Sequence[SpectralField], pad_factor: float | None = None) -> SpectralField:
    """Spectral data of the pointwise product of p fields, exactly dealiased.

    Zero padding by a factor of at least (p+1)/2 (default: that bound rounded
    up to a power of two) makes the retained window free of aliasing for a
    degree-p product.  Modes produced outside the original window are
    discarded; that loss is what the outer-shell monitor tracks.
    """
    if not fields:
        raise ValueError("need at least one factor")
    grid = fields[0].grid
    for f in fields[1:]:
        if f.grid != grid:
            raise ValueError("product factors live on different grids")
    p = len(fields)
    N = grid.points_per_axis
    Npad = _padded_points(N, p, pad_factor)
    scale_fwd = Npad**grid.n * grid.M ** (-grid.n)
    phys = None
    for f in fields:
        spec = np.fft.ifftshift(_pad_embed(f.coeffs, grid.n, N, Npad))
        u = np.fft.ifftn(spec) * scale_fwd
        phys = u if phys is None else phys * u
    if not np.all(np.isfinite(phys)):
        raise NumericRangeError("pointwise product overflowed the floating-point range")
    spec = np.fft.fftshift(np.fft.fftn(phys)) * (grid.M**grid.n) / (Npad**grid.n)
    return SpectralField(grid, _pad_extract(spec, grid.n, N, Npad))


def pointwise_power(f: SpectralField, p: int, pad_factor: float | None = None) -> SpectralField:
    """Spectral data of u(x)^p (plain p-th power, no conjugation), dealiased."""
    if p < 2:
        raise ValueError("power must be an integer >= 2")
    grid = f.grid
    N = grid.points_per_axis
    Npad = _padded_points(N, p, pad_factor)
    spec = np.fft.ifftshift(_pad_embed(f.coeffs, grid.n, N, Npad))
    u = np.fft.ifftn(spec) * (Npad**grid.n * grid.M ** (-grid.n))
    w = u**p
    if not np.all(np.isfinite(w)):
        raise NumericRangeError("pointwise power overflowed the floating-point range")
    out = np.fft.fftshift(np.fft.fftn(w)) * (grid.M**grid.n) / (Npad**grid.n)
    return SpectralField(grid, _pad_extract(out, grid.n, N, Npad))


def support_cubes(f: SpectralField, tol: float = 0.0) -> set[tuple[int, ...]]:
    """Cubes k with ||cube restriction||_{L^2} > tol * ||f||_{L^2}."""
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    total = f.l2()
    if total == 0.0:
        return set()
    mass = per_cube_l2(f)
    kvecs = cube_index_vectors(f.grid)
    hit = mass > tol * total
    idx = np.argwhere(hit)
    return {tuple(int(kvecs[(j, *pos)]) for j in range(f.grid.n)) for pos in idx}


def outer_shell_fraction(f: SpectralField, shell: float = 0.1) -> float:
    """Spectral mass fraction carried by lattice points with |m|_inf >= (1-shell)*N/2."""
    g = f.grid
    N = g.points_per_axis
    mesh = index_mesh(g)
    outer = np.max(np.abs(mesh), axis=0) >= (1.0 - shell) * (N / 2)
    total = float(np.linalg.norm(f.coeffs))
    if total == 0.0:
        return 0.0
    return float(np.linalg.norm(f.coeffs[outer]) / total)


def gaussian_cube_field(
    grid: GridSpec,
    cubes: Iterable[Sequence[int]],
    rng: np.random.Generator,
    octant_floor: float | None = None,
) -> SpectralField:
    """Seeded random field: i.i.d. complex Gaussian coefficients on the given cubes.

    Applies the octant mask at `octant_floor` when supplied.
    """
    coeffs = np.zeros(grid.shape, dtype=np.complex128)
    for k in cubes:
        sl = _cube_slices(grid, k)
        shape = tuple(s.stop - s.start for s in sl)
        coeffs[sl] = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    f = SpectralField(grid, coeffs)
    if octant_floor is not None:
        f = octant_mask(f, octant_floor)
    return f


# -- serialization ----------------------------------------------------------
#
# Binary layout (all little-endian): magic b"RWF1", uint32 header length,
# UTF-8 JSON header {"n","M","K","count"}, then `count` records of
# (int64 m_1..m_n, float64 re, float64 im).
# CSV layout: first line "# gridspec n=<n> M=<M> K=<K>", then one
# "m_1,...,m_n,re,im" row per nonzero lattice point.


def _nonzero_records(f: SpectralField):
    mesh = index_mesh(f.grid)
    idx = np.argwhere(f.coeffs != 0)
    for pos in idx:
        pos = tuple(pos)
        mvec = tuple(int(mesh[(j, *pos)]) for j in range(f.grid.n))
        val = f.coeffs[pos]
        yield mvec, float(val.real), float(val.imag)


def save_field_binary(path, f: SpectralField):
    header = json.dumps(
        {"n": f.grid.n, "M": f.grid.M, "K": f.grid.K, "count": int(np.count_nonzero(f.coeffs))}
    ).encode()
    rec = struct.Struct("<" + "q" * f.grid.n + "dd")
    with open(path, "wb") as fh:
        fh.write(_BINARY_MAGIC)
        fh.write(struct.pack("<I", len(header)))
        fh.write(header)
        for mvec, re, im in _nonzero_records(f):
            fh.write(rec.pack(*mvec, re, im))


def load_field_binary(path) -> SpectralField:
    with open(path, "rb") as fh:
        if fh.read(4) != _BINARY_MAGIC:
            raise ValueError(f"{path} is not a spectral field file")
        (hlen,) = struct.unpack("<I", fh.read(4))
        header = json.loads(fh.read(hlen).decode())
        grid = GridSpec(header["n"], header["M"], header["K"])
        rec = struct.Struct("<" + "q" * grid.n + "dd")
        coeffs = np.zeros(grid.shape, dtype=np.complex128)
        N = grid.points_per_axis
        for _ in range(header["count"]):
            row = rec.unpack(fh.read(rec.size))
            mvec, re, im = row[: grid.n], row[-2], row[-1]
            pos = tuple(mj + N // 2 for mj in mvec)
            coeffs[pos] = re + 1j * im
    return SpectralField(grid, coeffs)


def save_field_csv(path, f: SpectralField):
    with open(path, "w") as fh:
        fh.write(f"# gridspec n={f.grid.n} M={f.grid.M} K={f.grid.K}\n")
        for mvec, re, im in _nonzero_records(f):
            fh.write(",".join(str(mj) for mj in mvec) + f",{re!r},{im!r}\n")


def load_field_csv(path) -> SpectralField:
    with open(path) as fh:
        head = fh.readline().strip()
        if not head.startswith("# gridspec"):
            raise ValueError(f"{path} lacks a gridspec header")
        kv = dict(tok.split("=") for tok in head.split()[2:])
        grid = GridSpec(int(kv["n"]), int(kv["M"]), int(kv["K"]))
        coeffs = np.zeros(grid.shape, dtype=np.complex128)
        N = grid.points_per_axis
        for line in fh:
            parts = line.strip().split(",")
            mvec = tuple(int(x) for x in parts[: grid.n])
            pos = tuple(mj + N // 2 for mj in mvec)
            coeffs[pos] = float(parts[-2]) + 1j * float(parts[-1])
    return SpectralField(grid, coeffs)
