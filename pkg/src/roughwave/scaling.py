"""Large-data machinery: exact lattice dilation, budget-driven scale selection,
and descaling of solved runs back to the original equation.

The substitution u_lam(t, x) = lam^{2 kappa/(p-1)} u(lam^kappa t, lam x)
turns the original problem into the rescaled one, relocating Fourier data
from xi to lam*xi with amplitude lam^{2 kappa/(p-1) - n} for position data
and an extra lam^kappa for velocity data (the lam^{-n} is the dilation's
effect on Fourier densities).  Restricting lam to integers keeps the
relocation an exact index map on the lattice: no interpolation, hence
exactly invertible.

Because the data weight 2^{alpha |xi|} with alpha < 0 decays exponentially
along the relocation, the rescaled data norm shrinks like
2^{alpha (lam - 1) R} in lam, which is what lets arbitrarily large data be
driven under the fixed-point budget by choosing lam large enough.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import GridOverflowError, PreconditionError, SupportError
from .kernels import ModelParams, derived_exponents, r_lambda
from .norms import MixedNormSpec, NormSpec, TimeSeries, e_norm, mixed_norm
from .propagator import (
    PicardConfig,
    SolutionRecord,
    _DuhamelOperator,
    _admissible_mask,
    _power_stack,
    _stack_mixed_norm,
    linear_evolve,
    solution_space_spec,
)
from .spectral import SpectralField, index_mesh, radial_mesh


@dataclass
class ScalingPlan:
    """Chosen integer scale with the rescaled data and its budget bookkeeping."""

    lam: int
    scaled_u0: SpectralField
    scaled_u1: SpectralField
    nu: float
    epsilon: float
    R_lambda: float
    original_norm: float
    constants: dict
    margin: float


def dilate_field(f: SpectralField, lam: int, amplitude: float = None) -> SpectralField:
    """Relocate coefficients from lattice index m to lam*m, scaled by `amplitude`.

    Default amplitude lam^{-n} matches the Fourier density of x -> f(lam x).
    Raises GridOverflowError when a nonzero coefficient would leave the grid.
    """
    if int(lam) != lam or lam < 1:
        raise ValueError("dilation factor must be an integer >= 1")
    lam = int(lam)
    if amplitude is None:
        amplitude = float(lam) ** (-f.grid.n)
    if lam == 1:
        return f * amplitude if amplitude != 1.0 else f
    g = f.grid
    N = g.points_per_axis
    mesh = index_mesh(g)
    nz = f.coeffs != 0
    if np.any(nz):
        target = mesh[:, nz] * lam
        if target.min() < -N // 2 or target.max() > N // 2 - 1:
            raise GridOverflowError(
                f"dilation by {lam} pushes support outside the lattice (|m| < {N // 2})"
            )
    out = np.zeros_like(f.coeffs)
    src = tuple((mesh[j, nz] + N // 2) for j in range(g.n))
    dst = tuple((mesh[j, nz] * lam + N // 2) for j in range(g.n))
    out[dst] = amplitude * f.coeffs[src]
    floor = None if f.octant_floor is None else f.octant_floor * lam
    return SpectralField(g, out, octant_floor=floor)


def undilate_field(f: SpectralField, lam: int, amplitude: float = None) -> SpectralField:
    """Exact inverse of dilate_field: indices divide by lam, values by `amplitude`.

    Nonzero coefficients must sit on multiples of lam; integer dilation makes
    that automatic for anything produced from dilated data.
    """
    if int(lam) != lam or lam < 1:
        raise ValueError("dilation factor must be an integer >= 1")
    lam = int(lam)
    if amplitude is None:
        amplitude = float(lam) ** (-f.grid.n)
    if lam == 1:
        return f * (1.0 / amplitude) if amplitude != 1.0 else f
    g = f.grid
    N = g.points_per_axis
    mesh = index_mesh(g)
    nz = f.coeffs != 0
    off_lattice = nz & np.any(mesh % lam != 0, axis=0)
    if np.any(off_lattice):
        raise SupportError(f"support not divisible by {lam}; cannot land on the coarse lattice")
    out = np.zeros_like(f.coeffs)
    src = tuple((mesh[j, nz] + N // 2) for j in range(g.n))
    dst = tuple((mesh[j, nz] // lam + N // 2) for j in range(g.n))
    out[dst] = f.coeffs[src] / amplitude
    return SpectralField(g, out)


def scale_data(
    u0: SpectralField,
    u1: SpectralField,
    lam: int,
    params: ModelParams,
) -> tuple[SpectralField, SpectralField]:
    """Rescaled data (u0_lam, u1_lam); exact integer lattice relocation."""
    kap = params.kappa
    n = params.n
    amp0 = float(lam) ** (2 * kap / (params.p - 1) - n)
    amp1 = float(lam) ** (2 * kap / (params.p - 1) + kap - n)
    return dilate_field(u0, lam, amp0), dilate_field(u1, lam, amp1)


def data_pair_norm(u0: SpectralField, u1: SpectralField, alpha: float, s: float, kappa_bar: float) -> float:
    """Norm of the data pair: position at regularity s + kappa_bar, velocity at s."""
    return e_norm(u0, NormSpec(alpha, s + kappa_bar)) + e_norm(u1, NormSpec(alpha, s))


def scaling_bound_ratio(
    phi: SpectralField,
    lam: int,
    alpha: float,
    s: float,
    eps_support: float,
) -> float:
    """Measured dilation norm against lam^{-n/2+max(s,0)} 2^{alpha(lam-1) eps} bound.

    Requires supp(phi) away from the origin: |xi| >= eps_support.
    """
    if eps_support <= 0:
        raise ValueError("eps_support must be positive")
    r = radial_mesh(phi.grid)
    if np.any((phi.coeffs != 0) & (r < eps_support * (1 - 1e-12))):
        raise PreconditionError(f"support must satisfy |xi| >= {eps_support}")
    spec = NormSpec(alpha, s)
    base = e_norm(phi, spec)
    if base == 0.0:
        return 0.0
    scaled = e_norm(dilate_field(phi, lam), spec)
    n = phi.grid.n
    bound = lam ** (-n / 2 + max(s, 0.0)) * 2.0 ** (alpha * (lam - 1) * eps_support)
    return scaled / (bound * base)


def _scale_selection_lhs(lam: float, params: ModelParams, alpha: float, s: float, R: float) -> float:
    kap, kbar = params.kappa, params.kappa_bar
    p, n = params.p, params.n
    expo = (3 * kap - 2 * params.delta + (kbar - kap) * p) / (p - 1) - n / 2 + max(s + kbar, kap)
    return 2.0 ** (alpha * (lam - 1) * R) * lam**expo


def select_lambda(
    data_norm: float,
    params: ModelParams,
    alpha: float,
    s: float,
    constants: dict,
    eps0: float = 0.25,
    lam_cap: int = 1 << 20,
) -> int:
    """Smallest admissible integer scale driving the rescaled data under budget.

    Solves the exponential-decay inequality

        2^{alpha(lam-1)R} lam^{(3k-2d+(kbar-k)p)/(p-1) - n/2 + max(s+kbar, k)}
            <= (max{2 C0, 4 C1})^{-1/(p-1)} / (2 C Ct1) / ||data||

    for the least integer lam >= 2 (and lam >= 1/eps0 in the scale-invariant
    regime, where the support condition needs it).  Requires alpha < 0
    strictly; the small-data theory applies at alpha = 0 instead.
    """
    if alpha >= 0:
        raise PreconditionError("scale selection needs alpha < 0; alpha = 0 is the small-data regime")
    if data_norm <= 0:
        raise ValueError("data_norm must be positive")
    dx = derived_exponents(params, eps0)
    C, C0, C1, Ct1 = (constants[k] for k in ("C", "C0", "C1", "C_tilde1"))
    rhs = (max(2 * C0, 4 * C1)) ** (-1.0 / (params.p - 1)) / (2 * C * Ct1) / data_norm
    lam_min = 2
    if dx.regime == "scale_invariant":
        lam_min = max(lam_min, math.ceil(1.0 / eps0))
    lam = lam_min
    while lam <= lam_cap:
        if _scale_selection_lhs(lam, params, alpha, s, dx.R) <= rhs:
            return lam
        lam += 1
    raise RuntimeError(f"no admissible scale below {lam_cap}; data norm {data_norm} too large")


def selection_margin(lam: int, data_norm: float, params: ModelParams, alpha: float, s: float, constants: dict, eps0: float = 0.25) -> float:
    """RHS/LHS of the selection inequality at lam (>= 1 means admissible)."""
    dx = derived_exponents(params, eps0)
    C, C0, C1, Ct1 = (constants[k] for k in ("C", "C0", "C1", "C_tilde1"))
    rhs = (max(2 * C0, 4 * C1)) ** (-1.0 / (params.p - 1)) / (2 * C * Ct1) / data_norm
    return rhs / _scale_selection_lhs(lam, params, alpha, s, dx.R)


def closed_form_alpha_radius(alpha: float, eps0: float, C: float, data_norm: float) -> float:
    """Scale-invariant closed form for the final radius: alpha - log2(1 + C ||data||)/eps0."""
    return alpha - math.log2(1.0 + C * data_norm) / eps0


def descale_solution(
    rec: SolutionRecord,
    lam: int,
    params: ModelParams,
    alpha: float,
    eps0: float = 0.25,
) -> dict:
    """Descaled solution u(t,x) = lam^{-2k/(p-1)} u_lam(lam^{-k} t, x/lam) with checks.

    Returns the descaled series, its mixed norms at the reduced radius
    lam * alpha, and the mild-equation residual of the descaled solution in
    the ORIGINAL (lam = 1) problem with the descaled data.
    """
    if int(lam) != lam or lam < 1:
        raise ValueError("lam must be an integer >= 1")
    lam = int(lam)
    kap, kbar, dlt = params.kappa, params.kappa_bar, params.delta
    p = params.p
    amp_sol = float(lam) ** (2 * kap / (p - 1) - params.n)

    grid = rec.series.grid
    times = rec.series.times * float(lam) ** kap
    fields = [undilate_field(rec.series.field(i), lam, amp_sol) for i in range(rec.series.n_times)]
    series = TimeSeries.from_fields(times, fields)

    amp0 = float(lam) ** (2 * kap / (p - 1) - params.n)
    amp1 = float(lam) ** (2 * kap / (p - 1) + kap - params.n)
    u0 = undilate_field(rec.u0, lam, amp0)
    u1 = undilate_field(rec.u1, lam, amp1)

    s = rec.s
    alpha0 = lam * alpha
    l1 = mixed_norm(series, MixedNormSpec(1.0, alpha0, s + 2 * kap - 2 * dlt + kbar))
    linf = mixed_norm(series, MixedNormSpec(math.inf, alpha0, s + kbar))

    # residual of the descaled solution in the original mild equation
    dx = derived_exponents(params, eps0)
    floor1 = r_lambda(dx, 1.0)
    u_lin, _ = linear_evolve(params, 1.0, u0, u1, times)
    op = _DuhamelOperator(params, 1.0, grid, times)
    mask = _admissible_mask(grid, floor1)
    forcing = _power_stack(grid, series.coeffs, p) * mask
    defect = series.coeffs - (u_lin.coeffs + op.convolve(forcing))
    spec1 = solution_space_spec(params, alpha0, s)
    X_desc = _stack_mixed_norm(grid, times, series.coeffs, spec1)
    residual = _stack_mixed_norm(grid, times, defect, spec1) / max(X_desc, 1e-300)

    return {
        "series": series,
        "u0": u0,
        "u1": u1,
        "alpha0": alpha0,
        "l1_norm": l1,
        "linf_norm": linf,
        "X_norm": X_desc,
        "residual": residual,
    }


def time_dilation_bound_ratio(
    series: TimeSeries,
    lam: int,
    params: ModelParams,
    alpha: float,
    s: float,
    beta_1: float,
    beta_inf: float,
    c_fit: float,
) -> dict:
    """Measured norms of g(t/lam^kappa, x/lam) at radius lam*alpha vs 2^{(-alpha) c lam} times g's norms.

    Returns both gamma = 1 and gamma = inf measured/majorant ratios (the
    constant c is fitted, not asserted).
    """
    if int(lam) != lam or lam < 1:
        raise ValueError("lam must be an integer >= 1")
    lam = int(lam)
    kap = params.kappa
    times = series.times * float(lam) ** kap
    fields = [undilate_field(series.field(i), lam, float(lam) ** (-params.n)) for i in range(series.n_times)]
    moved = TimeSeries.from_fields(times, fields)
    out = {}
    for gamma, beta in ((1.0, beta_1), (math.inf, beta_inf)):
        base = mixed_norm(series, MixedNormSpec(gamma, alpha, s + beta))
        scaled = mixed_norm(moved, MixedNormSpec(gamma, lam * alpha, s + beta))
        majorant = 2.0 ** ((-alpha) * c_fit * lam) * base
        key = "l1" if gamma == 1.0 else "linf"
        out[key] = scaled / majorant if majorant > 0 else 0.0
    return out


def build_scaling_plan(
    u0: SpectralField,
    u1: SpectralField,
    params: ModelParams,
    alpha: float,
    s: float,
    constants: dict,
    eps0: float = 0.25,
    lam_override: int | None = None,
) -> ScalingPlan:
    """Select a scale, rescale the data, and verify the budget end to end."""
    from .propagator import nu_bound

    dx = derived_exponents(params, eps0)
    norm = data_pair_norm(u0, u1, alpha, s, dx.kappa_bar)
    if lam_override is None:
        lam = select_lambda(norm, params, alpha, s, constants, eps0)
    else:
        lam = int(lam_override)
        if selection_margin(lam, norm, params, alpha, s, constants, eps0) < 1.0:
            raise PreconditionError(f"requested scale {lam} violates the selection inequality")
    scaled0, scaled1 = scale_data(u0, u1, lam, params)
    nu = nu_bound(params, lam, constants["C0"], constants["C1"])
    epsilon = nu / (2 * constants["C"])
    scaled_norm = data_pair_norm(scaled0, scaled1, alpha, s, dx.kappa_bar)
    if scaled_norm > epsilon * (1 + 1e-9):
        raise SupportError(
            f"rescaled data norm {scaled_norm:.3e} misses the budget eps = {epsilon:.3e}"
        )
    floor = r_lambda(dx, lam)
    for name, f in (("scaled u0", scaled0), ("scaled u1", scaled1)):
        from .spectral import octant_violation

        if octant_violation(f, floor) > 0:
            raise SupportError(f"{name} violates the support condition at R_lambda = {floor:.4g}")
    return ScalingPlan(
        lam=lam, scaled_u0=scaled0, scaled_u1=scaled1, nu=nu, epsilon=epsilon,
        R_lambda=floor, original_norm=norm, constants=dict(constants),
        margin=selection_margin(lam, norm, params, alpha, s, constants, eps0),
    )
