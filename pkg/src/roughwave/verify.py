"""Named certification suites binding every claimed estimate to a seeded,
reproducible numerical check.

Each suite returns a SuiteReport: a deterministic list of cases with
measured values, the bound they were held to, fitted constants (the
observed suprema on calibration sweeps), and a verdict.  Constants are
never asserted against magic numbers; what is asserted is their stability,
for example flatness across the scaling parameter or across grid
refinement.  Every suite carries at least one deliberately violating case
that must trip its guard.
"""

from __future__ import annotations

import json
import math
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.integrate import quad

from .errors import (
    DivergenceError,
    PreconditionError,
    SmallnessError,
    SpectralOverflowError,
    SupportError,
)
from .kernels import (
    ModelParams,
    default_decay_c,
    derived_exponents,
    eps2,
    kernel_values,
    low_frequency_bound_ratio,
    pointwise_bound_ratio,
    r_lambda,
)
from .norms import (
    MixedNormSpec,
    NormSpec,
    TimeSeries,
    bernstein_ratio,
    e_norm,
    mixed_norm,
    product_estimate_ratio,
    product_weight_sum,
)
from .propagator import (
    PicardConfig,
    _DuhamelOperator,
    default_T_final,
    estimate_contraction_constants,
    fit_data_to_budget,
    linear_evolve,
    picard_solve,
    regularity_norms,
    solution_space_spec,
    time_grid,
    weight_exponent,
)
from .scaling import (
    build_scaling_plan,
    data_pair_norm,
    descale_solution,
    scale_data,
    scaling_bound_ratio,
    select_lambda,
    selection_margin,
    time_dilation_bound_ratio,
)
from .spectral import (
    GridSpec,
    SpectralField,
    gaussian_cube_field,
    per_cube_l2,
    pointwise_product,
    zero_field,
)


@dataclass
class SuiteReport:
    """Deterministic certification record for one suite."""

    suite_name: str
    claim: str
    seed: int
    cases: list = field(default_factory=list)
    fitted_constants: dict = field(default_factory=dict)
    verdict: str = "pass"

    def add(self, name: str, passed: bool, **data):
        case = {"name": name, "pass": bool(passed)}
        case.update(_plain(data))
        self.cases.append(case)
        if not passed:
            self.verdict = "fail"

    def fit(self, key: str, value: float):
        self.fitted_constants[key] = float(value)

    def to_json(self) -> str:
        payload = {
            "suite_name": self.suite_name,
            "claim": self.claim,
            "seed": self.seed,
            "fitted_constants": _plain(self.fitted_constants),
            "cases": self.cases,
            "verdict": self.verdict,
        }
        return json.dumps(payload, sort_keys=True, indent=1)


def _plain(obj):
    """Recursively convert numpy scalars/arrays for canonical JSON output."""
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in sorted(obj.items())}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, float) and (math.isinf(obj) or math.isnan(obj)):
        return repr(obj)
    return obj


def _suite_rng(suite_name: str, seed: int) -> np.random.Generator:
    mix = (seed * 1000003 + zlib.crc32(suite_name.encode())) % (1 << 31)
    return np.random.default_rng(mix)


# -- kernel decay bounds ------------------------------------------------------


def _ratio_grid(params: ModelParams, lam: float, xs: np.ndarray, thetas: np.ndarray, c: float, eps0: float):
    """Bound ratios on the scaled sweep r = x R_lambda, t = theta / (c rate(r))."""
    dx = derived_exponents(params, eps0)
    floor = r_lambda(dx, lam)
    r = xs * floor
    kap, kbar = params.kappa, params.kappa_bar
    sig, dlt = params.sigma, params.delta
    rate = c * lam ** (2 * dlt - kap) * r ** (2 * kap - 2 * dlt)
    t = thetas[None, :] / rate[:, None]
    K0, K1, dtK0, dtK1 = kernel_values(params, lam, r[:, None], t)
    decay = np.exp(-thetas)[None, :]
    out = {}
    out["K0"] = np.abs(K0) / decay
    out["dtK0"] = np.abs(dtK0) / (lam ** (2 * dlt - sig) * r[:, None] ** (2 * sig - kbar) * decay)
    out["K1"] = np.abs(K1) / (lam ** (kbar - kap) * r[:, None] ** (-kbar) * decay)
    out["dtK1"] = np.abs(dtK1) / decay
    return out


def suite_kernel_bounds(seed: int = 0, config: dict | None = None) -> SuiteReport:
    """Pointwise kernel decay majorants, uniform in the scaling parameter."""
    cfg = {
        "pairs": [(1.0, 0.0), (2.0, 1.0), (1.0, 1.0)],
        "lams": [1.0, 2.0, 4.0, 8.0, 16.0],
        "flat_lams": [2.0, 4.0, 8.0, 16.0],
        "n_r": 9,
        "theta_max": 20.0,
        "n_theta": 801,
        "eps0": 0.25,
        "lam_drift_tol": 0.10,
    }
    cfg.update(config or {})
    rep = SuiteReport(
        "kernel_bounds",
        "Above the support radius the mode kernels obey "
        "|dt^j K0| <= C lam^{(2d-s)j} r^{(2s-kbar)j} e^{-c lam^{2d-k} r^{2k-2d} t} "
        "and |dt^j K1| <= C lam^{(k-kbar)(j-1)} r^{kbar(j-1)} e^{-...}, with C "
        "independent of lam; the scale-invariant K1 constant is 2/sqrt(3) at c = 1/2.",
        seed,
    )
    thetas = np.linspace(0.0, cfg["theta_max"], cfg["n_theta"])
    xs = np.geomspace(1.0, 8.0, cfg["n_r"])
    for sig, dlt in cfg["pairs"]:
        par = ModelParams(sig, dlt, 2, 1)
        c = default_decay_c(par)
        sups: dict[str, dict[float, float]] = {w: {} for w in ("K0", "K1", "dtK0", "dtK1")}
        for lam in cfg["lams"]:
            grids = _ratio_grid(par, lam, xs, thetas, c, cfg["eps0"])
            for which, arr in grids.items():
                sups[which][lam] = float(arr.max())
        for which, by_lam in sups.items():
            vals = [by_lam[lam] for lam in cfg["flat_lams"]]
            drift = max(vals) / min(vals) - 1.0
            fitted = max(by_lam.values())
            rep.fit(f"C[{sig:g},{dlt:g}][{which}]", fitted)
            rep.add(
                f"lam-flat sigma={sig:g} delta={dlt:g} {which}",
                math.isfinite(fitted) and drift <= cfg["lam_drift_tol"],
                fitted=fitted,
                drift=drift,
                per_lam={f"{lam:g}": by_lam[lam] for lam in cfg["lams"]},
            )
        # t = 0 pins ratio 1 for K0
        t0 = _ratio_grid(par, 2.0, xs, np.array([0.0]), c, cfg["eps0"])["K0"]
        rep.add(
            f"t=0 unit ratio sigma={sig:g} delta={dlt:g}",
            bool(np.allclose(t0, 1.0, rtol=1e-12)),
            max_abs_dev=float(np.abs(t0 - 1.0).max()),
        )

    # scale-invariant analytic constant at c = 1/2
    par_si = ModelParams(2.0, 1.0, 2, 1)
    si = _ratio_grid(par_si, 3.0, xs, thetas, 0.5, cfg["eps0"])["K1"]
    target = 2.0 / math.sqrt(3.0)
    rep.fit("scale_invariant_K1", float(si.max()))
    rep.add(
        "scale-invariant K1 analytic constant",
        abs(si.max() - target) <= 0.01 * target,
        measured=float(si.max()),
        analytic=target,
    )

    # negative control: the bound is not claimed below the support radius
    try:
        pointwise_bound_ratio(ModelParams(1.0, 0.0, 2, 1), 2.0, 0.5, 1.0, "K0")
        rep.add("below-radius precondition", False, note="no error raised")
    except PreconditionError:
        rep.add("below-radius precondition", True, expected_failure=True)
    return rep


# -- uniform-in-time linear estimates ----------------------------------------


def _linear_case_grid(par: ModelParams, lam: float, eps0: float) -> tuple[GridSpec, list, np.ndarray]:
    """Data window and time grid for one uniform-estimate case."""
    dx = derived_exponents(par, eps0)
    floor = r_lambda(dx, lam)
    grid = GridSpec(1, 8, 64)
    lo, hi = grid.cube_range()
    k_lo = max(0, math.ceil(floor - 1e-9))
    k_hi = min(max(8, k_lo + 4), hi - 2)
    cubes = [(k_lo,), (k_lo + 1,), (k_hi,), (k_hi + 1,)]
    c_true = 1.0 if par.regime == "non_effective" else 0.5
    rate_slow = c_true * lam ** (2 * par.delta - par.kappa) * max(floor, k_lo) ** (2 * par.kappa - 2 * par.delta)
    T = math.log(1e9) / rate_slow
    steps = 2048
    times = np.linspace(0.0, T, steps + 1)
    return grid, cubes, times


def _matched_modes(grid: GridSpec, par: ModelParams, lam: float, eps0: float, r_bases=(4.0, 5.5, 7.0)) -> list[SpectralField]:
    """Single lattice modes at dilation-matched positions m = lam * round(r_base M).

    Exact integer dilation keeps r / lam identical across lam, and the base
    radii sit well above the support floor where the cube-corner weight
    <k> tracks r; the measured flatness then isolates the claimed lam
    uniformity instead of small-index equivalence wobble or lattice
    quantization.  Scale-invariant kernels are lam-free, so positions stay
    fixed there.
    """
    dx = derived_exponents(par, eps0)
    N = grid.points_per_axis
    out = []
    for r_base in r_bases:
        m = int(round(r_base * grid.M))
        if dx.regime != "scale_invariant":
            m *= int(lam)
        m = min(m, N // 2 - 1)
        c = np.zeros(grid.shape, dtype=np.complex128)
        c[(m + N // 2,) + (0,) * (grid.n - 1)] = 1.0
        out.append(SpectralField(grid, c))
    return out


def suite_linear_estimates(seed: int = 0, config: dict | None = None) -> SuiteReport:
    """Uniform-in-time weighted estimates for the free flow and the forced flow."""
    cfg = {
        "pairs": [(1.0, 0.0, 2), (2.0, 1.0, 2), (1.0, 1.0, 2)],
        "lams": [1.0, 2.0, 4.0],
        "gammas": [1.0, 2.0, math.inf],
        "alpha": -1.0,
        "eps0": 0.25,
        "drift_tol": 0.25,
        "n_samples": 1,
    }
    cfg.update(config or {})
    rep = SuiteReport(
        "linear_estimates",
        "Free evolution: the gamma-mixed weighted norm of dt^j v at regularity "
        "s + (2k-2d)/gamma + kbar(1-j) is bounded by lam^{(2d-s)j-(2d-k)/gamma} "
        "times the data norms, uniformly in lam; forced flow with zero data "
        "obeys the matching gamma_1 = 1 bound.",
        seed,
    )
    rng = _suite_rng("linear_estimates", seed)
    alpha = cfg["alpha"]
    for pair_idx, (sig, dlt, p) in enumerate(cfg["pairs"]):
        par = ModelParams(sig, dlt, p, 1)
        dx = derived_exponents(par, cfg["eps0"])
        s = dx.s_min
        kap, kbar = par.kappa, par.kappa_bar
        # one pattern seed per pair, reused across lam so drift isolates the physics
        pattern_seed = int(rng.integers(0, 2**31))

        def data_ensemble(grid, cubes, floor):
            sub = np.random.default_rng(pattern_seed)
            out = []
            for _ in range(cfg["n_samples"]):
                f0 = gaussian_cube_field(grid, cubes, sub, octant_floor=floor)
                f1 = gaussian_cube_field(grid, cubes, sub, octant_floor=floor)
                out.append((f0, zero_field(grid)))
                out.append((zero_field(grid), f1))
                out.append((f0, f1))
            return out

        sup_flat: dict[tuple, dict[float, float]] = {}
        sup_all: dict[tuple, float] = {}

        def free_ratios(lam, v0, v1, times, into_flat):
            u, du = linear_evolve(par, lam, v0, v1, times, cfg["eps0"])
            for j, ser in ((0, u), (1, du)):
                for gamma in cfg["gammas"]:
                    shift = (2 * kap - 2 * dlt) / gamma if not math.isinf(gamma) else 0.0
                    lhs = mixed_norm(ser, MixedNormSpec(gamma, alpha, s + shift + kbar * (1 - j)))
                    gpow = (2 * dlt - kap) / gamma if not math.isinf(gamma) else 0.0
                    rhs = lam ** ((2 * dlt - sig) * j - gpow) * e_norm(
                        v0, NormSpec(alpha, s + kbar + (2 * sig - 2 * kbar) * j)
                    ) + lam ** ((kap - kbar) * (j - 1) - gpow) * e_norm(v1, NormSpec(alpha, s))
                    key = (j, gamma)
                    ratio = lhs / rhs
                    sup_all[key] = max(sup_all.get(key, 0.0), ratio)
                    if into_flat:
                        sup_flat.setdefault(key, {})
                        sup_flat[key][lam] = max(sup_flat[key].get(lam, 0.0), ratio)

        for lam in cfg["lams"]:
            grid, cubes, times = _linear_case_grid(par, lam, cfg["eps0"])
            floor = r_lambda(dx, lam)
            z = zero_field(grid)
            for mode in _matched_modes(grid, par, lam, cfg["eps0"]):
                free_ratios(lam, mode, z, times, into_flat=True)
                free_ratios(lam, z, mode, times, into_flat=True)
            for v0, v1 in data_ensemble(grid, cubes, floor):
                free_ratios(lam, v0, v1, times, into_flat=False)

        for (j, gamma), by_lam in sorted(sup_flat.items(), key=lambda kv: (kv[0][0], kv[0][1])):
            vals = list(by_lam.values())
            drift = max(vals) / min(vals) - 1.0
            gname = "inf" if math.isinf(gamma) else f"{gamma:g}"
            rep.fit(f"C_free[{sig:g},{dlt:g}][j={j},gamma={gname}]", sup_all[(j, gamma)])
            rep.add(
                f"free flow sigma={sig:g} delta={dlt:g} j={j} gamma={gname}",
                math.isfinite(sup_all[(j, gamma)]) and drift <= cfg["drift_tol"],
                drift=drift,
                fitted=sup_all[(j, gamma)],
                per_lam={f"{lam:g}": v for lam, v in by_lam.items()},
            )

        # forced flow, zero data, gamma_1 = 1, matched single-mode forcings
        from .spectral import radial_mesh

        by_lam_forced: dict[int, dict[float, float]] = {0: {}, 1: {}}
        fitted_forced = {0: 0.0, 1: 0.0}
        for lam in cfg["lams"]:
            grid, cubes, times = _linear_case_grid(par, lam, cfg["eps0"])
            floor = r_lambda(dx, lam)
            op = _DuhamelOperator(par, lam, grid, times)
            gamma = float(p)
            rmesh = radial_mesh(grid)

            def forced_ratios(f: SpectralField, beta: float) -> dict[int, float]:
                profile = np.exp(-beta * times).reshape((-1,) + (1,) * grid.n)
                forcing = TimeSeries(grid, times, profile * f.coeffs[None])
                res = op.convolve(forcing.coeffs, derivative=True)
                g_norm = mixed_norm(forcing, MixedNormSpec(1.0, alpha, s))
                out = {}
                for j in (0, 1):
                    ser = TimeSeries(grid, times, res[j])
                    lhs = mixed_norm(
                        ser,
                        MixedNormSpec(gamma, alpha, s + (2 * kap - 2 * dlt) / gamma + kbar * (1 - j)),
                    )
                    rhs = lam ** ((kap - kbar) * (j - 1) - (2 * dlt - kap) / gamma) * g_norm
                    out[j] = lhs / rhs
                return out

            for mode in _matched_modes(grid, par, lam, cfg["eps0"]):
                r_mode = float(rmesh[np.nonzero(mode.coeffs)][0])
                beta = 0.5 * lam ** (2 * dlt - kap) * r_mode ** (2 * kap - 2 * dlt)
                for j, val in forced_ratios(mode, beta).items():
                    by_lam_forced[j][lam] = max(by_lam_forced[j].get(lam, 0.0), val)
                    fitted_forced[j] = max(fitted_forced[j], val)
            sub = np.random.default_rng(pattern_seed)
            fr = gaussian_cube_field(grid, cubes, sub, octant_floor=floor)
            beta_r = 0.5 * lam ** (2 * dlt - kap) * max(floor, 1.0) ** (2 * kap - 2 * dlt)
            for j, val in forced_ratios(fr, beta_r).items():
                fitted_forced[j] = max(fitted_forced[j], val)
        for j in (0, 1):
            vals = list(by_lam_forced[j].values())
            drift = max(vals) / min(vals) - 1.0
            rep.fit(f"C_forced[{sig:g},{dlt:g}][j={j}]", fitted_forced[j])
            rep.add(
                f"forced flow sigma={sig:g} delta={dlt:g} j={j}",
                math.isfinite(fitted_forced[j]) and drift <= cfg["drift_tol"],
                drift=drift,
                fitted=fitted_forced[j],
                per_lam={f"{lam:g}": v for lam, v in by_lam_forced[j].items()},
            )

    # interpolation sanity: per-cube L^p between L^1 and L^inf
    par = ModelParams(*[c for c in (1.0, 0.0)], 2, 1)
    grid, cubes, times = _linear_case_grid(par, 1.0, cfg["eps0"])
    dxp = derived_exponents(par, cfg["eps0"])
    v0 = gaussian_cube_field(grid, cubes, rng, octant_floor=r_lambda(dxp, 1.0))
    u, _ = linear_evolve(par, 1.0, v0, zero_field(grid), times, cfg["eps0"])
    from .norms import _per_cube_mass_stack

    mass = _per_cube_mass_stack(grid, u.coeffs)
    active = mass.max(axis=0) > 1e-12 * mass.max()
    l1 = np.trapezoid(mass, times, axis=0)[active]
    linf = mass.max(axis=0)[active]
    lp = np.trapezoid(mass**2.0, times, axis=0)[active] ** 0.5
    holder = lp / (l1**0.5 * linf**0.5)
    rep.add(
        "per-cube time-norm interpolation",
        bool(holder.max() <= 1.02),
        max_ratio=float(holder.max()),
    )

    # negative control: data mass below the support radius is rejected
    par = ModelParams(1.0, 1.0, 2, 1)
    grid = GridSpec(1, 8, 32)
    bad = gaussian_cube_field(grid, [(0,)], rng, octant_floor=0.0)
    try:
        linear_evolve(par, 2.0, bad, zero_field(grid), np.linspace(0, 1, 9), cfg["eps0"])
        rep.add("support precondition", False, note="no error raised")
    except SupportError:
        rep.add("support precondition", True, expected_failure=True)
    return rep


# -- low-frequency integrability ---------------------------------------------


def _lf_time_norm(par: ModelParams, a0: float, a1: float, n: int, m1: float, gamma: float, c: float, T: float) -> float:
    """(int_0^T ((1+t)^{a0} I(t)^{1/m1})^gamma dt)^{1/gamma} with the radial inner integral.

    I(t) = int_0^1 r^{n-1-a1 m1} e^{-c m1 r^w t} dr is evaluated through the
    substitution r = eta t^{-1/w}, which keeps the integrand resolved at
    arbitrarily large t.
    """
    w = 2 * par.kappa_bar - 2 * par.delta
    q = n - a1 * m1

    def inner(t: float) -> float:
        if t == 0.0:
            return 1.0 / q
        eta_hi = min(t ** (1.0 / w), (700.0 / (c * m1)) ** (1.0 / w))
        val, _ = quad(lambda e: e ** (q - 1) * math.exp(-c * m1 * e**w), 0.0, eta_hi, limit=200)
        return t ** (-q / w) * val

    ts = np.concatenate([[0.0], np.geomspace(1e-3, T, 600)])
    vals = np.array([((1.0 + t) ** a0 * inner(t) ** (1.0 / m1)) ** gamma for t in ts])
    return float(np.trapezoid(vals, ts) ** (1.0 / gamma))


def suite_low_frequency(seed: int = 0, config: dict | None = None) -> SuiteReport:
    """Small-frequency kernel majorants and the weighted time-frequency integrability test."""
    cfg = {
        "c": 0.5,
        "T": 4096.0,
        "stable_tol": 0.01,
        "divergence_factor": 10.0,
        "satisfying": [
            # (sigma, delta, a0, a1, n, m1, gamma)
            (1.0, 0.0, 0.0, 0.0, 3, 2.0, 2.0),
            (1.0, 0.0, 0.0, 0.5, 2, 2.0, 8.0),
            (1.0, 1.0, 0.0, 0.0, 3, 2.0, 2.0),
            (2.0, 1.0, 0.0, 0.0, 3, 2.0, 2.0),
            (1.0, 0.0, 0.25, 0.0, 3, 1.0, 2.0),
        ],
        "violating": [
            (1.0, 0.0, 0.0, 0.0, 1, 2.0, 1.0),
            (1.0, 0.0, 0.0, 0.0, 3, 2.0, 1.0),
            (1.0, 1.0, 0.5, 0.0, 2, 2.0, 2.0),
        ],
    }
    cfg.update(config or {})
    rep = SuiteReport(
        "low_frequency",
        "For |xi| <= eps2 the kernels obey |K0| <= C e^{-c|xi|^{2kbar-2d} t} and "
        "|K1| <= C min(|xi|^{-k}, t) e^{-...}; the weighted norm "
        "||(1+t)^{a0} |xi|^{-a1} e^{-c |xi|^{2kbar-2d} t}|| over the unit cube is "
        "finite iff n - a1 m1 > 0 and (a0 - (n - a1 m1)/((2kbar-2d) m1)) gamma < -1.",
        seed,
    )

    for tup in cfg["satisfying"]:
        sig, dlt, a0, a1, n, m1, gamma = tup
        par = ModelParams(sig, dlt, 2, min(n, 3))
        cond1 = n - a1 * m1
        cond2 = (a0 - cond1 / ((2 * par.kappa_bar - 2 * par.delta) * m1)) * gamma
        v1 = _lf_time_norm(par, a0, a1, n, m1, gamma, cfg["c"], cfg["T"])
        v2 = _lf_time_norm(par, a0, a1, n, m1, gamma, cfg["c"], 2 * cfg["T"])
        change = abs(v2 - v1) / v1
        rep.add(
            f"integrable tuple {tup}",
            cond1 > 0 and cond2 < -1 and change <= cfg["stable_tol"],
            value=v1,
            doubled=v2,
            rel_change=change,
            conditions=[cond1, cond2],
        )
    for tup in cfg["violating"]:
        sig, dlt, a0, a1, n, m1, gamma = tup
        par = ModelParams(sig, dlt, 2, min(n, 3))
        v1 = _lf_time_norm(par, a0, a1, n, m1, gamma, cfg["c"], cfg["T"])
        v2 = _lf_time_norm(par, a0, a1, n, m1, gamma, cfg["c"], 32 * cfg["T"])
        rep.add(
            f"divergent tuple {tup}",
            v2 / v1 >= 1.10,
            value=v1,
            extended=v2,
            growth=v2 / v1,
            expected_failure=True,
        )

    # radial precondition n - a1 m1 <= 0: integral diverges at the origin
    par = ModelParams(1.0, 0.0, 2, 1)
    tails = []
    for lo in (1e-2, 1e-4, 1e-6):
        val, _ = quad(lambda r: r ** (1 - 1 - 1.0 * 2), lo, 1.0, limit=200)
        tails.append(val)
    rep.add(
        "origin divergence flag (n - a1 m1 <= 0)",
        tails[-1] / tails[0] >= cfg["divergence_factor"],
        refinements=tails,
        expected_failure=True,
    )

    # low-frequency kernel majorants, fitted constants
    for sig, dlt in ((1.0, 0.0), (1.0, 1.0)):
        par = ModelParams(sig, dlt, 2, 1)
        e2 = eps2(par)
        rs = np.geomspace(e2 / 100, e2, 12)
        ts = np.concatenate([[0.0], np.geomspace(1e-2, 100.0, 60)])
        worst = {"K0": 0.0, "K1": 0.0}
        for r in rs:
            for t in ts:
                for which in ("K0", "K1"):
                    worst[which] = max(
                        worst[which], low_frequency_bound_ratio(par, float(r), float(t), which)
                    )
        for which, v in worst.items():
            rep.fit(f"C_low[{sig:g},{dlt:g}][{which}]", v)
        rep.add(
            f"low-frequency kernel bounds sigma={sig:g} delta={dlt:g}",
            all(math.isfinite(v) for v in worst.values()),
            fitted=worst,
        )
    # t-branch of the K1 envelope specifically
    parz = ModelParams(1.0, 0.0, 2, 1)
    vt = low_frequency_bound_ratio(parz, 0.1, 10.0, "K1", branch="time")
    rep.add("K1 time-branch envelope", math.isfinite(vt), ratio=vt)

    # negative control: above eps2 the claim is not made
    try:
        low_frequency_bound_ratio(parz, 10.0, 1.0, "K0")
        rep.add("eps2 precondition", False, note="no error raised")
    except PreconditionError:
        rep.add("eps2 precondition", True, expected_failure=True)
    return rep


# -- product estimate ---------------------------------------------------------


def _random_octant_series(grid: GridSpec, rng: np.random.Generator, max_cube: int, n_cubes: int = 2) -> TimeSeries:
    lo, hi = grid.cube_range()
    top = min(max_cube, hi - 1)
    picks = rng.integers(0, top + 1, size=(n_cubes, grid.n))
    f = gaussian_cube_field(grid, [tuple(int(x) for x in row) for row in picks], rng, octant_floor=0.0)
    return TimeSeries(grid, np.array([0.0, 1.0]), np.stack([f.coeffs, f.coeffs]))


def suite_product_estimate(seed: int = 0, config: dict | None = None) -> SuiteReport:
    """p-linear product bound, cube orthogonality window, embedding ratios, index sums."""
    cfg = {
        "n_instances": 100,
        "alpha": -1.0,
        "beta": 1.0,
        "K": 16,
        "refine_M": (4, 8),
        "refine_factor": 2.0,
        "orth_tuples": 50,
        "sum_box": 128,
    }
    cfg.update(config or {})
    rep = SuiteReport(
        "product_estimate",
        "For octant-supported factors the gamma=1 weighted norm of a p-fold "
        "product is bounded by the product of gamma=p norms at regularity "
        "s + beta once s >= n/2 - p/(p-1) beta; cube products vanish outside "
        "the |k - sum k_j|_inf <= p+1 window; the weighted index sum of the "
        "estimate is box-stable exactly in the admissible range.",
        seed,
    )
    rng = _suite_rng("product_estimate", seed)
    par = ModelParams(1.0, 0.0, 2, 1)
    s_thr = par.n / 2 - par.p / (par.p - 1) * cfg["beta"]

    maxima = {}
    seeds = [int(rng.integers(0, 2**31)) for _ in range(cfg["n_instances"])]
    for M in cfg["refine_M"]:
        grid = GridSpec(1, M, cfg["K"])
        worst = 0.0
        for sd in seeds:
            sub = np.random.default_rng(sd)
            us = [_random_octant_series(grid, sub, max_cube=5) for _ in range(par.p)]
            _, _, ratio = product_estimate_ratio(us, cfg["alpha"], s_thr, cfg["beta"])
            worst = max(worst, ratio)
        maxima[M] = worst
        rep.fit(f"C_product[M={M}]", worst)
    m0, m1 = cfg["refine_M"]
    change = maxima[m1] / maxima[m0]
    rep.add(
        "ratio stable under grid refinement",
        math.isfinite(maxima[m1]) and (1 / cfg["refine_factor"] <= change <= cfg["refine_factor"]),
        maxima={str(k): v for k, v in maxima.items()},
        change=change,
    )

    # beta sweep at the matching thresholds
    for beta in (0.0, 1.0, 2.0):
        grid = GridSpec(1, 4, cfg["K"])
        s_b = par.n / 2 - par.p / (par.p - 1) * beta
        worst = 0.0
        for _ in range(10):
            us = [_random_octant_series(grid, rng, max_cube=5) for _ in range(par.p)]
            _, _, ratio = product_estimate_ratio(us, cfg["alpha"], s_b, beta)
            worst = max(worst, ratio)
        rep.add(f"threshold ratio beta={beta:g}", math.isfinite(worst), max_ratio=worst)

    # zero factor short-circuits to zero
    grid = GridSpec(1, 4, cfg["K"])
    us = [_random_octant_series(grid, rng, max_cube=5), TimeSeries(grid, [0.0, 1.0], np.zeros((2,) + grid.shape))]
    lhs, rhs, ratio = product_estimate_ratio(us, cfg["alpha"], s_thr, cfg["beta"])
    rep.add("zero factor", lhs == 0.0 and ratio == 0.0, lhs=lhs, rhs=rhs, ratio=ratio)

    # negative control: a non-octant factor violates the precondition
    c = np.zeros(grid.shape, complex)
    c[grid.points_per_axis // 2 - 3] = 1.0
    bad = TimeSeries(grid, [0.0, 1.0], np.stack([c, c]))
    try:
        product_estimate_ratio([us[0], bad], cfg["alpha"], s_thr, cfg["beta"])
        rep.add("octant precondition", False, note="no error raised")
    except SupportError:
        rep.add("octant precondition", True, expected_failure=True)

    # orthogonality window of cube products
    configs = [(1, 2), (1, 3), (2, 2), (2, 3)]
    per = max(1, cfg["orth_tuples"] // len(configs))
    window_ok = True
    inside_nonzero = 0
    worst_out = 0.0
    for n, p in configs:
        grid_o = GridSpec(n, 4, 16 if n == 1 else 8)
        lo, hi = grid_o.cube_range()
        for _ in range(per):
            ks = [tuple(int(x) for x in rng.integers(0, 2, size=n)) for _ in range(p)]
            fields = [gaussian_cube_field(grid_o, [k], rng, octant_floor=0.0) for k in ks]
            prod = pointwise_product(fields)
            mass = per_cube_l2(prod)
            scale = float(np.prod([f.l2() for f in fields]))
            ksum = np.array(ks).sum(axis=0)
            from .spectral import cube_index_vectors

            kvec = cube_index_vectors(grid_o)
            dist = np.abs(kvec - ksum.reshape((n,) + (1,) * n)).max(axis=0)
            outside = mass[dist > p + 1]
            inside = mass[dist <= p + 1]
            if outside.size and outside.max() > 1e-12 * scale:
                window_ok = False
                worst_out = max(worst_out, float(outside.max() / scale))
            if inside.max() > 1e-12 * scale:
                inside_nonzero += 1
    rep.add(
        "orthogonality window",
        window_ok and inside_nonzero > 0,
        inside_nonzero=inside_nonzero,
        worst_outside=worst_out,
    )

    # embedding between Lebesgue norms on a cube piece (fitted, uniform over k)
    grid_b = GridSpec(1, 4, 16)
    ratios = []
    for k in range(0, 6):
        f = gaussian_cube_field(grid_b, [(k,)], rng, octant_floor=0.0)
        ratios.append(bernstein_ratio(f, (k,), 2.0, math.inf))
        unit = bernstein_ratio(f, (k,), 2.0, 2.0)
        if abs(unit - 1.0) > 1e-12:
            rep.add("embedding m=q identity", False, value=unit)
            break
    else:
        rep.add("embedding m=q identity", True)
    rep.fit("C_embed[2,inf]", max(ratios))
    rep.add(
        "embedding fitted constant uniform over cubes",
        max(ratios) / min(ratios) - 1.0 <= 0.5,
        min_ratio=min(ratios),
        max_ratio=max(ratios),
    )

    # weighted index sum: five regularity cases, then a divergent control
    box = cfg["sum_box"]
    for s in (-1.5, -0.5, 0.0, 0.5, 1.5):
        v1 = product_weight_sum(1, 2, s, 1.0, box)
        v2 = product_weight_sum(1, 2, s, 1.0, 2 * box)
        change = abs(v2 - v1) / v1
        rep.add(f"index sum stable s={s:g}", change <= 0.01, value=v2, rel_change=change)
    d1 = product_weight_sum(1, 2, -0.5, 0.0, 64)
    d2 = product_weight_sum(1, 2, -0.5, 0.0, 512)
    rep.add(
        "index sum divergence below threshold",
        d2 / d1 > 10.0,
        growth=d2 / d1,
        expected_failure=True,
    )
    return rep


# -- fixed point ---------------------------------------------------------------


def _desk_config(par: ModelParams, lam: float, eps0: float, steps: int = 2048) -> PicardConfig:
    c = default_decay_c(par)
    T = default_T_final(par, lam, c, eps0=eps0)
    return PicardConfig(
        T_final=min(T, 160.0),
        steps=steps,
        max_iter=25,
        contraction_tol=1e-7,
        residual_tol=1e-6,
        alpha=-1.0,
    )


def _desk_data(par: ModelParams, lam: float, grid: GridSpec, rng, eps0: float):
    dx = derived_exponents(par, eps0)
    floor = r_lambda(dx, lam)
    lo, hi = grid.cube_range()
    k_lo = max(0, math.ceil(floor - 1e-9))
    cubes = [tuple([k] * grid.n) for k in (k_lo, k_lo + 1)]
    u0 = gaussian_cube_field(grid, cubes, rng, octant_floor=floor)
    u1 = gaussian_cube_field(grid, cubes, rng, octant_floor=floor)
    return u0, u1


def run_desk_case(
    par: ModelParams,
    lam: float,
    grid: GridSpec,
    rng,
    eps0: float = 0.25,
    steps: int = 2048,
    budget_fraction: float = 0.5,
):
    """One budgeted fixed-point run; returns (record, config)."""
    cfg = _desk_config(par, lam, eps0, steps)
    u0, u1 = _desk_data(par, lam, grid, rng, eps0)
    u0s, u1s, C0, C1 = fit_data_to_budget(par, lam, u0, u1, cfg, eps0, fraction=budget_fraction)
    cfg = replace(cfg, c0=C0, c1=C1)
    rec = picard_solve(par, lam, u0s, u1s, cfg, eps0)
    return rec, cfg


def suite_fixed_point(seed: int = 0, config: dict | None = None) -> SuiteReport:
    """Contractive successive substitution at desk scale across the damping regimes."""
    cfg = {
        # budget fractions keep the weighted amplitude below ~2^{-xi_data}:
        # above that the rough fixed point's raw spectrum grows toward the
        # grid edge and transform roundoff floods the weighted metric
        "cases": [
            # (sigma, delta, p, n, M, K, steps, fraction)
            (1.0, 0.0, 2, 1, 4, 64, 2048, 0.5),
            (2.0, 1.0, 2, 1, 4, 128, 2048, 0.25),
            (1.0, 1.0, 2, 1, 4, 128, 2048, 0.0625),
            (1.0, 0.0, 3, 1, 4, 64, 2048, 0.25),
            (1.0, 0.0, 2, 2, 2, 32, 512, 0.04),
        ],
        "lams_flat": [1.0, 2.0, 4.0],
        "flat_K": {1.0: 64, 2.0: 128, 4.0: 128},
        "flat_fraction": 0.125,
        "eps0": 0.25,
        "flat_tol": 0.25,
    }
    cfg.update(config or {})
    rep = SuiteReport(
        "fixed_point",
        "With the linear part under half the admissible ball radius, successive "
        "substitution for the mild equation contracts with factor <= 1/2 from the "
        "second iteration, converges with re-substitution residual below "
        "tolerance, preserves the octant support set exactly, and its weighted "
        "solution norms stay within the lam-weighted budget.",
        seed,
    )
    rng = _suite_rng("fixed_point", seed)

    for sig, dlt, p, n, M, K, steps, fraction in cfg["cases"]:
        par = ModelParams(sig, dlt, p, n)
        grid = GridSpec(n, M, K)
        name = f"({sig:g},{dlt:g},{p}) n={n}"
        try:
            rec, _ = run_desk_case(par, 1.0, grid, rng, cfg["eps0"], steps, budget_fraction=fraction)
        except Exception as exc:  # noqa: BLE001 - reported, not swallowed
            rep.add(f"desk run {name}", False, error=f"{type(exc).__name__}: {exc}")
            continue
        factors_ok = all(f <= 0.5 for f in rec.contraction_factors)
        from .spectral import octant_violation

        floor = r_lambda(derived_exponents(par, cfg["eps0"]), 1.0)
        support_exact = max(
            octant_violation(rec.series.field(i), floor)
            for i in range(0, rec.series.n_times, max(1, rec.series.n_times // 8))
        )
        rep.add(
            f"desk run {name}",
            rec.converged
            and rec.iterations <= 20
            and factors_ok
            and rec.residual <= 1e-6
            and support_exact == 0.0
            and rec.support_leakage <= 1e-12,
            iterations=rec.iterations,
            factors=rec.contraction_factors,
            residual=rec.residual,
            residual_max=rec.residual_max,
            support_leakage=rec.support_leakage,
            support_exact=support_exact,
            shell_fraction=rec.shell_fraction,
            nu=rec.nu,
            B_norm=rec.B_norm,
        )

    # zero data: trivial solution in one pass
    par = ModelParams(1.0, 0.0, 2, 1)
    grid = GridSpec(1, 4, 64)
    z = zero_field(grid)
    rec = picard_solve(par, 1.0, z, z, _desk_config(par, 1.0, cfg["eps0"], 256))
    rep.add(
        "zero data",
        rec.converged and rec.X_norm == 0.0 and rec.iterations == 1,
        iterations=rec.iterations,
        X_norm=rec.X_norm,
    )

    # lam-flatness of the weighted solution norms; the lattice scales with lam
    # because rescaled data sit at frequency ~ lam R and the power cascade
    # needs the same relative headroom
    par = ModelParams(1.0, 0.0, 2, 1)
    dx = derived_exponents(par, cfg["eps0"])
    fits = {}
    for lam in cfg["lams_flat"]:
        grid_flat = GridSpec(1, 4, cfg["flat_K"][lam])
        rec, _ = run_desk_case(
            par, lam, grid_flat, rng, cfg["eps0"], 2048, budget_fraction=cfg["flat_fraction"]
        )
        reg = regularity_norms(rec, par, lam, -1.0, dx.s_min)
        fits[lam] = reg["fitted_C2"]
    vals = list(fits.values())
    drift = max(vals) / min(vals) - 1.0
    rep.fit("C2", max(vals))
    rep.add(
        "solution norms lam-flat",
        drift <= cfg["flat_tol"],
        drift=drift,
        per_lam={f"{k:g}": v for k, v in fits.items()},
    )

    # negative control 1: data over budget trips the smallness check
    u0, u1 = _desk_data(par, 1.0, grid, rng, cfg["eps0"])
    base_cfg = _desk_config(par, 1.0, cfg["eps0"], 512)
    u0s, u1s, C0, C1 = fit_data_to_budget(par, 1.0, u0, u1, base_cfg, cfg["eps0"], fraction=1.5)
    try:
        picard_solve(par, 1.0, u0s, u1s, replace(base_cfg, c0=C0, c1=C1), cfg["eps0"])
        rep.add("oversized data rejected", False, note="no error raised")
    except SmallnessError as exc:
        rep.add("oversized data rejected", True, expected_failure=True, measured=exc.measured, budget=exc.budget)

    # negative control 2: inflating the ball budget past the certified bound
    # must eventually break contraction (or trip a monitor)
    breach = None
    level = 0
    for k in range(1, 6):
        level = 2**k
        infl = replace(
            base_cfg,
            c0=C0 / level ** (par.p - 1),
            c1=C1 / level ** (par.p - 1),
            max_iter=12,
        )
        u0b, u1b, _, _ = fit_data_to_budget(par, 1.0, u0, u1, infl, cfg["eps0"], fraction=0.5)
        try:
            rec = picard_solve(par, 1.0, u0b, u1b, infl, cfg["eps0"])
        except (DivergenceError, SpectralOverflowError) as exc:
            breach = type(exc).__name__
            break
        if rec.contraction_factors and max(rec.contraction_factors) > 0.5:
            breach = "contraction factor above 1/2"
            break
    rep.add(
        "inflated budget breaks certification",
        breach is not None,
        breach=breach,
        inflation_level=level,
        expected_failure=True,
    )
    return rep


# -- large data end to end ------------------------------------------------------


def fit_pipeline_constants(
    par: ModelParams,
    grid: GridSpec,
    rng,
    alpha: float,
    s: float,
    eps0: float = 0.25,
    safety: float = 1.25,
) -> dict:
    """Fitted constants for the scale-selection inequality.

    C: linear-estimate constant at gamma = p (maximized over lam in {1,2,4});
    C0/C1: contraction constants; C_tilde1: dilation bound constant over
    lam in {2,3,4}.  A safety multiplier keeps the budget conservative.
    """
    dx = derived_exponents(par, eps0)
    kap, kbar = par.kappa, par.kappa_bar
    gamma = float(par.p)
    C = 0.0
    for lam in (1.0, 2.0, 4.0):
        g2, cubes, times = _linear_case_grid(par, lam, eps0)
        floor = r_lambda(dx, lam)
        v0 = gaussian_cube_field(g2, cubes, rng, octant_floor=floor)
        v1 = gaussian_cube_field(g2, cubes, rng, octant_floor=floor)
        u, _ = linear_evolve(par, lam, v0, v1, times, eps0)
        lhs = lam ** weight_exponent(par) * mixed_norm(u, solution_space_spec(par, alpha, s))
        rhs = data_pair_norm(v0, v1, alpha, s, kbar)
        C = max(C, lhs / rhs)
    # contraction constants on the pipeline grid at lam = 1
    cfg = _desk_config(par, 1.0, eps0, 1024)
    floor1 = r_lambda(dx, 1.0)
    k_lo = max(0, math.ceil(dx.R - 1e-9))
    cubes = [tuple([k] * grid.n) for k in (k_lo, k_lo + 1)]
    u0 = gaussian_cube_field(grid, cubes, rng, octant_floor=floor1)
    u1 = gaussian_cube_field(grid, cubes, rng, octant_floor=floor1)
    C0, C1 = estimate_contraction_constants(
        par, 1.0, u0, u1, time_grid(cfg), alpha, s, seed=int(rng.integers(0, 2**31)), eps0=eps0
    )
    # dilation bound constant on probe data away from the origin
    Ct1 = 0.0
    probe0 = gaussian_cube_field(grid, cubes, rng, octant_floor=dx.R)
    probe1 = gaussian_cube_field(grid, cubes, rng, octant_floor=dx.R)
    base = data_pair_norm(probe0, probe1, alpha, s, kbar)
    for lam in (2, 3, 4):
        s0, s1 = scale_data(probe0, probe1, lam, par)
        scaled = data_pair_norm(s0, s1, alpha, s, kbar)
        power = lam ** (2 * kap / (par.p - 1) - par.n / 2 + max(s + kbar, kap))
        Ct1 = max(Ct1, scaled / (power * 2.0 ** (alpha * (lam - 1) * dx.R) * base))
    return {"C": safety * C, "C0": safety * C0, "C1": safety * C1, "C_tilde1": safety * Ct1}


def suite_large_data(seed: int = 0, config: dict | None = None) -> SuiteReport:
    """Oversized data driven under budget by exact dilation, solved, and descaled."""
    cfg = {
        "alpha": -1.0,
        "eps0": 0.25,
        "oversize": 10.0,
        "steps": 1024,
        "M": 4,
        "K": 64,
        "K_solve": 128,
        # extra multiplier on the contraction constants feeding the budget:
        # large selected scales force genuinely tiny rescaled data (exactly
        # the regime the scaling argument targets), keeping the raw spectrum
        # of the rough solution within float fidelity
        "budget_safety": 4096.0,
        "refine": (4, 8),
    }
    cfg.update(config or {})
    rep = SuiteReport(
        "large_data",
        "For alpha < 0 and octant data supported above R, an integer scale lam "
        "exists so the dilated data fall under the fixed-point budget; the "
        "rescaled run solves and contracts; descaling returns a solution of the "
        "original equation at the reduced radius lam * alpha, with the dilation "
        "norm bounds holding at fitted constants.",
        seed,
    )
    rng = _suite_rng("large_data", seed)
    par = ModelParams(1.0, 0.0, 2, 1)
    dx = derived_exponents(par, cfg["eps0"])
    alpha, s = cfg["alpha"], dx.s_min
    grid = GridSpec(1, cfg["M"], cfg["K"])
    # the solve lattice is sized for the selected scale: rescaled data sit at
    # frequency ~ lam R with the power cascade above them
    grid_solve = GridSpec(1, cfg["M"], cfg["K_solve"])

    consts = fit_pipeline_constants(par, grid, rng, alpha, s, cfg["eps0"])
    consts["C0"] *= cfg["budget_safety"]
    consts["C1"] *= cfg["budget_safety"]
    rep.fit("C", consts["C"])
    rep.fit("C0", consts["C0"])
    rep.fit("C1", consts["C1"])
    rep.fit("C_tilde1", consts["C_tilde1"])

    # raw data in a thin shell just above the support radius (the selected
    # scale multiplies data frequencies, so a low ceiling keeps lam * xi_top
    # within float fidelity for alpha = -1), then normalized to 10x the
    # lam=2 admissible size
    def thin_shell_field() -> SpectralField:
        c = np.zeros(grid_solve.shape, dtype=np.complex128)
        N = grid_solve.points_per_axis
        for m in (3, 4):
            c[m + N // 2] = rng.standard_normal() + 1j * rng.standard_normal()
        return SpectralField(grid_solve, c, octant_floor=dx.R)

    raw0 = thin_shell_field()
    raw1 = thin_shell_field()
    norm_raw = data_pair_norm(raw0, raw1, alpha, s, dx.kappa_bar)
    d_admissible_2 = norm_raw * selection_margin(2, norm_raw, par, alpha, s, consts, cfg["eps0"])
    target = cfg["oversize"] * d_admissible_2
    u0 = raw0 * (target / norm_raw)
    u1 = raw1 * (target / norm_raw)

    try:
        plan = build_scaling_plan(u0, u1, par, alpha, s, consts, cfg["eps0"])
    except Exception as exc:  # noqa: BLE001
        rep.add("scale selection", False, error=f"{type(exc).__name__}: {exc}")
        return rep
    rep.add(
        "scale selection",
        plan.lam >= 2 and plan.margin >= 1.0,
        lam=plan.lam,
        margin=plan.margin,
        original_norm=plan.original_norm,
        epsilon=plan.epsilon,
        nu=plan.nu,
    )
    scaled_norm = data_pair_norm(plan.scaled_u0, plan.scaled_u1, alpha, s, dx.kappa_bar)
    rep.add(
        "rescaled data under budget",
        scaled_norm <= plan.epsilon * (1 + 1e-9),
        scaled_norm=scaled_norm,
        epsilon=plan.epsilon,
    )

    run_cfg = _desk_config(par, plan.lam, cfg["eps0"], cfg["steps"])
    run_cfg = replace(run_cfg, c0=consts["C0"], c1=consts["C1"], nu_fraction=1.0)
    try:
        rec = picard_solve(par, plan.lam, plan.scaled_u0, plan.scaled_u1, run_cfg, cfg["eps0"])
        from .spectral import octant_violation

        support_exact = max(
            octant_violation(rec.series.field(i), plan.R_lambda)
            for i in range(0, rec.series.n_times, max(1, rec.series.n_times // 8))
        )
        rep.add(
            "rescaled solve",
            rec.converged
            and rec.iterations <= 20
            and all(f <= 0.5 for f in rec.contraction_factors)
            and rec.residual <= 1e-6
            and support_exact == 0.0,
            iterations=rec.iterations,
            residual=rec.residual,
            factors=rec.contraction_factors,
            support_exact=support_exact,
            B_norm=rec.B_norm,
            nu=rec.nu,
        )
    except Exception as exc:  # noqa: BLE001
        rep.add("rescaled solve", False, error=f"{type(exc).__name__}: {exc}")
        return rep

    desc = descale_solution(rec, plan.lam, par, alpha, cfg["eps0"])
    rep.add(
        "descaled original-equation residual",
        desc["residual"] <= 1e-5 and desc["alpha0"] == plan.lam * alpha,
        residual=desc["residual"],
        alpha0=desc["alpha0"],
        l1_norm=desc["l1_norm"],
        linf_norm=desc["linf_norm"],
    )

    # small data degenerate gracefully to the minimal admissible scale
    tiny0 = raw0 * (1e-4 * d_admissible_2 / norm_raw)
    tiny1 = raw1 * (1e-4 * d_admissible_2 / norm_raw)
    plan_small = build_scaling_plan(tiny0, tiny1, par, alpha, s, consts, cfg["eps0"])
    rep.add("small data degenerates", plan_small.lam == 2, lam=plan_small.lam)

    # dilation norm bound: fitted constant stable under lam and refinement
    fits = {}
    for M in cfg["refine"]:
        gM = GridSpec(1, M, cfg["K"])
        phi = gaussian_cube_field(gM, [(1,), (2,)], rng, octant_floor=1.0)
        worst = 0.0
        for lam in (2, 3, 4):
            worst = max(worst, scaling_bound_ratio(phi, lam, alpha, 0.0, 1.0))
        ident = scaling_bound_ratio(phi, 1, alpha, 0.0, 1.0)
        fits[M] = worst
        rep.add(
            f"dilation bound M={M}",
            math.isfinite(worst) and abs(ident - 1.0) <= 1e-12,
            fitted=worst,
            identity=ident,
        )
    rep.fit("C_dilation", max(fits.values()))
    rep.add(
        "dilation constant refinement-stable",
        max(fits.values()) / min(fits.values()) <= 2.0,
        fits={str(k): v for k, v in fits.items()},
    )
    # s > 0 branch of the dilation bound exponent
    gM = GridSpec(1, 4, cfg["K"])
    phi = gaussian_cube_field(gM, [(1,)], rng, octant_floor=1.0)
    branch = [scaling_bound_ratio(phi, lam, alpha, 2.0, 1.0) for lam in (2, 3, 4)]
    rep.add(
        "dilation bound s>0 branch",
        all(math.isfinite(v) and v <= 1.5 for v in branch),
        ratios=branch,
    )

    # time-dilation norm control at the reduced radius, on a probe series
    # whose support is divisible by both test scales
    kap, kbar, dlt = par.kappa, par.kappa_bar, par.delta
    beta1 = s + 2 * kap - 2 * dlt + kbar
    betainf = s + kbar
    probe_grid = GridSpec(1, 4, 64)
    pc = np.zeros(probe_grid.shape, dtype=np.complex128)
    Np = probe_grid.points_per_axis
    for m in (24, 48):  # multiples of 6: undilation by 2 and 3 both exact
        pc[m + Np // 2] = rng.standard_normal() + 1j * rng.standard_normal()
    ptimes = np.linspace(0.0, 40.0, 501)
    probe = TimeSeries(probe_grid, ptimes, np.exp(-0.5 * ptimes)[:, None] * pc[None, :])
    c_fits = {}
    for lam in (2, 3):
        out = time_dilation_bound_ratio(probe, lam, par, alpha, 0.0, beta1, betainf, c_fit=0.0)
        c_fits[lam] = max(
            math.log2(out[key]) / ((-alpha) * lam) for key in ("l1", "linf") if out[key] > 0
        )
    c_fit = max(c_fits.values())
    rep.fit("c_time_dilation", c_fit)
    checks = []
    for lam in (2, 3):
        out = time_dilation_bound_ratio(probe, lam, par, alpha, 0.0, beta1, betainf, c_fit=c_fit)
        checks.extend([out["l1"], out["linf"]])
    rep.add(
        "time-dilation bound at fitted constant",
        all(v <= 1.0 + 1e-9 for v in checks)
        and max(c_fits.values()) <= 2.0 * max(min(c_fits.values()), 1e-9),
        ratios=checks,
        c_per_lam={str(k): v for k, v in c_fits.items()},
        c_fit=c_fit,
    )

    # negative control: the selection needs alpha strictly negative
    try:
        select_lambda(1.0, par, 0.0, s, consts, cfg["eps0"])
        rep.add("alpha=0 rejected", False, note="no error raised")
    except PreconditionError:
        rep.add("alpha=0 rejected", True, expected_failure=True)
    return rep


# -- registry -----------------------------------------------------------------

SUITES = {
    "kernel_bounds": suite_kernel_bounds,
    "linear_estimates": suite_linear_estimates,
    "low_frequency": suite_low_frequency,
    "product_estimate": suite_product_estimate,
    "fixed_point": suite_fixed_point,
    "large_data": suite_large_data,
}


def run_suites(names, seed: int = 0, workers: int = 4, configs: dict | None = None) -> list[SuiteReport]:
    """Run suites on a bounded worker pool; reports come back in registry order."""
    names = list(names)
    for name in names:
        if name not in SUITES:
            raise KeyError(f"unknown suite {name!r}; known: {sorted(SUITES)}")
    configs = configs or {}
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        futures = {name: pool.submit(SUITES[name], seed, configs.get(name)) for name in names}
        results = {name: fut.result() for name, fut in futures.items()}
    return [results[name] for name in SUITES if name in results]
