"""Model parameters, damping regimes, and the closed-form mode kernels.

Each Fourier mode of the linear flow solves the damped oscillator

    v'' + lambda^{kappa - 2 delta} r^{2 delta} v'
        + lambda^{2 kappa - 2 sigma} r^{2 sigma} v = 0,      r = |xi|,

whose characteristic roots mu_{+/-} drive everything here: the propagator
kernels K0 (position data) and K1 (velocity data), their time derivatives,
sharp decay majorants above the support radius, and a root-free RK4 oracle
used to certify the closed forms.

kappa = min(2 delta, sigma) and kappa_bar = max(2 delta, sigma) classify the
damping: effective (delta < sigma/2), scale invariant (delta = sigma/2), and
non-effective (delta > sigma/2).  Above the regime radius R_lambda the
discriminant keeps one sign, so the root branches never collide there.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import OracleError, PreconditionError

Regime = Literal["effective", "scale_invariant", "non_effective"]

_REGIME_TOL = 1e-12
_KERNEL_WHICH = ("K0", "K1", "dtK0", "dtK1")


@dataclass(frozen=True)
class ModelParams:
    """Exponents of u_tt + (-Delta)^sigma u + (-Delta)^delta u_t = u^p in R^n."""

    sigma: float
    delta: float
    p: int
    n: int

    def __post_init__(self):
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")
        if not (0 <= self.delta <= self.sigma):
            raise ValueError(f"delta must lie in [0, sigma], got {self.delta}")
        if int(self.p) != self.p or self.p < 2:
            raise ValueError("p must be an integer >= 2")
        if self.n not in (1, 2, 3):
            raise ValueError("n must be 1, 2 or 3")

    @property
    def kappa(self) -> float:
        return min(2 * self.delta, self.sigma)

    @property
    def kappa_bar(self) -> float:
        return max(2 * self.delta, self.sigma)

    @property
    def regime(self) -> Regime:
        gap = self.delta - self.sigma / 2
        if abs(gap) <= _REGIME_TOL * self.sigma:
            return "scale_invariant"
        return "effective" if gap < 0 else "non_effective"


@dataclass(frozen=True)
class DerivedExponents:
    """Quantities derived from ModelParams: rate exponents, regime, support radius."""

    kappa: float
    kappa_bar: float
    regime: Regime
    R: float
    s_min: float

    def r_floor(self, lam: float) -> float:
        """Support radius R_lambda for the rescaled problem."""
        if lam < 1:
            raise ValueError("lambda must be >= 1")
        if self.regime == "scale_invariant":
            return 1.0
        return self.R * lam


def derived_exponents(params: ModelParams, eps0: float = 0.25) -> DerivedExponents:
    """Rate exponents, damping regime, support radius, and the regularity floor.

    eps0 is only consulted in the scale-invariant regime, where the support
    radius is a free small constant.
    """
    if eps0 <= 0:
        raise ValueError("eps0 must be positive")
    sig, del_ = params.sigma, params.delta
    kappa, kbar = params.kappa, params.kappa_bar
    regime = params.regime
    if regime == "effective":
        R = 3.0 ** (-1.0 / (2 * sig - 4 * del_))
    elif regime == "non_effective":
        R = 5.0 ** (1.0 / (4 * del_ - 2 * sig))
    else:
        R = eps0
    s_min = params.n / 2 - (2 * kappa + kbar - 2 * del_) / (params.p - 1) - kbar
    return DerivedExponents(kappa, kbar, regime, R, s_min)


def r_lambda(dx: DerivedExponents, lam: float) -> float:
    """Support radius R_lambda; constant 1 in the scale-invariant regime."""
    return dx.r_floor(lam)


def eps2(params: ModelParams) -> float:
    """Low-frequency threshold: half the lambda=1 discriminant sign-change radius."""
    if params.regime == "scale_invariant":
        return 0.5
    return 0.5 * 4.0 ** (1.0 / (4 * params.delta - 2 * params.sigma))


def default_decay_c(params: ModelParams) -> float:
    """Default decay constant: a quarter of the guaranteed modal rate coefficient.

    The modal real part carries coefficient 1/2 in the effective and
    scale-invariant regimes and at least 1 on the slow branch of the
    non-effective regime.
    """
    coeff = 1.0 if params.regime == "non_effective" else 0.5
    return 0.25 * min(1.0, coeff)


def mode_coefficients(params: ModelParams, lam: float, r):
    """Damping and stiffness coefficients (a, b) of the mode oscillator."""
    r = np.asarray(r, dtype=float)
    kappa = params.kappa
    a = lam ** (kappa - 2 * params.delta) * r ** (2 * params.delta)
    b = lam ** (2 * kappa - 2 * params.sigma) * r ** (2 * params.sigma)
    return a, b


def characteristic_root_arrays(params: ModelParams, lam: float, r):
    """Vectorized characteristic roots (mu_plus, mu_minus), Re mu <= 0.

    mu_plus is the root with the larger real part; complex-conjugate pairs
    are ordered by nonnegative imaginary part.
    """
    a, b = mode_coefficients(params, lam, r)
    disc = a * a - 4.0 * b
    sq = np.sqrt(disc.astype(np.complex128))
    mu_plus = 0.5 * (-a + sq)
    mu_minus = 0.5 * (-a - sq)
    return mu_plus, mu_minus


def characteristic_roots(params: ModelParams, lam: float, r: float) -> tuple[complex, complex]:
    """Scalar characteristic roots; r must be positive."""
    if r <= 0:
        raise ValueError("r must be positive")
    mp, mm = characteristic_root_arrays(params, lam, r)
    return complex(mp), complex(mm)


def _sinhc(z: np.ndarray) -> np.ndarray:
    """sinh(z)/z by series; only called for |z| < 1e-3."""
    z2 = z * z
    return 1.0 + z2 / 6.0 * (1.0 + z2 / 20.0 * (1.0 + z2 / 42.0))


def kernel_values(params: ModelParams, lam: float, r, t):
    """K0, K1, dtK0, dtK1 as broadcast arrays over r and t.

    Two branches: the plain two-exponential quotient away from root
    degeneracy, and a divided-difference branch exp(mean) * {cosh, sinhc}
    when |(mu+ - mu-) t| is small, which covers double roots exactly.  Both
    are overflow-safe because Re mu <= 0.
    """
    mu_p, mu_m = characteristic_root_arrays(params, lam, r)
    t = np.asarray(t, dtype=float)
    mu_p, mu_m, t = np.broadcast_arrays(mu_p, mu_m, t)
    shape = mu_p.shape

    mean = 0.5 * (mu_p + mu_m)
    half_gap = 0.5 * (mu_p - mu_m)
    z = half_gap * t
    near = np.abs(z) < 1e-3

    K0 = np.empty(shape, dtype=np.complex128)
    K1 = np.empty(shape, dtype=np.complex128)
    dtK1 = np.empty(shape, dtype=np.complex128)

    far = ~near
    if np.any(far):
        ep = np.exp(mu_p[far] * t[far])
        em = np.exp(mu_m[far] * t[far])
        denom = mu_p[far] - mu_m[far]
        K1[far] = (ep - em) / denom
        K0[far] = (mu_p[far] * em - mu_m[far] * ep) / denom
        dtK1[far] = (mu_p[far] * ep - mu_m[far] * em) / denom
    if np.any(near):
        E = np.exp(mean[near] * t[near])
        sc = _sinhc(z[near]) * t[near]
        ch = np.cosh(z[near])
        K1[near] = E * sc
        K0[near] = E * (ch - mean[near] * sc)
        dtK1[near] = E * (ch + mean[near] * sc)
    dtK0 = -(mu_p * mu_m) * K1
    return K0, K1, dtK0, dtK1


@dataclass(frozen=True)
class KernelValue:
    """Kernel quadruple at one (lambda, r, t); at t=0 it is (1, 0, 0, 1)."""

    K0: complex
    K1: complex
    dtK0: complex
    dtK1: complex

    def get(self, which: str) -> complex:
        if which not in _KERNEL_WHICH:
            raise ValueError(f"which must be one of {_KERNEL_WHICH}")
        return getattr(self, which)


def kernel_eval(params: ModelParams, lam: float, r: float, t: float) -> KernelValue:
    """Closed-form kernel quadruple at a single point."""
    if r <= 0:
        raise ValueError("r must be positive")
    if t < 0:
        raise ValueError("t must be nonnegative")
    K0, K1, dtK0, dtK1 = kernel_values(params, lam, r, t)
    return KernelValue(complex(K0), complex(K1), complex(dtK0), complex(dtK1))


# -- independent oracle -----------------------------------------------------


def _rk4_companion_batch(a: np.ndarray, b: np.ndarray, t: np.ndarray, n: int) -> np.ndarray:
    """RK4 propagator matrices for v'' + a v' + b v = 0, fixed n steps on [0, t].

    Integrates the matrix equation Phi' = A Phi with A = [[0,1],[-b,-a]]
    rescaled to unit time, batched over the leading axis.
    """
    P = a.shape[0]
    A = np.zeros((P, 2, 2))
    A[:, 0, 1] = t
    A[:, 1, 0] = -b * t
    A[:, 1, 1] = -a * t
    phi = np.broadcast_to(np.eye(2), (P, 2, 2)).copy()
    h = 1.0 / n
    for _ in range(n):
        k1 = A @ phi
        k2 = A @ (phi + (0.5 * h) * k1)
        k3 = A @ (phi + (0.5 * h) * k2)
        k4 = A @ (phi + h * k3)
        phi = phi + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return phi


def _propagate_split(a, b, t, m: np.ndarray, n: int) -> np.ndarray:
    """RK4 over [0, t/2^m] followed by m propagator squarings (semigroup)."""
    phi = _rk4_companion_batch(a, b, t / 2.0**m, n)
    live = m.copy()
    while np.any(live > 0):
        idx = live > 0
        phi[idx] = phi[idx] @ phi[idx]
        live[idx] -= 1
    return phi


def mode_propagator_batch(
    params: ModelParams,
    lam: float,
    r,
    t,
    tol: float = 1e-9,
    max_steps: int = 1 << 16,
) -> np.ndarray:
    """Oracle propagator matrices [[K0, K1], [dtK0, dtK1]], batched over (r, t).

    Classical RK4 with step-doubling error control, plus binary time
    splitting: the interval is halved until the modal scale per slice is
    O(1), the slice propagator is integrated, and the result is squared back
    up (semigroup property).  The doubling comparison runs end to end, so
    the error estimate includes amplification through the squarings.  Raises
    OracleError instead of returning a value that failed to converge.
    """
    r = np.atleast_1d(np.asarray(r, dtype=float))
    t = np.atleast_1d(np.asarray(t, dtype=float))
    r, t = np.broadcast_arrays(r, t)
    r, t = r.ravel(), t.ravel()
    a, b = mode_coefficients(params, lam, r)
    a, b = np.atleast_1d(a), np.atleast_1d(b)
    out = np.empty((r.size, 2, 2))

    # |mu| <= a + sqrt(b); split so one slice carries modal scale <= ~1
    scale = (a + np.sqrt(b)) * t
    m_all = np.ceil(np.log2(np.maximum(scale, 1.0))).astype(int)
    for m_val in np.unique(m_all):
        sel = np.flatnonzero(m_all == m_val)
        asel, bsel, tsel, msel = a[sel], b[sel], t[sel], m_all[sel]
        n = 64
        prev = _propagate_split(asel, bsel, tsel, msel, n)
        pending = np.arange(sel.size)
        while pending.size:
            n *= 2
            if n > max_steps:
                raise OracleError(
                    f"mode oracle failed to converge below {max_steps} slice steps (tol={tol})"
                )
            cur = _propagate_split(asel[pending], bsel[pending], tsel[pending], msel[pending], n)
            diff = np.abs(cur - prev[pending])
            mag = np.maximum(np.abs(cur), np.abs(prev[pending]))
            # per-entry relative agreement; entries below 1e-12 of the matrix
            # scale count as converged (they are certified negligible)
            mat_scale = np.maximum(np.abs(cur).max(axis=(1, 2)), 1e-300)
            fine = (diff <= tol * mag) | (mag <= 1e-12 * mat_scale[:, None, None])
            ok = fine.all(axis=(1, 2))
            done_rows = pending[ok]
            out[sel[done_rows]] = cur[ok]
            prev[pending] = cur
            pending = pending[~ok]
    return out


def ode_oracle(
    params: ModelParams,
    lam: float,
    r: float,
    t: float,
    ic: str = "position",
    tol: float = 1e-10,
) -> complex:
    """Independently integrated mode value for canonical data (1,0) or (0,1)."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    if ic not in ("position", "velocity"):
        raise ValueError("ic must be 'position' or 'velocity'")
    col = 0 if ic == "position" else 1
    if t == 0.0:
        return complex(1.0 if col == 0 else 0.0)
    phi = mode_propagator_batch(params, lam, [r], [t], tol=tol)
    return complex(phi[0, 0, col])


# -- decay majorants --------------------------------------------------------


def _majorant(params: ModelParams, lam: float, r: float, t: float, which: str, c: float) -> float:
    kappa, kbar = params.kappa, params.kappa_bar
    sig, del_ = params.sigma, params.delta
    j = 1 if which.startswith("dt") else 0
    decay = math.exp(-c * lam ** (2 * del_ - kappa) * r ** (2 * kappa - 2 * del_) * t)
    if which in ("K0", "dtK0"):
        power = lam ** ((2 * del_ - sig) * j) * r ** ((2 * sig - kbar) * j)
    else:
        power = lam ** ((kappa - kbar) * (j - 1)) * r ** (kbar * (j - 1))
    return power * decay


def pointwise_bound_ratio(
    params: ModelParams,
    lam: float,
    r: float,
    t: float,
    which: str,
    c: float | None = None,
    eps0: float = 0.25,
) -> float:
    """|kernel| divided by its claimed decay majorant, valid for r >= R_lambda.

    The majorant's multiplicative constant is deliberately omitted: sweeps
    fit it as the observed supremum and certify that it does not drift with
    lambda.
    """
    if which not in _KERNEL_WHICH:
        raise ValueError(f"which must be one of {_KERNEL_WHICH}")
    dx = derived_exponents(params, eps0)
    floor = r_lambda(dx, lam)
    if r < floor * (1 - 1e-12):
        raise PreconditionError(f"bound claimed only for r >= R_lambda = {floor:.6g}, got {r:.6g}")
    if c is None:
        c = default_decay_c(params)
    val = abs(kernel_eval(params, lam, r, t).get(which))
    return val / _majorant(params, lam, r, t, which, c)


def low_frequency_bound_ratio(
    params: ModelParams,
    r: float,
    t: float,
    which: str,
    c: float | None = None,
    branch: str = "min",
) -> float:
    """Kernel value against the small-frequency majorant at lambda = 1.

    Valid for 0 < r <= eps2(params).  The K1 envelope is min(r^-kappa, t) by
    default; `branch` selects either factor alone.
    """
    if which not in ("K0", "K1"):
        raise ValueError("low-frequency bounds cover K0 and K1 only")
    e2 = eps2(params)
    if not 0 < r <= e2:
        raise PreconditionError(f"low-frequency bound needs 0 < r <= eps2 = {e2:.6g}, got {r:.6g}")
    if c is None:
        c = default_decay_c(params)
    decay = math.exp(-c * r ** (2 * params.kappa_bar - 2 * params.delta) * t)
    val = abs(kernel_eval(params, 1.0, r, t).get(which))
    if which == "K0":
        majorant = decay
    else:
        if branch == "min":
            env = min(r ** (-params.kappa), t)
        elif branch == "kappa":
            env = r ** (-params.kappa)
        elif branch == "time":
            env = t
        else:
            raise ValueError("branch must be 'min', 'kappa' or 'time'")
        majorant = env * decay
        if majorant == 0.0:
            return 0.0 if val == 0.0 else math.inf
    return val / majorant
