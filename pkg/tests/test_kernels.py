import math

import numpy as np
import pytest

from roughwave.errors import OracleError, PreconditionError
from roughwave.kernels import (
    KernelValue,
    ModelParams,
    characteristic_roots,
    default_decay_c,
    derived_exponents,
    eps2,
    kernel_eval,
    kernel_values,
    low_frequency_bound_ratio,
    mode_coefficients,
    mode_propagator_batch,
    ode_oracle,
    pointwise_bound_ratio,
    r_lambda,
)

CDW = ModelParams(1.0, 0.0, 2, 1)      # classical damped wave
STRONG = ModelParams(1.0, 1.0, 2, 3)   # strongly damped wave
PLATE = ModelParams(2.0, 1.0, 3, 2)    # structurally damped plate

# frozen by the RK4 step-doubling oracle (tol 1e-12):
#   v'' + v' + v = 0, v(0)=1, v'(0)=0 -> v(1);  v(0)=0, v'(0)=1 -> v(1)
K0_CDW_T1 = 0.6597001533917017
K1_CDW_T1 = 0.5335071951146930


class TestDerivedExponents:
    def test_classical_damped_wave(self):
        dx = derived_exponents(CDW)
        assert (dx.kappa, dx.kappa_bar, dx.regime) == (0.0, 1.0, "effective")
        assert dx.R == pytest.approx(3.0**-0.5)
        assert dx.s_min == pytest.approx(-1.5)  # n/2 - p/(p-1) at p=2

    def test_strongly_damped_wave(self):
        dx = derived_exponents(STRONG)
        assert (dx.kappa, dx.kappa_bar, dx.regime) == (1.0, 2.0, "non_effective")
        assert dx.R == pytest.approx(5.0**0.5)
        assert dx.s_min == pytest.approx(-2.5)  # n/2 - 2p/(p-1)

    def test_plate(self):
        dx = derived_exponents(PLATE)
        assert (dx.kappa, dx.kappa_bar, dx.regime) == (2.0, 2.0, "scale_invariant")
        assert dx.R == pytest.approx(0.25)
        assert dx.s_min == pytest.approx(-3.0)  # n/2 - 2(p+1)/(p-1)

    def test_invariants(self):
        for par in (CDW, STRONG, PLATE, ModelParams(2.0, 0.5, 2, 1)):
            dx = derived_exponents(par)
            assert dx.kappa <= dx.kappa_bar
            assert dx.kappa + dx.kappa_bar == pytest.approx(2 * par.delta + par.sigma)

    def test_domain_error(self):
        with pytest.raises(ValueError):
            ModelParams(1.0, 1.5, 2, 1)


class TestRLambda:
    def test_effective(self):
        dx = derived_exponents(CDW)
        assert r_lambda(dx, 2.0) == pytest.approx(2 * 3.0**-0.5)

    def test_scale_invariant(self):
        dx = derived_exponents(PLATE)
        assert r_lambda(dx, 1.0) == 1.0
        assert r_lambda(dx, 9.0) == 1.0

    def test_non_effective(self):
        dx = derived_exponents(STRONG)
        assert r_lambda(dx, 1.0) == pytest.approx(5.0**0.5)


class TestRoots:
    def test_classical_at_unit(self):
        mp, mm = characteristic_roots(CDW, 1.0, 1.0)
        assert mp == pytest.approx(complex(-0.5, math.sqrt(3) / 2))
        assert mm == pytest.approx(complex(-0.5, -math.sqrt(3) / 2))

    def test_scale_invariant_lambda_free(self):
        for lam in (1.0, 3.0, 7.0):
            mp, mm = characteristic_roots(PLATE, lam, 1.7)
            assert mp == pytest.approx(0.5 * complex(-1, math.sqrt(3)) * 1.7**2)
            assert mm == pytest.approx(0.5 * complex(-1, -math.sqrt(3)) * 1.7**2)

    def test_effective_discriminant(self):
        # frozen arithmetic: 1 - 4 * 0.25 * 1.44 = -0.44
        a, b = mode_coefficients(CDW, 2.0, 1.2)
        assert a * a - 4 * b == pytest.approx(-0.44)

    def test_discriminant_signs_on_admissible_range(self):
        for par in (CDW, ModelParams(2.0, 0.5, 2, 1)):
            dx = derived_exponents(par)
            for lam in (1.0, 2.0, 8.0):
                r = np.geomspace(r_lambda(dx, lam), 8 * r_lambda(dx, lam), 50)
                a, b = mode_coefficients(par, lam, r)
                assert np.all(a * a - 4 * b < 0)
        dx = derived_exponents(STRONG)
        for lam in (1.0, 2.0, 8.0):
            r = np.geomspace(r_lambda(dx, lam), 8 * r_lambda(dx, lam), 50)
            a, b = mode_coefficients(STRONG, lam, r)
            assert np.all(a * a - 4 * b > 0)

    def test_ordering_and_sign(self):
        mp, mm = characteristic_roots(STRONG, 2.0, 10.0)
        assert mp.real >= mm.real
        assert mp.real <= 0 and mm.real <= 0

    def test_requires_positive_r(self):
        with pytest.raises(ValueError):
            characteristic_roots(CDW, 1.0, 0.0)


class TestKernelEval:
    def test_initial_conditions(self):
        for par in (CDW, STRONG, PLATE):
            kv = kernel_eval(par, 2.0, 1.3, 0.0)
            assert kv == KernelValue(1.0, 0.0, -0.0, 1.0) or (
                kv.K0 == 1.0 and kv.K1 == 0.0 and kv.dtK0 == 0.0 and kv.dtK1 == 1.0
            )

    def test_frozen_classical_values(self):
        kv = kernel_eval(CDW, 1.0, 1.0, 1.0)
        assert kv.K0.real == pytest.approx(K0_CDW_T1, rel=1e-10)
        assert kv.K1.real == pytest.approx(K1_CDW_T1, rel=1e-10)

    def test_scale_invariant_closed_form(self):
        # K0(2 pi / sqrt 3) = -e^{-pi/sqrt 3} at r = 1
        kv = kernel_eval(PLATE, 4.0, 1.0, 2 * math.pi / math.sqrt(3))
        assert kv.K0.real == pytest.approx(-math.exp(-math.pi / math.sqrt(3)), rel=1e-12)
        orc = ode_oracle(PLATE, 4.0, 1.0, 2 * math.pi / math.sqrt(3), "position")
        assert kv.K0.real == pytest.approx(orc.real, rel=1e-8)

    def test_scale_invariant_lambda_independence(self):
        vals = [kernel_values(PLATE, lam, np.array([1.3]), 0.7) for lam in (1.0, 3.0, 7.0)]
        for other in vals[1:]:
            for a, b in zip(vals[0], other):
                assert np.allclose(a, b, rtol=1e-14, atol=0)

    def test_ode_consistency(self):
        # dtK0 = -b K1 and dtK1 = K0 - a K1 couple the quadruple through the
        # mode equation; both sides are computed along different arithmetic
        # paths (root products vs coefficients)
        for par in (CDW, STRONG, PLATE, ModelParams(1.0, 0.5, 2, 1), ModelParams(2.0, 0.5, 2, 1)):
            dx = derived_exponents(par)
            for lam in (1.0, 4.0):
                floor = r_lambda(dx, lam)
                for r in np.geomspace(floor, 8 * floor, 7):
                    a, b = mode_coefficients(par, lam, float(r))
                    for t in (0.0, 0.1, 1.0, 10.0):
                        kv = kernel_eval(par, lam, float(r), t)
                        scale = max(abs(kv.dtK0), abs(kv.dtK1), 1e-30)
                        assert abs(kv.dtK0 + b * kv.K1) <= 1e-10 * scale
                        assert abs(kv.dtK1 - (kv.K0 - a * kv.K1)) <= 1e-10 * scale

    def test_degenerate_root_branch(self):
        # at the discriminant zero the divided-difference branch takes over
        par = ModelParams(1.0, 0.25, 2, 1)  # a^2 = 4b at r = 4^{1/(4d-2s)}
        r_star = 4.0 ** (1.0 / (4 * par.delta - 2 * par.sigma))
        kv = kernel_values(par, 1.0, np.array([r_star]), 1.0)
        orc = mode_propagator_batch(par, 1.0, [r_star], [1.0], tol=1e-11)
        assert abs(kv[0][0] - orc[0, 0, 0]) <= 1e-9 * abs(orc[0, 0, 0])
        assert abs(kv[1][0] - orc[0, 0, 1]) <= 1e-9 * abs(orc[0, 0, 1])


class TestOracle:
    def test_trivial_initial(self):
        assert ode_oracle(CDW, 1.0, 1.0, 0.0, "position") == 1.0
        assert ode_oracle(CDW, 1.0, 1.0, 0.0, "velocity") == 0.0

    def test_self_consistency(self):
        val = ode_oracle(CDW, 1.0, 1.0, 1.0, "position")
        assert abs(val - kernel_eval(CDW, 1.0, 1.0, 1.0).K0) <= 1e-8

    def test_sweep_agreement(self):
        pairs = [(1.0, 0.0), (1.0, 1.0), (2.0, 1.0), (1.0, 0.5), (2.0, 0.5)]
        worst = 0.0
        for sig, dlt in pairs:
            par = ModelParams(sig, dlt, 2, 1)
            dx = derived_exponents(par)
            for lam in (1.0, 8.0):
                floor = r_lambda(dx, lam)
                rr, tt = np.meshgrid(np.geomspace(floor, 8 * floor, 4), [0.0, 0.1, 1.0, 10.0], indexing="ij")
                phi = mode_propagator_batch(par, lam, rr.ravel(), tt.ravel(), tol=1e-10)
                K0, K1, dtK0, dtK1 = kernel_values(par, lam, rr.ravel(), tt.ravel())
                closed = np.stack([np.stack([K0, K1], -1), np.stack([dtK0, dtK1], -1)], -2)
                scale = np.abs(closed).max(axis=(1, 2), keepdims=True)
                err = np.abs(closed - phi) / np.maximum(
                    np.maximum(np.abs(closed), np.abs(phi)), 1e-12 * scale
                )
                worst = max(worst, float(err.max()))
        assert worst <= 1e-8

    def test_failure_reported(self):
        with pytest.raises(OracleError):
            mode_propagator_batch(STRONG, 8.0, [200.0], [10.0], tol=1e-15, max_steps=128)


class TestBoundRatios:
    def test_t_zero_unit(self):
        assert pointwise_bound_ratio(CDW, 2.0, 2.0, 0.0, "K0") == pytest.approx(1.0)

    def test_scale_invariant_analytic(self):
        # |K1| r^{2d} e^{r^{2d} t / 2} <= 2/sqrt(3), attained on a fine sweep
        worst = 0.0
        for r in np.geomspace(1.0, 4.0, 5):
            for t in np.linspace(0.0, 8.0, 1601):
                worst = max(worst, pointwise_bound_ratio(PLATE, 3.0, float(r), float(t), "K1", c=0.5))
        assert worst <= 2 / math.sqrt(3) + 1e-12
        assert worst >= (2 / math.sqrt(3)) * 0.99

    def test_precondition(self):
        with pytest.raises(PreconditionError):
            pointwise_bound_ratio(CDW, 2.0, 0.5, 1.0, "K0")

    def test_effective_dtk0_finite(self):
        dx = derived_exponents(CDW)
        for lam in (2.0, 8.0):
            floor = r_lambda(dx, lam)
            vals = [
                pointwise_bound_ratio(CDW, lam, float(r), t, "dtK0")
                for r in np.geomspace(floor, 8 * floor, 6)
                for t in (0.0, 0.3, 2.0, 10.0)
            ]
            assert all(math.isfinite(v) for v in vals)


class TestLowFrequency:
    def test_t_zero_k0(self):
        assert low_frequency_bound_ratio(CDW, 0.1, 0.0, "K0") == pytest.approx(1.0)

    def test_time_branch_finite(self):
        v = low_frequency_bound_ratio(CDW, 0.1, 10.0, "K1", branch="time")
        assert math.isfinite(v) and v > 0

    def test_strong_damping_kappa_branch(self):
        # kappa = 1, decay exponent 2kbar - 2d = 2
        v = low_frequency_bound_ratio(STRONG, 0.1, 3.0, "K1", branch="kappa")
        assert math.isfinite(v)

    def test_eps2_values(self):
        assert eps2(CDW) == pytest.approx(0.25)  # half of 4^{-1/2}
        assert eps2(STRONG) == pytest.approx(1.0)  # half of 4^{1/2}
        assert eps2(PLATE) == pytest.approx(0.5)

    def test_precondition(self):
        with pytest.raises(PreconditionError):
            low_frequency_bound_ratio(CDW, 1.0, 1.0, "K0")


def test_default_decay_constants():
    assert default_decay_c(CDW) == pytest.approx(0.125)
    assert default_decay_c(PLATE) == pytest.approx(0.125)
    assert default_decay_c(STRONG) == pytest.approx(0.25)
