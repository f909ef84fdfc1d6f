import json

import pytest

from roughwave.verify import (
    SUITES,
    SuiteReport,
    run_suites,
    suite_kernel_bounds,
    suite_product_estimate,
)

FAST_SUITES = ["kernel_bounds", "low_frequency", "product_estimate"]


class TestReportStructure:
    def test_json_fields(self):
        rep = suite_kernel_bounds(3)
        payload = json.loads(rep.to_json())
        assert set(payload) == {"suite_name", "claim", "seed", "fitted_constants", "cases", "verdict"}
        assert payload["seed"] == 3
        assert payload["claim"]
        assert payload["verdict"] in ("pass", "fail")
        for case in payload["cases"]:
            assert {"name", "pass"} <= set(case)

    def test_verdict_tracks_cases(self):
        rep = SuiteReport("x", "claim", 0)
        rep.add("a", True)
        assert rep.verdict == "pass"
        rep.add("b", False)
        assert rep.verdict == "fail"

    def test_fitted_constants_recorded(self):
        rep = suite_kernel_bounds(3)
        assert any(key.startswith("C[") for key in rep.fitted_constants)
        assert "scale_invariant_K1" in rep.fitted_constants


class TestDeterminism:
    def test_same_seed_same_bytes(self):
        a = suite_product_estimate(11).to_json()
        b = suite_product_estimate(11).to_json()
        assert a == b

    def test_different_seed_different_numbers(self):
        a = suite_product_estimate(11).to_json()
        b = suite_product_estimate(12).to_json()
        assert a != b

    def test_worker_count_irrelevant(self):
        r1 = run_suites(FAST_SUITES, seed=5, workers=3)
        r2 = run_suites(FAST_SUITES, seed=5, workers=1)
        for a, b in zip(r1, r2):
            assert a.to_json() == b.to_json()


class TestRegistry:
    def test_known_suites(self):
        assert set(SUITES) == {
            "kernel_bounds",
            "linear_estimates",
            "low_frequency",
            "product_estimate",
            "fixed_point",
            "large_data",
        }

    def test_unknown_suite_rejected(self):
        with pytest.raises(KeyError):
            run_suites(["nope"], seed=0)

    def test_registry_order_preserved(self):
        reports = run_suites(["low_frequency", "kernel_bounds"], seed=1, workers=2)
        assert [r.suite_name for r in reports] == ["kernel_bounds", "low_frequency"]


class TestNegativeControls:
    @pytest.mark.parametrize("suite", FAST_SUITES)
    def test_expected_failures_present_and_pass(self, suite):
        rep = SUITES[suite](9)
        controls = [c for c in rep.cases if c.get("expected_failure")]
        assert controls, f"{suite} carries no violating control case"
        assert all(c["pass"] for c in controls)
