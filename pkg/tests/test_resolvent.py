"""Tests for the scalar resolvent solver and the completely-positive bound.

Closed-form references: the resolvent of PowerLaw(beta) with spectral value
lam is E_beta(-lam t^beta), and of CaputoDual(beta) is
E_{1-beta}(-lam t^{1-beta}); point values below were generated offline by
arbitrary-precision series summation.
"""
from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from evoscalar.errors import ValidationError
from evoscalar.kernels import (
    CaputoDual,
    Constant,
    MultiTerm,
    PowerLaw,
    RayleighStokes,
    Tabulated,
    pc_catalog,
)
from evoscalar.mlfun import MLParams, mittag_leffler
from evoscalar.resolvent import (
    ResolventRequest,
    resolvent_batch,
    resolvent_bound_check,
    resolvent_scalar,
)
from evoscalar.sampling import SampledSignal

# E_{0.6}(-2 * 0.5^0.6): CaputoDual(0.4), lam = 2, t = 0.5
REF_CAPUTO_DUAL = 0.33653213106592711844
# E_{0.8}(-3 * 2^0.8): PowerLaw(0.8), lam = 3, t = 2
REF_POWER_LAW = 0.054465038891534088514


class TestRequestValidation:
    def test_negative_lambda(self):
        with pytest.raises(ValidationError):
            ResolventRequest(PowerLaw(0.5), -1.0, 1.0, 0.01)

    def test_bad_grid(self):
        with pytest.raises(ValidationError):
            ResolventRequest(PowerLaw(0.5), 1.0, 0.0, 0.01)
        with pytest.raises(ValidationError):
            ResolventRequest(PowerLaw(0.5), 1.0, 1.0, -0.01)
        with pytest.raises(ValidationError):
            ResolventRequest(PowerLaw(0.5), 1.0, 0.005, 0.01)

    def test_empty_batch(self):
        with pytest.raises(ValidationError):
            resolvent_batch(PowerLaw(0.5), [], 1.0, 0.01)


class TestResolventScalar:
    def test_zero_lambda_is_identity(self):
        sol = resolvent_scalar(ResolventRequest(PowerLaw(0.5), 0.0, 1.0, 0.01))
        assert np.all(sol.values == 1.0)

    def test_initial_value(self):
        sol = resolvent_scalar(ResolventRequest(PowerLaw(0.3), 5.0, 1.0, 0.01))
        assert sol.values[0] == 1.0

    def test_constant_kernel_is_exponential(self):
        sol = resolvent_scalar(ResolventRequest(Constant(1.0), 1.0, 1.0, 1e-3))
        assert abs(sol.values[-1] - np.exp(-1.0)) < 1e-3  # contract tolerance
        assert np.max(np.abs(sol.values - np.exp(-sol.times))) < 1e-6

    def test_power_law_matches_ml(self):
        sol = resolvent_scalar(ResolventRequest(PowerLaw(0.5), 1.0, 5.0, 1e-3))
        exact = mittag_leffler(MLParams(0.5), -sol.times**0.5, rtol=1e-8)
        assert np.max(np.abs(sol.values - exact)) < 1e-3

    def test_worst_singularity_stiff(self):
        sol = resolvent_scalar(ResolventRequest(PowerLaw(0.3), 10.0, 5.0, 1e-3))
        exact = mittag_leffler(MLParams(0.3), -10.0 * sol.times**0.3,
                               rtol=1e-8)
        assert np.max(np.abs(sol.values - exact)) < 1e-3

    def test_caputo_dual_reference_value(self):
        sol = resolvent_scalar(ResolventRequest(CaputoDual(0.4), 2.0, 1.0,
                                                1e-3))
        assert abs(sol.values[500] - REF_CAPUTO_DUAL) < 2e-5

    def test_power_law_reference_value(self):
        sol = resolvent_scalar(ResolventRequest(PowerLaw(0.8), 3.0, 2.0, 1e-3))
        assert abs(sol.values[-1] - REF_POWER_LAW) < 2e-5

    def test_halving_improves(self):
        errs = []
        for dt in (2e-3, 1e-3):
            sol = resolvent_scalar(ResolventRequest(PowerLaw(0.5), 1.0, 2.0,
                                                    dt))
            exact = mittag_leffler(MLParams(0.5), -sol.times**0.5, rtol=1e-8)
            errs.append(np.max(np.abs(sol.values - exact)))
        assert np.log2(errs[0] / errs[1]) >= 0.5

    def test_range_and_monotone_for_catalog(self):
        for k in pc_catalog()[::3]:
            sol = resolvent_scalar(ResolventRequest(k, 3.0, 2.0, 0.01))
            assert np.all(sol.values >= -1e-12)
            assert np.all(sol.values <= 1.0 + 1e-12)
            assert np.all(np.diff(sol.values) <= 1e-10)

    def test_monotone_in_lambda(self):
        lo, hi = resolvent_batch(PowerLaw(0.5), [0.5, 2.0], 1.0, 0.01)
        assert np.all(lo.values >= hi.values - 1e-12)

    def test_meta(self):
        sol = resolvent_scalar(ResolventRequest(PowerLaw(0.5), 2.5, 1.0, 0.01))
        assert sol.meta["lambda"] == 2.5
        assert sol.meta["operation"] == "resolvent_scalar"


class TestResolventBatch:
    def test_matches_single_solves(self):
        lams = [0.1, 1.0, 7.5]
        batch = resolvent_batch(PowerLaw(0.4), lams, 1.0, 0.01)
        for lam, sol in zip(lams, batch):
            single = resolvent_scalar(ResolventRequest(PowerLaw(0.4), lam,
                                                       1.0, 0.01))
            assert sol.meta["lambda"] == lam
            np.testing.assert_allclose(sol.values, single.values, rtol=0.0,
                                       atol=5e-13)

    def test_deterministic(self):
        a = resolvent_batch(RayleighStokes(0.5, 1.0), [1.0, 2.0], 1.0, 0.01)
        b = resolvent_batch(RayleighStokes(0.5, 1.0), [1.0, 2.0], 1.0, 0.01)
        for x, y in zip(a, b):
            assert np.array_equal(x.values, y.values)


class TestBoundCheck:
    def test_constant_kernel(self):
        rep = resolvent_bound_check(ResolventRequest(Constant(1.0), 2.0, 10.0,
                                                     0.01))
        assert rep["pass"] is True
        assert rep["max_violation"] <= 1e-6

    def test_power_law_stiff(self):
        rep = resolvent_bound_check(ResolventRequest(PowerLaw(0.7), 10.0,
                                                     10.0, 0.01))
        assert rep["pass"] is True

    def test_zero_lambda_equality(self):
        rep = resolvent_bound_check(ResolventRequest(PowerLaw(0.5), 0.0, 10.0,
                                                     0.01))
        assert rep["pass"] is True
        assert rep["max_violation"] == pytest.approx(0.0, abs=1e-15)

    def test_unflagged_kernel_rejected(self):
        sig = SampledSignal(dt=0.1, values=np.ones(8))
        with pytest.raises(ValidationError):
            resolvent_bound_check(ResolventRequest(Tabulated(sig), 1.0, 0.5,
                                                   0.1))

    def test_multi_term(self):
        k = MultiTerm(0.8, (0.4, 0.1), (0.5, 0.25))
        rep = resolvent_bound_check(ResolventRequest(k, 50.0, 5.0, 0.01))
        assert rep["pass"] is True

    @settings(max_examples=15, deadline=None)
    @given(beta=st.floats(0.2, 0.95), lam=st.floats(0.0, 100.0))
    def test_bound_property(self, beta, lam):
        rep = resolvent_bound_check(ResolventRequest(PowerLaw(beta), lam, 2.0,
                                                     0.01))
        assert rep["pass"] is True

    @settings(max_examples=10, deadline=None)
    @given(beta=st.floats(0.25, 0.9), lam=st.floats(0.01, 20.0))
    def test_ml_agreement_property(self, beta, lam):
        sol = resolvent_scalar(ResolventRequest(PowerLaw(beta), lam, 2.0,
                                                0.01))
        exact = mittag_leffler(MLParams(beta), -lam * sol.times**beta,
                               rtol=1e-8)
        assert np.max(np.abs(sol.values - exact)) < 3e-3
