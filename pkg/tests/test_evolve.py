"""Tests for propagators, torus fields, Duhamel forcing, decay bounds, and
Picard iteration."""
from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from evoscalar import kernels
from evoscalar.errors import (AliasingError, ConvergenceError,
                              DegenerateWindowError, DivergenceError,
                              HorizonError, UnboundedSupremumError,
                              ValidationError)
from evoscalar.evolve import (FieldOnTorus, GeneralKernel, Heat, HeatType,
                              MixedNormSpec, MultiTerm, RayleighStokes,
                              SchrodingerType, VariableCoeff, WaveType,
                              analyze, bound_function, decay_slope, duhamel,
                              evolve_linear, field_from_text, field_to_text,
                              lp_norm, mixed_norm, picard_solve,
                              propagator_pair, propagator_value,
                              random_mean_zero, synthesize)
from evoscalar.mlfun import MLParams, mittag_leffler
from evoscalar.resolvent import ResolventRequest, resolvent_scalar
from evoscalar.sampling import SampledSignal
from evoscalar.spectra import (Explicit, PrescribedExponent, SpectralModel,
                               TorusLaplacian)

# independently frozen references (high-precision series evaluation)
REF_E_HALF_AT_MINUS_1 = 0.42758357615580700441   # E_{1/2}(-1)
REF_E_15_2_AT_MINUS_32 = 0.36822473607995582945  # E_{1.5,2}(-3.2)


def torus_model(truncation: int = 10**4) -> SpectralModel:
    return SpectralModel(TorusLaplacian(1), truncation=truncation)


class TestPropagatorKinds:
    def test_parameter_validation(self):
        with pytest.raises(ValidationError):
            HeatType(1.2)
        with pytest.raises(ValidationError):
            WaveType(0.5)
        with pytest.raises(ValidationError):
            SchrodingerType(1.5)
        with pytest.raises(ValidationError):
            RayleighStokes(0.5, -1.0)
        with pytest.raises(ValidationError):
            VariableCoeff(SampledSignal(dt=0.1, values=np.array([1.0, -0.2])))
        with pytest.raises(ValidationError):
            VariableCoeff(SampledSignal(dt=0.1, values=np.ones(3), t0=1.0))

    def test_multiterm_strict_weights(self):
        # the kernel catalog admits vanishing weights; the propagator not
        assert kernels.MultiTerm(0.8, (0.4,), (0.0,))
        with pytest.raises(ValidationError):
            MultiTerm(0.8, (0.4,), (0.0,))


class TestPropagatorValue:
    def test_heat_at_zero(self):
        for lam in [0.0, 1.0, 37.5]:
            assert propagator_value(Heat(), 0.0, lam) == 1.0

    def test_variable_coeff_unit_reduces_to_heat(self):
        alpha = SampledSignal(dt=0.01, values=np.ones(501))
        kind = VariableCoeff(alpha)
        t = np.linspace(0.0, 5.0, 37)
        got = propagator_value(kind, t, 2.5)
        want = propagator_value(Heat(), t, 2.5)
        assert np.max(np.abs(got - want)) < 1e-14

    def test_heat_type_reference(self):
        got = propagator_value(HeatType(0.5), 1.0, 1.0)
        assert abs(got - REF_E_HALF_AT_MINUS_1) < 1e-9

    def test_general_kernel_matches_heat_type(self):
        # resolvent route vs Mittag-Leffler route for the same equation
        kind = GeneralKernel(kernels.PowerLaw(0.5))
        t = np.linspace(0.0, 3.0, 61)
        got = propagator_value(kind, t, 2.0, dt=1e-3)
        want = propagator_value(HeatType(0.5), t, 2.0)
        assert np.max(np.abs(got - want)) < 1e-3

    def test_rayleigh_stokes_via_resolvent(self):
        kind = RayleighStokes(0.5, 1.0)
        t = np.linspace(0.0, 2.0, 21)
        got = propagator_value(kind, t, 3.0, dt=1e-3)
        sol = resolvent_scalar(
            ResolventRequest(kernels.RayleighStokes(0.5, 1.0), 3.0, 2.0,
                             1e-3))
        want = np.interp(t, sol.times, sol.values)
        assert np.max(np.abs(got - want)) < 1e-12
        assert np.all(np.diff(got) <= 1e-12)
        assert np.all((got >= -1e-12) & (got <= 1.0 + 1e-12))

    def test_multiterm_via_its_kernel(self):
        kind = MultiTerm(0.8, (0.4,), (0.5,))
        t = np.linspace(0.0, 2.0, 11)
        got = propagator_value(kind, t, 1.0, dt=2e-3)
        sol = resolvent_scalar(
            ResolventRequest(kernels.MultiTerm(0.8, (0.4,), (0.5,)), 1.0,
                             2.0, 2e-3))
        want = np.interp(t, sol.times, sol.values)
        assert np.max(np.abs(got - want)) < 1e-12

    def test_schrodinger_magnitude_envelope(self):
        # |E_beta(i x)| <= C/(1+x) empirically, with a modest C
        x = np.geomspace(1e-2, 1e3, 40)
        for beta in [0.3, 0.5, 0.7]:
            kind = SchrodingerType(beta)
            vals = propagator_value(kind, x ** (1.0 / beta), 1.0)
            const = np.max(np.abs(vals) * (1.0 + x))
            assert const < 5.0
            assert np.all(np.abs(vals) <= const / (1.0 + x) + 1e-12)

    def test_input_validation(self):
        with pytest.raises(ValidationError):
            propagator_value(Heat(), -1.0, 1.0)
        with pytest.raises(ValidationError):
            propagator_value(Heat(), 1.0, -1.0)
        alpha = SampledSignal(dt=0.1, values=np.ones(5))
        with pytest.raises(ValidationError):
            propagator_value(VariableCoeff(alpha), 10.0, 1.0)


class TestWavePair:
    def test_pair_only_for_wave(self):
        with pytest.raises(ValidationError):
            propagator_pair(Heat(), 1.0, 1.0)

    def test_free_motion_at_zero_eigenvalue(self):
        phi0, phi1 = propagator_pair(WaveType(1.5), 2.5, 0.0)
        assert phi0 == 1.0
        assert abs(phi1 - 2.5) < 1e-14

    @pytest.mark.parametrize("beta", [1.2, 1.5, 1.8])
    def test_w1_is_running_integral_of_w0(self, beta):
        dt = 1e-3
        t = dt * np.arange(3001)
        phi0, phi1 = propagator_pair(WaveType(beta), t, 1.0)
        integral = np.concatenate(
            ([0.0], np.cumsum(0.5 * (phi0[1:] + phi0[:-1]) * dt)))
        assert np.max(np.abs(phi1 - integral)) < 10.0 * dt


class TestEvolveLinear:
    def test_zero_mode_unchanged(self):
        m = SpectralModel(Explicit(((0.0, 1), (2.0, 1))), nominal_lambda=1.0)
        times = np.linspace(0.0, 3.0, 7)
        out = evolve_linear(m, Heat(), np.array([1.5, 1.0]), times)
        assert np.allclose(out[:, 0], 1.5, rtol=0, atol=0)

    def test_single_mode_heat(self):
        m = SpectralModel(Explicit(((4.0, 1),)), nominal_lambda=1.0)
        times = np.linspace(0.0, 2.0, 9)
        out = evolve_linear(m, Heat(), np.array([2.0]), times)
        assert np.max(np.abs(out[:, 0] - 2.0 * np.exp(-4.0 * times))) < 1e-14

    def test_wave_second_slot_reference(self):
        m = SpectralModel(Explicit(((3.2, 1),)), nominal_lambda=1.0)
        out = evolve_linear(m, WaveType(1.5), np.array([0.0]),
                            np.array([0.0, 1.0]), w1_coeffs=np.array([1.0]))
        assert abs(out[1, 0] - REF_E_15_2_AT_MINUS_32) < 1e-9

    def test_linearity(self):
        m = torus_model(truncation=100)
        rng = np.random.default_rng(3)
        x = rng.standard_normal(m.eigenvalues.size)
        y = rng.standard_normal(m.eigenvalues.size)
        times = np.linspace(0.0, 1.0, 5)
        lhs = evolve_linear(m, HeatType(0.5), 2.0 * x - 3.0 * y, times)
        rhs = 2.0 * evolve_linear(m, HeatType(0.5), x, times) \
            - 3.0 * evolve_linear(m, HeatType(0.5), y, times)
        assert np.max(np.abs(lhs - rhs)) < 1e-12

    def test_heat_semigroup(self):
        m = torus_model(truncation=100)
        c = np.ones(m.eigenvalues.size)
        s, t = 0.3, 1.1
        at_sum = evolve_linear(m, Heat(), c, np.array([s + t]))[0]
        composed = evolve_linear(
            m, Heat(), evolve_linear(m, Heat(), c, np.array([s]))[0],
            np.array([t]))[0]
        assert np.max(np.abs(at_sum - composed)) < 1e-12

    def test_index_mismatch(self):
        m = torus_model(truncation=100)
        with pytest.raises(ValidationError):
            evolve_linear(m, Heat(), np.ones(3), np.array([0.0, 1.0]))
        with pytest.raises(ValidationError):
            evolve_linear(m, Heat(), np.ones(m.eigenvalues.size),
                          np.array([0.0, 1.0]),
                          w1_coeffs=np.ones(m.eigenvalues.size))


class TestDuhamel:
    def setup_method(self):
        self.m = SpectralModel(Explicit(((0.0, 1), (9.0, 2))),
                               nominal_lambda=1.0)
        self.times = np.linspace(0.0, 2.0, 2001)
        self.zero = np.zeros(2)

    def test_zero_forcing_equals_linear(self):
        F = np.zeros((self.times.size, 2))
        out = duhamel(self.m, HeatType(0.6), np.ones(2), F, self.times)
        lin = evolve_linear(self.m, HeatType(0.6), np.ones(2), self.times)
        assert np.array_equal(out, lin)

    def test_heat_constant_forcing_closed_form(self):
        c, lam = 0.7, 9.0
        F = np.zeros((self.times.size, 2))
        F[:, 1] = c
        out = duhamel(self.m, Heat(), self.zero, F, self.times)
        exact = c * (1.0 - np.exp(-lam * self.times)) / lam
        dt = self.times[1] - self.times[0]
        assert np.max(np.abs(out[:, 1] - exact)) < 5.0 * dt

    def test_heat_type_constant_forcing_oracle(self):
        c, lam, beta = 0.7, 9.0, 0.6
        F = np.zeros((self.times.size, 2))
        F[:, 1] = c
        out = duhamel(self.m, HeatType(beta), self.zero, F, self.times)
        exact = c * self.times ** beta * mittag_leffler(
            MLParams(beta, beta + 1.0), -lam * self.times ** beta)
        dt = self.times[1] - self.times[0]
        assert np.max(np.abs(out[:, 1] - exact)) < 10.0 * dt ** beta

    def test_grid_mismatch(self):
        F = np.zeros((10, 2))
        with pytest.raises(ValidationError):
            duhamel(self.m, Heat(), self.zero, F, self.times)
        bad_times = np.array([0.0, 0.1, 0.3])
        with pytest.raises(ValidationError):
            duhamel(self.m, Heat(), self.zero, np.zeros((3, 2)), bad_times)
        with pytest.raises(ValidationError):
            duhamel(self.m, Heat(), self.zero, np.zeros((3, 2)),
                    np.array([1.0, 2.0, 3.0]))

    def test_kind_restriction(self):
        F = np.zeros((self.times.size, 2))
        with pytest.raises(ValidationError):
            duhamel(self.m, SchrodingerType(0.5), self.zero, F, self.times)


class TestSynthesizeAnalyze:
    def test_constant_coefficient(self):
        f = synthesize({(0, 0): 2.5}, n=2, N=8)
        assert np.max(np.abs(f.values - 2.5)) < 1e-14

    def test_single_frequency(self):
        f = synthesize({1: 1.0}, n=1, N=16)
        x = 2.0 * np.pi * np.arange(16) / 16
        assert np.max(np.abs(f.values - np.exp(1j * x))) < 1e-13

    def test_round_trip(self):
        rng = np.random.default_rng(11)
        for n, N in [(1, 32), (2, 16)]:
            spec = rng.standard_normal((N,) * n) \
                + 1j * rng.standard_normal((N,) * n)
            back = analyze(synthesize(spec))
            assert np.max(np.abs(back - spec)) < 1e-12

    def test_aliasing_error(self):
        with pytest.raises(AliasingError):
            synthesize({5: 1.0}, n=1, N=8)
        with pytest.raises(AliasingError):
            synthesize({(0, 9): 1.0}, n=2, N=16)

    def test_nyquist_fold(self):
        a = synthesize({4: 1.0}, n=1, N=8)
        b = synthesize({-4: 1.0}, n=1, N=8)
        assert np.max(np.abs(a.values - b.values)) < 1e-14

    def test_input_validation(self):
        with pytest.raises(ValidationError):
            synthesize({1: 1.0})  # mapping needs n, N
        with pytest.raises(ValidationError):
            synthesize(np.zeros((4, 6)))
        with pytest.raises(ValidationError):
            FieldOnTorus(1, 5, np.zeros(5))
        with pytest.raises(ValidationError):
            FieldOnTorus(1, 8, np.zeros(7))

    def test_random_mean_zero(self):
        rng = np.random.default_rng(0)
        f = random_mean_zero(2, 16, rng)
        assert f.values.dtype.kind == "f"
        assert abs(np.mean(f.values)) < 1e-13


class TestNorms:
    @pytest.mark.parametrize("p", [1.0, 2.0, 4.0, math.inf])
    def test_constant_field(self, p):
        f = FieldOnTorus(1, 8, np.full(8, -2.5))
        assert abs(lp_norm(f, p) - 2.5) < 1e-14

    def test_single_mode_l2(self):
        assert abs(lp_norm(synthesize({1: 1.0}, n=1, N=16), 2.0) - 1.0) \
            < 1e-14

    @settings(deadline=None, max_examples=25)
    @given(scale=st.floats(-10.0, 10.0), p=st.sampled_from([1.0, 2.0, 3.5]))
    def test_homogeneity(self, scale, p):
        rng = np.random.default_rng(5)
        vals = rng.standard_normal(16)
        base = lp_norm(FieldOnTorus(1, 16, vals), p)
        scaled = lp_norm(FieldOnTorus(1, 16, scale * vals), p)
        assert abs(scaled - abs(scale) * base) <= 1e-12 * max(1.0, base)

    def test_exponent_validation(self):
        f = FieldOnTorus(1, 8, np.ones(8))
        with pytest.raises(ValidationError):
            lp_norm(f, 0.5)

    def test_mixed_norm_constant_trajectory(self):
        f = FieldOnTorus(1, 8, np.full(8, 3.0))
        traj = [(t, f) for t in np.linspace(0.0, 2.0, 41)]
        got = mixed_norm(traj, MixedNormSpec(2.0, 4.0, (0.0, 2.0)))
        assert abs(got - 3.0 * 2.0 ** 0.5) < 1e-12
        got_inf = mixed_norm(traj, MixedNormSpec(math.inf, 4.0, (0.0, 2.0)))
        assert abs(got_inf - 3.0) < 1e-14

    def test_mixed_norm_validation(self):
        f = FieldOnTorus(1, 8, np.ones(8))
        with pytest.raises(ValidationError):
            MixedNormSpec(0.5, 2.0, (0.0, 1.0))
        with pytest.raises(ValidationError):
            MixedNormSpec(2.0, 2.0, (1.0, 1.0))
        with pytest.raises(ValidationError):
            mixed_norm([(0.0, f)], MixedNormSpec(2.0, 2.0, (0.0, 1.0)))


class TestBoundFunction:
    def test_equal_exponents_trivial(self):
        m = SpectralModel(PrescribedExponent(1.0))
        assert bound_function(m, HeatType(0.5), 2.0, 2.0, 1.0) == 1.0

    def test_exponent_validation(self):
        m = SpectralModel(PrescribedExponent(1.0))
        for p, q in [(1.0, 4.0), (2.5, 4.0), (1.5, 1.5), (2.0, math.inf)]:
            with pytest.raises(ValidationError):
                bound_function(m, Heat(), p, q, 1.0)
        with pytest.raises(ValidationError):
            bound_function(m, Heat(), 1.5, 4.0, 0.0)

    def test_unbounded_supremum(self):
        m = SpectralModel(PrescribedExponent(4.0))
        with pytest.raises(UnboundedSupremumError):
            bound_function(m, Heat(), 4.0 / 3.0, 4.0, 1.0)

    def test_prescribed_matches_analytic_maximizer(self):
        # f(v) = v^(lam e)/(1+vM) peaks at v* = lam e / ((1-lam e) M)
        lam, beta = 1.0, 0.5
        m = SpectralModel(PrescribedExponent(lam))
        for (p, q) in [(4.0 / 3.0, 4.0), (2.0, 4.0)]:
            e = 1.0 / p - 1.0 / q
            for t in [0.05, 1.0, 20.0]:
                M = float(kernels.cumulative_integral(kernels.PowerLaw(beta),
                                                      t))
                v_star = lam * e / ((1.0 - lam * e) * M)
                exact = v_star ** (lam * e) / (1.0 + v_star * M)
                got = bound_function(m, HeatType(beta), p, q, t)
                assert abs(got - exact) / exact < 1e-6

    def test_prescribed_slope(self):
        m = SpectralModel(PrescribedExponent(1.0))
        t = np.geomspace(1e-2, 1e2, 17)
        B = [bound_function(m, HeatType(0.5), 4.0 / 3.0, 4.0, tt)
             for tt in t]
        slope = np.polyfit(np.log(t), np.log(B), 1)[0]
        assert abs(slope - (-0.25)) < 0.01 * 0.25

    def test_saturated_exponent_gives_inverse_mass(self):
        m = SpectralModel(PrescribedExponent(2.0))  # lam * e = 1
        t = 2.0
        M = float(kernels.cumulative_integral(kernels.PowerLaw(0.5), t))
        got = bound_function(m, HeatType(0.5), 4.0 / 3.0, 4.0, t)
        assert abs(got - 1.0 / M) < 1e-14

    def test_enumerated_exact_jump_max(self):
        m = torus_model(truncation=10**4)
        t = 0.1
        got = bound_function(m, Heat(), 4.0 / 3.0, 4.0, t)
        # independent route: scan counting-function values at the jumps
        eigs = m.eigenvalues[m.eigenvalues > 0.0]
        counts = np.cumsum(m.multiplicities[m.eigenvalues > 0.0])
        brute = np.max(counts ** 0.5 * np.exp(-t * eigs))
        assert abs(got - brute) < 1e-14

    def test_wave_kind_algebraic_psi(self):
        m = SpectralModel(PrescribedExponent(1.0))
        t = 2.0
        got = bound_function(m, WaveType(1.5), 2.0, 4.0, t)
        e = 0.25
        v = np.geomspace(1e-6, m.horizon, 4001)
        brute = np.max(v ** e / (1.0 + v * t ** 1.5))
        assert abs(got - brute) / brute < 1e-4

    def test_horizon_error_at_truncation_edge(self):
        m = SpectralModel(TorusLaplacian(1), truncation=10)
        with pytest.raises(HorizonError):
            bound_function(m, Heat(), 4.0 / 3.0, 4.0, 1e-6)


class TestDecaySlope:
    def test_single_mode_matches_closed_form(self):
        m = torus_model()
        w0 = synthesize({1: 1.0, -1: 1.0}, n=1, N=32)
        w0 = FieldOnTorus(1, 32, w0.values.real)
        res = decay_slope(m, Heat(), 4.0 / 3.0, 4.0, w0, (0.02, 0.5))
        times = res["times"]
        base = lp_norm(w0, 4.0) / lp_norm(w0, 4.0 / 3.0)
        exact = base * np.exp(-times)  # single eigenvalue 1
        assert np.max(np.abs(res["ratios"] - exact)) < 1e-12
        expected_slope = np.polyfit(np.log(times), np.log(exact), 1)[0]
        assert abs(res["slope"] - expected_slope) < 1e-10
        assert res["pre_gap_cutoff"] == 1.0
        assert res["window_within_pre_gap"]

    def test_mean_zero_required(self):
        m = torus_model()
        w0 = FieldOnTorus(1, 16, np.ones(16))
        with pytest.raises(ValidationError):
            decay_slope(m, Heat(), 1.5, 4.0, w0, (0.1, 0.5))

    def test_envelope_constant_stable_heat(self):
        m = torus_model()
        rng = np.random.default_rng(1)
        c_a, c_b = 0.0, 0.0
        for _ in range(10):
            w0 = random_mean_zero(1, 32, rng)
            r_a = decay_slope(m, Heat(), 4.0 / 3.0, 4.0, w0, (0.02, 0.5))
            r_b = decay_slope(m, Heat(), 4.0 / 3.0, 4.0, w0, (0.03, 0.75))
            c_a = max(c_a, r_a["envelope_constant"])
            c_b = max(c_b, r_b["envelope_constant"])
        assert 0.0 < c_a < 10.0
        assert abs(c_b - c_a) / c_a < 0.2

    def test_prescribed_weights_envelope(self):
        # a non-torus spectrum rank-embedded onto torus frequencies
        m = SpectralModel(PrescribedExponent(1.0), truncation=10**4)
        rng = np.random.default_rng(2)
        w0 = random_mean_zero(1, 32, rng)
        r_a = decay_slope(m, HeatType(0.5), 4.0 / 3.0, 4.0, w0, (0.05, 0.4))
        r_b = decay_slope(m, HeatType(0.5), 4.0 / 3.0, 4.0, w0,
                          (0.075, 0.6))
        assert math.isfinite(r_a["envelope_constant"])
        assert abs(r_b["envelope_constant"] - r_a["envelope_constant"]) \
            / r_a["envelope_constant"] < 0.2

    def test_underflow_window(self):
        m = torus_model()
        w0 = synthesize({1: 1.0, -1: 1.0}, n=1, N=16)
        w0 = FieldOnTorus(1, 16, w0.values.real)
        with pytest.raises(DegenerateWindowError):
            decay_slope(m, Heat(), 1.5, 4.0, w0, (1.0, 650.0))


class TestPicard:
    def test_zero_data_one_iteration(self):
        m = torus_model()
        w0 = FieldOnTorus(1, 16, np.zeros(16))
        for mu in (1.0, -1.0):
            res = picard_solve(m, Heat(), 3.0, mu, w0, T=0.1, dt=1e-2)
            assert res["iterations"] == 1
            assert res["contraction_ratios"] == []
            assert lp_norm(res["trajectory"][-1], 2.0) == 0.0

    def test_small_data_contracts(self):
        m = torus_model()
        rng = np.random.default_rng(9)
        raw = random_mean_zero(1, 64, rng)
        w0 = FieldOnTorus(1, 64, raw.values * (1e-2 / lp_norm(raw, 2.0)))
        res = picard_solve(m, Heat(), 3.0, 1.0, w0, T=0.25, dt=1e-3,
                           tol=1e-9)
        assert res["iterations"] <= 20
        assert all(r < 0.5 for r in res["contraction_ratios"])
        assert res["residual"] < 10.0 * 1e-9

    def test_fixed_point_stable_under_dt_halving(self):
        m = torus_model()
        rng = np.random.default_rng(9)
        raw = random_mean_zero(1, 32, rng)
        w0 = FieldOnTorus(1, 32, raw.values * (1e-2 / lp_norm(raw, 2.0)))
        dt = 2e-3
        res_a = picard_solve(m, HeatType(0.5), 3.0, -1.0, w0, T=0.2, dt=dt,
                             tol=1e-10)
        res_b = picard_solve(m, HeatType(0.5), 3.0, -1.0, w0, T=0.2,
                             dt=dt / 2, tol=1e-10)
        end_a = res_a["trajectory"][-1].values
        end_b = res_b["trajectory"][-1].values
        diff = lp_norm(FieldOnTorus(1, 32, end_a - end_b), 2.0)
        assert diff < 5.0 * dt

    def test_wave_kind_converges(self):
        m = torus_model()
        rng = np.random.default_rng(4)
        raw = random_mean_zero(1, 32, rng)
        w0 = FieldOnTorus(1, 32, raw.values * (1e-2 / lp_norm(raw, 2.0)))
        w1 = FieldOnTorus(1, 32, np.zeros(32))
        res = picard_solve(m, WaveType(1.5), 2.0, -1.0, w0, T=0.2, dt=1e-3,
                           tol=1e-9, w1=w1)
        assert res["residual"] < 1e-8

    def test_large_data_divergence_detected(self):
        m = torus_model()
        rng = np.random.default_rng(9)
        raw = random_mean_zero(1, 64, rng)
        w0 = FieldOnTorus(1, 64, raw.values * (1e3 / lp_norm(raw, 2.0)))
        with pytest.raises(DivergenceError):
            picard_solve(m, Heat(), 3.0, 1.0, w0, T=0.5, dt=1e-3)

    def test_max_iter_exhaustion(self):
        m = torus_model()
        rng = np.random.default_rng(9)
        raw = random_mean_zero(1, 32, rng)
        w0 = FieldOnTorus(1, 32, raw.values * (1e-2 / lp_norm(raw, 2.0)))
        with pytest.raises(ConvergenceError):
            picard_solve(m, Heat(), 3.0, 1.0, w0, T=0.1, dt=1e-2,
                         tol=1e-16, max_iter=1)

    def test_validation(self):
        m = torus_model()
        w0 = FieldOnTorus(1, 16, np.zeros(16))
        with pytest.raises(ValidationError):
            picard_solve(m, Heat(), 1.0, 1.0, w0, T=0.1, dt=1e-2)
        with pytest.raises(ValidationError):
            picard_solve(m, Heat(), 3.0, 2.0, w0, T=0.1, dt=1e-2)
        with pytest.raises(ValidationError):
            picard_solve(m, SchrodingerType(0.5), 3.0, 1.0, w0, T=0.1,
                         dt=1e-2)
        with pytest.raises(ValidationError):
            picard_solve(m, Heat(), 3.0, 1.0, w0, T=0.1, dt=1e-2, w1=w0)


class TestFieldText:
    def test_round_trip_real(self):
        rng = np.random.default_rng(6)
        f = FieldOnTorus(1, 8, rng.standard_normal(8))
        g = field_from_text(field_to_text(f))
        assert g.n == 1 and g.N == 8
        assert np.array_equal(g.values, f.values)

    def test_round_trip_complex(self):
        rng = np.random.default_rng(6)
        vals = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        f = FieldOnTorus(2, 4, vals)
        g = field_from_text(field_to_text(f))
        assert np.array_equal(g.values, f.values)

    def test_malformed_documents(self):
        with pytest.raises(ValidationError):
            field_from_text("")
        with pytest.raises(ValidationError):
            field_from_text("oops\n1,2\n")
        with pytest.raises(ValidationError):
            field_from_text("1,4\n1,0\n2,0\n")
        with pytest.raises(ValidationError):
            field_from_text("1,4\n1,0\n2,0\n3,0\nnope\n")
