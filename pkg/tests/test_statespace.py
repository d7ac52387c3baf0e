import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from rtfssm.core import RtfParams, rel_err, series_expand
from rtfssm.errors import NearSingularCorrection, NeedsCorrectedNumerator, StateSizeMismatch
from rtfssm.spectral import fft_conv, kernel_generate
from rtfssm.stability import initialize, random_stable_params, sample_stable_denominator
from rtfssm.statespace import (
    DenseSsm,
    companion_bank,
    companion_matrix,
    companion_power,
    companion_realize,
    correct_numerator,
    dense_impulse,
    impulse_response,
    prefill_naive,
    run_recurrent,
    step,
    to_corrected,
    to_truncated,
    truncate_numerator,
)

FIRST_ORDER = RtfParams(a=[-0.5], b=[1.0], h0=[0.0])


class TestDenseImpulse:
    def test_nilpotent_scalar(self):
        ssm = DenseSsm(np.zeros((1, 1)), np.ones(1), np.ones(1), 0.0)
        np.testing.assert_allclose(dense_impulse(ssm, 4), [0, 1, 0, 0])

    def test_geometric(self):
        ssm = DenseSsm(np.array([[0.5]]), np.ones(1), np.ones(1), 0.0)
        np.testing.assert_allclose(dense_impulse(ssm, 4), [0, 1, 0.5, 0.25])

    def test_companion_matches_series(self, rng):
        p = random_stable_params(rng, 6)
        A, B, C = companion_realize(p, 0).matrices()
        np.testing.assert_allclose(
            dense_impulse(DenseSsm(A, B, C, p.h0[0]), 30), series_expand(p, 30)[0], atol=1e-13
        )


class TestCompanion:
    def test_layout(self):
        p = RtfParams(a=[0.3, -0.2], b=[1.5, 2.5], h0=[0.7])
        ssm = companion_realize(p, 0)
        A, B, C = ssm.matrices()
        np.testing.assert_array_equal(A, [[-0.3, 0.2], [1.0, 0.0]])
        np.testing.assert_array_equal(B, [1.0, 0.0])
        np.testing.assert_array_equal(C, [1.5, 2.5])
        assert ssm.h0 == 0.7

    def test_zero_denominator_is_shift(self):
        np.testing.assert_array_equal(companion_matrix(np.zeros(3)), np.diag(np.ones(2), -1))

    def test_scalar_pole_sign(self):
        A, *_ = companion_realize(FIRST_ORDER, 0).matrices()
        np.testing.assert_array_equal(A, [[0.5]])

    def test_truncated_rejected(self):
        with pytest.raises(NeedsCorrectedNumerator):
            companion_realize(initialize("zero", 2, trained_length=8), 0)
        with pytest.raises(NeedsCorrectedNumerator):
            companion_bank(initialize("zero", 2, trained_length=8))


class TestStep:
    def test_hand_recurrence(self):
        ssm = companion_realize(FIRST_ORDER, 0)
        y, x = step(ssm, np.zeros(1), 1.0)
        assert y == 0.0 and x.tolist() == [1.0]
        y, x = step(ssm, x, 0.0)
        assert y == 1.0 and x.tolist() == [0.5]

    def test_identity_filter_ignores_state(self, rng):
        ssm = companion_realize(initialize("zero", 4), 0)
        x = rng.standard_normal(4)
        for u in rng.standard_normal(5):
            y, x = step(ssm, x, u)
            assert y == u

    def test_matches_dense_multiply(self, rng):
        p = random_stable_params(rng, 2)
        ssm = companion_realize(p, 0)
        A, B, C = ssm.matrices()
        h0 = ssm.h0
        x = rng.standard_normal(2)
        y, new = step(ssm, x, 0.7)
        assert y == pytest.approx(C @ x + h0 * 0.7, rel=1e-14)
        np.testing.assert_allclose(new, A @ x + B * 0.7, rtol=1e-14)

    def test_state_size_checked(self):
        with pytest.raises(StateSizeMismatch):
            step(companion_realize(FIRST_ORDER, 0), np.zeros(2), 1.0)


class TestRecurrentVsConvolution:
    @pytest.mark.parametrize("n", [1, 3, 17, 64])
    def test_equivalence(self, rng, n):
        p = random_stable_params(rng, n, d=2, m=2)
        u = rng.standard_normal((2, 300))
        y_rec, _ = run_recurrent(companion_bank(p), u)
        y_fft = fft_conv(u, impulse_response(p, 300))
        assert np.max(np.abs(y_rec - y_fft)) < 1e-8

    def test_prefill_then_step(self, rng):
        p = random_stable_params(rng, 5)
        ssm = companion_bank(p)
        u = rng.standard_normal((1, 120))
        x = prefill_naive(ssm, u[:, :80])
        tail, _ = run_recurrent(ssm, u[:, 80:], state=x)
        full = fft_conv(u, impulse_response(p, 120))
        np.testing.assert_allclose(tail, full[:, 80:], atol=1e-8)

    def test_prefill_examples(self):
        ssm = companion_realize(FIRST_ORDER, 0)
        np.testing.assert_array_equal(prefill_naive(ssm, np.zeros(0)), [0.0])
        np.testing.assert_allclose(prefill_naive(ssm, [1.0, 1.0]), [1.5])


class TestCompanionPower:
    def test_shift_squared(self):
        np.testing.assert_array_equal(companion_power(np.zeros(2), 2), np.zeros((2, 2)))

    def test_first_power(self, rng):
        a = rng.standard_normal(4)
        np.testing.assert_array_equal(companion_power(a, 1), companion_matrix(a))

    def test_scalar(self):
        np.testing.assert_allclose(companion_power([-0.5], 4), [[0.0625]])

    @pytest.mark.parametrize("k", [0, 3, 10, 33])
    def test_matches_matrix_power(self, rng, k):
        a = sample_stable_denominator(rng, 5)
        np.testing.assert_allclose(
            companion_power(a, k), np.linalg.matrix_power(companion_matrix(a), k), atol=1e-13
        )


class TestNumeratorCorrection:
    def test_nilpotent_is_identity(self, rng):
        b = rng.standard_normal(3)
        np.testing.assert_array_equal(correct_numerator(np.zeros(3), b, 5), b)
        np.testing.assert_array_equal(truncate_numerator(np.zeros(3), b, 5), b)

    def test_scalar_examples(self):
        np.testing.assert_allclose(correct_numerator([-0.5], [1.0], 4), [16 / 15], rtol=1e-15)
        np.testing.assert_allclose(truncate_numerator([-0.5], [16 / 15], 4), [1.0], rtol=1e-15)

    @given(st.integers(1, 16), st.integers(0, 2**32 - 1), st.sampled_from([16, 64, 500]))
    @settings(max_examples=40, deadline=None)
    def test_round_trip(self, n, seed, L):
        rng = np.random.default_rng(seed)
        a = sample_stable_denominator(rng, n)
        b = rng.standard_normal(n)
        cond = np.linalg.cond(np.eye(n) - companion_power(a, L), 1)
        assume(cond <= 1e4)
        assert rel_err(correct_numerator(a, truncate_numerator(a, b, L), L), b) < 1e-12

    @given(st.integers(1, 16), st.integers(0, 2**32 - 1), st.sampled_from([16, 64, 500]))
    @settings(max_examples=40, deadline=None)
    def test_round_trip_error_tracks_condition(self, n, seed, L):
        # rounding b~ to double already costs cond(I - A^L) * eps in b
        rng = np.random.default_rng(seed)
        a = sample_stable_denominator(rng, n)
        b = rng.standard_normal(n)
        cond = np.linalg.cond(np.eye(n) - companion_power(a, L), 1)
        assume(cond < 1e12)
        err = rel_err(correct_numerator(a, truncate_numerator(a, b, L), L), b)
        assert err <= max(1e-12, 1e-14 * cond)

    def test_pole_on_root_of_unity_is_singular(self):
        # z - 1 has its pole on every root of unity, so I - A^L = 0
        with pytest.raises(NearSingularCorrection):
            correct_numerator([-1.0], [1.0], 4)

    def test_truncated_spectrum_matches_truncated_series(self, rng):
        # the length-L truncation of the corrected kernel has the spectrum b~(z)/a(z) + h0'
        p = random_stable_params(rng, 4, max_radius=0.9)
        L = 32
        t = to_truncated(p, L)
        spec = np.fft.rfft(np.r_[0, t.b[0], np.zeros(L - 5)]) / np.fft.rfft(
            np.r_[1, t.a[0], np.zeros(L - 5)]
        ) + t.h0[0]
        ref = np.fft.rfft(series_expand(p, L)[0])
        assert np.max(np.abs(spec - ref)) < 1e-9

    def test_params_round_trip(self, rng):
        p = random_stable_params(rng, 7, d=4, m=2)
        back = to_corrected(to_truncated(p, 128))
        assert back.numerator_form == "corrected" and back.trained_length is None
        assert rel_err(back.b, p.b) < 1e-12
        assert rel_err(back.h0, p.h0) < 1e-12

    def test_to_corrected_is_noop_on_corrected(self):
        assert to_corrected(FIRST_ORDER) == FIRST_ORDER

    def test_truncated_kernel_uses_h0_shift(self):
        t = to_truncated(FIRST_ORDER, 4)
        # h_4 = 0.125 would alias onto t=0 without the feedthrough shift
        assert t.h0[0] == pytest.approx(-0.125)
        np.testing.assert_allclose(kernel_generate(t, 4), [[0, 1, 0.5, 0.25]], atol=1e-15)


class TestImpulseResponse:
    @pytest.mark.parametrize("L", [1, 2, 5, 40])
    def test_exact_first_samples(self, rng, L):
        p = random_stable_params(rng, 6, d=2)
        np.testing.assert_allclose(impulse_response(p, L), series_expand(p, L), atol=1e-12)

    def test_truncated_input(self, rng):
        p = random_stable_params(rng, 3)
        t = to_truncated(p, 50)
        np.testing.assert_allclose(impulse_response(t, 50), series_expand(p, 50), atol=1e-12)
