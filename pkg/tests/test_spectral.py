import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from rtfssm.core import RtfParams, alias_fold, rel_err, series_expand
from rtfssm.errors import ChannelMismatch, DenominatorZeroOnUnitCircle, LengthTooShort
from rtfssm.spectral import denominator_spectrum, fft_conv, fft_roots_eval, kernel_generate
from rtfssm.stability import initialize, random_stable_params
from rtfssm.statespace import to_truncated


def direct_conv(u, h):
    L = len(u)
    return np.array([sum(h[k] * u[t - k] for k in range(t + 1)) for t in range(L)])


class TestFftRootsEval:
    def test_constant(self):
        np.testing.assert_allclose(fft_roots_eval([2.5, 0, 0, 0]), [2.5] * 4)

    def test_delay(self):
        np.testing.assert_allclose(fft_roots_eval([0.0, 1.0]), [1, -1], atol=1e-15)

    def test_dft_sum(self):
        np.testing.assert_allclose(
            fft_roots_eval([1.0, 2, 3, 4]), [10, -2 + 2j, -2, -2 - 2j], atol=1e-12
        )

    def test_matches_polynomial_evaluation(self, rng):
        c = rng.standard_normal(7)
        z = np.exp(-2j * np.pi * np.arange(7) / 7)
        ref = [np.sum(c * zk ** np.arange(7)) for zk in z]
        np.testing.assert_allclose(fft_roots_eval(c), ref, atol=1e-12)


class TestKernelGenerate:
    def test_identity(self):
        np.testing.assert_allclose(kernel_generate(initialize("zero", 3), 8), [[1] + [0] * 7], atol=1e-15)

    def test_fir_embedding(self):
        p = RtfParams(a=[0.0, 0.0], b=[3.0, 4.0], h0=[2.0])
        np.testing.assert_allclose(kernel_generate(p, 4), [[2, 3, 4, 0]], atol=1e-14)

    def test_corrected_form_is_aliased(self):
        p = RtfParams(a=[-0.5], b=[1.0], h0=[0.0])
        # h_4 + h_8 + ... folds onto t=0: 0.125 / (1 - 1/16) = 2/15
        expected = [2 / 15, 16 / 15, 8 / 15, 4 / 15]
        np.testing.assert_allclose(kernel_generate(p, 4), [expected], rtol=1e-13)
        np.testing.assert_allclose(
            kernel_generate(p, 4), alias_fold(series_expand(p, 256), 4), rtol=1e-13
        )

    @pytest.mark.parametrize("n, L", [(1, 16), (4, 64), (16, 256), (64, 1024)])
    def test_truncated_form_is_exact(self, rng, n, L):
        p = random_stable_params(rng, n, d=3, m=3)
        got = kernel_generate(to_truncated(p, L), L)
        assert rel_err(got, series_expand(p, L)) < 1e-9

    def test_shared_denominators(self, rng):
        p = random_stable_params(rng, 3, d=4, m=2, max_radius=0.5)
        ref = series_expand(p, 128)
        got = kernel_generate(to_truncated(p, 128), 128)
        assert rel_err(got, ref) < 1e-10

    def test_too_short(self):
        with pytest.raises(LengthTooShort):
            kernel_generate(initialize("zero", 4), 4)

    def test_pole_on_unit_circle(self):
        p = RtfParams(a=[-1.0], b=[1.0], h0=[0.0])
        with pytest.raises(DenominatorZeroOnUnitCircle):
            kernel_generate(p, 8)
        with pytest.raises(DenominatorZeroOnUnitCircle):
            denominator_spectrum(np.array([[-1.0]]), 8)

    def test_real_output(self, rng):
        p = random_stable_params(rng, 6, d=2)
        assert kernel_generate(p, 33).dtype == np.float64


class TestFftConv:
    def test_identity(self, rng):
        u = rng.standard_normal(10)
        np.testing.assert_allclose(fft_conv(u, np.eye(10)[0]), u, atol=1e-14)

    def test_unit_delay(self, rng):
        u = rng.standard_normal(10)
        np.testing.assert_allclose(fft_conv(u, np.eye(10)[1]), np.r_[0, u[:-1]], atol=1e-14)

    def test_small_example(self):
        np.testing.assert_allclose(fft_conv([1.0, 2, 3], [1.0, 1, 0]), [1, 3, 5], atol=1e-14)

    def test_batch_and_channels(self, rng):
        u = rng.standard_normal((5, 2, 40))
        h = rng.standard_normal((2, 40))
        y = fft_conv(u, h)
        assert y.shape == u.shape
        np.testing.assert_allclose(y[3, 1], direct_conv(u[3, 1], h[1]), atol=1e-12)

    def test_longer_kernel_is_cut(self, rng):
        u = rng.standard_normal(12)
        h = rng.standard_normal(30)
        np.testing.assert_allclose(fft_conv(u, h), direct_conv(u, h[:12]), atol=1e-12)

    def test_channel_mismatch(self, rng):
        with pytest.raises(ChannelMismatch):
            fft_conv(rng.standard_normal((3, 8)), rng.standard_normal((2, 8)))

    @given(arrays(np.float64, st.integers(1, 40), elements=st.floats(-10, 10)), st.data())
    @settings(max_examples=60, deadline=None)
    def test_matches_direct_summation(self, u, data):
        h = data.draw(arrays(np.float64, u.shape, elements=st.floats(-10, 10)))
        ref = direct_conv(u, h)
        np.testing.assert_allclose(fft_conv(u, h), ref, atol=1e-9 * (1 + np.abs(ref).max()))

    def test_causality(self, rng):
        u = rng.standard_normal(64)
        h = rng.standard_normal(64)
        v = u.copy()
        v[40:] += rng.standard_normal(24)
        np.testing.assert_allclose(fft_conv(u, h)[:40], fft_conv(v, h)[:40], atol=1e-12)
