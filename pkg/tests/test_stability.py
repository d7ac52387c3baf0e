import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from rtfssm.core import series_expand
from rtfssm.errors import FirTooLong, ZeroVector
from rtfssm.spectral import kernel_generate
from rtfssm.stability import (
    initialize,
    jury_stable,
    montel_margin,
    montel_project,
    pole_radii,
    random_stable_params,
    sample_stable_denominator,
    stability_report,
)


class TestJury:
    @pytest.mark.parametrize(
        "a, expected",
        [
            ([0.5], True),
            ([1.5], False),
            ([-1.0, 0.9], True),
            ([-1.0, 1.1], False),
            ([0.0, 0.0, 0.0], True),
            ([-1.0], False),  # pole on the unit circle is not stable
        ],
    )
    def test_examples(self, a, expected):
        assert jury_stable(a) is expected

    def test_agrees_with_numpy_roots(self, rng):
        for _ in range(300):
            n = int(rng.integers(1, 13))
            a = rng.uniform(-2, 2, n) / np.sqrt(n)
            radius = np.max(np.abs(np.roots(np.r_[1.0, a])))
            if abs(radius - 1) > 1e-6:
                assert jury_stable(a) == (radius < 1)

    @pytest.mark.parametrize("a1", np.linspace(-2.5, 2.5, 11))
    @pytest.mark.parametrize("a2", np.linspace(-1.5, 1.5, 11))
    def test_second_order_triangle(self, a1, a2):
        # z^2 + a1 z + a2 is stable iff |a2| < 1 and |a1| < 1 + a2
        inside = abs(a2) < 1 and abs(a1) < 1 + a2
        on_edge = abs(abs(a2) - 1) < 1e-9 or abs(abs(a1) - (1 + a2)) < 1e-9
        if not on_edge:
            assert jury_stable([a1, a2]) == inside


class TestPoleRadii:
    @pytest.mark.parametrize(
        "a, expected",
        [([-0.5], [0.5]), ([0.0, -0.25], [0.5, 0.5]), ([-1.0, 0.9], [np.sqrt(0.9)] * 2)],
    )
    def test_examples(self, a, expected):
        np.testing.assert_allclose(pole_radii(a), expected, atol=1e-6)

    def test_descending(self, rng):
        r = pole_radii(rng.standard_normal(7))
        assert np.all(np.diff(r) <= 0)


class TestMontel:
    @pytest.mark.parametrize(
        "raw, expected",
        [
            ([1.0, 1, 1, 1], [0.25, 0.25, 0.25]),
            ([0.0, 0, 0, 3.0], [0, 0, 0]),
            ([-2.0, 0, 0, 2], [-0.5, 0, 0]),
        ],
    )
    def test_examples(self, raw, expected):
        np.testing.assert_allclose(montel_project(raw), expected)

    def test_zero_vector(self):
        with pytest.raises(ZeroVector):
            montel_project(np.zeros(4))

    @given(arrays(np.float64, st.integers(2, 13), elements=st.floats(-100, 100)))
    @settings(max_examples=200, deadline=None)
    def test_projection_is_stable(self, raw):
        if not np.any(raw):
            return
        a = montel_project(raw)
        assert montel_margin(a) >= -1e-15
        # strict stability needs the dropped mass to survive rounding
        if abs(raw[-1]) > 1e-9 * np.sum(np.abs(raw)):
            assert jury_stable(a)

    def test_stable_but_infeasible(self):
        a = [-1.0, 0.9]
        assert jury_stable(a)
        assert montel_margin(a) < 0

    def test_batched(self, rng):
        out = montel_project(rng.standard_normal((3, 5)))
        assert out.shape == (3, 4)
        assert np.all(np.sum(np.abs(out), axis=-1) <= 1 + 1e-15)


class TestReport:
    def test_fields(self):
        rep = stability_report([-1.0, 0.9]).to_dict()
        assert rep["jury_stable"] is True
        assert rep["montel_margin"] == pytest.approx(-0.9)
        np.testing.assert_allclose(rep["pole_radii"], [np.sqrt(0.9)] * 2, atol=1e-9)


class TestInitialize:
    def test_zero(self):
        p = initialize("zero", 4)
        np.testing.assert_array_equal(series_expand(p, 6), [[1, 0, 0, 0, 0, 0]])

    def test_fir(self):
        p = initialize("fir", 2, taps=[2.0, 3.0, 4.0])
        np.testing.assert_allclose(series_expand(p, 6), [[2, 3, 4, 0, 0, 0]])

    def test_fir_too_long(self):
        with pytest.raises(FirTooLong):
            initialize("fir", 2, taps=[1.0, 2, 3, 4])

    @pytest.mark.parametrize("seed", [0, 7, 99])
    def test_uniform_montel_stable(self, seed):
        p = initialize("uniform_montel", 8, seed=seed)
        assert jury_stable(p.a[0])
        assert montel_margin(p.a[0]) > 0

    def test_seeded_determinism(self):
        assert initialize("xavier", 5, 2, seed=3) == initialize("xavier", 5, 2, seed=3)

    def test_trained_length_sets_truncated_form(self):
        p = initialize("zero", 3, 2, 2, trained_length=16)
        assert p.numerator_form == "truncated" and p.trained_length == 16
        np.testing.assert_allclose(kernel_generate(p, 16)[:, 0], [1, 1])

    def test_unknown_scheme(self):
        with pytest.raises(ValueError):
            initialize("nope", 2)


class TestSamplers:
    @pytest.mark.parametrize("n", [1, 2, 7, 16, 40, 64])
    def test_denominator_within_radius(self, rng, n):
        a = sample_stable_denominator(rng, n, max_radius=0.9)
        assert a.shape == (n,)
        assert jury_stable(a)
        assert np.max(np.abs(np.roots(np.r_[1.0, a]))) <= 0.9 + 1e-6

    def test_min_gap(self, rng):
        a = sample_stable_denominator(rng, 10, min_gap=0.05)
        z = np.roots(np.r_[1.0, a])
        gaps = np.abs(z[:, None] - z[None, :]) + np.eye(10)
        assert gaps.min() > 0.05 - 1e-9

    def test_params_shapes(self, rng):
        p = random_stable_params(rng, 3, d=4, m=2)
        assert p.a.shape == (2, 3) and p.b.shape == (4, 3) and p.h0.shape == (4,)
