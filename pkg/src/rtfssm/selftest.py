"""Oracle suites run by ``rtf selftest``.

Every check compares two independent routes (FFT vs long division, recurrence
vs convolution, analytic vs finite-difference gradients, ...). Functions are
looked up through their modules at call time so a patched implementation is
caught. ``RTF_SELFTEST_SCALE`` (``quick`` or ``full``) sets instance counts.
"""

from __future__ import annotations

import json
import os
import time

import numpy as np

from . import bench, convert, core, grad, serialize, spectral, stability, statespace

SCALES = {"quick": 3, "full": 20}


def _scale() -> int:
    name = os.environ.get("RTF_SELFTEST_SCALE", "quick")
    if name not in SCALES:
        raise ValueError(f"RTF_SELFTEST_SCALE must be one of {sorted(SCALES)}, got {name!r}")
    return SCALES[name]


def check_series_examples(rng, count):
    p = core.RtfParams(a=[-0.5], b=[1.0], h0=[0.0])
    ok = np.allclose(core.series_expand(p, 4), [[0, 1, 0.5, 0.25]], rtol=0, atol=1e-15)
    p2 = core.RtfParams(a=[0.0, -0.25], b=[1.0, 0.0], h0=[0.0])
    ok &= np.allclose(core.series_expand(p2, 4), [[0, 1, 0, 0.25]], rtol=0, atol=1e-15)
    return bool(ok), 0.0


def check_truncation_identity(rng, count):
    worst = 0.0
    for _ in range(count):
        n = int(rng.choice([1, 4, 16]))
        L = int(rng.choice([64, 256, 1024]))
        p = stability.random_stable_params(rng, n, d=2, m=1)
        ref = core.series_expand(p, L)
        got = spectral.kernel_generate(statespace.to_truncated(p, L), L)
        worst = max(worst, core.rel_err(got, ref))
    return worst <= 1e-9, worst


def check_alias_identity(rng, count):
    worst = 0.0
    for _ in range(count):
        n = int(rng.integers(1, 9))
        L = 64
        p = stability.random_stable_params(rng, n, max_radius=0.9)
        folded = core.alias_fold(core.series_expand(p, 8 * L), L)
        worst = max(worst, float(np.max(np.abs(spectral.kernel_generate(p, L) - folded))))
    return worst <= 1e-9, worst


def check_fft_conv(rng, count):
    worst = 0.0
    for _ in range(count):
        L = int(rng.integers(1, 200))
        u = rng.standard_normal(L)
        h = rng.standard_normal(L)
        direct = np.array([np.dot(h[: t + 1][::-1], u[: t + 1]) for t in range(L)])
        worst = max(worst, core.rel_err(spectral.fft_conv(u, h), direct))
    return worst <= 1e-10, worst


def check_recurrence(rng, count):
    worst = 0.0
    for _ in range(count):
        n = int(rng.integers(1, 33))
        L = 512
        p = stability.random_stable_params(rng, n, d=2, m=2)
        u = rng.standard_normal((2, L))
        y_fft = spectral.fft_conv(u, statespace.impulse_response(p, L))
        y_rec, _ = statespace.run_recurrent(statespace.companion_bank(p), u)
        worst = max(worst, float(np.max(np.abs(y_fft - y_rec))))
    return worst <= 1e-8, worst


def check_correction_round_trip(rng, count):
    worst = 0.0
    for _ in range(count):
        n = int(rng.integers(1, 17))
        a = stability.sample_stable_denominator(rng, n)
        if np.linalg.cond(np.eye(n) - statespace.companion_power(a, 64), 1) > 1e4:
            continue  # the round trip is conditioning-limited, not a defect
        b = rng.standard_normal(n)
        bt = statespace.truncate_numerator(a, b, 64)
        worst = max(worst, core.rel_err(statespace.correct_numerator(a, bt, 64), b))
    return worst <= 1e-12, worst


def check_conversions(rng, count):
    worst = 0.0
    for _ in range(count):
        n = int(rng.integers(1, 9))
        p = stability.random_stable_params(rng, n)
        dense = convert.tf_to_dense(p)
        back = convert.ssm_to_tf(dense)
        worst = max(worst, core.rel_err(back.a, p.a), core.rel_err(back.b, p.b))
        K = np.eye(n) + 0.3 * rng.standard_normal((n, n))
        Kinv = np.linalg.inv(K)
        moved = statespace.DenseSsm(K @ dense.A @ Kinv, K @ dense.B, dense.C @ Kinv, dense.h0)
        sim = convert.ssm_to_tf(moved)
        worst = max(worst, core.rel_err(sim.a, p.a), core.rel_err(sim.b, p.b))
    return worst <= 1e-8, worst


def check_modal(rng, count):
    worst = 0.0
    for _ in range(count):
        n = int(rng.integers(1, 9))
        p = stability.random_stable_params(rng, n, min_gap=0.05)
        modal = convert.tf_to_modal(p, 0)
        worst = max(worst, core.rel_err(convert.modal_kernel(modal, 256), core.series_expand(p, 256)[0]))
    return worst <= 1e-6, worst


def check_stability(rng, count):
    bad = 0
    for _ in range(50 * count):
        n = int(rng.integers(1, 13))
        a = rng.uniform(-1.5, 1.5, n) / np.sqrt(n)
        radius = stability.pole_radii(a)[0]
        if abs(radius - 1.0) > 1e-6 and stability.jury_stable(a) != (radius < 1.0):
            bad += 1
        proj = stability.montel_project(rng.standard_normal(n + 1))
        if not stability.jury_stable(proj):
            bad += 1
    return bad == 0, float(bad)


def check_gradients(rng, count):
    worst = 0.0
    for _ in range(count):
        n = int(rng.integers(1, 6))
        L = int(rng.integers(n + 1, 40))
        p = statespace.to_truncated(stability.random_stable_params(rng, n, max_radius=0.9), L)
        g = rng.standard_normal((1, L))

        def f(theta):
            return float(np.sum(g * spectral.kernel_generate(grad.params_from_flat(p, theta), L)))

        analytic = grad.kernel_backward(p, g, L).flat()
        worst = max(worst, grad.fd_check(f, grad.flatten_params(p), analytic))
        u = rng.standard_normal(L)
        h = rng.standard_normal(L)
        gy = rng.standard_normal(L)
        gu, gh = grad.conv_backward(u, h, gy)
        worst = max(
            worst,
            grad.fd_check(lambda x: float(gy @ spectral.fft_conv(x, h)), u, gu),
            grad.fd_check(lambda x: float(gy @ spectral.fft_conv(u, x)), h, gh),
        )
    return worst <= 1e-5, worst


def check_scan_baseline(rng, count):
    worst = 0.0
    for _ in range(count):
        n = int(rng.integers(1, 9))
        p = stability.random_stable_params(rng, n, min_gap=0.05)
        modal = convert.tf_to_modal(p, 0)
        u = rng.standard_normal(300)
        y, _ = bench.scan_baseline_apply(modal, u)
        ref = spectral.fft_conv(u, convert.modal_kernel(modal, 300))
        worst = max(worst, float(np.max(np.abs(y - ref))))
    return worst <= 1e-8, worst


def check_serialization(rng, count):
    p = stability.random_stable_params(rng, 3, d=2, m=1)
    text = json.dumps(serialize.params_to_doc(p))
    back = serialize.params_from_doc(json.loads(text))
    return back == p and json.dumps(serialize.params_to_doc(back)) == text, 0.0


CHECKS = [
    ("series_expand examples", check_series_examples),
    ("kernel_generate truncated == series_expand", check_truncation_identity),
    ("kernel_generate corrected == alias_fold", check_alias_identity),
    ("fft_conv == direct summation", check_fft_conv),
    ("recurrent == fft convolution", check_recurrence),
    ("correct o truncate == identity", check_correction_round_trip),
    ("ssm_to_tf round trip and similarity invariance", check_conversions),
    ("modal kernel == series_expand", check_modal),
    ("jury_stable == pole radii < 1; Montel => stable", check_stability),
    ("analytic gradients == finite differences", check_gradients),
    ("scan baseline == convolution", check_scan_baseline),
    ("params serialization round trip", check_serialization),
]


def run(out=print, seed: int = 0) -> int:
    """Run every check, report one line each, return the number of failures."""
    count = _scale()
    failures = 0
    for name, fn in CHECKS:
        rng = np.random.default_rng(seed)
        start = time.perf_counter()
        try:
            ok, metric = fn(rng, count)
            detail = f"{metric:.3g}"
        except Exception as exc:  # a crash is a failed check, not a crashed run
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        failures += not ok
        out(f"{'PASS' if ok else 'FAIL'}  {name}  [{detail}, {time.perf_counter() - start:.2f}s]")
    return failures
