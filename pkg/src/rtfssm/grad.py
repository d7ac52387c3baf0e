"""Reverse-mode gradients of kernel generation and causal convolution.

Both adjoints are circular correlations, which pins their meaning
independently of FFT normalization:

* kernel: with ``w = iFFT(1/A)`` and ``v = iFFT(B/A^2)`` on the l-th roots of
  unity, ``dL/db_k = sum_t g_t w[(t-k) mod l]`` and
  ``dL/da_k = -sum_t g_t v[(t-k) mod l]``;
* convolution: ``dL/dh_t = sum_{s>=t} gy_s u_{s-t}`` and
  ``dL/du_j = sum_{s>=j} gy_s h_{s-j}``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core import RtfParams
from .errors import ChannelMismatch, LengthTooShort, NonFiniteObjective
from .spectral import _padded, denominator_spectrum


@dataclass(frozen=True)
class ParamGrads:
    grad_a: np.ndarray  # (m, n)
    grad_b: np.ndarray  # (d, n)
    grad_h0: np.ndarray  # (d,)

    def flat(self) -> np.ndarray:
        return np.concatenate([self.grad_a.ravel(), self.grad_b.ravel(), self.grad_h0])


def kernel_backward(params: RtfParams, grad_h, length: int) -> ParamGrads:
    """Pull ``dL/dh`` (shape (d, length)) back through :func:`kernel_generate`.

    Gradients are taken with respect to the stored numerator, whatever its form.
    """
    n = params.state_size
    if length < n + 1:
        raise LengthTooShort(f"length {length} < state_size + 1 = {n + 1}")
    g = np.asarray(grad_h, dtype=np.float64).reshape(params.channels, length)
    rows = params.denominator_rows()
    den = denominator_spectrum(params.a, length)[rows]
    num = np.fft.rfft(_padded(params.b, length, 0.0), axis=-1)
    G = np.fft.rfft(g, axis=-1)
    # correlation with a real sequence x is multiplication by conj(FFT(x))
    corr_w = np.fft.irfft(G * np.conj(1.0 / den), n=length, axis=-1)
    corr_v = np.fft.irfft(G * np.conj(num / den**2), n=length, axis=-1)
    grad_b = corr_w[:, 1 : n + 1].copy()
    grad_a = np.zeros((params.num_denominators, n))
    np.add.at(grad_a, rows, -corr_v[:, 1 : n + 1])
    return ParamGrads(grad_a=grad_a, grad_b=grad_b, grad_h0=g[:, 0].copy())


def conv_backward(u, h, grad_y):
    """Adjoint of :func:`fft_conv`. Returns ``(grad_u, grad_h)``.

    ``grad_h`` is summed over any leading batch axes of ``u`` and matches the
    shape of ``h``.
    """
    u = np.asarray(u, dtype=np.float64)
    h = np.asarray(h, dtype=np.float64)
    gy = np.asarray(grad_y, dtype=np.float64)
    if gy.shape != u.shape:
        raise ChannelMismatch(f"grad_y shape {gy.shape} != signal shape {u.shape}")
    if h.ndim >= 2 and (u.ndim < 2 or u.shape[-2] != h.shape[-2]):
        raise ChannelMismatch(f"signal {u.shape} and kernel {h.shape} disagree on channels")
    L = u.shape[-1]
    nfft = 2 * L
    GY = np.fft.rfft(gy, n=nfft, axis=-1)
    U = np.fft.rfft(u, n=nfft, axis=-1)
    H = np.fft.rfft(h[..., :L], n=nfft, axis=-1)
    grad_u = np.fft.irfft(GY * np.conj(H), n=nfft, axis=-1)[..., :L]
    gh = np.fft.irfft(GY * np.conj(U), n=nfft, axis=-1)[..., :L]
    gh = gh.reshape((-1,) + h.shape[:-1] + (L,)).sum(axis=0)
    grad_h = np.zeros_like(h)
    keep = min(L, h.shape[-1])
    grad_h[..., :keep] = gh[..., :keep]
    return grad_u, grad_h


def fd_check(
    f: Callable[[np.ndarray], float], x, analytic, step: float = 1e-6
) -> float:
    """Largest ``|analytic_i - central_difference_i| / max(1, |analytic_i|)``."""
    if not step > 0:
        raise ValueError("step must be positive")
    x = np.array(x, dtype=np.float64).reshape(-1)
    analytic = np.asarray(analytic, dtype=np.float64).reshape(-1)
    worst = 0.0
    for i in range(x.size):
        xp = x.copy()
        xm = x.copy()
        xp[i] += step
        xm[i] -= step
        fp = f(xp)
        fm = f(xm)
        if not (np.isfinite(fp) and np.isfinite(fm)):
            raise NonFiniteObjective(f"objective is not finite around coordinate {i}")
        fd = (fp - fm) / (2 * step)
        worst = max(worst, abs(analytic[i] - fd) / max(1.0, abs(analytic[i])))
    return worst


def params_from_flat(template: RtfParams, theta) -> RtfParams:
    """Inverse of :func:`flatten_params` using ``template`` for shapes and form."""
    theta = np.asarray(theta, dtype=np.float64)
    m, n = template.a.shape
    d = template.channels
    a = theta[: m * n].reshape(m, n)
    b = theta[m * n : m * n + d * n].reshape(d, n)
    h0 = theta[m * n + d * n :]
    return RtfParams(
        a=a,
        b=b,
        h0=h0,
        numerator_form=template.numerator_form,
        trained_length=template.trained_length,
    )


def flatten_params(params: RtfParams) -> np.ndarray:
    return np.concatenate([params.a.ravel(), params.b.ravel(), params.h0])
