"""State-free kernel generation and causal FFT convolution.

Forward transforms use the ``exp(-2j*pi*k*t/m)`` sign convention (numpy's),
so the DFT of a coefficient vector is the polynomial in ``z^-1`` evaluated on
the roots of unity. Real-input transforms are used internally; the full
spectrum is recoverable by conjugate symmetry.
"""

from __future__ import annotations

import numpy as np

from .core import POLE_FLOOR, RtfParams
from .errors import ChannelMismatch, DenominatorZeroOnUnitCircle, LengthTooShort


def fft_roots_eval(coeffs) -> np.ndarray:
    """Evaluate ``sum_k coeffs[k] z^(-t k)`` at ``z = exp(2j*pi/m)``, t = 0..m-1."""
    coeffs = np.asarray(coeffs, dtype=np.float64)
    return np.fft.fft(coeffs, axis=-1)


def _padded(coeffs: np.ndarray, length: int, lead: float) -> np.ndarray:
    out = np.zeros(coeffs.shape[:-1] + (length,))
    out[..., 0] = lead
    out[..., 1 : coeffs.shape[-1] + 1] = coeffs
    return out


def denominator_spectrum(a: np.ndarray, length: int) -> np.ndarray:
    """Half spectrum of ``(1, a_1, ..., a_n, 0, ...)`` at length ``length``."""
    spec = np.fft.rfft(_padded(np.atleast_2d(a), length, 1.0), axis=-1)
    if np.any(np.abs(spec) <= POLE_FLOOR):
        raise DenominatorZeroOnUnitCircle(
            f"denominator has a root on the {length}-th roots of unity"
        )
    return spec


def transfer_spectrum(params: RtfParams, length: int) -> np.ndarray:
    """Half spectrum ``B(z)/A(z) + h0`` on the ``length``-th roots of unity, shape (d, length//2 + 1)."""
    n = params.state_size
    if length < n + 1:
        raise LengthTooShort(f"length {length} < state_size + 1 = {n + 1}")
    den = denominator_spectrum(params.a, length)
    num = np.fft.rfft(_padded(params.b, length, 0.0), axis=-1)
    spec = num / den[params.denominator_rows()]
    spec += params.h0[:, None]
    return spec


def kernel_generate(params: RtfParams, length: int) -> np.ndarray:
    """Length-``length`` kernel from the transfer function sampled on the roots of unity.

    With a truncated-form numerator trained at this length the result is the
    exact truncated impulse response; with a corrected numerator it is the
    time-aliased kernel ``sum_j h[t + j*length]``. Costs O(length log length)
    and never touches a state vector.
    """
    return np.fft.irfft(transfer_spectrum(params, length), n=length, axis=-1)


def _check_channels(u: np.ndarray, h: np.ndarray):
    if h.ndim >= 2 and (u.ndim < 2 or u.shape[-2] != h.shape[-2]):
        raise ChannelMismatch(
            f"signal shape {u.shape} and kernel shape {h.shape} disagree on channels"
        )


def fft_conv(u, h) -> np.ndarray:
    """Causal convolution ``y_t = sum_{j<=t} h_{t-j} u_j`` via zero-padded FFTs.

    ``u`` has shape ``(..., d, L)`` or ``(L,)``; ``h`` has shape ``(d, L_h)`` or
    ``(L_h,)``. Kernels shorter than ``L`` are zero-padded, longer ones are cut.
    """
    u = np.asarray(u, dtype=np.float64)
    h = np.asarray(h, dtype=np.float64)
    _check_channels(u, h)
    L = u.shape[-1]
    nfft = 2 * L
    h = h[..., :L]
    U = np.fft.rfft(u, n=nfft, axis=-1)
    H = np.fft.rfft(h, n=nfft, axis=-1)
    return np.fft.irfft(U * H, n=nfft, axis=-1)[..., :L]
