"""Transfer-function data model and exact (non-FFT) reference evaluations.

A channel ``c`` of an :class:`RtfParams` bank is the proper rational function

    H_c(z) = h0[c] + (b[c,0] z^-1 + ... + b[c,n-1] z^-n)
                     / (1 + a[r,0] z^-1 + ... + a[r,n-1] z^-n),

with ``r = denominator_row(c)``. Coefficients are stored ascending in delay
order; the implicit ``a_0 = 1`` and ``b_0 = 0`` are never stored.

Kernels and signals are plain float64 arrays with time on the last axis,
``(channels, length)`` for banks or ``(length,)`` for a single channel.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Literal, Optional

import numpy as np

from .errors import (
    InvalidParams,
    LengthMismatch,
    PoleAtEvaluationPoint,
    TruncatedFormNotExpandable,
)

NumeratorForm = Literal["corrected", "truncated"]

# |A(z)| at or below this is treated as a pole on the evaluation point.
POLE_FLOOR = 1e-300


def _as_matrix(x, rows: int, name: str) -> np.ndarray:
    arr = np.array(x, dtype=np.float64)
    if arr.ndim == 1 and rows == 1:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[0] != rows:
        raise InvalidParams(f"{name} must have shape ({rows}, n), got {arr.shape}")
    return arr


@dataclass(frozen=True)
class RtfParams:
    """A bank of ``channels`` SISO rational transfer functions of order ``state_size``.

    ``num_denominators`` denominators are shared across channels; channel
    ``c`` uses row ``c * m // d``. When ``numerator_form`` is ``"truncated"``
    the stored ``b`` is the numerator of the length-``trained_length``
    truncated kernel rather than that of the underlying system.
    """

    a: np.ndarray
    b: np.ndarray
    h0: np.ndarray
    numerator_form: NumeratorForm = "corrected"
    trained_length: Optional[int] = None
    state_size: int = field(init=False)
    channels: int = field(init=False)
    num_denominators: int = field(init=False)

    def __post_init__(self):
        b = np.array(self.b, dtype=np.float64)
        if b.ndim == 1:
            b = b[None, :]
        if b.ndim != 2:
            raise InvalidParams(f"b must be 2-D (channels, n), got shape {b.shape}")
        d, n = b.shape
        if n < 1:
            raise InvalidParams("state_size must be at least 1")
        if d < 1:
            raise InvalidParams("channels must be at least 1")
        a = np.array(self.a, dtype=np.float64)
        if a.ndim == 1:
            a = a[None, :]
        if a.ndim != 2 or a.shape[1] != n:
            raise InvalidParams(f"a must have shape (m, {n}), got {a.shape}")
        m = a.shape[0]
        if m < 1 or d % m != 0:
            raise InvalidParams(f"num_denominators={m} must divide channels={d}")
        h0 = np.array(self.h0, dtype=np.float64).reshape(-1)
        if h0.size == 1 and d > 1:
            h0 = np.full(d, h0[0])
        if h0.shape != (d,):
            raise InvalidParams(f"h0 must have {d} entries, got {h0.size}")
        for name, arr in (("a", a), ("b", b), ("h0", h0)):
            if not np.all(np.isfinite(arr)):
                raise InvalidParams(f"{name} contains non-finite values")
        if self.numerator_form not in ("corrected", "truncated"):
            raise InvalidParams(f"unknown numerator_form {self.numerator_form!r}")
        tl = self.trained_length
        if tl is not None:
            if int(tl) != tl or tl < 1:
                raise InvalidParams("trained_length must be a positive integer")
            tl = int(tl)
        if self.numerator_form == "truncated" and tl is None:
            raise InvalidParams("truncated numerator form requires trained_length")
        for arr in (a, b, h0):
            arr.setflags(write=False)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "h0", h0)
        object.__setattr__(self, "trained_length", tl)
        object.__setattr__(self, "state_size", n)
        object.__setattr__(self, "channels", d)
        object.__setattr__(self, "num_denominators", m)

    def denominator_row(self, channel: int) -> int:
        if not 0 <= channel < self.channels:
            raise IndexError(f"channel {channel} out of range for {self.channels} channels")
        return channel * self.num_denominators // self.channels

    def denominator_rows(self) -> np.ndarray:
        return np.arange(self.channels) * self.num_denominators // self.channels

    def channel_a(self) -> np.ndarray:
        """Denominator coefficients expanded to one row per channel, shape (d, n)."""
        return self.a[self.denominator_rows()]

    @property
    def dof_per_channel(self) -> int:
        # n denominator + n numerator coefficients + feedthrough
        return self.a.shape[1] + self.b.shape[1] + 1

    def with_numerator(self, b, numerator_form: NumeratorForm, trained_length=None) -> "RtfParams":
        return replace(self, b=b, numerator_form=numerator_form, trained_length=trained_length)

    def channel(self, c: int) -> "RtfParams":
        """Single-channel view of channel ``c``."""
        r = self.denominator_row(c)
        return RtfParams(
            a=self.a[r : r + 1],
            b=self.b[c : c + 1],
            h0=self.h0[c : c + 1],
            numerator_form=self.numerator_form,
            trained_length=self.trained_length,
        )

    def __eq__(self, other):
        if not isinstance(other, RtfParams):
            return NotImplemented
        return (
            self.numerator_form == other.numerator_form
            and self.trained_length == other.trained_length
            and np.array_equal(self.a, other.a)
            and np.array_equal(self.b, other.b)
            and np.array_equal(self.h0, other.h0)
        )

    __hash__ = None


def series_expand(params: RtfParams, length: int) -> np.ndarray:
    """Exact first ``length`` impulse-response samples by long division.

    Runs ``h_t = b_t [t <= n] - sum_{k=1}^{min(t, n)} a_k h_{t-k}`` with
    ``h_0 = h0``; O(length * n). Returns shape ``(channels, length)``.
    """
    if params.numerator_form != "corrected":
        raise TruncatedFormNotExpandable(
            "series expansion needs the corrected numerator; correct the params first"
        )
    if length < 1:
        raise LengthMismatch("length must be at least 1")
    n = params.state_size
    a = params.channel_a()
    b = params.b
    h = np.zeros((params.channels, length))
    h[:, 0] = params.h0
    # history[:, k] holds h_{t-1-k} of the strictly-proper part (h0 excluded
    # because b_0 = 0 and the feedthrough does not feed the recursion)
    hist = np.zeros((params.channels, n))
    for t in range(1, length):
        ht = -np.einsum("ij,ij->i", a, hist)
        if t <= n:
            ht += b[:, t - 1]
        h[:, t] = ht
        hist[:, 1:] = hist[:, :-1]
        hist[:, 0] = ht
    return h


def eval_tf(params: RtfParams, channel: int, z: complex) -> complex:
    """Evaluate ``H(z) = h0 + B(z)/A(z)`` by Horner's rule in ``w = 1/z``."""
    r = params.denominator_row(channel)
    w = 1.0 / complex(z)
    a = params.a[r]
    b = params.b[channel]
    den = 0j
    num = 0j
    for k in range(params.state_size - 1, -1, -1):
        den = den * w + a[k]
        num = num * w + b[k]
    den = 1.0 + den * w
    num = num * w
    if abs(den) <= POLE_FLOOR:
        raise PoleAtEvaluationPoint(f"denominator vanishes at z={z}")
    return params.h0[channel] + num / den


def alias_fold(kernel: np.ndarray, period: int) -> np.ndarray:
    """Fold a kernel of length ``J * period`` into ``sum_j h[t + j * period]``."""
    kernel = np.asarray(kernel, dtype=np.float64)
    total = kernel.shape[-1]
    if period < 1 or total % period != 0:
        raise LengthMismatch(f"length {total} is not a multiple of period {period}")
    folded = kernel.reshape(kernel.shape[:-1] + (total // period, period))
    return folded.sum(axis=-2)


def rel_err(x, ref) -> float:
    """Max-norm relative error ``||x - ref||_inf / ||ref||_inf``."""
    x = np.asarray(x)
    ref = np.asarray(ref)
    scale = np.max(np.abs(ref)) if ref.size else 0.0
    diff = np.max(np.abs(x - ref)) if ref.size else 0.0
    if scale == 0.0:
        return float(diff)
    return float(diff / scale)
