"""Latency and buffer-memory scaling of state-free vs state-materializing inference.

Three methods run the same system on the same input:

``rtf``
    kernel_generate + fft_conv; no state ever exists.
``scan_modal``
    diagonal recurrence that materializes the full (length, n) complex state
    history before contracting it, as a parallel scan would.
``recurrent``
    ``length`` companion-form steps.

Memory is explicit accounting of the working buffers each method allocates,
excluding the input and output signals every method shares.
"""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass

import numpy as np

from .convert import ModalParams
from .core import RtfParams
from .spectral import fft_conv, kernel_generate
from .statespace import companion_bank, run_recurrent

try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is a declared dependency

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f


METHODS = ("rtf", "scan_modal", "recurrent")
CSV_HEADER = ["method", "seq_len", "state_size", "channels", "wall_ms_median", "buffer_bytes"]
WARMUPS = 2


@dataclass(frozen=True)
class BenchRow:
    method: str
    seq_len: int
    state_size: int
    channels: int
    wall_ms_median: float
    buffer_bytes: int
    max_abs_diff: float = 0.0  # against the rtf output; not written to CSV

    def csv_fields(self) -> list:
        return [
            self.method,
            str(self.seq_len),
            str(self.state_size),
            str(self.channels),
            format(self.wall_ms_median, ".17g"),
            str(self.buffer_bytes),
        ]


@njit(cache=False)
def _scan_history(poles, u, hist):
    # hist[c, t] = x_t with x_0 = 0, x_{t+1} = poles * x_t + u_t
    d, L, n = hist.shape
    for c in range(d):
        for i in range(n):
            hist[c, 0, i] = 0.0
        for t in range(L - 1):
            for i in range(n):
                hist[c, t + 1, i] = poles[i] * hist[c, t, i] + u[c, t]


@njit(cache=False)
def _contract(hist, residues, h0, u, y):
    d, L, n = hist.shape
    for c in range(d):
        for t in range(L):
            acc = 0.0
            for i in range(n):
                acc += (residues[i] * hist[c, t, i]).real
            y[c, t] = acc + h0 * u[c, t]


def scan_baseline_apply(modal: ModalParams, u):
    """Diagonal-SSM output with the complete state history materialized.

    ``u`` has shape (L,) or (channels, L); the same modal system filters every
    channel. Returns ``(y, buffer_bytes)`` with ``buffer_bytes = 16 L n channels``.
    """
    u = np.asarray(u, dtype=np.float64)
    squeeze = u.ndim == 1
    u2 = np.ascontiguousarray(np.atleast_2d(u))
    d, L = u2.shape
    hist = np.empty((d, L, modal.state_size), dtype=np.complex128)
    _scan_history(modal.poles, u2, hist)
    y = np.empty_like(u2)
    _contract(hist, modal.residues, modal.h0, u2, y)
    buffer_bytes = hist.nbytes
    return (y[0] if squeeze else y), buffer_bytes


def rtf_buffer_bytes(seq_len: int, channels: int, num_denominators: int = 1) -> int:
    """Working buffers of kernel_generate followed by fft_conv.

    kernel_generate: padded denominators and numerators (length L, float64),
    their half spectra, the ratio spectrum and the kernel. fft_conv: signal
    and kernel half spectra at length 2L, their product and the length-2L
    inverse transform. Independent of the state size.
    """
    L, d, m = seq_len, channels, num_denominators
    half = L // 2 + 1
    kernel = 8 * L * m + 16 * half * m + 8 * L * d + 16 * half * d + 16 * half * d + 8 * L * d
    conv = 3 * 16 * (L + 1) * d + 8 * 2 * L * d
    return kernel + conv


def recurrent_buffer_bytes(state_size: int, channels: int) -> int:
    # current and next state vectors
    return 2 * 8 * state_size * channels


def bench_system(n: int, seq_len: int, channels: int = 1, seed: int = 0):
    """A stable system usable by all three methods, as (RtfParams, ModalParams).

    Denominator ``z^n - c`` puts the poles at ``c^(1/n) exp(2 pi i k / n)``,
    which are distinct and give closed-form residues
    ``r_k = N(lambda_k) / (n lambda_k^(n-1))``. ``c`` is small enough that
    the tail beyond ``seq_len`` is below double precision, so the corrected
    and truncated numerators coincide at this length.
    """
    c = min(0.01, 10.0 ** (-17.0 * n / seq_len))
    a = np.zeros(n)
    a[-1] = -c
    rng = np.random.default_rng(seed)
    b = rng.standard_normal(n) / np.sqrt(n)
    h0 = 1.0
    params = RtfParams(a=a, b=np.tile(b, (channels, 1)), h0=np.full(channels, h0))
    k = np.arange(n)
    poles = c ** (1.0 / n) * np.exp(2j * np.pi * k / n)
    residues = np.polyval(b.astype(np.complex128), poles) / (n * poles ** (n - 1))
    return params, ModalParams(residues=residues, poles=poles, h0=h0)


def _rtf_apply(params: RtfParams, u):
    return fft_conv(u, kernel_generate(params, u.shape[-1]))


def _recurrent_apply(params: RtfParams, u):
    return run_recurrent(companion_bank(params), u)[0]


def _time(fn, repeats: int):
    out = None
    for _ in range(WARMUPS):
        out = fn()
    times = []
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        times.append((time.perf_counter() - start) * 1e3)
    return float(np.median(times)), out


def run_bench(lengths, state_sizes, channels: int = 1, repeats: int = 7, methods=METHODS, seed: int = 0):
    """Median wall time and buffer accounting for every (length, state size) cell."""
    if repeats < 3:
        raise ValueError("repeats must be at least 3")
    rows = []
    for L in lengths:
        for n in state_sizes:
            if L < n + 1:
                raise ValueError(f"sequence length {L} must exceed state size {n}")
            params, modal = bench_system(n, L, channels, seed)
            u = np.random.default_rng([seed, L, n]).standard_normal((channels, L))
            outputs = {}
            for method in methods:
                if method == "rtf":
                    ms, y = _time(lambda: _rtf_apply(params, u), repeats)
                    nbytes = rtf_buffer_bytes(L, channels)
                elif method == "scan_modal":
                    ms, (y, nbytes) = _time(lambda: scan_baseline_apply(modal, u), repeats)
                elif method == "recurrent":
                    ms, y = _time(lambda: _recurrent_apply(params, u), repeats)
                    nbytes = recurrent_buffer_bytes(n, channels)
                else:
                    raise ValueError(f"unknown method {method!r}")
                outputs[method] = (ms, y, nbytes)
            ref = outputs[methods[0]][1]
            for method, (ms, y, nbytes) in outputs.items():
                rows.append(
                    BenchRow(
                        method=method,
                        seq_len=L,
                        state_size=n,
                        channels=channels,
                        wall_ms_median=ms,
                        buffer_bytes=int(nbytes),
                        max_abs_diff=float(np.max(np.abs(y - ref))),
                    )
                )
    return rows


def write_csv(rows, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for row in rows:
            writer.writerow(row.csv_fields())
