"""Rational transfer function (RTF) parametrization of linear state-space models.

State-free O(L log L) kernels, O(n) companion recurrence, conversions between
dense, companion, modal and transfer-function forms, stability tools,
analytic gradients, and a small training/benchmark harness.
"""

from .core import RtfParams, alias_fold, eval_tf, series_expand
from .spectral import fft_conv, fft_roots_eval, kernel_generate
from .statespace import (
    CompanionSsm,
    DenseSsm,
    companion_realize,
    correct_numerator,
    impulse_response,
    step,
    to_corrected,
    to_truncated,
    truncate_numerator,
)

__version__ = "0.1.0"

__all__ = [
    "CompanionSsm",
    "DenseSsm",
    "RtfParams",
    "alias_fold",
    "companion_realize",
    "correct_numerator",
    "eval_tf",
    "fft_conv",
    "fft_roots_eval",
    "impulse_response",
    "kernel_generate",
    "series_expand",
    "step",
    "to_corrected",
    "to_truncated",
    "truncate_numerator",
]
