"""Companion-form realization, O(n) recurrent stepping and numerator truncation.

The companion realization of ``h0 + B(z)/A(z)`` is

    x_{t+1} = A x_t + e_1 u_t,    y_t = b . x_t + h0 u_t,

with ``A`` carrying ``-a`` on its first row and ones on the subdiagonal. The
newest pseudo-state sits in ``x[0]``.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
import scipy.linalg

from .core import RtfParams
from .errors import (
    NearSingularCorrection,
    NeedsCorrectedNumerator,
    StateSizeMismatch,
)
from .spectral import kernel_generate

# beyond this one-norm condition number the corrected numerator is noise
MAX_CORRECTION_CONDITION = 1e12


@dataclass(frozen=True)
class DenseSsm:
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    h0: float = 0.0

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=np.float64))
        n = A.shape[0]
        B = np.asarray(self.B, dtype=np.float64).reshape(-1)
        C = np.asarray(self.C, dtype=np.float64).reshape(-1)
        if A.shape != (n, n) or B.shape != (n,) or C.shape != (n,):
            raise StateSizeMismatch(
                f"inconsistent shapes A{A.shape} B{B.shape} C{C.shape}"
            )
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "h0", float(self.h0))

    @property
    def state_size(self) -> int:
        return self.A.shape[0]


@dataclass(frozen=True)
class CompanionSsm:
    """Companion-form system(s); leading axes of ``a``/``b``/``h0`` index channels."""

    a: np.ndarray
    b: np.ndarray
    h0: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.a, dtype=np.float64)
        b = np.asarray(self.b, dtype=np.float64)
        if a.shape != b.shape or a.ndim < 1:
            raise StateSizeMismatch(f"a{a.shape} and b{b.shape} must match")
        h0 = np.broadcast_to(np.asarray(self.h0, dtype=np.float64), a.shape[:-1])
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "h0", h0)

    @property
    def state_size(self) -> int:
        return self.a.shape[-1]

    def zero_state(self, batch_shape=()) -> np.ndarray:
        return np.zeros(tuple(batch_shape) + self.a.shape)

    def matrices(self):
        """Dense (A, B, C) of a single-channel system, for checking only."""
        if self.a.ndim != 1:
            raise StateSizeMismatch("matrices() is defined for a single channel")
        n = self.state_size
        B = np.zeros(n)
        B[0] = 1.0
        return companion_matrix(self.a), B, self.b.copy()


def companion_matrix(a) -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    n = a.shape[-1]
    A = np.eye(n, k=-1)
    A[0, :] = -a
    return A


def dense_impulse(ssm: DenseSsm, length: int) -> np.ndarray:
    """``h_0 = h0``, ``h_t = C A^(t-1) B`` by iterated matrix-vector products."""
    h = np.zeros(length)
    h[0] = ssm.h0
    v = ssm.B.copy()
    for t in range(1, length):
        h[t] = ssm.C @ v
        v = ssm.A @ v
    return h


def companion_realize(params: RtfParams, channel: int) -> CompanionSsm:
    if params.numerator_form != "corrected":
        raise NeedsCorrectedNumerator(
            "companion realization needs the corrected numerator"
        )
    r = params.denominator_row(channel)
    return CompanionSsm(params.a[r].copy(), params.b[channel].copy(), params.h0[channel])


def companion_bank(params: RtfParams) -> CompanionSsm:
    """All channels of ``params`` as one channel-batched companion system."""
    if params.numerator_form != "corrected":
        raise NeedsCorrectedNumerator(
            "companion realization needs the corrected numerator"
        )
    return CompanionSsm(params.channel_a(), params.b.copy(), params.h0.copy())


def step(ssm: CompanionSsm, state: np.ndarray, u):
    """One recurrent step: two length-n inner products and a shift.

    ``state`` has shape ``batch + ssm.a.shape``; returns ``(y, new_state)``.
    """
    state = np.asarray(state, dtype=np.float64)
    n = ssm.state_size
    if state.shape[-1] != n:
        raise StateSizeMismatch(f"state size {state.shape[-1]} != {n}")
    y = np.einsum("...n,...n->...", state, ssm.b) + ssm.h0 * u
    new = np.empty(np.broadcast_shapes(state.shape, ssm.a.shape))
    new[..., 0] = u - np.einsum("...n,...n->...", state, ssm.a)
    new[..., 1:] = state[..., :-1]
    return y, new


def run_recurrent(ssm: CompanionSsm, u, state=None):
    """Step through ``u`` (time on the last axis). Returns ``(y, final_state)``."""
    u = np.asarray(u, dtype=np.float64)
    if state is None:
        state = np.zeros(u.shape[:-1] + (ssm.state_size,))
    y = np.empty(np.broadcast_shapes(u.shape[:-1], ssm.h0.shape) + u.shape[-1:])
    for t in range(u.shape[-1]):
        y[..., t], state = step(ssm, state, u[..., t])
    return y, state


def prefill_naive(ssm: CompanionSsm, u) -> np.ndarray:
    """State after consuming ``u`` from the zero state, O(len(u) n)."""
    u = np.asarray(u, dtype=np.float64)
    state = np.zeros(u.shape[:-1] + (ssm.state_size,))
    for t in range(u.shape[-1]):
        _, state = step(ssm, state, u[..., t])
    return state


def _row_powers(a, top: int, count: int) -> np.ndarray:
    """Rows ``e_0 A^k`` for ``k = top, top-1, ..., top-count+1``.

    Row ``i`` of a companion matrix is ``e_(i-1)``, so ``e_i A^k = e_0 A^(k-i)``
    and any power is a window of this single row sequence (with ``e_0 A^-i``
    read as ``e_i``). Stepping the row one multiply at a time is O(k n) and
    follows the system's own dynamics; repeated squaring of a non-normal
    companion matrix loses many digits to the transient growth of its powers.
    """
    a = np.asarray(a, dtype=np.float64)
    n = a.shape[-1]
    out = np.zeros((count, n))
    lo = top - count + 1
    for k in range(lo, min(0, top + 1)):
        out[top - k, -k] = 1.0
    r = np.zeros(n)
    r[0] = 1.0
    for k in range(top + 1):
        if k >= lo:
            out[top - k] = r
        head = r[0]
        r = np.concatenate((r[1:], [0.0]))
        r -= head * a
    return out


def companion_power(a, exponent: int) -> np.ndarray:
    """``A^exponent`` for the companion matrix of ``a`` in O(exponent n) time."""
    if exponent < 0:
        raise ValueError("exponent must be non-negative")
    a = np.asarray(a, dtype=np.float64)
    return _row_powers(a, int(exponent), a.shape[-1])


def _power_pair(a, trained_length: int):
    """``(A^(l-1), A^l)`` for the companion matrix of ``a`` from one row sweep."""
    n = np.asarray(a).shape[-1]
    rows = _row_powers(a, trained_length, n + 1)
    return rows[1:], rows[:-1]


def truncate_numerator(a, b, trained_length: int) -> np.ndarray:
    """``b~ = b (I - A^l)``: numerator whose roots-of-unity samples give the length-l kernel."""
    b = np.asarray(b, dtype=np.float64)
    M = np.eye(b.shape[-1]) - companion_power(a, trained_length)
    return b @ M


def correct_numerator(a, b_trunc, trained_length: int) -> np.ndarray:
    """Invert :func:`truncate_numerator`: solve ``b (I - A^l) = b~`` for ``b``."""
    b_trunc = np.asarray(b_trunc, dtype=np.float64)
    n = b_trunc.shape[-1]
    M = np.eye(n) - companion_power(a, trained_length)
    return _solve_correction(M, b_trunc, trained_length)


def _solve_correction(M, b_trunc, trained_length):
    try:
        cond = np.linalg.cond(M, 1)
    except np.linalg.LinAlgError:
        cond = np.inf
    if not np.isfinite(cond) or cond > MAX_CORRECTION_CONDITION:
        raise NearSingularCorrection(
            f"I - A^{trained_length} has condition number {cond:.3g}"
        )
    lu = scipy.linalg.lu_factor(M)
    # row-vector system b M = b~  <=>  M^T b^T = b~^T
    return scipy.linalg.lu_solve(lu, b_trunc.T, trans=1).T


def to_truncated(params: RtfParams, length: int) -> RtfParams:
    """Re-express ``params`` so its length-``length`` FFT kernel is the exact truncation.

    Besides ``b~ = b (I - A^l)`` the feedthrough becomes ``h0 - h_l``: sampling
    on the l-th roots of unity folds the sample ``h_l`` (where ``z^-l = 1``)
    onto t = 0, so it is cancelled there.
    """
    corrected = to_corrected(params)
    b = np.empty_like(corrected.b)
    h0 = corrected.h0.copy()
    rows = corrected.denominator_rows()
    for r in range(corrected.num_denominators):
        sel = rows == r
        P, Al = _power_pair(corrected.a[r], length)
        b[sel] = corrected.b[sel] @ (np.eye(corrected.state_size) - Al)
        h0[sel] -= corrected.b[sel] @ P[:, 0]
    return replace(corrected, b=b, h0=h0, numerator_form="truncated", trained_length=length)


def to_corrected(params: RtfParams) -> RtfParams:
    """Recover the deployment numerator (and feedthrough) from a truncated form."""
    if params.numerator_form == "corrected":
        return params
    b = np.empty_like(params.b)
    h0 = params.h0.copy()
    rows = params.denominator_rows()
    length = params.trained_length
    for r in range(params.num_denominators):
        sel = rows == r
        P, Al = _power_pair(params.a[r], length)
        b[sel] = _solve_correction(np.eye(params.state_size) - Al, params.b[sel], length)
        h0[sel] += b[sel] @ P[:, 0]
    return replace(params, b=b, h0=h0, numerator_form="corrected", trained_length=None)


def impulse_response(params: RtfParams, length: int) -> np.ndarray:
    """Exact first ``length`` kernel samples through the state-free FFT path."""
    if params.numerator_form == "truncated" and params.trained_length == length:
        return kernel_generate(params, length)
    work = max(length, params.state_size + 1)
    return kernel_generate(to_truncated(params, work), work)[:, :length]
