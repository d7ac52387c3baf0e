"""Conversions between dense state-space, transfer-function and modal forms."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .core import RtfParams
from .errors import NeedsCorrectedNumerator, NonRealKernel, RepeatedPoles, RootFindingDiverged
from .statespace import DenseSsm, companion_realize

# distinct poles closer than this make first-order residues meaningless
POLE_GAP_TOL = 1e-8
# unconverged Durand-Kerner iterates this close together are a root cluster
CLUSTER_TOL = 1e-4
DK_MAX_ITER = 500
DK_STEP_TOL = 1e-13
CHARPOLY_WARN_ORDER = 64


@dataclass(frozen=True)
class ModalParams:
    """First-order partial fractions ``h0 + sum_i r_i / (z - lambda_i)``."""

    residues: np.ndarray
    poles: np.ndarray
    h0: float = 0.0

    def __post_init__(self):
        r = np.asarray(self.residues, dtype=np.complex128).reshape(-1)
        p = np.asarray(self.poles, dtype=np.complex128).reshape(-1)
        if r.shape != p.shape:
            raise ValueError(f"{r.size} residues for {p.size} poles")
        object.__setattr__(self, "residues", r)
        object.__setattr__(self, "poles", p)
        object.__setattr__(self, "h0", float(self.h0))

    @property
    def state_size(self) -> int:
        return self.poles.size


def faddeev_leverrier(A) -> np.ndarray:
    """Characteristic polynomial by the trace recurrence ``c_k = -tr(A M_k) / k``.

    Exact in exact arithmetic but it cancels terms of size ``|A|^k``, so it is
    only accurate for small, well-scaled matrices; kept as an independent
    oracle for :func:`charpoly`.
    """
    A = np.atleast_2d(np.asarray(A, dtype=np.float64))
    n = A.shape[0]
    coeffs = np.zeros(n + 1)
    coeffs[0] = 1.0
    M = np.zeros_like(A)
    eye = np.eye(n)
    for k in range(1, n + 1):
        M = A @ M + coeffs[k - 1] * eye
        coeffs[k] = -np.trace(A @ M) / k
    return coeffs


def charpoly(A) -> np.ndarray:
    """Monic coefficients of ``det(zI - A)``, descending powers.

    Reduces ``A`` to upper Hessenberg form ``H`` by an orthogonal similarity
    and runs La Budde's recurrence over the leading principal minors of ``H``:

        p_i(z) = (z - h_ii) p_(i-1)(z)
                 - sum_m h_(i-m,i) (h_(i,i-1) ... h_(i-m+1,i-m)) p_(i-m-1)(z)

    No eigenvalues are computed. Warns when the order exceeds 64, where
    coefficient conditioning degrades whatever the algorithm.
    """
    A = np.atleast_2d(np.asarray(A, dtype=np.float64))
    n = A.shape[0]
    if n > CHARPOLY_WARN_ORDER:
        warnings.warn(
            f"charpoly of order {n}: polynomial coefficients are poorly conditioned",
            RuntimeWarning,
            stacklevel=2,
        )
    H = scipy.linalg.hessenberg(A) if n > 2 else A
    minors = [np.ones(1)]
    for i in range(n):
        p = np.append(minors[i], 0.0)
        p[1:] -= H[i, i] * minors[i]
        beta = 1.0
        for m in range(1, i + 1):
            beta *= H[i - m + 1, i - m]
            if beta == 0.0:
                break
            q = minors[i - m]
            p[-q.size :] -= H[i - m, i] * beta * q
        minors.append(p)
    return minors[n]


def ssm_to_tf(ssm: DenseSsm) -> RtfParams:
    """Transfer function of a dense SISO system, corrected numerator form.

    By the matrix-determinant identity,
    ``det(zI - A + BC) = det(zI - A) (1 + C (zI - A)^-1 B)``, so the numerator
    of ``C (zI - A)^-1 B`` is the difference of the two characteristic
    polynomials; its leading terms cancel.
    """
    den = charpoly(ssm.A)
    num = charpoly(ssm.A - np.outer(ssm.B, ssm.C)) - den
    return RtfParams(a=den[1:], b=num[1:], h0=[ssm.h0])


def polyroots(coeffs, max_iter: int = DK_MAX_ITER, tol: float = DK_STEP_TOL):
    """Roots of a monic polynomial (descending coefficients) by Durand-Kerner.

    Returns ``(roots, converged)``. Iterates start on a circle of radius
    ``1 + max|c_k|`` (the Cauchy bound) with a 0.4 rad offset to break
    symmetry with real-axis roots. Converged means the last correction was
    below ``tol`` relative, or the iterates are not clustered and each has a
    backward error of a few ulps.
    """
    c = np.asarray(coeffs, dtype=np.complex128)
    c = c / c[0]
    n = c.size - 1
    if n == 0:
        return np.zeros(0, dtype=np.complex128), True
    if n == 1:
        return np.array([-c[1]]), True
    radius = 1.0 + np.max(np.abs(c[1:]))
    z = radius * np.exp(1j * (2 * np.pi * np.arange(n) / n + 0.4))
    off_diag = ~np.eye(n, dtype=bool)
    for _ in range(max_iter):
        diff = z[:, None] - z[None, :]
        denom = np.prod(np.where(off_diag, diff, 1.0), axis=1)
        delta = np.polyval(c, z) / denom
        z = z - delta
        if not np.all(np.isfinite(z)):
            return z, False
        if np.max(np.abs(delta)) <= tol * max(1.0, np.max(np.abs(z))):
            return z, True
        # the step test can stall at rounding level; a backward error of a few
        # ulps means every iterate is already an exact root of a nearby
        # polynomial. Clustered iterates are excluded: a multiple root also
        # has a tiny residual while its copies are still sqrt(eps) apart.
        scale = np.polyval(np.abs(c), np.abs(z))
        if np.all(np.abs(np.polyval(c, z)) <= 8 * np.finfo(float).eps * scale) and (
            _min_gap(z) >= CLUSTER_TOL
        ):
            return z, True
    return z, False


def _min_gap(z: np.ndarray) -> float:
    if z.size < 2:
        return np.inf
    d = np.abs(z[:, None] - z[None, :])
    d[np.diag_indices_from(d)] = np.inf
    return float(d.min())


def denominator_roots(a) -> np.ndarray:
    """Distinct poles of ``z^n + a_1 z^(n-1) + ... + a_n``; raises on clusters."""
    a = np.asarray(a, dtype=np.float64)
    D = np.concatenate(([1.0], a))
    z, converged = polyroots(D)
    gap = _min_gap(z)
    if gap < POLE_GAP_TOL or (not converged and gap < CLUSTER_TOL):
        raise RepeatedPoles(f"poles closer than {POLE_GAP_TOL:g} (min gap {gap:.3g})")
    if not converged:
        raise RootFindingDiverged(f"Durand-Kerner did not converge in {DK_MAX_ITER} steps")
    # backward-error residual |D(z)| relative to sum |a_k| |z|^(n-k)
    scale = np.polyval(np.abs(D), np.abs(z))
    if np.any(np.abs(np.polyval(D, z)) > 1e-12 * np.maximum(scale, 1.0)):
        raise RootFindingDiverged("root residual above tolerance")
    return z


def tf_to_modal(params: RtfParams, channel: int = 0) -> ModalParams:
    """Partial fractions of one channel: ``r_i = N(lambda_i) / D'(lambda_i)``."""
    if params.numerator_form != "corrected":
        raise NeedsCorrectedNumerator("modal decomposition needs the corrected numerator")
    a = params.a[params.denominator_row(channel)]
    poles = denominator_roots(a)
    n = poles.size
    # D'(lambda_i) of the monic denominator is prod_{j != i} (lambda_i - lambda_j)
    diff = poles[:, None] - poles[None, :]
    diff[np.diag_indices(n)] = 1.0
    dprime = diff.prod(axis=1)
    residues = np.polyval(params.b[channel].astype(np.complex128), poles) / dprime
    return ModalParams(residues=residues, poles=poles, h0=params.h0[channel])


def modal_kernel(modal: ModalParams, length: int, imag_tol: float = 1e-9) -> np.ndarray:
    """``h_0 = h0``, ``h_t = Re sum_i r_i lambda_i^(t-1)``."""
    h = np.zeros(length, dtype=np.complex128)
    h[0] = modal.h0
    if length > 1 and modal.state_size:
        powers = modal.poles[None, :] ** np.arange(length - 1)[:, None]
        h[1:] = powers @ modal.residues
    scale = np.max(np.abs(h.real))
    if np.max(np.abs(h.imag)) > imag_tol * scale and np.max(np.abs(h.imag)) > 0:
        raise NonRealKernel(
            f"imaginary part {np.max(np.abs(h.imag)):.3g} vs kernel scale {scale:.3g}"
        )
    return h.real.copy()


def tf_to_dense(params: RtfParams, channel: int = 0) -> DenseSsm:
    """Companion realization of one channel as a dense system."""
    ssm = companion_realize(params, channel)
    A, B, C = ssm.matrices()
    return DenseSsm(A, B, C, float(ssm.h0))
