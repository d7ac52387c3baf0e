"""Stability tests, the Montel projection and parameter initialization."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .convert import polyroots
from .core import RtfParams
from .errors import FirTooLong, ZeroVector

# reflection coefficients this close to 1 count as marginal, hence unstable
JURY_MARGIN = 1e-12
MAX_GAP_DRAWS = 1000


@dataclass(frozen=True)
class StabilityReport:
    jury_stable: bool
    pole_radii: np.ndarray
    montel_margin: float

    def to_dict(self) -> dict:
        return {
            "jury_stable": bool(self.jury_stable),
            "pole_radii": [float(r) for r in self.pole_radii],
            "montel_margin": float(self.montel_margin),
        }


def jury_stable(a) -> bool:
    """True iff every root of ``z^n + a_1 z^(n-1) + ... + a_n`` lies strictly inside the unit circle.

    Schur-Cohn step-down: with reflection coefficient ``k = c_n / c_0``, the
    polynomial is stable iff ``|k| < 1`` and ``c_i - k c_(n-i)`` (degree n-1)
    is stable. No roots are computed.
    """
    c = np.concatenate(([1.0], np.asarray(a, dtype=np.float64).reshape(-1)))
    if not np.all(np.isfinite(c)):
        return False
    while c.size > 1:
        k = c[-1] / c[0]
        if not abs(k) < 1.0 - JURY_MARGIN:
            return False
        c = (c - k * c[::-1])[:-1]
    return True


def pole_radii(a) -> np.ndarray:
    """Moduli of the denominator roots, descending. Repeated roots are allowed."""
    a = np.asarray(a, dtype=np.float64).reshape(-1)
    roots, _ = polyroots(np.concatenate(([1.0], a)))
    return np.sort(np.abs(roots))[::-1]


def montel_margin(a) -> float:
    return float(1.0 - np.sum(np.abs(a)))


def stability_report(a) -> StabilityReport:
    return StabilityReport(
        jury_stable=jury_stable(a), pole_radii=pole_radii(a), montel_margin=montel_margin(a)
    )


def montel_project(raw) -> np.ndarray:
    """Divide ``n + 1`` raw values by their one-norm and keep the first ``n``.

    The result satisfies ``sum |a_k| <= 1``, strictly when the dropped entry
    is nonzero, which keeps every root inside the unit disk.
    """
    raw = np.asarray(raw, dtype=np.float64)
    norm = np.sum(np.abs(raw), axis=-1, keepdims=True)
    if np.any(norm == 0):
        raise ZeroVector("Montel projection of an all-zero vector")
    return (raw / norm)[..., :-1]


def initialize(
    scheme: str,
    n: int,
    d: int = 1,
    m: int = 1,
    *,
    taps=None,
    seed: int | None = None,
    trained_length: int | None = None,
) -> RtfParams:
    """Build initial parameters.

    Schemes:
      ``zero``           a = b = 0, h0 = 1 (identity filter)
      ``fir``            h0 = taps[0], b_i = taps[i], a = 0; exact FIR embedding
      ``uniform_montel`` U(0, 1) draws; denominators Montel-projected, h0 = 1
      ``xavier``         U(-s, s), s = sqrt(6 / 2n), on a and b; h0 = 1

    With ``trained_length`` the numerator is labelled as truncated form for
    that length (the natural state for training); otherwise corrected.
    """
    form = "corrected" if trained_length is None else "truncated"
    a = np.zeros((m, n))
    b = np.zeros((d, n))
    h0 = np.ones(d)
    if scheme == "zero":
        pass
    elif scheme == "fir":
        taps = np.asarray(taps, dtype=np.float64).reshape(-1)
        if taps.size == 0:
            raise ValueError("fir initialization needs at least one tap")
        if taps.size - 1 > n:
            raise FirTooLong(f"{taps.size} taps do not fit state size {n}")
        h0[:] = taps[0]
        b[:, : taps.size - 1] = taps[1:]
    elif scheme == "uniform_montel":
        rng = np.random.default_rng(seed)
        a = montel_project(rng.uniform(0.0, 1.0, size=(m, n + 1)))
        b = rng.uniform(0.0, 1.0, size=(d, n))
    elif scheme == "xavier":
        rng = np.random.default_rng(seed)
        s = np.sqrt(6.0 / (n + n))
        a = rng.uniform(-s, s, size=(m, n))
        b = rng.uniform(-s, s, size=(d, n))
    else:
        raise ValueError(f"unknown initialization scheme {scheme!r}")
    return RtfParams(a=a, b=b, h0=h0, numerator_form=form, trained_length=trained_length)


def sample_stable_denominator(
    rng: np.random.Generator, n: int, max_radius: float = 0.95, min_gap: float = 0.0
) -> np.ndarray:
    """Random real denominator coefficients with every pole inside ``max_radius``.

    Up to order 16 the poles are drawn directly (conjugate pairs plus a real
    pole for odd orders), redrawing until pairwise gaps exceed ``min_gap``.
    Higher orders draw Montel-bounded coefficients (all poles in the closed
    unit disk) and map ``a_k -> rho^k a_k``, which scales every pole by
    ``rho <= max_radius``; drawing poles directly there produces coefficients
    too large for float64 checks.
    """
    if n <= 16:
        while True:
            pairs = n // 2
            r = max_radius * np.sqrt(rng.uniform(0.05, 1.0, size=pairs))
            theta = rng.uniform(0.0, np.pi, size=pairs)
            poles = list(r * np.exp(1j * theta)) + list(r * np.exp(-1j * theta))
            if n % 2:
                poles.append(rng.uniform(-max_radius, max_radius))
            poles = np.asarray(poles, dtype=np.complex128)
            if min_gap <= 0 or _gap(poles) > min_gap:
                return np.real(np.poly(poles))[1:].copy()
    for _ in range(MAX_GAP_DRAWS):
        raw = rng.uniform(-1.0, 1.0, size=n + 1)
        rho = max_radius * rng.uniform(0.5, 1.0)
        a = montel_project(raw) * rho ** np.arange(1, n + 1)
        if min_gap <= 0 or _gap(np.roots(np.r_[1.0, a])) > min_gap:
            return a
    raise ValueError(f"no order-{n} draw met min_gap={min_gap} in {MAX_GAP_DRAWS} attempts")


def _gap(z: np.ndarray) -> float:
    d = np.abs(z[:, None] - z[None, :])
    d[np.diag_indices_from(d)] = np.inf
    return float(d.min()) if z.size > 1 else np.inf


def random_stable_params(
    rng: np.random.Generator,
    n: int,
    d: int = 1,
    m: int = 1,
    max_radius: float = 0.95,
    min_gap: float = 0.0,
) -> RtfParams:
    """Corrected-form bank with stable denominators and unit-scale numerators."""
    a = np.stack([sample_stable_denominator(rng, n, max_radius, min_gap) for _ in range(m)])
    b = rng.standard_normal((d, n)) / np.sqrt(n)
    h0 = rng.standard_normal(d)
    return RtfParams(a=a, b=b, h0=h0)
