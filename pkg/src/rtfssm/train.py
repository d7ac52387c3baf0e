"""Desk-scale training: the delay task and kernel distillation.

A single SISO layer per channel (no mixing, no nonlinearity) is trained in
truncated numerator form with plain Adam on analytic gradients.
"""

from __future__ import annotations

import dataclasses
import logging
import time
from dataclasses import dataclass, field

import numpy as np

from .core import RtfParams
from .errors import NonFiniteGradient, SchemaError, TrainingDiverged
from .grad import conv_backward, flatten_params, kernel_backward, params_from_flat
from .spectral import fft_conv, kernel_generate
from .stability import initialize, montel_project

log = logging.getLogger(__name__)

DIVERGENCE_LOSS = 1e6


@dataclass(frozen=True)
class TrainConfig:
    state_size: int = 128
    channels: int = 4
    seq_len: int = 512
    delay: int = 64
    band_fraction: float = 0.5
    learning_rate: float = 1e-2
    steps: int = 2000
    batch_size: int = 8
    seed: int = 0
    loss: str = "mse"
    montel_projection: bool = False

    def __post_init__(self):
        for name in ("state_size", "channels", "seq_len", "steps", "batch_size"):
            if getattr(self, name) < 1:
                raise SchemaError(f"{name} must be positive")
        if not 0 <= self.delay < self.seq_len:
            raise SchemaError("delay must satisfy 0 <= delay < seq_len")
        if not 0 < self.band_fraction <= 1:
            raise SchemaError("band_fraction must lie in (0, 1]")
        if not self.learning_rate > 0:
            raise SchemaError("learning_rate must be positive")
        if self.loss != "mse":
            raise SchemaError(f"unsupported loss {self.loss!r}")

    @classmethod
    def from_dict(cls, doc: dict) -> "TrainConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(doc) - known
        if unknown:
            raise SchemaError(f"unknown config keys: {sorted(unknown)}")
        try:
            return cls(**doc)
        except TypeError as exc:
            raise SchemaError(str(exc)) from exc

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass
class TrainReport:
    loss_trace: np.ndarray
    final_rmse: float
    params: RtfParams
    wall_time: float
    baseline_rmse: float = float("nan")
    extra: dict = field(default_factory=dict)


def delay_dataset(config: TrainConfig, batch_index: int):
    """Band-limited unit-variance Gaussian noise and its copy delayed by ``config.delay``.

    Returns ``(u, target)``, each of shape (batch, channels, seq_len).
    Deterministic in ``(config.seed, batch_index)``.
    """
    rng = np.random.default_rng([config.seed, batch_index])
    L = config.seq_len
    noise = rng.standard_normal((config.batch_size, config.channels, L))
    spec = np.fft.rfft(noise, axis=-1)
    cutoff = int(np.floor(config.band_fraction * (L // 2)))
    spec[..., cutoff + 1 :] = 0.0
    u = np.fft.irfft(spec, n=L, axis=-1)
    u /= u.std(axis=-1, keepdims=True)
    target = np.zeros_like(u)
    D = config.delay
    target[..., D:] = u[..., : L - D]
    return u, target


def adam_update(
    params, grads, moments, step: int, lr: float, beta1=0.9, beta2=0.999, eps=1e-8
):
    """One bias-corrected Adam step (``step`` counts from 1).

    ``moments`` is ``(m, v)`` or ``None`` for zeros. Returns ``(params, (m, v))``.
    """
    params = np.asarray(params, dtype=np.float64)
    grads = np.asarray(grads, dtype=np.float64)
    if grads.shape != params.shape:
        raise ValueError(f"gradient shape {grads.shape} != parameter shape {params.shape}")
    if not np.all(np.isfinite(grads)):
        raise NonFiniteGradient("gradient contains non-finite values")
    if moments is None:
        moments = (np.zeros_like(params), np.zeros_like(params))
    m, v = moments
    m = beta1 * m + (1 - beta1) * grads
    v = beta2 * v + (1 - beta2) * grads**2
    m_hat = m / (1 - beta1**step)
    v_hat = v / (1 - beta2**step)
    return params - lr * m_hat / (np.sqrt(v_hat) + eps), (m, v)


def _project_denominators(params: RtfParams) -> RtfParams:
    mass = np.sum(np.abs(params.a), axis=-1, keepdims=True)
    # an appended slack entry leaves feasible rows untouched
    slack = np.maximum(1.0 - mass, 1e-3 * mass)
    slack = np.where(mass == 0, 1.0, slack)
    a = montel_project(np.concatenate([params.a, slack], axis=-1))
    return dataclasses.replace(params, a=a)


def delay_loss_and_grad(params: RtfParams, u, target, delay: int):
    """Masked MSE over t >= delay and its gradient with respect to ``params``."""
    L = u.shape[-1]
    h = kernel_generate(params, L)
    y = fft_conv(u, h)
    err = (y - target)[..., delay:]
    loss = float(np.mean(err**2))
    gy = np.zeros_like(y)
    gy[..., delay:] = 2.0 * err / err.size
    _, gh = conv_backward(u, h, gy)
    return loss, kernel_backward(params, gh, L).flat()


def delay_rmse(params: RtfParams, config: TrainConfig, batch_index: int) -> float:
    u, target = delay_dataset(config, batch_index)
    y = fft_conv(u, kernel_generate(params, config.seq_len))
    return float(np.sqrt(np.mean((y - target)[..., config.delay :] ** 2)))


def train_delay(config: TrainConfig, init: RtfParams | None = None) -> TrainReport:
    """Train one RTF layer to delay band-limited noise by ``config.delay`` steps.

    Batches ``0 .. steps-1`` are used for training and batch ``steps`` for the
    reported RMSE.
    """
    n, d = config.state_size, config.channels
    if n < config.delay:
        log.warning("state size %d < delay %d: no exact FIR solution exists", n, config.delay)
    params = init or initialize("zero", n, d, d, trained_length=config.seq_len)
    eval_index = config.steps
    baseline = delay_rmse(params, config, eval_index)
    theta = flatten_params(params)
    moments = None
    trace = np.empty(config.steps)
    start = time.perf_counter()
    for k in range(config.steps):
        u, target = delay_dataset(config, k)
        loss, grad = delay_loss_and_grad(params, u, target, config.delay)
        if not np.isfinite(loss) or loss > DIVERGENCE_LOSS:
            raise TrainingDiverged(f"loss {loss:.3g} at step {k}")
        trace[k] = loss
        theta, moments = adam_update(theta, grad, moments, k + 1, config.learning_rate)
        params = params_from_flat(params, theta)
        if config.montel_projection:
            params = _project_denominators(params)
            theta = flatten_params(params)
        if (k + 1) % 500 == 0:
            log.info("step %d loss %.3e", k + 1, loss)
    wall = time.perf_counter() - start
    return TrainReport(
        loss_trace=trace,
        final_rmse=delay_rmse(params, config, eval_index),
        params=params,
        wall_time=wall,
        baseline_rmse=baseline,
    )


def distill(target, n: int, iterations: int = 5000, lr: float = 3e-2, seed: int = 0):
    """Fit truncated-form RTF parameters of order ``n`` to a given kernel.

    ``target`` has shape (length,) or (channels, length). Starts from the
    zero initialization (``seed`` only matters for the random schemes and is
    kept for a uniform call signature) and runs Adam with a cosine-decayed
    learning rate on the mean squared kernel error. Returns the best-seen
    ``(params, mse)``.
    """
    target = np.atleast_2d(np.asarray(target, dtype=np.float64))
    d, L = target.shape
    if L < n + 1:
        raise ValueError(f"target length {L} < state_size + 1 = {n + 1}")
    params = initialize("zero", n, d, d, seed=seed, trained_length=L)
    theta = flatten_params(params)
    moments = None
    best = (np.inf, params)
    for k in range(iterations):
        h = kernel_generate(params, L)
        err = h - target
        mse = float(np.mean(err**2))
        if not np.isfinite(mse) or mse > DIVERGENCE_LOSS:
            raise TrainingDiverged(f"distillation loss {mse:.3g} at iteration {k}")
        if mse < best[0]:
            best = (mse, params)
        grad = kernel_backward(params, 2.0 * err / err.size, L).flat()
        step_lr = lr * 0.5 * (1.0 + np.cos(np.pi * k / iterations))
        theta, moments = adam_update(theta, grad, moments, k + 1, step_lr)
        params = params_from_flat(params, theta)
    h = kernel_generate(params, L)
    mse = float(np.mean((h - target) ** 2))
    if mse < best[0]:
        best = (mse, params)
    return best[1], best[0]
