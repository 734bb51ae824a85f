"""Linear Gaussian model of repeated lossy QND probing with feedback.

One probe pulse maps the normalized light quadrature and the atomic
quadrature as::

    X_out = sqrt(1 - eps_l) * (X_in + kappa * P_A) + sqrt(eps_l') * E_L
    P_A  <- sqrt(1 - eps_a) * P_A + sqrt(eps_a) * E_A

with X_in, E_L, E_A independent vacuum modes of variance 1/2. Feedback then
rotates the atoms by the recorded outcome::

    P_A <- P_A + g * (1 - eps_a) * (X_out - x0) * F

where F = [X_out <= x0] when the clamp is on, and F = 1 otherwise.

Two propagation modes share the same steps: exact propagation of mean and
covariance (:class:`GaussianState`) and per-shot sampling
(:class:`ShotBatch`). The clamp is non-Gaussian, so only sampling supports it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Union

import numpy as np

from .coupling import ChannelParams
from .errors import ClampNotGaussian, ConfigError, DegenerateChannel
from .rng import STREAM_MAIN, counter_normals

VACUUM_VARIANCE = 0.5
PSD_FLOOR = -1e-10


@dataclass(frozen=True)
class FeedbackConfig:
    """Feedback settings.

    ``gain`` is given in axis units; the model coefficient is
    ``gain * gain_scale``. ``x0=None`` selects three standard deviations of
    the first outcome. ``clamp_enabled=None`` selects off for a single cycle
    and on for several.
    """

    gain: float = 0.0
    x0: Optional[float] = None
    clamp_enabled: Optional[bool] = None
    cycles: int = 1
    gain_scale: float = 1.0

    def __post_init__(self):
        if int(self.cycles) != self.cycles or self.cycles < 1:
            raise ConfigError(f"cycles must be an integer >= 1, got {self.cycles!r}", field="cycles")
        if self.x0 is not None and not math.isfinite(self.x0):
            raise ConfigError("x0 must be finite", field="x0")
        if not (math.isfinite(self.gain) and math.isfinite(self.gain_scale)):
            raise ConfigError("gain and gain_scale must be finite", field="gain")

    @property
    def model_gain(self) -> float:
        return self.gain * self.gain_scale

    @property
    def clamp(self) -> bool:
        if self.clamp_enabled is None:
            return self.cycles > 1
        return bool(self.clamp_enabled)

    def target(self, c: ChannelParams) -> float:
        return default_x0(c) if self.x0 is None else float(self.x0)


def first_outcome_variance(c: ChannelParams) -> float:
    """V(X_L) of a probe on a fresh coherent spin state."""
    return (1 - c.eps_l) * VACUUM_VARIANCE * (1 + c.kappa**2) + c.eps_l_prime * VACUUM_VARIANCE


def default_x0(c: ChannelParams) -> float:
    return 3.0 * math.sqrt(first_outcome_variance(c))


@dataclass(frozen=True)
class GaussianState:
    """Mean and covariance over ``(P_A, X_L^(0), ..., X_L^(k-1))``.

    Index 0 is the atomic quadrature; index ``i + 1`` is the i-th recorded
    outcome. The noise modes of past pulses are integrated out.
    """

    mean: np.ndarray
    cov: np.ndarray

    @property
    def n_outcomes(self) -> int:
        return len(self.mean) - 1

    def outcome_cov(self) -> np.ndarray:
        return self.cov[1:, 1:]

    def check(self) -> None:
        if not (np.all(np.isfinite(self.mean)) and np.all(np.isfinite(self.cov))):
            raise FloatingPointError("non-finite Gaussian state")
        if not np.allclose(self.cov, self.cov.T, rtol=0, atol=1e-12):
            raise FloatingPointError("covariance lost symmetry")
        if np.linalg.eigvalsh(self.cov).min() < PSD_FLOOR:
            raise FloatingPointError("covariance is not positive semidefinite")


def coherent_state() -> GaussianState:
    return GaussianState(mean=np.zeros(1), cov=np.full((1, 1), VACUUM_VARIANCE))


@dataclass(frozen=True)
class ShotBatch:
    """Sampled atomic quadrature, one entry per shot."""

    p_a: np.ndarray


State = Union[GaussianState, ShotBatch]


def qnd_step(state: State, c: ChannelParams, noise: Optional[np.ndarray] = None):
    """Apply one probe pulse.

    Returns ``(new_state, outcome)``. In covariance mode the outcome is the
    index of the new outcome in the state vector and ``noise`` is unused. In
    sampling mode ``noise`` has shape ``(n_shots, 3)`` holding the vacuum
    draws for ``(X_in, E_L, E_A)``, each of variance 1/2, and the outcome is
    the sampled ``X_out`` array.
    """
    l = math.sqrt(1 - c.eps_l)
    a = math.sqrt(1 - c.eps_a)
    if isinstance(state, ShotBatch):
        if noise is None:
            raise ValueError("sampling mode needs noise draws")
        noise = np.asarray(noise)
        x_out = l * (noise[:, 0] + c.kappa * state.p_a) + math.sqrt(c.eps_l_prime) * noise[:, 1]
        p_new = a * state.p_a + math.sqrt(c.eps_a) * noise[:, 2]
        return ShotBatch(p_new), x_out

    n = len(state.mean)
    # Linear map from (P_A, X_0..X_{k-1}, X_in, E_L, E_A) to (P_A', X_0..X_{k-1}, X_out).
    A = np.zeros((n + 1, n + 3))
    A[0, 0] = a
    A[0, n + 2] = math.sqrt(c.eps_a)
    A[1:n, 1:n] = np.eye(n - 1)
    A[n, 0] = l * c.kappa
    A[n, n] = l
    A[n, n + 1] = math.sqrt(c.eps_l_prime)
    big_cov = np.zeros((n + 3, n + 3))
    big_cov[:n, :n] = state.cov
    big_cov[n:, n:] = VACUUM_VARIANCE * np.eye(3)
    big_mean = np.concatenate([state.mean, np.zeros(3)])
    cov = A @ big_cov @ A.T
    new = GaussianState(mean=A @ big_mean, cov=0.5 * (cov + cov.T))
    new.check()
    return new, n


def feedback_step(state: State, outcome, cfg: FeedbackConfig, c: ChannelParams) -> State:
    """Rotate the atoms by ``g (1 - eps_a) (outcome - x0)``.

    ``outcome`` must come from the immediately preceding :func:`qnd_step`.
    """
    h = cfg.model_gain * (1 - c.eps_a)
    x0 = cfg.target(c)
    if isinstance(state, ShotBatch):
        kick = h * (np.asarray(outcome) - x0)
        if cfg.clamp:
            kick = np.where(outcome <= x0, kick, 0.0)
        return ShotBatch(state.p_a + kick)

    if cfg.clamp:
        raise ClampNotGaussian("the outcome clamp is non-Gaussian; use sampling mode")
    n = len(state.mean)
    T = np.eye(n)
    T[0, outcome] += h
    mean = T @ state.mean
    mean[0] -= h * x0
    cov = T @ state.cov @ T.T
    new = GaussianState(mean=mean, cov=0.5 * (cov + cov.T))
    new.check()
    return new


def propagate(c: ChannelParams, cfg: FeedbackConfig) -> GaussianState:
    """Exact state after ``cfg.cycles`` probe/feedback rounds and the final probe."""
    state = coherent_state()
    for _ in range(cfg.cycles):
        state, idx = qnd_step(state, c)
        state = feedback_step(state, idx, cfg, c)
    state, _ = qnd_step(state, c)
    return state


@dataclass(frozen=True)
class AnalyticMoments:
    variances: np.ndarray
    outcome_cov: np.ndarray
    outcome_mean: np.ndarray

    @property
    def cov01(self) -> float:
        return float(self.outcome_cov[0, 1])

    @property
    def delta_plus(self) -> float:
        return float(0.5 * (self.variances[0] + self.variances[1] + 2 * self.cov01))

    @property
    def delta_minus(self) -> float:
        return float(0.5 * (self.variances[0] + self.variances[1] - 2 * self.cov01))


def analytic_moments(c: ChannelParams, cfg: FeedbackConfig) -> AnalyticMoments:
    """Exact outcome moments of the linear (clamp-free) model."""
    state = propagate(c, cfg)
    oc = state.outcome_cov()
    return AnalyticMoments(variances=np.diag(oc).copy(), outcome_cov=oc, outcome_mean=state.mean[1:])


def delta_minus_analytic(kappa: float, eps_a: float, eps_l: float, eps_l_prime: float = 0.0) -> float:
    """Closed-form half-variance of the outcome difference without feedback."""
    return (1 - eps_l) / 2 * (1 + kappa**2 * (1 - math.sqrt(1 - eps_a))) + eps_l_prime / 2


@dataclass(frozen=True)
class EpsLPrimeFit:
    eps_l_prime: float
    clamped: bool


def fit_eps_l_prime(measured_delta_minus: float, measured_shot: float, c: ChannelParams) -> EpsLPrimeFit:
    """Uncorrelated-noise weight that reproduces a measured difference variance.

    The measurement is put in vacuum units through the atom-free shot-noise
    variance. Values below the noise-free prediction clamp to zero.
    """
    if measured_delta_minus < 0 or measured_shot <= 0:
        raise ValueError("need measured_delta_minus >= 0 and measured_shot > 0")
    target = VACUUM_VARIANCE * measured_delta_minus / measured_shot
    # delta_minus is affine in eps_l' with slope 1/2.
    value = 2.0 * (target - delta_minus_analytic(c.kappa, c.eps_a, c.eps_l, 0.0))
    if value < 0:
        return EpsLPrimeFit(0.0, True)
    return EpsLPrimeFit(value, False)


def second_outcome_variance(c: ChannelParams, gain: float) -> float:
    return float(analytic_moments(c, FeedbackConfig(gain=gain, clamp_enabled=False)).variances[1])


def optimal_gain(c: ChannelParams) -> float:
    """Gain minimizing V(X_L^(1)) in the single-cycle linear model.

    V(X_L^(1)) is exactly quadratic in g, so three evaluations fix it.
    """
    if c.kappa == 0:
        raise DegenerateChannel("kappa = 0: the outcome does not depend on the gain")
    vm, v0, vp = (second_outcome_variance(c, g) for g in (-1.0, 0.0, 1.0))
    curvature = 0.5 * (vp + vm) - v0
    slope = 0.5 * (vp - vm)
    return -slope / (2 * curvature)


@dataclass(frozen=True)
class ShotEnsemble:
    """Sampled outcomes, one row per shot and one column per probe."""

    outcomes: np.ndarray
    seed: int
    channel: ChannelParams
    feedback: FeedbackConfig
    stream: int = STREAM_MAIN
    x0: float = field(default=0.0)

    @property
    def n_shots(self) -> int:
        return self.outcomes.shape[0]

    def column(self, i: int) -> np.ndarray:
        return self.outcomes[:, i]


def noise_slots(cycles: int) -> int:
    """Draws per shot: the initial P_A plus three per probe."""
    return 1 + 3 * (cycles + 1)


def run_sequence(
    c: ChannelParams,
    cfg: FeedbackConfig,
    n_shots: int,
    seed: int,
    stream: int = STREAM_MAIN,
    chunk_size: int = 1 << 16,
) -> ShotEnsemble:
    """Monte Carlo of ``cfg.cycles`` probe/feedback rounds plus a final probe.

    Noise is addressed by ``(seed, stream, shot, slot)``, so the result is
    identical for any ``chunk_size`` and reproducible bit for bit.
    """
    if n_shots < 1:
        raise ValueError("n_shots must be >= 1")
    slots = noise_slots(cfg.cycles)
    x0 = cfg.target(c)
    resolved = replace(cfg, x0=x0, clamp_enabled=cfg.clamp)
    out = np.empty((n_shots, cfg.cycles + 1))
    scale = math.sqrt(VACUUM_VARIANCE)
    for start in range(0, n_shots, chunk_size):
        n = min(chunk_size, n_shots - start)
        z = counter_normals(seed, start, n, slots, stream=stream, scale=scale)
        batch = ShotBatch(z[:, 0])
        for i in range(cfg.cycles + 1):
            batch, x = qnd_step(batch, c, z[:, 1 + 3 * i : 4 + 3 * i])
            out[start : start + n, i] = x
            if i < cfg.cycles:
                batch = feedback_step(batch, x, resolved, c)
    return ShotEnsemble(outcomes=out, seed=seed, channel=c, feedback=cfg, stream=stream, x0=x0)
