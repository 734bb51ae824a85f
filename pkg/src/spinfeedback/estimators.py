"""Noise-suppression statistics over outcome samples.

All variances are unbiased (``ddof=1``). Functions take plain outcome
columns; pull them from an ensemble with ``ens.column(i)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import DegenerateColumn, InsufficientData, NoAtomSignal
from .rng import STREAM_BOOTSTRAP, keyed_generator

# One-sigma percentiles of a normal distribution.
_LOW_Q = 100 * 0.5 * math.erfc(1 / math.sqrt(2))
_HIGH_Q = 100 - _LOW_Q


@dataclass(frozen=True)
class EstimateWithError:
    """Point estimate with asymmetric one-sigma bounds."""

    value: float
    sigma_low: float = 0.0
    sigma_high: float = 0.0
    n_samples: int = 0

    def __post_init__(self):
        if self.sigma_low < 0 or self.sigma_high < 0:
            raise ValueError("sigma bounds must be non-negative")

    @property
    def sigma(self) -> float:
        return 0.5 * (self.sigma_low + self.sigma_high)

    def db(self) -> "EstimateWithError":
        """The same estimate as 10 log10, bounds mapped through the endpoints."""
        v = to_db(self.value)
        lo = to_db(self.value - self.sigma_low) if self.value - self.sigma_low > 0 else -math.inf
        hi = to_db(self.value + self.sigma_high)
        return EstimateWithError(v, v - lo, hi - v, self.n_samples)


def to_db(ratio: float) -> float:
    return 10.0 * math.log10(ratio)


def _var(x) -> float:
    return float(np.var(x, ddof=1))


def _cov(x, y) -> float:
    return float(np.cov(x, y, ddof=1)[0, 1])


def _pair(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("columns must be 1-D and of equal length")
    if len(x) < 2:
        raise InsufficientData("need at least two shots")
    return x, y


def delta_pm(x0, x1, shot_var: float | None = None) -> tuple[float, float]:
    """Half-variances ``(V(x0 + x1)/2, V(x0 - x1)/2)``.

    With ``shot_var`` (the atom-free variance of one probe) the pair is
    returned as ``2 delta^2 / (2 shot_var)``, i.e. in light shot-noise units.
    """
    x0, x1 = _pair(x0, x1)
    dp = 0.5 * _var(x0 + x1)
    dm = 0.5 * _var(x0 - x1)
    if shot_var is not None:
        return dp / shot_var, dm / shot_var
    return dp, dm


def conditional_variance_from_moments(v_first: float, v_second: float, cov: float) -> tuple[float, float]:
    """``(V_cond, g_c_opt)`` for the best linear correction of the second
    outcome by the first."""
    if v_first <= 0:
        raise DegenerateColumn("first column has zero variance")
    g_c = -cov / v_first
    return v_second - cov**2 / v_first, g_c


def conditional_variance(x_first, x_second) -> tuple[float, float]:
    """``min_g V(x_second + g x_first)`` and its minimizer."""
    x_first, x_second = _pair(x_first, x_second)
    return conditional_variance_from_moments(_var(x_first), _var(x_second), _cov(x_first, x_second))


def excess_ratio(numerator: float, denominator: float, floor_num: float, floor_den: float) -> float:
    den = denominator - floor_den
    if den <= 0:
        raise NoAtomSignal(f"no excess over shot noise (denominator {den!r})")
    return (numerator - floor_num) / den


def xi_cond_from_moments(v_first: float, v_second: float, cov: float, shot_var_second: float) -> float:
    v_cond, _ = conditional_variance_from_moments(v_first, v_second, cov)
    return excess_ratio(v_cond, v_second, shot_var_second, shot_var_second)


def _xi_cond_stat(x_first, x_second, shot_var_second):
    v_cond, _ = conditional_variance(x_first, x_second)
    return excess_ratio(v_cond, _var(x_second), shot_var_second, shot_var_second)


def _xi_unc_stat(x_fb, x_ref, shot_var_fb, shot_var_ref):
    return excess_ratio(_var(x_fb), _var(x_ref), shot_var_fb, shot_var_ref)


def xi_cond(
    x_first,
    x_second,
    shot_var_second: float,
    n_resamples: int = 0,
    seed: int = 0,
) -> EstimateWithError:
    """Conditional noise-suppression parameter.

    Ratio of the conditional to the raw atomic excess noise of the second
    outcome. Error bars come from a paired bootstrap when ``n_resamples``
    is nonzero.
    """
    x_first, x_second = _pair(x_first, x_second)
    value = _xi_cond_stat(x_first, x_second, shot_var_second)
    if not n_resamples:
        return EstimateWithError(value, n_samples=len(x_first))
    return bootstrap(
        [np.column_stack([x_first, x_second])],
        lambda xy: _xi_cond_stat(xy[:, 0], xy[:, 1], shot_var_second),
        n_resamples,
        seed,
    )


def xi_unc(
    x_fb,
    x_ref,
    shot_var_fb: float,
    shot_var_ref: float | None = None,
    n_resamples: int = 0,
    seed: int = 0,
) -> EstimateWithError:
    """Unconditional noise-suppression parameter.

    Excess noise of the feedback outcome over the excess noise of an
    independent no-feedback reference. The two samples are resampled
    independently.
    """
    if shot_var_ref is None:
        shot_var_ref = shot_var_fb
    x_fb = np.asarray(x_fb, dtype=float)
    x_ref = np.asarray(x_ref, dtype=float)
    if len(x_fb) < 2 or len(x_ref) < 2:
        raise InsufficientData("need at least two shots in each sample")
    value = _xi_unc_stat(x_fb, x_ref, shot_var_fb, shot_var_ref)
    if not n_resamples:
        return EstimateWithError(value, n_samples=len(x_fb))
    return bootstrap(
        [x_fb, x_ref],
        lambda f, r: _xi_unc_stat(f, r, shot_var_fb, shot_var_ref),
        n_resamples,
        seed,
    )


def xi_multi(
    outcomes: np.ndarray,
    i: int,
    eps_l_prime: float | None = None,
    n_resamples: int = 0,
    seed: int = 0,
) -> EstimateWithError:
    """Noise after ``i`` feedback cycles relative to the first probe.

    The shot-noise floor is 1/2; passing ``eps_l_prime`` raises it to
    ``1/2 + eps_l_prime / 2`` to subtract the uncorrelated readout noise too.
    """
    outcomes = np.asarray(outcomes, dtype=float)
    if outcomes.ndim != 2 or not 0 <= i < outcomes.shape[1]:
        raise ValueError(f"column {i} not available")
    if outcomes.shape[0] < 2:
        raise InsufficientData("need at least two shots")
    floor = 0.5 if eps_l_prime is None else 0.5 + 0.5 * eps_l_prime
    pair = outcomes[:, [0, i]]

    def stat(o):
        return excess_ratio(_var(o[:, 1]), _var(o[:, 0]), floor, floor)

    if not n_resamples:
        return EstimateWithError(stat(pair), n_samples=len(pair))
    return bootstrap([pair], stat, n_resamples, seed)


def bootstrap(
    samples: Sequence[np.ndarray],
    statistic: Callable[..., float],
    n_resamples: int = 1000,
    seed: int = 0,
) -> EstimateWithError:
    """Percentile bootstrap over shots.

    Each array in ``samples`` is resampled along its first axis,
    independently of the others; ``statistic`` receives the resampled arrays
    positionally. Resample ``b`` of sample ``s`` is drawn from a generator
    keyed by ``(seed, b, s)``.
    """
    if n_resamples < 100:
        raise ValueError("n_resamples must be >= 100")
    samples = [np.asarray(s) for s in samples]
    value = float(statistic(*samples))
    stats = np.empty(n_resamples)
    for b in range(n_resamples):
        resampled = []
        for s_idx, s in enumerate(samples):
            rng = keyed_generator(seed, STREAM_BOOTSTRAP, b * len(samples) + s_idx)
            resampled.append(s[rng.integers(0, len(s), len(s))])
        stats[b] = statistic(*resampled)
    lo, hi = np.percentile(stats, [_LOW_Q, _HIGH_Q])
    return EstimateWithError(
        value,
        sigma_low=max(value - float(lo), 0.0),
        sigma_high=max(float(hi) - value, 0.0),
        n_samples=len(samples[0]),
    )


@dataclass(frozen=True)
class KitagawaUeda:
    satisfied: bool
    margin: float


def kitagawa_ueda_check(xi_sq: float, coherence: float) -> KitagawaUeda:
    """Squeezing criterion against a coherence-reduced spin length:
    satisfied iff ``xi_sq < coherence`` (strict)."""
    if not 0 < coherence <= 1:
        raise ValueError("coherence must lie in (0, 1]")
    return KitagawaUeda(xi_sq < coherence, coherence - xi_sq)
