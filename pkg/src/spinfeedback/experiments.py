"""Table-producing runs behind the command-line modes.

Each function returns ``(columns, rows)`` with rows as tuples of floats in
column order; :mod:`spinfeedback.cli` handles serialization.
"""

from __future__ import annotations

import math
from dataclasses import replace

import numpy as np

from . import estimators as est
from .config import RunConfig
from .coupling import ChannelParams, calibration_report
from .errors import ConfigError
from .exact_spin import MixedSpinModel, default_grid, gain_scan
from .gaussian import (
    VACUUM_VARIANCE,
    FeedbackConfig,
    analytic_moments,
    first_outcome_variance,
    optimal_gain,
    run_sequence,
)
from .rng import STREAM_MAIN, STREAM_REFERENCE

SWEEP_COLUMNS = (
    "gain",
    "two_delta_plus_mc",
    "two_delta_minus_mc",
    "two_delta_plus_th",
    "two_delta_minus_th",
    "xi_unc",
    "xi_unc_err_lo",
    "xi_unc_err_hi",
)
EXACT_COLUMNS = ("gain", "xi_unp", "delta_plus", "delta_minus")

# Atom-free variance of one probe in vacuum units.
SHOT_VARIANCE = VACUUM_VARIANCE


def xi_unc_analytic(c: ChannelParams, gain: float) -> float:
    v1 = analytic_moments(c, FeedbackConfig(gain=gain, clamp_enabled=False)).variances[1]
    return est.excess_ratio(v1, first_outcome_variance(c), SHOT_VARIANCE, SHOT_VARIANCE)


def xi_cond_analytic(c: ChannelParams) -> float:
    m = analytic_moments(c, FeedbackConfig(gain=0.0, clamp_enabled=False))
    return est.xi_cond_from_moments(m.variances[0], m.variances[1], m.cov01, SHOT_VARIANCE)


def default_sweep_grid(c: ChannelParams, n_points: int = 17, upper: float = 1.3) -> np.ndarray:
    """Gains centred on the optimum, spanning analytic xi_unc up to ``upper``.

    xi_unc is quadratic in g, so the edges follow from its curvature.
    """
    g_opt = optimal_gain(c)
    xi_min = xi_unc_analytic(c, g_opt)
    curvature = xi_unc_analytic(c, g_opt + 1.0) - xi_min
    half_width = math.sqrt(max(upper - xi_min, 0.0) / curvature)
    return g_opt + half_width * np.linspace(-1.0, 1.0, n_points)


def _grid(cfg: RunConfig, c: ChannelParams) -> np.ndarray:
    """Gains in axis units; the default grid is placed in model units."""
    if cfg.gain_grid is not None:
        return np.asarray(cfg.gain_grid, dtype=float)
    return default_sweep_grid(c) / cfg.feedback.gain_scale


def calibrate(cfg: RunConfig) -> dict:
    if cfg.physical is None:
        raise ConfigError("calibrate needs physical parameters", field="gamma_mhz")
    return calibration_report(cfg.physical)


def sweep(cfg: RunConfig):
    """Single-cycle gain sweep: correlations and xi_unc, simulated and exact."""
    c = cfg.channel
    fb = replace(cfg.feedback, cycles=1, clamp_enabled=False)
    ref = run_sequence(c, replace(fb, gain=0.0), cfg.n_shots, cfg.seed, stream=STREAM_REFERENCE)
    x_ref = ref.column(0)
    rows = []
    for k, g in enumerate(_grid(cfg, c)):
        point = replace(fb, gain=float(g))
        ens = run_sequence(c, point, cfg.n_shots, cfg.seed, stream=STREAM_MAIN)
        dp, dm = est.delta_pm(ens.column(0), ens.column(1), shot_var=SHOT_VARIANCE)
        th = analytic_moments(c, point)
        xi = est.xi_unc(
            ens.column(1),
            x_ref,
            SHOT_VARIANCE,
            SHOT_VARIANCE,
            n_resamples=cfg.n_resamples,
            seed=cfg.seed + k,
        )
        rows.append(
            (
                point.model_gain,
                dp,
                dm,
                th.delta_plus / SHOT_VARIANCE,
                th.delta_minus / SHOT_VARIANCE,
                xi.value,
                xi.sigma_low,
                xi.sigma_high,
            )
        )
    return SWEEP_COLUMNS, rows


def multicycle_columns(cycles: int) -> tuple:
    cols = ["gain"]
    for i in range(1, cycles + 1):
        cols += [f"xi_{i}", f"xi_{i}_err_lo", f"xi_{i}_err_hi"]
    return tuple(cols)


def multicycle(cfg: RunConfig):
    """Multi-cycle gain sweep with the outcome clamp, xi_i per cycle."""
    c = cfg.channel
    fb = cfg.feedback
    if fb.cycles < 2:
        raise ConfigError("multicycle needs cycles >= 2", field="cycles")
    rows = []
    for k, g in enumerate(_grid(cfg, c)):
        point = replace(fb, gain=float(g))
        ens = run_sequence(c, point, cfg.n_shots, cfg.seed, stream=STREAM_MAIN)
        row = [point.model_gain]
        for i in range(1, fb.cycles + 1):
            xi = est.xi_multi(ens.outcomes, i, n_resamples=cfg.n_resamples, seed=cfg.seed + k)
            row += [xi.value, xi.sigma_low, xi.sigma_high]
        rows.append(tuple(row))
    return multicycle_columns(fb.cycles), rows


def exact(cfg: RunConfig):
    """Mixed-state scan; also returns the minimizing |gain|."""
    model = MixedSpinModel(cfg.n_spins)
    grid = np.asarray(cfg.gain_grid, dtype=float) if cfg.gain_grid is not None else default_grid()
    grid = grid * cfg.feedback.gain_scale
    points = gain_scan(model, grid)
    rows = [(p.gain, p.xi_unp, p.delta_plus, p.delta_minus) for p in points]
    best = min(points, key=lambda p: (p.xi_unp, abs(p.gain)))
    summary = {"argmin_abs_gain": abs(best.gain), "xi_unp_min": best.xi_unp}
    return EXACT_COLUMNS, rows, summary
