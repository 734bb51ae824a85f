"""Measurement-based feedback on a collective atomic spin.

Modules by concern:

- :mod:`.coupling`: physical parameters to channel constants.
- :mod:`.gaussian`: lossy QND + feedback, covariance and Monte Carlo.
- :mod:`.estimators`: conditional/unconditional noise-suppression statistics.
- :mod:`.exact_spin`: exact finite-N mixed-state feedback.
"""

__version__ = "0.1.0"

from .coupling import REFERENCE_CHANNEL, REFERENCE_PHYSICAL, ChannelParams, PhysicalParams
from .gaussian import FeedbackConfig, analytic_moments, optimal_gain, run_sequence

__all__ = [
    "REFERENCE_CHANNEL",
    "REFERENCE_PHYSICAL",
    "ChannelParams",
    "PhysicalParams",
    "FeedbackConfig",
    "analytic_moments",
    "optimal_gain",
    "run_sequence",
]
