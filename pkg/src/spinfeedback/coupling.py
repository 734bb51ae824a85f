"""Atom-light coupling constants for Faraday-rotation QND probing.

Maps the atomic/optical parameters of a probe pulse (linewidth, cross
section, beam waist, saturation, detuning, photon and atom numbers) onto the
dimensionless constants of the lossy QND channel, and predicts polarimeter
variances in photon-number units.

Angular frequencies are in rad/s. Config dictionaries give them in MHz and
are multiplied by 2*pi on parsing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Mapping, Optional

from .errors import ConfigError

# Light damping has no closed form here; the quoted value is used as default.
DEFAULT_EPS_L = 0.042


@dataclass(frozen=True)
class PhysicalParams:
    """Probe/atom parameters from which the channel constants follow.

    Attributes:
        gamma: natural linewidth (rad/s).
        sigma0: resonant scattering cross section (m^2).
        w0: beam waist (m).
        s0: resonant saturation parameter.
        delta: signed probe detuning (rad/s).
        n_photons: mean photons per probe pulse.
        n_atoms: effective atom number.
    """

    gamma: float
    sigma0: float
    w0: float
    s0: float
    delta: float
    n_photons: float
    n_atoms: float

    def __post_init__(self):
        for name in ("gamma", "sigma0", "w0", "n_photons"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ConfigError(f"{name} must be positive and finite, got {value!r}", field=name)
        # n_atoms = 0 is the atom-free calibration limit.
        for name in ("s0", "n_atoms"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0):
                raise ConfigError(f"{name} must be non-negative, got {value!r}", field=name)
        if not math.isfinite(self.delta):
            raise ConfigError("delta must be finite", field="delta")

    @property
    def S(self) -> float:
        """Mean light spin length, N_L / 2."""
        return self.n_photons / 2

    @property
    def J(self) -> float:
        """Mean atomic spin length, N_A / 2."""
        return self.n_atoms / 2

    @classmethod
    def from_config(cls, cfg: Mapping) -> "PhysicalParams":
        """Build from a config mapping with MHz / um units (see README)."""
        keys = {
            "gamma_mhz": "gamma",
            "sigma0_m2": "sigma0",
            "w0_um": "w0",
            "s0": "s0",
            "delta_mhz": "delta",
            "n_photons": "n_photons",
            "n_atoms": "n_atoms",
        }
        missing = [k for k in keys if k not in cfg]
        if missing:
            raise ConfigError(f"missing physical keys: {', '.join(missing)}", field=missing[0])
        vals = {}
        for key, attr in keys.items():
            try:
                vals[attr] = float(cfg[key])
            except (TypeError, ValueError):
                raise ConfigError(f"{key} must be a number, got {cfg[key]!r}", field=key) from None
        vals["gamma"] *= 2 * math.pi * 1e6
        vals["delta"] *= 2 * math.pi * 1e6
        vals["w0"] *= 1e-6
        return cls(**vals)


# 171Yb, 1S0 -> 1P1(F'=1/2) probe.
REFERENCE_PHYSICAL = PhysicalParams(
    gamma=2 * math.pi * 29e6,
    sigma0=7.6e-14,
    w0=40e-6,
    s0=7.2,
    delta=-2 * math.pi * 160e6,
    n_photons=1.3e6,
    n_atoms=3.7e5,
)


@dataclass(frozen=True)
class ChannelParams:
    """Dimensionless constants of the lossy QND channel.

    ``kappa`` is signed; ``eps_l``, ``eps_a`` and ``eps_l_prime`` are light
    damping, atomic depolarization and the uncorrelated readout-noise weight.
    """

    kappa: float
    eps_l: float = DEFAULT_EPS_L
    eps_a: float = 0.0
    eps_l_prime: float = 0.0

    def __post_init__(self):
        if not math.isfinite(self.kappa):
            raise ConfigError("kappa must be finite", field="kappa")
        for name in ("eps_l", "eps_a", "eps_l_prime"):
            value = getattr(self, name)
            if not (0.0 <= value < 1.0):
                raise ConfigError(f"{name} must lie in [0, 1), got {value!r}", field=name)


REFERENCE_CHANNEL = ChannelParams(kappa=0.59, eps_l=0.042, eps_a=0.15, eps_l_prime=0.098)


def saturation(p: PhysicalParams) -> float:
    """Off-resonant saturation s = s0 / (1 + (2 delta / gamma)^2)."""
    return p.s0 / (1 + (2 * p.delta / p.gamma) ** 2)


def _lineshape_prefactor(p: PhysicalParams) -> float:
    return p.sigma0 * p.gamma / (math.pi * p.w0**2 * (1 + saturation(p)))


def _lorentzian_denominator(p: PhysicalParams) -> float:
    return p.delta**2 + (p.gamma / 2) ** 2


def faraday_chi(p: PhysicalParams) -> float:
    """Faraday rotation angle per unit spin; kappa = chi * sqrt(S J)."""
    return (2 / 3) * _lineshape_prefactor(p) * p.delta / _lorentzian_denominator(p)


def kappa(p: PhysicalParams) -> float:
    """Signed QND coupling; odd in the detuning, proportional to sqrt(S J)."""
    return faraday_chi(p) * math.sqrt(p.S * p.J)


def eps_a(p: PhysicalParams) -> float:
    """Atomic depolarization per probe pulse from photon scattering."""
    return _lineshape_prefactor(p) * p.S * (p.gamma / 2) / _lorentzian_denominator(p)


def coupling_ratio(p: PhysicalParams) -> float:
    """kappa / eps_a in its reduced form, (2/3) sqrt(J/S) delta / (gamma/2).

    Algebraically identical to ``kappa(p) / eps_a(p)``: the saturation and
    Lorentzian factors cancel.
    """
    return (2 / 3) * math.sqrt(p.J / p.S) * p.delta / (p.gamma / 2)


def faraday_angle(p: PhysicalParams) -> float:
    """Rotation angle (rad) for atoms polarized along the probe."""
    return faraday_chi(p) * p.n_atoms / 4


def polarimeter_variance(p: PhysicalParams, atoms_present: bool = True) -> float:
    """Predicted variance of S_y in photon-number units.

    Without atoms this is the shot noise N_L/4. With atoms polarized
    transverse to the probe the projection noise of N_A/4 is added through
    the Faraday rotation.
    """
    shot = p.n_photons / 4
    if not atoms_present:
        return shot
    return shot + (faraday_chi(p) * p.n_photons / 2) ** 2 * p.n_atoms / 4


def unpolarized_snr_bound(c: ChannelParams) -> float:
    """Upper bound kappa^2 * eps_a on the signal-to-shot-noise ratio of the
    depolarized atomic fraction."""
    return c.kappa**2 * c.eps_a


def channel_from_physical(
    p: PhysicalParams,
    eps_l: float = DEFAULT_EPS_L,
    eps_l_prime: float = 0.0,
    **overrides,
) -> ChannelParams:
    """Derive a channel from physical parameters.

    ``kappa`` and ``eps_a`` come from the closed forms unless given in
    ``overrides``, which always win.
    """
    base = ChannelParams(kappa=kappa(p), eps_l=eps_l, eps_a=eps_a(p), eps_l_prime=eps_l_prime)
    return replace(base, **{k: float(v) for k, v in overrides.items() if v is not None})


def channel_from_config(cfg: Mapping, physical: Optional[PhysicalParams] = None) -> ChannelParams:
    """Channel from config keys ``kappa``, ``eps_l``, ``eps_a``, ``eps_l_prime``.

    Keys present in ``cfg`` override the values derived from ``physical``.
    Without physical parameters, ``kappa`` and ``eps_a`` are required.
    """
    fields = ("kappa", "eps_l", "eps_a", "eps_l_prime")
    given = {}
    for key in fields:
        if key in cfg and cfg[key] is not None:
            try:
                given[key] = float(cfg[key])
            except (TypeError, ValueError):
                raise ConfigError(f"{key} must be a number, got {cfg[key]!r}", field=key) from None
    if physical is not None:
        return channel_from_physical(physical, **given)
    for key in ("kappa", "eps_a"):
        if key not in given:
            raise ConfigError(f"channel needs {key} when no physical parameters are given", field=key)
    return ChannelParams(**given)


def calibration_report(p: PhysicalParams) -> dict:
    """All calibration numbers for a physical parameter set."""
    k = kappa(p)
    ea = eps_a(p)
    return {
        "kappa": k,
        "eps_a": ea,
        "s": saturation(p),
        "ratio": coupling_ratio(p),
        "theta_rad": faraday_angle(p),
        "v_shot": polarimeter_variance(p, atoms_present=False),
        "v_atoms": polarimeter_variance(p, atoms_present=True),
        "kappa2_eps_a": k**2 * ea,
    }
