"""Exact measurement-feedback statistics for the completely mixed N-spin state.

The maximally mixed state of N spin-1/2 particles decomposes into total
angular momentum sectors j, each appearing with multiplicity P(N, j). A
projective J_z measurement gives m0, the spins are rotated about y by
``beta = g * m0``, and J_z is measured again. Only the sector multiplicities
enter the joint distribution::

    p(m0, m1) = 2**-N * sum_j P(N, j) * |d^j_{m1, m0}(g * m0)|**2

Rotation matrices are built from the eigendecomposition of J_y in each
sector. Only squared moduli are used, so the rotation sense is irrelevant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable

import numpy as np

from .errors import InvalidJ, InvalidProjection, SizeExceeded

MAX_SPINS = 200


def _twice(x) -> int:
    """2x as an exact integer; raises if x is not a multiple of 1/2."""
    t = Fraction(x) * 2
    if t.denominator != 1:
        raise ValueError(f"{x!r} is not an integer or half-integer")
    return int(t)


def j_ladder(n_spins: int) -> list[Fraction]:
    """Allowed total angular momenta, from 0 or 1/2 up to N/2."""
    if n_spins < 1:
        raise ValueError("need at least one spin")
    return [Fraction(n_spins - 2 * k, 2) for k in range(n_spins // 2, -1, -1)]


def degeneracy(n_spins: int, j) -> int:
    """Multiplicity P(N, j) = N! (2j+1) / ((N/2 - j)! (N/2 + j + 1)!), exactly."""
    try:
        tj = _twice(j)
    except ValueError as exc:
        raise InvalidJ(str(exc)) from None
    if tj < 0 or tj > n_spins or (n_spins - tj) % 2:
        raise InvalidJ(f"j={j} is not on the ladder for N={n_spins}")
    k = (n_spins - tj) // 2  # N/2 - j
    # comb(N, k) * (2j+1) / (N/2 + j + 1) is always an integer.
    num = math.comb(n_spins, k) * (tj + 1)
    den = n_spins - k + 1
    q, r = divmod(num, den)
    assert r == 0
    return q


@dataclass(frozen=True)
class MixedSpinModel:
    n_spins: int

    def __post_init__(self):
        if self.n_spins < 1:
            raise ValueError("n_spins must be >= 1")
        if self.n_spins > MAX_SPINS:
            raise SizeExceeded(f"n_spins={self.n_spins} exceeds {MAX_SPINS}")

    @property
    def J(self) -> float:
        return self.n_spins / 2

    @property
    def j_values(self) -> list[Fraction]:
        return j_ladder(self.n_spins)

    @property
    def m_values(self) -> np.ndarray:
        """Projections -J..J, the row/column labels of joint tables."""
        return np.arange(self.n_spins + 1) - self.J

    def weights(self) -> dict[Fraction, float]:
        """P(N, j) / 2^N for each sector."""
        total = 2**self.n_spins
        return {j: float(Fraction(degeneracy(self.n_spins, j), total)) for j in self.j_values}


@lru_cache(maxsize=None)
def _jy_eig(tj: int):
    """Eigen-decomposition of J_y in the spin-j basis ordered m = -j..j."""
    j = tj / 2
    m = np.arange(tj + 1) - j
    # <m+1| J_+ |m>
    up = np.sqrt(j * (j + 1) - m[:-1] * (m[:-1] + 1))
    jy = np.zeros((tj + 1, tj + 1), dtype=complex)
    idx = np.arange(tj)
    jy[idx + 1, idx] = up / 2j
    jy[idx, idx + 1] = -up / 2j
    w, u = np.linalg.eigh(jy)
    return w, u


def wigner_d_matrix(j, beta: float) -> np.ndarray:
    """Rotation matrix ``d[m1, m0] = <j m1| exp(-i beta J_y) |j m0>``.

    Rows and columns are ordered m = -j..j.
    """
    tj = _twice(j)
    if tj < 0:
        raise InvalidJ(f"negative j={j}")
    w, u = _jy_eig(tj)
    d = (u * np.exp(-1j * beta * w)) @ u.conj().T
    return d.real


def wigner_d(j, m1, m0, beta: float) -> float:
    """Single element ``d^j_{m1, m0}(beta)``."""
    tj, t1, t0 = _twice(j), _twice(m1), _twice(m0)
    if tj < 0:
        raise InvalidJ(f"negative j={j}")
    if abs(t1) > tj or abs(t0) > tj or (tj - t1) % 2 or (tj - t0) % 2:
        raise InvalidProjection(f"projections ({m1}, {m0}) invalid for j={j}")
    return float(wigner_d_matrix(j, beta)[(tj + t1) // 2, (tj + t0) // 2])


def _rotated_columns(tj: int, betas: np.ndarray) -> np.ndarray:
    """``out[m1, k] = d^j_{m1, m0_k}(betas[k])`` for m0_k = -j + k."""
    w, u = _jy_eig(tj)
    # Column k of d(beta_k) is U diag(e^{-i beta_k w}) U^H e_k.
    phases = np.exp(-1j * np.outer(w, betas))
    return (u @ (phases * u.conj().T)).real


@dataclass(frozen=True)
class JointTable:
    """Joint distribution ``probabilities[m0_index, m1_index]`` over -J..J."""

    gain: float
    m_values: np.ndarray
    probabilities: np.ndarray

    def marginal_first(self) -> np.ndarray:
        return self.probabilities.sum(axis=1)

    def marginal_second(self) -> np.ndarray:
        return self.probabilities.sum(axis=0)


def joint_distribution(model: MixedSpinModel, g: float) -> JointTable:
    n = model.n_spins
    size = n + 1
    probs = np.zeros((size, size))
    for j, weight in model.weights().items():
        tj = int(2 * j)
        offset = (n - tj) // 2
        m0 = np.arange(tj + 1) - tj / 2
        d = _rotated_columns(tj, g * m0)
        probs[offset : offset + tj + 1, offset : offset + tj + 1] += weight * (d.T**2)
    return JointTable(gain=float(g), m_values=model.m_values, probabilities=probs)


@dataclass(frozen=True)
class TableMoments:
    var_m0: float
    var_m1: float
    var_sum: float
    var_diff: float
    cov: float


def moments(table: JointTable) -> TableMoments:
    p = table.probabilities
    m = table.m_values
    m0, m1 = np.meshgrid(m, m, indexing="ij")

    def var(f):
        mean = float((p * f).sum())
        return float((p * (f - mean) ** 2).sum())

    v0 = var(m0)
    v1 = var(m1)
    vs = var(m0 + m1)
    vd = var(m0 - m1)
    return TableMoments(v0, v1, vs, vd, 0.25 * (vs - vd))


def xi_unpolarized(model: MixedSpinModel, g: float) -> float:
    """V(m1) / V(m0): post- over pre-feedback variance."""
    mo = moments(joint_distribution(model, g))
    return mo.var_m1 / mo.var_m0


@dataclass(frozen=True)
class ScanPoint:
    gain: float
    xi_unp: float
    delta_plus: float
    delta_minus: float


def gain_scan(model: MixedSpinModel, grid: Iterable[float]) -> list[ScanPoint]:
    """Per-gain xi_unp and the sum/difference variances normalized by 2J."""
    grid = list(grid)
    if not grid:
        raise ValueError("gain grid is empty")
    points = []
    two_j = 2 * model.J
    for g in grid:
        mo = moments(joint_distribution(model, g))
        points.append(ScanPoint(float(g), mo.var_m1 / mo.var_m0, mo.var_sum / two_j, mo.var_diff / two_j))
    return points


def default_grid() -> np.ndarray:
    """81 gains over [-0.4, 0.4], exactly symmetric about zero."""
    return np.arange(-40, 41) / 100
