"""Closed-form steady-state statistics of the reduced oscillator model.

In a sector of Bargmann index j the stationary state is geometric in m,
p_m = (1 - 1/eta) eta**-m.  ``analytic_moments``/``analytic_g`` evaluate the
resummed expressions; ``oracle_moments`` sums the series term by term from
the su(1,1) matrix elements and serves as an independent check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .algebra import check_j
from .errors import InvalidArgument, LasingInstability

__all__ = [
    "SteadyStats",
    "analytic_moments",
    "analytic_g",
    "oracle_moments",
    "required_m_cutoff",
]


@dataclass(frozen=True)
class SteadyStats:
    beta_z_mean: float
    n_mean: float
    b2: float
    b4: float
    g2: float | None
    g4: float | None

    def as_dict(self):
        return {
            "beta_z_mean": self.beta_z_mean,
            "n_mean": self.n_mean,
            "b2": self.b2,
            "b4": self.b4,
            "g2": self.g2,
            "g4": self.g4,
        }


def _check_eta(eta):
    if not eta > 1.0:
        raise LasingInstability(
            f"eta = {eta!r} <= 1: the reduced steady state is not normalizable (lasing instability)"
        )


def _ratios(n_mean, b2, b4):
    g2 = 4.0 * b2 / n_mean**2 if n_mean > 0 else None
    g4 = b4 / b2**2 if b2 > 0 else None
    return g2, g4


def analytic_g(eta: float, j) -> tuple[float, float]:
    """Equal-time second- and fourth-order coherences."""
    _check_eta(eta)
    j = check_j(j)
    if math.isinf(eta):
        # single sector ground state: n = 2j - 1/2, no pairs to annihilate
        return (0.0 if j == 0.75 else None), None
    x = eta - 1.0
    g2 = 32.0 * (1.0 + x * j) / (5.0 + 4.0 * j * x - eta) ** 2
    g4 = 2.0 + (1.0 + 3.0 * eta + j * (eta**2 - 1.0)) / (1.0 + j * x) ** 2
    return g2, g4


def analytic_moments(eta: float, j) -> SteadyStats:
    _check_eta(eta)
    j = check_j(j)
    if math.isinf(eta):
        return SteadyStats(j, 2.0 * j - 0.5, 0.0, 0.0, *_ratios(2.0 * j - 0.5, 0.0, 0.0))
    x = eta - 1.0
    bz = j + 1.0 / x
    b2 = 2.0 * (1.0 + j * x) / x**2
    b4 = (12.0 * (1.0 + eta) + 4.0 * x * (5.0 + eta) * j) / x**4 + 8.0 * j**2 / x**2
    n_mean = 2.0 * bz - 0.5
    g2, g4 = analytic_g(eta, j)
    return SteadyStats(bz, n_mean, b2, b4, g2, g4)


def required_m_cutoff(eta: float, tail: float = 1e-15) -> int:
    """Smallest M with eta**-M < tail."""
    _check_eta(eta)
    if math.isinf(eta):
        return 2
    return max(2, int(math.floor(-math.log(tail) / math.log(eta))) + 1)


def oracle_moments(eta: float, j, m_cutoff: int | None = None) -> SteadyStats:
    """Moments by direct summation over the geometric sector populations."""
    _check_eta(eta)
    j = check_j(j)
    if m_cutoff is None:
        # b4 weights level m by ~m**4, so the plain tail bound is not enough
        m_cutoff = required_m_cutoff(eta)
        if not math.isinf(eta):
            while m_cutoff**4 * eta ** (-m_cutoff) > 1e-17:
                m_cutoff += 1
    if not math.isinf(eta) and eta ** (-m_cutoff) >= 1e-15:
        raise InvalidArgument(f"m_cutoff={m_cutoff} leaves tail eta**-M >= 1e-15")
    m = np.arange(m_cutoff, dtype=float)
    with np.errstate(under="ignore"):
        p = np.exp(-m * math.log(eta)) if not math.isinf(eta) else (m == 0).astype(float)
    p = p / p.sum()
    # beta- |j,m> = sqrt(m (m + 2j - 1)) |j,m-1>
    lower1 = m * (m + 2 * j - 1)
    lower2 = lower1 * (m - 1) * (m + 2 * j - 2)
    bz = float(p @ (m + j))
    b2 = float(p @ lower1)
    b4 = float(p @ lower2)
    n_mean = 2.0 * bz - 0.5
    return SteadyStats(bz, n_mean, b2, b4, *_ratios(n_mean, b2, b4))
