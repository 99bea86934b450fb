"""Physical parameters and every rate derived from them.

Inputs are quoted as cyclic frequencies (Hz) but stored as angular
frequencies (rad/s); ``ModelParams.from_hz`` does the conversion.  Every
rate in :class:`DerivedRates` is angular.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace

from .algebra import check_j
from .errors import (
    DegenerateInput,
    InvalidArgument,
    NoConvergence,
    OutsideCoolingRegime,
)

TWO_PI = 2.0 * math.pi

__all__ = [
    "ModelParams",
    "DerivedRates",
    "BathParams",
    "Flags",
    "derive_rates",
    "bath_rates",
    "resonance_omega_r",
    "resolve_rates",
    "with_rates",
    "validity_flags",
    "TWO_PI",
]


@dataclass(frozen=True)
class ModelParams:
    """Raw model inputs, angular units.

    The drive is given either as ``omega_r`` (generalized Rabi frequency) or
    ``omega`` (drive amplitude), together with ``delta_omega``.  Leaving both
    unset means "solve the two-photon resonance for omega_r".
    """

    omega_c: float
    delta_q: float
    g: float
    gamma0: float
    kappa: float
    n_bar: float = 0.0
    chi_bar: float = 0.0
    delta_omega: float = 0.0
    omega_r: float | None = None
    omega: float | None = None

    def __post_init__(self):
        for name in ("omega_c", "delta_q", "g", "gamma0"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise InvalidArgument(f"{name} must be positive, got {value!r}")
        if not (math.isfinite(self.kappa) and self.kappa >= 0):
            raise InvalidArgument(f"kappa must be nonnegative, got {self.kappa!r}")
        if not (math.isfinite(self.n_bar) and self.n_bar >= 0):
            raise InvalidArgument(f"n_bar must be nonnegative, got {self.n_bar!r}")
        if self.omega_r is not None and self.omega is not None:
            raise InvalidArgument("give either omega_r or omega, not both")
        if self.omega_r is not None and self.omega_r <= 0:
            raise InvalidArgument(f"omega_r must be positive, got {self.omega_r!r}")
        if self.omega is not None and self.omega < 0:
            raise InvalidArgument(f"omega must be nonnegative, got {self.omega!r}")
        if self.omega_c / self.delta_q > 0.05:
            warnings.warn(
                f"omega_c/delta_q = {self.omega_c / self.delta_q:.3g} > 0.05; "
                "the dispersive two-photon Hamiltonian assumes omega_c << delta_q",
                stacklevel=3,
            )

    @classmethod
    def from_hz(cls, omega_c, delta_q, g, gamma0, kappa, n_bar=0.0, chi_bar=0.0,
                delta_omega=0.0, omega_r=None, omega=None):
        """Build from cyclic frequencies (the values usually quoted as x/2pi)."""
        return cls(
            omega_c=TWO_PI * omega_c,
            delta_q=TWO_PI * delta_q,
            g=TWO_PI * g,
            gamma0=TWO_PI * gamma0,
            kappa=TWO_PI * kappa,
            n_bar=n_bar,
            chi_bar=TWO_PI * chi_bar,
            delta_omega=TWO_PI * delta_omega,
            omega_r=None if omega_r is None else TWO_PI * omega_r,
            omega=None if omega is None else TWO_PI * omega,
        )

    def drive_amplitude(self) -> float:
        if self.omega is not None:
            return self.omega
        if self.omega_r is None:
            raise InvalidArgument("drive unspecified: set omega_r or omega (or solve resonance)")
        if abs(self.delta_omega) > self.omega_r:
            raise InvalidArgument(
                f"|delta_omega| = {abs(self.delta_omega):.6g} exceeds omega_r = {self.omega_r:.6g}"
            )
        return math.sqrt(self.omega_r**2 - self.delta_omega**2)


@dataclass(frozen=True)
class DerivedRates:
    omega: float
    omega_r: float
    theta: float
    g2: float
    g0: float
    gamma_plus: float
    gamma_minus: float
    gamma_0deph: float
    Gamma_par: float
    Gamma_perp: float
    sz0: float
    Gamma_up: float
    Gamma_down: float
    # pair creation kappa*n_bar + Gamma_up and annihilation kappa*(1+n_bar) + Gamma_down
    pump: float
    decay: float
    eta: float
    alpha: float
    n_sat: float


def _eta(kappa, n_bar, up, down):
    decay = kappa * (1.0 + n_bar) + down
    pump = kappa * n_bar + up
    if pump == 0.0:
        return math.inf, decay, pump
    return decay / pump, decay, pump


def derive_rates(p: ModelParams) -> DerivedRates:
    """All couplings and rates for the given parameters."""
    omega = p.drive_amplitude()
    omega_r = math.hypot(omega, p.delta_omega)
    if omega_r == 0.0:
        raise InvalidArgument("delta_omega and omega both zero: mixing angle undefined")
    sin2t = omega / omega_r
    cos2t = p.delta_omega / omega_r
    # theta in [0, pi/2] keeps sin(2 theta) >= 0
    theta = 0.5 * math.atan2(omega, p.delta_omega)

    g2 = 2.0 * p.g**2 * sin2t / p.delta_q
    g0 = 4.0 * p.g**2 * cos2t / p.delta_q
    # cos^2 and sin^2 of theta from the double angle avoid cancellation
    c2 = 0.5 * (1.0 + cos2t)
    s2 = 0.5 * (1.0 - cos2t)
    gamma_plus = p.gamma0 * c2**2 / 2.0
    gamma_minus = p.gamma0 * s2**2 / 2.0
    gamma_0 = p.gamma0 * sin2t**2 / 8.0
    Gamma_par = gamma_plus + gamma_minus
    if Gamma_par == 0.0:
        raise DegenerateInput("Gamma_par = 0: qubit inversion undefined")
    Gamma_perp = 4.0 * gamma_0 + Gamma_par
    sz0 = (gamma_minus - gamma_plus) / Gamma_par
    Gamma_up = g2**2 * (1.0 + sz0) / (2.0 * Gamma_perp)
    Gamma_down = g2**2 * (1.0 - sz0) / (2.0 * Gamma_perp)
    eta, decay, pump = _eta(p.kappa, p.n_bar, Gamma_up, Gamma_down)
    alpha = math.log(eta) if eta > 0 else -math.inf
    n_sat = math.sqrt(Gamma_par * Gamma_perp / (2.0 * g2**2)) if g2 > 0 else math.inf

    return DerivedRates(
        omega=omega, omega_r=omega_r, theta=theta, g2=g2, g0=g0,
        gamma_plus=gamma_plus, gamma_minus=gamma_minus, gamma_0deph=gamma_0,
        Gamma_par=Gamma_par, Gamma_perp=Gamma_perp, sz0=sz0,
        Gamma_up=Gamma_up, Gamma_down=Gamma_down, pump=pump, decay=decay,
        eta=eta, alpha=alpha, n_sat=n_sat,
    )


def with_rates(r: DerivedRates, kappa: float, n_bar: float, **changes) -> DerivedRates:
    """Copy of ``r`` with fields replaced and eta, alpha recomputed.

    Used to build hand-chosen rate sets (tests, synthetic cross-checks).
    """
    r = replace(r, **changes)
    eta, decay, pump = _eta(kappa, n_bar, r.Gamma_up, r.Gamma_down)
    return replace(r, pump=pump, decay=decay, eta=eta,
                   alpha=math.log(eta) if eta > 0 else -math.inf)


@dataclass(frozen=True)
class BathParams:
    """Pair reservoir: carrier ``nu``, coupling ``chi_tilde``, linewidth ``chi`` (angular)."""

    nu: float
    chi_tilde: float
    chi: float

    def __post_init__(self):
        if not self.chi > 0:
            raise InvalidArgument(f"chi must be positive, got {self.chi!r}")
        if not self.chi_tilde >= 0:
            raise InvalidArgument(f"chi_tilde must be nonnegative, got {self.chi_tilde!r}")

    @classmethod
    def from_hz(cls, nu, chi_tilde, chi):
        return cls(TWO_PI * nu, TWO_PI * chi_tilde, TWO_PI * chi)


def bath_rates(b: BathParams, omega_c: float) -> tuple[float, float]:
    """Two-photon damping rate and bath-induced shift (kappa, chi_bar)."""
    detuning = b.nu - 2.0 * omega_c
    coupling = (2.0 * b.chi_tilde) ** 2
    denom = detuning**2 + b.chi**2
    return b.chi * coupling / denom, detuning * coupling / denom


def resonance_omega_r(p: ModelParams, j, tol: float | None = None, max_iter: int = 100) -> float:
    """Solve Omega_R - 2 g0 <beta_z> = 2 (omega_c + chi_bar n_bar) for Omega_R.

    Fixed-point iteration seeded with <beta_z> = j; afterwards
    <beta_z> = j + 1/(eta - 1) is re-evaluated at each iterate.
    """
    j = check_j(j)
    target = 2.0 * (p.omega_c + p.chi_bar * p.n_bar)
    if target <= 0:
        raise InvalidArgument("resonance target 2(omega_c + chi_bar n_bar) must be positive")
    if tol is None:
        tol = 1e-12 * target
    base = replace(p, omega=None, omega_r=None)

    def rates_at(omega_r):
        return derive_rates(replace(base, omega_r=omega_r))

    current = max(target, abs(p.delta_omega))
    bz = j
    for _ in range(max_iter):
        r = rates_at(current)
        nxt = target + 2.0 * r.g0 * bz
        if abs(p.delta_omega) > nxt:
            raise InvalidArgument(
                f"resonance requires omega_r = {nxt:.6g} < |delta_omega| = {abs(p.delta_omega):.6g}"
            )
        r_next = rates_at(nxt)
        if not r_next.eta > 1.0:
            raise OutsideCoolingRegime(
                f"eta = {r_next.eta:.6g} <= 1 at omega_r = {nxt:.6g}",
                eta=r_next.eta, omega_r=nxt,
            )
        bz = j + 1.0 / (r_next.eta - 1.0)
        if abs(nxt - current) < tol:
            return nxt
        current = nxt
    residual = current - 2.0 * rates_at(current).g0 * bz - target
    raise NoConvergence(
        f"resonance iteration did not converge in {max_iter} steps", last=current, residual=residual
    )


def resolve_rates(p: ModelParams, j, tol: float | None = None) -> tuple[ModelParams, DerivedRates]:
    """Fill in omega_r from the resonance condition when the drive is unset."""
    if p.omega_r is None and p.omega is None:
        p = replace(p, omega_r=resonance_omega_r(p, j, tol))
    return p, derive_rates(p)


@dataclass(frozen=True)
class Flags:
    good_cavity: bool
    below_saturation: bool
    cooling_regime: bool

    @property
    def all(self) -> bool:
        return self.good_cavity and self.below_saturation and self.cooling_regime


def validity_flags(r: DerivedRates, p: ModelParams, n_mean, much_less: float = 10.0) -> Flags:
    """Operational checks of the reduced-model assumptions.

    ``much_less`` turns "kappa(1+n_bar) << g2" into ``kappa(1+n_bar) < g2/much_less``.
    """
    good = p.kappa * (1.0 + p.n_bar) < r.g2 / much_less and r.g2 < p.gamma0
    below = n_mean is not None and math.isfinite(n_mean) and n_mean < r.n_sat
    return Flags(bool(good), bool(below), bool(r.eta > 1.0))
