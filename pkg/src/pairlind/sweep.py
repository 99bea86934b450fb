"""Detuning sweeps and single-point cross-validation."""

from __future__ import annotations

import logging
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .analytic import SteadyStats, analytic_moments, oracle_moments, required_m_cutoff
from .config import SweepConfig
from .dynamics import (
    moments,
    solve_full_steady,
    solve_reduced_steady,
    steady_populations_birth_death,
)
from .errors import OutsideCoolingRegime, PairlindError
from .model import (
    DerivedRates,
    ModelParams,
    derive_rates,
    resonance_omega_r,
    validity_flags,
)

log = logging.getLogger(__name__)

ROW_FIELDS = (
    "delta_omega_hz", "n_bar", "j", "eta", "n_mean", "n_sat", "g2", "g4", "sz0",
    "good_cavity", "below_saturation", "cooling_regime", "mode",
)


@dataclass(frozen=True)
class SweepRow:
    delta_omega_hz: float
    n_bar: float
    j: float
    eta: float | None
    n_mean: float | None
    n_sat: float | None
    g2: float | None
    g4: float | None
    sz0: float | None
    good_cavity: bool
    below_saturation: bool
    cooling_regime: bool
    mode: str
    # failure note for this point; not part of the CSV columns
    status: str = field(default="ok", compare=False)


def resolve_point(p: ModelParams, j, tol_rel: float = 1e-12) -> tuple[ModelParams, DerivedRates]:
    """Rates at one point, taking Omega_R from the resonance condition if unset.

    Outside the cooling regime the resonance iteration stops early; the
    iterate it reached is used so that eta can still be reported.
    """
    if p.omega_r is not None or p.omega is not None:
        return p, derive_rates(p)
    tol = tol_rel * 2.0 * (p.omega_c + p.chi_bar * p.n_bar)
    try:
        omega_r = resonance_omega_r(p, j, tol)
    except OutsideCoolingRegime as exc:
        omega_r = exc.omega_r
    p = replace(p, omega_r=omega_r)
    return p, derive_rates(p)


def _stats_for_mode(mode, p, r, j, tol):
    if mode == "analytic":
        return analytic_moments(r.eta, j)
    if mode == "reduced-numeric":
        rho = solve_reduced_steady(r, p, j, tail=tol.tail, residual_tol=tol.residual)
    else:
        rho = solve_full_steady(p, r, j, tail=tol.tail, residual_tol=tol.residual)
    return _stats_from_rho(rho)


def _finite(x):
    return x if x is not None and math.isfinite(x) else None


def evaluate_point(cfg: SweepConfig, delta_omega_hz: float, n_bar: float, j: float) -> SweepRow:
    base = dict(delta_omega_hz=float(delta_omega_hz), n_bar=float(n_bar), j=float(j), mode=cfg.mode)
    empty = dict(eta=None, n_mean=None, n_sat=None, g2=None, g4=None, sz0=None,
                 good_cavity=False, below_saturation=False, cooling_regime=False)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            p, r = resolve_point(cfg.params(n_bar, delta_omega_hz), j, cfg.tolerances.resonance_rel)
    except PairlindError as exc:
        return SweepRow(**base, **empty, status=f"rates: {exc}")

    known = dict(eta=_finite(r.eta), n_sat=_finite(r.n_sat), sz0=r.sz0)
    if not r.eta > 1.0:
        flags = validity_flags(r, p, None, cfg.tolerances.much_less)
        return SweepRow(**{**base, **empty, **known, "good_cavity": flags.good_cavity},
                        status="outside cooling regime")
    try:
        stats = _stats_for_mode(cfg.mode, p, r, j, cfg.tolerances)
    except PairlindError as exc:
        flags = validity_flags(r, p, None, cfg.tolerances.much_less)
        return SweepRow(**{**base, **empty, **known, "good_cavity": flags.good_cavity,
                           "cooling_regime": flags.cooling_regime}, status=f"solver: {exc}")
    flags = validity_flags(r, p, stats.n_mean, cfg.tolerances.much_less)
    return SweepRow(
        **base, **known,
        n_mean=stats.n_mean, g2=stats.g2, g4=stats.g4,
        good_cavity=flags.good_cavity, below_saturation=flags.below_saturation,
        cooling_regime=flags.cooling_regime,
    )


def _evaluate(args):
    return evaluate_point(*args)


def sweep_grid(cfg: SweepConfig) -> np.ndarray:
    lo, hi = cfg.grid_bounds()
    grid = np.linspace(lo, hi, cfg.points)
    # land exactly on the symmetry point when the grid straddles it
    grid[np.abs(grid) < 1e-9 * (hi - lo)] = 0.0
    return grid


def run_sweep(cfg: SweepConfig, jobs: int = 1) -> list[SweepRow]:
    """Rows for every (n_bar, j) series, delta_omega ascending within each."""
    tasks = [
        (cfg, float(dw), float(n_bar), j)
        for n_bar in cfg.n_bar_list
        for j in cfg.js
        for dw in sweep_grid(cfg)
    ]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_evaluate, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
    return [_evaluate(t) for t in tasks]


@dataclass
class CrossValidation:
    eta: float
    j: float
    stats: dict
    populations: dict
    deviations: dict

    def max_deviation(self, a, b) -> float:
        return self.deviations[(a, b)]


def _rel(x, y):
    if x is None or y is None:
        return 0.0 if x is y else math.inf
    scale = max(abs(x), abs(y))
    return 0.0 if scale == 0 else abs(x - y) / scale


def _stats_deviation(s1: SteadyStats, s2: SteadyStats) -> float:
    return max(_rel(getattr(s1, k), getattr(s2, k)) for k in ("n_mean", "b2", "b4", "g2", "g4"))


def cross_validate(p: ModelParams, j, rates: DerivedRates | None = None, include_full: bool = False,
                   tail: float = 1e-12) -> CrossValidation:
    """Compare closed form, summation oracle, reduced and (optionally) full numerics.

    ``rates`` overrides the rates derived from ``p`` (hand-chosen points).
    """
    if rates is None:
        p, rates = resolve_point(p, j)
    eta = rates.eta
    m_cut = required_m_cutoff(eta)
    stats = {
        "analytic": analytic_moments(eta, j),
        "oracle": oracle_moments(eta, j),
    }
    pops = {"analytic": steady_populations_birth_death(eta, j, m_cut)[0]}

    rho = solve_reduced_steady(rates, p, j, tail=tail)
    stats["reduced"] = _stats_from_rho(rho)
    pops["reduced"] = rho.populations()
    if include_full:
        rho = solve_full_steady(p, rates, j, tail=tail)
        stats["full"] = _stats_from_rho(rho)
        pops["full"] = rho.oscillator().populations()

    names = list(stats)
    deviations = {}
    for a_i, a in enumerate(names):
        for b in names[a_i + 1:]:
            deviations[(a, b)] = _stats_deviation(stats[a], stats[b])
            if a in pops and b in pops:
                n = min(len(pops[a]), len(pops[b]))
                deviations[(a, b, "populations")] = float(np.max(np.abs(pops[a][:n] - pops[b][:n])))
    return CrossValidation(eta, j, stats, pops, deviations)


def _stats_from_rho(rho) -> SteadyStats:
    m = moments(rho)
    return SteadyStats((m.n_mean + 0.5) / 2.0, m.n_mean, m.b2, m.b4, m.g2, m.g4)
