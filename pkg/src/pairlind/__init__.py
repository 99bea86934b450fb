"""Two-photon qubit-oscillator master equations: generators, steady states,
closed-form photon statistics and detuning sweeps."""

from .algebra import (
    Basis,
    Operator,
    SectorIndex,
    fock_to_sector,
    ladder_ops,
    qubit_ops,
    sector_to_fock,
    su11_from_mode,
    su11_sector,
    tensor,
)
from .analytic import SteadyStats, analytic_g, analytic_moments, oracle_moments
from .dynamics import (
    DensityMatrix,
    Generator,
    build_full_generator,
    build_reduced_generator,
    cross_dissipator,
    evolve,
    moments,
    steady_populations_birth_death,
    steady_state,
)
from .model import (
    BathParams,
    DerivedRates,
    ModelParams,
    bath_rates,
    derive_rates,
    resonance_omega_r,
    validity_flags,
)

__version__ = "0.1.0"

__all__ = [
    "Basis", "Operator", "SectorIndex", "fock_to_sector", "ladder_ops", "qubit_ops",
    "sector_to_fock", "su11_from_mode", "su11_sector", "tensor",
    "SteadyStats", "analytic_g", "analytic_moments", "oracle_moments",
    "DensityMatrix", "Generator", "build_full_generator", "build_reduced_generator",
    "cross_dissipator", "evolve", "moments", "steady_populations_birth_death", "steady_state",
    "BathParams", "DerivedRates", "ModelParams", "bath_rates", "derive_rates",
    "resonance_omega_r", "validity_flags",
]
