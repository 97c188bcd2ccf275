"""Pseudo-spectral toolkit for a nonlocal quadratic amplitude equation on the torus."""

from .diagnostics import EnergyReport, PlanarState, bifurcation_mu, energy, riccati_check, syrovatskii_delta
from .evolution import (
    RunConfig,
    SolverState,
    StabilityReport,
    acceleration,
    first_order_rhs,
    run,
    smallness_check,
    step,
    t0_estimate,
)
from .hilbert import CommutatorOp, commutator_estimate_report, commutator_h, hilbert
from .initial_data import InitialDataSpec, materialize_initial_data
from .kernel import kernel_lambda, kernel_lambda_sym, q_commutator, q_spectral, region_classify
from .spectral import (
    Grid,
    MultiplierSymbol,
    PeriodicField,
    Spectrum,
    analyze,
    apply_multiplier,
    dealias,
    multiply,
    sobolev_norm,
    synthesize,
)

__all__ = [
    "CommutatorOp", "EnergyReport", "Grid", "InitialDataSpec", "MultiplierSymbol", "PeriodicField",
    "PlanarState", "RunConfig", "SolverState", "Spectrum", "StabilityReport", "acceleration", "analyze",
    "apply_multiplier", "bifurcation_mu", "commutator_estimate_report", "commutator_h", "dealias", "energy",
    "first_order_rhs", "hilbert", "kernel_lambda", "kernel_lambda_sym", "materialize_initial_data", "multiply",
    "q_commutator", "q_spectral", "region_classify", "riccati_check", "run", "smallness_check", "sobolev_norm",
    "step", "synthesize", "syrovatskii_delta", "t0_estimate",
]
