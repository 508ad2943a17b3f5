"""Worst-case CVaR certificates and event-triggered control experiments."""

from ._wcrisk import (
    ClosedLoopSystem,
    RiskCertificate,
    WcriskError,
    certify,
    empirical_cvar,
    kron,
    reference_config,
    reachability_rank,
    should_trigger,
    simulate_ensemble,
    solve_discrete_lyapunov,
    spectral_norm,
    worst_case_cvar_augmented,
    worst_case_cvar_bounds,
)

__all__ = [
    "ClosedLoopSystem",
    "RiskCertificate",
    "WcriskError",
    "certify",
    "empirical_cvar",
    "kron",
    "reference_config",
    "reachability_rank",
    "should_trigger",
    "simulate_ensemble",
    "solve_discrete_lyapunov",
    "spectral_norm",
    "worst_case_cvar_augmented",
    "worst_case_cvar_bounds",
]
