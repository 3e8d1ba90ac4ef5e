"""Radial Hartree / cubic NLS numerical lab."""

from ._core import (
    HartreeError,
    Potential,
    RadialGrid,
    check_kernel,
    concavity_bound,
    config_hash,
    conserved,
    convolve,
    evolve,
    negative_energy_data,
    norm,
    rate_fit,
    read_diagnostics,
    renormalize,
    run,
    stability,
    verify,
)

__all__ = [
    "HartreeError",
    "Potential",
    "RadialGrid",
    "check_kernel",
    "concavity_bound",
    "config_hash",
    "conserved",
    "convolve",
    "evolve",
    "negative_energy_data",
    "norm",
    "rate_fit",
    "read_diagnostics",
    "renormalize",
    "run",
    "stability",
    "verify",
]
