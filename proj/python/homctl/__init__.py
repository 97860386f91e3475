"""Prescribed-time homogeneous control of linear plants."""

from ._homctl import (
    Controller,
    HomctlError,
    Plant,
    Scenario,
    VerificationReport,
    control,
    disturbance_bound,
    harmonic_oscillator,
    hom_norm,
    load_scenario,
    oscillator_reference_controller,
    run_suite,
    simulate,
    simulate_dense,
    synthesize,
    verify,
)

__all__ = [
    "Controller",
    "HomctlError",
    "Plant",
    "Scenario",
    "VerificationReport",
    "control",
    "disturbance_bound",
    "harmonic_oscillator",
    "hom_norm",
    "load_scenario",
    "oscillator_reference_controller",
    "run_suite",
    "simulate",
    "simulate_dense",
    "synthesize",
    "verify",
]
