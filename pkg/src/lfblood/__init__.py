"""Lax-Friedrichs solvers for one-dimensional blood flow on vessel networks."""

from .model import (EdgeState, FixedLambda, Form, Grid, InitialMinimal, MinimalPerStep,
                    RunSettings, VesselParams, equilibrium_state, make_vessel_params)

__version__ = "0.1.0"

__all__ = [
    "EdgeState", "FixedLambda", "Form", "Grid", "InitialMinimal", "MinimalPerStep",
    "RunSettings", "VesselParams", "equilibrium_state", "make_vessel_params",
]
