"""Inversion of phase shifts into local potentials through chains of
supersymmetric (Darboux) transformations built from S-matrix poles."""

from .erf import ErfModel, PhaseShiftDataset, delta_from_model, erf_from_poles, ere_parameters, taylor_from_ere
from .fitting import FitConfig, FitReport, fit_erf, fit_poles
from .kinematics import DEFAULT_CONSTANTS, PhysicalConstants, elab_from_k, k_from_elab, to_mev
from .poles import PoleSet, delta_from_poles, extract_poles, validate_pole_set
from .solver import SolverConfig, phase_shift_from_potential, verify_inversion
from .susy import build_potential

__all__ = [
    "DEFAULT_CONSTANTS",
    "ErfModel",
    "FitConfig",
    "FitReport",
    "PhaseShiftDataset",
    "PhysicalConstants",
    "PoleSet",
    "SolverConfig",
    "build_potential",
    "delta_from_model",
    "delta_from_poles",
    "elab_from_k",
    "ere_parameters",
    "erf_from_poles",
    "extract_poles",
    "fit_erf",
    "fit_poles",
    "k_from_elab",
    "phase_shift_from_potential",
    "taylor_from_ere",
    "to_mev",
    "validate_pole_set",
    "verify_inversion",
]
