"""Charged-particle dynamics with magnetic velocity coupling, wire
energetics around the Alfven current scale, and periodic-grid field
decomposition with Gauss-law auditing."""

__version__ = "0.1.0"

from .constants import CODATA2018, PhysicalConstants, alfven_current, \
    alfven_current_statamp, to_gaussian, to_si
from .lagrangian import EnergyBreakdown, assemble_mass_matrix, coulomb_energy, \
    darwin_kinetic_energy, generalized_momenta, lagrangian, \
    lagrangian_position_gradient, total_energy
from .integrators import ConservationReport, IntegratorConfig, Trajectory, \
    conservation_report, coulomb_reference_step, integrate, step, \
    velocities_from_momenta
from .particles import InteractionParams, Particle, SystemState, validate_state
from .wire import WireEnergyReport, WireSpec, beta_threshold_check, \
    inductive_kinetic_energy, magnetic_enhancement, removal_energy, \
    thin_wire_eta, wire_current
from .fields import DecomposedField, FieldGrid, coulomb_potential_direct, \
    deposit_charges, gauss_law_residual, helmholtz_decompose, \
    mean_square_field_split, solve_poisson

__all__ = [
    "CODATA2018", "PhysicalConstants", "alfven_current", "alfven_current_statamp",
    "to_gaussian", "to_si",
    "EnergyBreakdown", "assemble_mass_matrix", "coulomb_energy",
    "darwin_kinetic_energy", "generalized_momenta", "lagrangian",
    "lagrangian_position_gradient", "total_energy",
    "ConservationReport", "IntegratorConfig", "Trajectory",
    "conservation_report", "coulomb_reference_step", "integrate", "step",
    "velocities_from_momenta",
    "InteractionParams", "Particle", "SystemState", "validate_state",
    "WireEnergyReport", "WireSpec", "beta_threshold_check",
    "inductive_kinetic_energy", "magnetic_enhancement", "removal_energy",
    "thin_wire_eta", "wire_current",
    "DecomposedField", "FieldGrid", "coulomb_potential_direct",
    "deposit_charges", "gauss_law_residual", "helmholtz_decompose",
    "mean_square_field_split", "solve_poisson",
]
