"""Numerical laboratory for commensurate AAH photonic lattices.

Band structures and gaps, lattice-gauge Chern numbers and phase diagrams,
open-boundary edge spectra with winding numbers, split-step paraxial beam
propagation for Thouless pumping of light, and tight-binding parameter
extraction from localized waveguide modes.
"""

from .model import BlochMomentum, ModulationParams, OpenChainSpec, \
    bloch_hamiltonian, hopping, onsite_potential, open_hamiltonian
from .spectral import BandGrid, all_gaps, band_gap, band_grid, gap_scan, \
    zone_mesh
from .topology import ChernVector, EvenDenominator, MeshTooCoarse, \
    Undefined, chern_numbers, phase_diagram, plaquette_field
from .edges import FiducialInGapViolation, bulk_edge_check, gap_fiducials, \
    spectral_flow, winding_numbers
from .propagation import BoundaryLeakage, FieldTrajectory, GridUnderresolved, \
    IndexModulated, OpticalConstants, SimulationGrid, SpacingModulated, \
    default_grid, gaussian_input, injection_guide, lz_ratio, mean_position, \
    pump_chern, refractive_profile, split_step_propagate
from .extraction import ExtractedParams, FitDegenerate, LocalizedMode, \
    NoBoundMode, extract_parameters, localized_mode

__version__ = "0.1.0"

__all__ = [
    "BlochMomentum", "ModulationParams", "OpenChainSpec",
    "bloch_hamiltonian", "hopping", "onsite_potential", "open_hamiltonian",
    "BandGrid", "all_gaps", "band_gap", "band_grid", "gap_scan", "zone_mesh",
    "ChernVector", "EvenDenominator", "MeshTooCoarse", "Undefined",
    "chern_numbers", "phase_diagram", "plaquette_field",
    "FiducialInGapViolation", "bulk_edge_check", "gap_fiducials",
    "spectral_flow", "winding_numbers",
    "BoundaryLeakage", "FieldTrajectory", "GridUnderresolved",
    "IndexModulated", "OpticalConstants", "SimulationGrid",
    "SpacingModulated", "default_grid", "gaussian_input", "injection_guide",
    "lz_ratio", "mean_position", "pump_chern", "refractive_profile",
    "split_step_propagate",
    "ExtractedParams", "FitDegenerate", "LocalizedMode", "NoBoundMode",
    "extract_parameters", "localized_mode",
]
