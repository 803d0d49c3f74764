"""Driven free-fermion lattices: correlation-matrix channels, steady states and a Fock-space oracle."""

from .channels import (DriveProtocol, DriveStep, EnergyBasisStep, Trajectory, apply_detection,
                       apply_extraction, apply_injection, apply_unitary, drive_step, evolve,
                       mixture, sequence)
from .errors import FermiDriveError
from .lindblad import LindbladParams, lindblad_evolve, lindblad_rhs, lindblad_steady
from .linalg import SpectralDecomposition, eigendecompose, propagator, rank2_resolvent
from .models import (SpectralModel, build_hopping_chain, initial_state, load_model,
                     mode_occupations, model_from_matrix, overlaps)
from .phi import (PhiCoefficients, diagonal_residual, first_guess_phi, lindblad_phi,
                  phi_coefficients, phi_distribution)
from .steady import (SteadyStateResult, VectorizedChannel, steady_direct, steady_fixed_point,
                     vectorize)

__version__ = "0.1.0"
