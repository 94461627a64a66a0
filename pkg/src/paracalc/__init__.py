"""Numerical laboratory for paradifferential calculus with log-Lipschitz
coefficients and energy estimates with loss for hyperbolic systems."""

from .spectral_core import DyadicPartition, GridFunction, SpectralCoeffs, dyadic_block, fft_unitary, ifft_unitary
from .spaces import SobolevIndex, log_besov_norm, log_sobolev_norm, product_probe, random_field
from .symbols import AdmissibleCutoff, Symbol, smooth_symbol, tilde_symbol
from .paradiff import apply_paradiff, operator_order_fit, paradiff_operator, paraproduct
from .systems import HyperbolicSystem, build_symmetrizer, build_system, verify_symmetrizer
from .energy import EnergyFunctional, EnergySchedule, calibrate_mu, gronwall_check
from .solver import NumericalGuardError, SolverConfig, Trajectory, evolve, loss_experiment

__version__ = "0.1.0"
