"""Bound states of the two-dimensional quantum dipole.

The attractive potential cos(theta)/r in the plane supports infinitely
many anisotropic bound states.  This package computes them variationally
in nonorthogonal Slater-type bases whose matrix elements are exact
rationals, solves the resulting generalized eigenproblems in arbitrary
precision, optimizes the nonlinear exponent per state, and derives
observables (densities, the quartic coupling of the ground state) plus an
independent finite-difference cross-check.
"""

from .assembly import (
    ExactMatrixSet,
    assemble,
    assemble_basis,
    assemble_cached,
    cache_path,
    kinetic_entry,
    load_cache,
    overlap_entry,
    potential_entry,
    save_cache,
)
from .basis import BasisFunction, Parity, basis_size, enumerate_basis
from .eigen import Precision, Spectrum, jacobi_eigen, reduce, spectrum, verified_spectrum
from .errors import (
    BracketExhaustedError,
    CacheChecksumError,
    CacheError,
    CacheFormatError,
    CacheVersionError,
    ConvergenceError,
    InternalInconsistencyError,
    InvalidArgumentError,
    QdipoleError,
)
from .exact_integrals import Rational, angular_integral, radial_integral
from .observables import (
    DensityGrid,
    PhysicalUnits,
    WaveFunction,
    coupling_constant,
    density_grid,
    eval_wavefunction,
    laguerre_nodes,
    normalize,
    state_wavefunction,
    to_physical_energy,
)
from .optimize import OptResult, k_sweep, optimize_alpha, optimize_alpha_auto
from .oracle_fd import FdConfig, fd_spectrum

__version__ = "0.1.0"

__all__ = [
    "BasisFunction",
    "BracketExhaustedError",
    "CacheChecksumError",
    "CacheError",
    "CacheFormatError",
    "CacheVersionError",
    "ConvergenceError",
    "DensityGrid",
    "ExactMatrixSet",
    "FdConfig",
    "InternalInconsistencyError",
    "InvalidArgumentError",
    "OptResult",
    "Parity",
    "PhysicalUnits",
    "Precision",
    "QdipoleError",
    "Rational",
    "Spectrum",
    "WaveFunction",
    "angular_integral",
    "assemble",
    "assemble_basis",
    "assemble_cached",
    "basis_size",
    "cache_path",
    "coupling_constant",
    "density_grid",
    "enumerate_basis",
    "eval_wavefunction",
    "fd_spectrum",
    "jacobi_eigen",
    "k_sweep",
    "kinetic_entry",
    "laguerre_nodes",
    "load_cache",
    "normalize",
    "optimize_alpha",
    "optimize_alpha_auto",
    "overlap_entry",
    "potential_entry",
    "radial_integral",
    "reduce",
    "save_cache",
    "spectrum",
    "state_wavefunction",
    "to_physical_energy",
    "verified_spectrum",
    "__version__",
]
