"""Density of eigenfrequencies of disordered boson lattices.

Two independent routes to the same quantity: a self-consistent mean-field
(coherent potential) solver for the disorder-averaged resolvent, and a
Monte Carlo oracle that samples finite realizations of the constrained
random ensemble and diagonalizes them exactly.
"""

__version__ = "0.1.0"

from .bzquad import (
    AccuracyWarning,
    KernelParams,
    QuadratureSpec,
    I_cpa,
    I_g,
    integrate_bz,
    kernel_D,
)
from .cpa import (
    BranchError,
    CoherentPotential,
    DosCurve,
    SolverConfig,
    SolverError,
    cpa_residual,
    continuation_sweep,
    default_eps,
    dos_curve,
    find_gap_edge,
    g_of_z,
    rmt_scaled_a1,
    solve_p,
)
from .ensemble import (
    ConeViolationError,
    EnsembleSample,
    RandomBlock,
    SpectrumHistogram,
    SymplecticStructure,
    assemble_H,
    local_R,
    mc_dos,
    sample_block,
    spectrum_X,
)
from .linalg import EigenDecomposition, NotPsdError, cholesky_psd, hermitian_eig
from .model import ModelParams, assemble_K, delta_k, dispersion, k1_block

__all__ = [
    "__version__",
    "AccuracyWarning",
    "BranchError",
    "CoherentPotential",
    "ConeViolationError",
    "DosCurve",
    "EigenDecomposition",
    "EnsembleSample",
    "KernelParams",
    "ModelParams",
    "NotPsdError",
    "QuadratureSpec",
    "RandomBlock",
    "SolverConfig",
    "SolverError",
    "SpectrumHistogram",
    "SymplecticStructure",
    "I_cpa",
    "I_g",
    "assemble_H",
    "assemble_K",
    "cholesky_psd",
    "continuation_sweep",
    "cpa_residual",
    "default_eps",
    "delta_k",
    "dispersion",
    "dos_curve",
    "find_gap_edge",
    "g_of_z",
    "hermitian_eig",
    "integrate_bz",
    "k1_block",
    "kernel_D",
    "local_R",
    "mc_dos",
    "rmt_scaled_a1",
    "sample_block",
    "solve_p",
    "spectrum_X",
]
