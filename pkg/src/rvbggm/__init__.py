"""Exact numerics for resonating-valence-bond (RVB) states on square lattices.

Modules
-------
lattice
    Lattice geometry, dimer-covering enumeration and transfer-matrix counts.
statevec
    Sparse spin-1/2 states, RVB construction and reduced density matrices.
ggm
    Generalized geometric measure, entanglement certification and
    strong-subadditivity checks.
dmrm
    Reduced states of large lattices by column transfer, loop gas and block
    recursions.
scaling
    Finite-size scaling fits.
cli
    Command-line front end.

Set ``RVBGGM_DISABLE_NUMBA=1`` to run every kernel on the pure-numpy path.
"""
__version__ = "0.1.0"

from ._jit import backend, get_backend, set_backend
from .errors import (
    CapExceeded,
    DegenerateFit,
    FitError,
    InputError,
    InsufficientSamples,
    InvalidLattice,
    NumericalError,
    RvbError,
)
from .ggm import Bipartition, Family, GgmResult, certify_genuine_entanglement, ggm_exact, ggm_restricted, ssa_check
from .lattice import Boundary, DimerCovering, LatticeSpec, covering_count_transfer, enumerate_coverings
from .scaling import ScalingFit, ScalingSample, extrapolate, fit_scaling
from .statevec import DensityMatrix, PureState, build_rvb, partial_trace, schmidt_lambda_max, von_neumann_entropy

__all__ = [
    "__version__",
    "backend", "get_backend", "set_backend",
    "CapExceeded", "DegenerateFit", "FitError", "InputError", "InsufficientSamples",
    "InvalidLattice", "NumericalError", "RvbError",
    "Bipartition", "Family", "GgmResult", "certify_genuine_entanglement", "ggm_exact",
    "ggm_restricted", "ssa_check",
    "Boundary", "DimerCovering", "LatticeSpec", "covering_count_transfer", "enumerate_coverings",
    "ScalingFit", "ScalingSample", "extrapolate", "fit_scaling",
    "DensityMatrix", "PureState", "build_rvb", "partial_trace", "schmidt_lambda_max",
    "von_neumann_entropy",
]
