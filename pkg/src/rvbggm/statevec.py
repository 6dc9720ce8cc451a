"""Sparse spin-1/2 state vectors, singlet products and reduced density matrices.

Basis index bit ``b`` is the spin at linear site ``b``: 0 for up, 1 for down.
A singlet on a bond ``(a, b)`` oriented from sublattice A to B is
``(|up_a down_b> - |down_a up_b>) / sqrt(2)``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from . import _kernels
from .errors import InputError, NoCoverings, SpectrumError, SubsystemTooLarge
from .lattice import DimerCovering, LatticeSpec, enumerate_coverings

__all__ = [
    "PureState",
    "DensityMatrix",
    "SPECTRUM_TOL",
    "clipped_spectrum",
    "singlet_product",
    "build_rvb",
    "product_state",
    "partial_trace",
    "schmidt_lambda_max",
    "von_neumann_entropy",
    "total_spin_squared",
    "spin_correlation",
    "dump_state_json",
    "load_state_json",
]

SPECTRUM_TOL = 1e-12
DEFAULT_KEEP_CAP = 14
MAX_SITES = 62


@dataclass(frozen=True, eq=False)
class PureState:
    """Sparse amplitude map over the spin basis of ``num_sites`` qubits.

    ``basis`` is strictly increasing and every entry of ``amps`` is nonzero.
    The state need not be normalized; ``norm_squared`` is cached.
    """

    num_sites: int
    basis: np.ndarray
    amps: np.ndarray

    def __post_init__(self) -> None:
        if not 1 <= self.num_sites <= MAX_SITES:
            raise InputError(f"num_sites must lie in [1, {MAX_SITES}], got {self.num_sites}")
        basis = np.ascontiguousarray(self.basis, dtype=np.int64)
        amps = np.ascontiguousarray(self.amps, dtype=np.complex128)
        if basis.shape != amps.shape or basis.ndim != 1:
            raise InputError("basis and amplitude arrays must be 1-d with equal length")
        if basis.size and (basis[0] < 0 or basis[-1] >> self.num_sites):
            raise InputError("basis index outside the Hilbert space")
        if np.any(np.diff(basis) <= 0):
            raise InputError("basis indices must be strictly increasing")
        if np.any(amps == 0):
            raise InputError("zero amplitudes must not be stored")
        basis.setflags(write=False)
        amps.setflags(write=False)
        object.__setattr__(self, "basis", basis)
        object.__setattr__(self, "amps", amps)

    @classmethod
    def from_terms(cls, num_sites: int, keys: np.ndarray, values: np.ndarray) -> "PureState":
        """Build from unsorted, possibly repeated ``(key, value)`` terms."""
        keys = np.asarray(keys, dtype=np.int64)
        values = np.asarray(values, dtype=np.complex128)
        uniq, inverse = np.unique(keys, return_inverse=True)
        acc = np.zeros(uniq.size, np.complex128)
        np.add.at(acc, inverse, values)
        nz = acc != 0
        return cls(num_sites, uniq[nz], acc[nz])

    @classmethod
    def from_dense(cls, vector: np.ndarray) -> "PureState":
        vector = np.asarray(vector, dtype=np.complex128).ravel()
        n = int(round(np.log2(vector.size)))
        if 1 << n != vector.size:
            raise InputError("dense vector length must be a power of two")
        idx = np.flatnonzero(vector)
        return cls(n, idx.astype(np.int64), vector[idx])

    @cached_property
    def norm_squared(self) -> float:
        return float(np.vdot(self.amps, self.amps).real)

    def normalized(self) -> "PureState":
        return PureState(self.num_sites, self.basis, self.amps / np.sqrt(self.norm_squared))

    def to_dense(self) -> np.ndarray:
        out = np.zeros(1 << self.num_sites, np.complex128)
        out[self.basis] = self.amps
        return out

    def inner(self, other: "PureState") -> complex:
        """``<self|other>`` without normalization."""
        common, i, j = np.intersect1d(self.basis, other.basis, assume_unique=True, return_indices=True)
        return complex(np.vdot(self.amps[i], other.amps[j]))

    def tensor(self, other: "PureState") -> "PureState":
        """Product state with ``other`` placed on the next ``other.num_sites`` bits."""
        keys = (other.basis[None, :] << self.num_sites) | self.basis[:, None]
        vals = self.amps[:, None] * other.amps[None, :]
        order = np.argsort(keys.ravel(), kind="mergesort")
        return PureState(self.num_sites + other.num_sites, keys.ravel()[order], vals.ravel()[order])

    def max_imag(self) -> float:
        return float(np.max(np.abs(self.amps.imag))) if self.amps.size else 0.0


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Reduced density matrix of the ordered ``sites``; bit ``j`` of a row index is ``sites[j]``."""

    sites: tuple[int, ...]
    matrix: np.ndarray

    def __post_init__(self) -> None:
        mat = np.ascontiguousarray(self.matrix, dtype=np.complex128)
        dim = 1 << len(self.sites)
        if mat.shape != (dim, dim):
            raise InputError(f"matrix shape {mat.shape} does not match {len(self.sites)} sites")
        mat.setflags(write=False)
        object.__setattr__(self, "sites", tuple(int(s) for s in self.sites))
        object.__setattr__(self, "matrix", mat)

    def check(self, tol: float = SPECTRUM_TOL) -> "DensityMatrix":
        """Assert Hermiticity, unit trace and a non-negative spectrum, all within ``tol``."""
        mat = self.matrix
        if np.max(np.abs(mat - mat.conj().T)) > tol:
            raise SpectrumError("density matrix is not Hermitian")
        if abs(np.trace(mat).real - 1.0) > tol or abs(np.trace(mat).imag) > tol:
            raise SpectrumError(f"density matrix trace {np.trace(mat)} differs from 1")
        clipped_spectrum(mat, tol)
        return self

    @cached_property
    def eigenvalues(self) -> np.ndarray:
        """Ascending spectrum clipped to [0, 1]."""
        return clipped_spectrum(self.matrix)

    @property
    def lambda_sq_max(self) -> float:
        return float(self.eigenvalues[-1])

    def purity(self) -> float:
        return float(np.sum(np.abs(self.matrix) ** 2))

    def marginal(self, keep: Sequence[int]) -> "DensityMatrix":
        """Partial trace onto the listed global sites (a subset of ``sites``)."""
        pos = [self.sites.index(s) for s in keep]
        p = len(self.sites)
        rest = [j for j in range(p) if j not in pos]
        tensor = self.matrix.reshape([2] * (2 * p))
        # reshape puts bit p-1 first; axis of bit j is p-1-j (row) and 2p-1-j (column)
        row_axes = [p - 1 - j for j in reversed(pos)] + [p - 1 - j for j in reversed(rest)]
        col_axes = [2 * p - 1 - j for j in reversed(pos)] + [2 * p - 1 - j for j in reversed(rest)]
        t = tensor.transpose(row_axes + col_axes)
        k, r = 1 << len(pos), 1 << len(rest)
        t = t.reshape(k, r, k, r)
        return DensityMatrix(tuple(keep), np.einsum("arbr->ab", t))


def clipped_spectrum(matrix: np.ndarray, tol: float = SPECTRUM_TOL) -> np.ndarray:
    """Eigenvalues of a Hermitian matrix, clipped to [0, 1].

    Raises
    ------
    SpectrumError
        If an eigenvalue lies more than ``tol`` outside [0, 1].
    """
    w = np.linalg.eigvalsh(matrix)
    if w[0] < -tol or w[-1] > 1.0 + tol:
        raise SpectrumError(f"eigenvalues outside [0, 1]: min {w[0]:.3e}, max {w[-1]:.6f}")
    return np.clip(w, 0.0, 1.0)


def _covering_arrays(coverings: Sequence[DimerCovering]) -> tuple[np.ndarray, np.ndarray]:
    bonds = np.array([c.bonds for c in coverings], dtype=np.int64)
    return bonds[:, :, 0], bonds[:, :, 1]


def singlet_product(covering: DimerCovering) -> PureState:
    """Normalized tensor product of A-to-B singlets over the bonds of ``covering``."""
    a, b = _covering_arrays([covering])
    keys, coef = _kernels.expand_coverings(a, b)
    scale = 2.0 ** (-len(covering.bonds) / 2)
    return PureState(covering.spec.num_sites, keys, coef * scale)


def build_rvb(spec: LatticeSpec, coverings: Sequence[DimerCovering] | None = None, normalize: bool = True) -> PureState:
    """Equal-weight superposition of every covering's singlet product.

    Parameters
    ----------
    spec : LatticeSpec
    coverings : sequence of DimerCovering, optional
        Restrict the sum to these coverings (default: all of them).
    normalize : bool
        Scale to unit norm. Without it each singlet product keeps unit norm
        and the squared norm counts covering overlaps.

    Raises
    ------
    NoCoverings
        If the lattice admits no dimer covering.
    """
    if coverings is None:
        coverings = enumerate_coverings(spec)
    if not coverings:
        raise NoCoverings(f"{spec.label} has no dimer covering")
    a, b = _covering_arrays(coverings)
    keys, coef = _kernels.expand_coverings(a, b)
    if not normalize:
        return PureState(spec.num_sites, keys, coef * 2.0 ** (-len(coverings[0].bonds) / 2))
    norm_sq = int(np.dot(coef, coef))
    return PureState(spec.num_sites, keys, coef / np.sqrt(norm_sq))


def product_state(bits: Sequence[int]) -> PureState:
    """Computational basis state; ``bits[i]`` is 1 for spin down at site ``i``."""
    key = sum(int(b) << i for i, b in enumerate(bits))
    return PureState(len(bits), np.array([key]), np.array([1.0]))


def _check_subsystem(num_sites: int, sites: Iterable[int], cap: int | None, allow_full: bool = False) -> np.ndarray:
    arr = np.array(list(sites), dtype=np.int64)
    if arr.size == 0:
        raise InputError("subsystem must be nonempty")
    if np.unique(arr).size != arr.size:
        raise InputError("subsystem lists a site twice")
    if arr.min() < 0 or arr.max() >= num_sites:
        raise InputError("subsystem site outside the state")
    if not allow_full and arr.size >= num_sites:
        raise InputError("subsystem must be a strict subset of the sites")
    if cap is not None and arr.size > cap:
        raise SubsystemTooLarge(f"{arr.size} kept sites exceed the cap of {cap}")
    return arr


def partial_trace(state: PureState, keep: Sequence[int], cap: int | None = DEFAULT_KEEP_CAP) -> DensityMatrix:
    """Normalized reduced density matrix of ``state`` on the ordered sites ``keep``.

    Amplitudes are grouped by their environment bits and only pairs within a
    group contribute, so the full projector is never formed.
    """
    sites = _check_subsystem(state.num_sites, keep, cap)
    env = np.setdiff1d(np.arange(state.num_sites, dtype=np.int64), sites)
    keep_idx = _kernels.split_index(state.basis, sites)
    env_key = _kernels.split_index(state.basis, env)
    rho = _kernels.reduced_density(keep_idx, env_key, state.amps, 1 << sites.size)
    rho = rho / state.norm_squared
    return DensityMatrix(tuple(int(s) for s in sites), rho)


def schmidt_lambda_max(state: PureState, part: Sequence[int], cap: int | None = DEFAULT_KEEP_CAP) -> float:
    """Largest Schmidt coefficient across the split ``part`` : rest.

    The reduced matrix is taken on the smaller side.
    """
    sites = _check_subsystem(state.num_sites, part, None)
    if 2 * sites.size > state.num_sites:
        sites = np.setdiff1d(np.arange(state.num_sites), sites)
    rho = partial_trace(state, sites, cap)
    return float(np.sqrt(rho.lambda_sq_max))


def von_neumann_entropy(rho: DensityMatrix | np.ndarray) -> float:
    """Entropy in bits, ``-sum w log2 w`` over eigenvalues above 1e-14."""
    mat = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho)
    w = clipped_spectrum(mat)
    w = w[w >= 1e-14]
    return float(max(0.0, -np.sum(w * np.log2(w))))


def total_spin_squared(state: PureState) -> float:
    """Expectation of the total spin squared, normalized.

    Uses ``S^2 = S^- S^+ + S_z^2 + S_z``: the raising operator is applied
    sparsely and its image norm combined with the diagonal part.
    """
    n = state.num_sites
    keys = state.basis
    pieces_k = []
    pieces_v = []
    for i in range(n):
        down = ((keys >> i) & 1).astype(bool)
        pieces_k.append(keys[down] ^ (np.int64(1) << i))
        pieces_v.append(state.amps[down])
    raised = np.concatenate(pieces_k)
    vals = np.concatenate(pieces_v)
    if raised.size:
        uniq, inverse = np.unique(raised, return_inverse=True)
        acc = np.zeros(uniq.size, np.complex128)
        np.add.at(acc, inverse, vals)
        raise_norm = float(np.vdot(acc, acc).real)
    else:
        raise_norm = 0.0
    n_down = np.zeros(keys.size, np.int64)
    for i in range(n):
        n_down += (keys >> i) & 1
    sz = 0.5 * n - n_down
    prob = np.abs(state.amps) ** 2
    diag = float(np.dot(prob, sz * sz + sz))
    return (raise_norm + diag) / state.norm_squared


_SS = np.array(
    [[0.25, 0, 0, 0], [0, -0.25, 0.5, 0], [0, 0.5, -0.25, 0], [0, 0, 0, 0.25]], dtype=np.float64
)


def spin_correlation(state: PureState, i: int, j: int) -> float:
    """``<S_i . S_j>`` of the normalized state."""
    if state.num_sites == 2 and {i, j} == {0, 1}:
        vec = state.to_dense() / np.sqrt(state.norm_squared)
        return float(np.vdot(vec, _SS @ vec).real)
    rho = partial_trace(state, [i, j])
    return float(np.trace(rho.matrix @ _SS).real)


def dump_state_json(state: PureState) -> str:
    """JSON with ``num_sites``, hex ``basis`` and ``re``/``im`` amplitude arrays."""
    payload = {
        "num_sites": state.num_sites,
        "basis": [format(int(k), "x") for k in state.basis],
        "re": [float(v) for v in state.amps.real],
        "im": [float(v) for v in state.amps.imag],
    }
    return json.dumps(payload, indent=None, separators=(",", ":"))


def load_state_json(text: str) -> PureState:
    data = json.loads(text)
    try:
        basis = np.array([int(h, 16) for h in data["basis"]], dtype=np.int64)
        amps = np.array(data["re"], dtype=np.float64) + 1j * np.array(data["im"], dtype=np.float64)
        return PureState(int(data["num_sites"]), basis, amps)
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed state dump: {exc}") from exc
