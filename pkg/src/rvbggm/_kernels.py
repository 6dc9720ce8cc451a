"""State-vector kernels with numba and pure-numpy implementations.

Each public function dispatches on :func:`rvbggm._jit.get_backend`. Both
implementations return identical arrays (integer kernels) or agree to
rounding (floating-point accumulation, fixed reduction order per backend).
"""
from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from ._jit import njit, use_numba

__all__ = ["expand_coverings", "split_index", "reduced_density", "sector_density"]


# --------------------------------------------------------------------------
# covering expansion: every singlet product written out in the spin basis


@njit
def _expand_coverings_numba(a_sites, b_sites):
    n_cov, n_bonds = a_sites.shape
    terms = 1 << n_bonds
    keys = np.empty(n_cov * terms, np.int64)
    signs = np.empty(n_cov * terms, np.int64)
    pos = 0
    for c in range(n_cov):
        key = np.int64(0)
        for t in range(n_bonds):
            key |= np.int64(1) << b_sites[c, t]
        sign = 1
        keys[pos] = key
        signs[pos] = sign
        pos += 1
        for g in range(1, terms):
            t = 0
            while not (g >> t) & 1:
                t += 1
            key ^= (np.int64(1) << a_sites[c, t]) | (np.int64(1) << b_sites[c, t])
            sign = -sign
            keys[pos] = key
            signs[pos] = sign
            pos += 1
    order = np.argsort(keys, kind="mergesort")
    out_keys = np.empty(keys.size, np.int64)
    out_coef = np.empty(keys.size, np.int64)
    n_out = 0
    i = 0
    while i < order.size:
        k = keys[order[i]]
        acc = 0
        while i < order.size and keys[order[i]] == k:
            acc += signs[order[i]]
            i += 1
        if acc != 0:
            out_keys[n_out] = k
            out_coef[n_out] = acc
            n_out += 1
    return out_keys[:n_out].copy(), out_coef[:n_out].copy()


def _expand_coverings_numpy(a_sites, b_sites):
    n_cov, n_bonds = a_sites.shape
    choice = np.arange(1 << n_bonds, dtype=np.int64)
    bits = (choice[:, None] >> np.arange(n_bonds, dtype=np.int64)) & 1
    sign = 1 - 2 * (bits.sum(axis=1) % 2)
    one = np.int64(1)
    base = (one << b_sites).sum(axis=1)
    delta = (one << a_sites) - (one << b_sites)
    keys = (base[None, :] + bits @ delta.T).T.ravel()
    signs = np.tile(sign, n_cov)
    uniq, inverse = np.unique(keys, return_inverse=True)
    coef = np.bincount(inverse, weights=signs, minlength=uniq.size)
    coef = np.rint(coef).astype(np.int64)
    keep = coef != 0
    return uniq[keep], coef[keep]


def expand_coverings(a_sites: np.ndarray, b_sites: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Sum of singlet products, one per covering, with integer coefficients.

    Parameters
    ----------
    a_sites, b_sites : (n_coverings, n_bonds) int64
        Sublattice-A and sublattice-B endpoint of every bond.

    Returns
    -------
    keys : int64 array, sorted
        Basis indices with nonzero total coefficient.
    coef : int64 array
        Coefficient of each key in units of ``2**(-n_bonds/2)``.
    """
    a_sites = np.ascontiguousarray(a_sites, dtype=np.int64)
    b_sites = np.ascontiguousarray(b_sites, dtype=np.int64)
    if use_numba():
        return _expand_coverings_numba(a_sites, b_sites)
    return _expand_coverings_numpy(a_sites, b_sites)


# --------------------------------------------------------------------------
# bit extraction


@njit
def _split_index_numba(keys, sites):
    out = np.zeros(keys.size, np.int64)
    for n in range(keys.size):
        k = keys[n]
        v = np.int64(0)
        for j in range(sites.size):
            v |= ((k >> sites[j]) & 1) << j
        out[n] = v
    return out


def _split_index_numpy(keys, sites):
    out = np.zeros(keys.size, np.int64)
    for j, s in enumerate(sites):
        out |= ((keys >> s) & 1) << j
    return out


def split_index(keys: np.ndarray, sites: np.ndarray) -> np.ndarray:
    """Gather the bits of ``keys`` at positions ``sites`` into a compact index.

    Bit ``j`` of the result is bit ``sites[j]`` of the key.
    """
    keys = np.ascontiguousarray(keys, dtype=np.int64)
    sites = np.ascontiguousarray(sites, dtype=np.int64)
    if use_numba():
        return _split_index_numba(keys, sites)
    return _split_index_numpy(keys, sites)


# --------------------------------------------------------------------------
# reduced density matrix by environment grouping


@njit
def _reduced_density_numba(keep_idx, env_key, amps, dim):
    order = np.argsort(env_key, kind="mergesort")
    ks = keep_idx[order]
    es = env_key[order]
    av = amps[order]
    rho = np.zeros((dim, dim), amps.dtype)
    n = order.size
    i = 0
    while i < n:
        j = i + 1
        while j < n and es[j] == es[i]:
            j += 1
        for p in range(i, j):
            row = ks[p]
            ap = av[p]
            for q in range(i, j):
                rho[row, ks[q]] += ap * np.conj(av[q])
        i = j
    return rho


def _reduced_density_numpy(keep_idx, env_key, amps, dim):
    groups, row = np.unique(env_key, return_inverse=True)
    psi = sp.csr_matrix((amps, (row, keep_idx)), shape=(groups.size, dim))
    return np.asarray((psi.T @ psi.conj()).todense())


def reduced_density(keep_idx: np.ndarray, env_key: np.ndarray, amps: np.ndarray, dim: int) -> np.ndarray:
    """``rho[k, k'] = sum_e psi(e, k) conj(psi(e, k'))`` accumulated over environment groups.

    Real amplitudes give a real matrix; anything else is promoted to complex.
    """
    keep_idx = np.ascontiguousarray(keep_idx, dtype=np.int64)
    env_key = np.ascontiguousarray(env_key, dtype=np.int64)
    amps = np.ascontiguousarray(amps)
    if amps.dtype != np.float64:
        amps = amps.astype(np.complex128)
    if use_numba():
        return _reduced_density_numba(keep_idx, env_key, amps, int(dim))
    return _reduced_density_numpy(keep_idx, env_key, amps, int(dim))


# --------------------------------------------------------------------------
# fused split: bit extraction, sector filter and accumulation in one pass


@njit
def _sector_density_numba(basis, amps, keep, rest, position, dim):
    n = basis.size
    k_idx = np.empty(n, np.int64)
    e_idx = np.empty(n, np.int64)
    a_sel = np.empty(n, amps.dtype)
    count = 0
    for t in range(n):
        key = basis[t]
        kv = np.int64(0)
        for j in range(keep.size):
            kv |= ((key >> keep[j]) & 1) << j
        p = position[kv]
        if p < 0:
            continue
        ev = np.int64(0)
        for j in range(rest.size):
            ev |= ((key >> rest[j]) & 1) << j
        k_idx[count] = p
        e_idx[count] = ev
        a_sel[count] = amps[t]
        count += 1
    order = np.argsort(e_idx[:count])
    rho = np.zeros((dim, dim), amps.dtype)
    i = 0
    while i < count:
        gi = order[i]
        j = i + 1
        while j < count and e_idx[order[j]] == e_idx[gi]:
            j += 1
        for p in range(i, j):
            row = k_idx[order[p]]
            ap = a_sel[order[p]]
            for q in range(i, j):
                rho[row, k_idx[order[q]]] += ap * np.conj(a_sel[order[q]])
        i = j
    return rho


def _sector_density_numpy(basis, amps, keep, rest, position, dim):
    k_idx = position[_split_index_numpy(basis, keep)]
    sel = k_idx >= 0
    e_idx = _split_index_numpy(basis[sel], rest)
    return _reduced_density_numpy(k_idx[sel], e_idx, amps[sel], dim)


def sector_density(basis: np.ndarray, amps: np.ndarray, keep: np.ndarray, rest: np.ndarray,
                   position: np.ndarray) -> np.ndarray:
    """Unnormalized reduced density matrix of ``keep`` restricted to a set of kept configurations.

    Parameters
    ----------
    basis, amps : arrays
        Sparse state.
    keep, rest : int64 arrays
        Kept and traced sites; together they must cover the state.
    position : int64 array of length ``2**keep.size``
        Row of each kept configuration in the output, or ``-1`` to drop it.
        Passing ``arange`` gives the full matrix.
    """
    basis = np.ascontiguousarray(basis, dtype=np.int64)
    keep = np.ascontiguousarray(keep, dtype=np.int64)
    rest = np.ascontiguousarray(rest, dtype=np.int64)
    position = np.ascontiguousarray(position, dtype=np.int64)
    amps = np.ascontiguousarray(amps)
    if amps.dtype != np.float64:
        amps = amps.astype(np.complex128)
    dim = int(position.max()) + 1
    if use_numba():
        return _sector_density_numba(basis, amps, keep, rest, position, dim)
    return _sector_density_numpy(basis, amps, keep, rest, position, dim)
