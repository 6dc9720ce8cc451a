"""Exact two-column reduced density matrices by column transfer.

The RVB state is written as a matrix-product state along the horizontal axis.
The virtual state on a vertical cut records which rows are crossed by a
horizontal dimer and the spins of the left endpoints of those dimers, so the
bond dimension is ``3**m_prime``. Every column tensor is exact: a crossing
dimer contributes its singlet amplitude when its right endpoint is read,
vertical dimers fill the remaining rows pairwise, and new crossings copy the
spin of their left endpoint into the outgoing virtual state.

Contractions are organized around the kept pair of columns:

* open boundary: Gram matrices of the columns to the left and to the right,
  each propagated column by column from the empty cut;
* horizontally periodic, four columns: the two traced columns form a block
  of the same shape as the kept pair, and the reduced matrix is a product of
  two sparse block-amplitude matrices;
* horizontally periodic, more columns: the doubled transfer of the traced
  columns is multiplied out into a dense matrix, which bounds the height.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.sparse as sp

from ..errors import HeightTooLarge, InputError
from ..lattice import LatticeSpec
from ..statevec import DensityMatrix

__all__ = [
    "ColumnTensor",
    "column_tensor",
    "column_pair_density",
    "DEFAULT_TRANSFER_HEIGHT_CAP",
    "DEFAULT_RING_HEIGHT_CAP",
]

DEFAULT_TRANSFER_HEIGHT_CAP = 6
DEFAULT_RING_HEIGHT_CAP = 4

_HALF = 1.0 / np.sqrt(2.0)


@dataclass(frozen=True)
class ColumnTensor:
    """Sparse column tensor ``A[sigma][v_in, v_out]`` in coordinate form.

    ``parity`` is the column index modulo 2, which fixes the sublattice
    pattern and therefore the singlet orientations.
    """

    height: int
    parity: int
    sigma: np.ndarray
    v_in: np.ndarray
    v_out: np.ndarray
    amp: np.ndarray

    @property
    def bond_dim(self) -> int:
        return 3 ** self.height

    def stacked_left(self) -> sp.csr_matrix:
        """Rows ``(sigma, v_in)``, columns ``v_out``."""
        d = self.bond_dim
        rows = self.sigma * d + self.v_in
        return sp.csr_matrix((self.amp, (rows, self.v_out)), shape=((1 << self.height) * d, d))

    def stacked_right(self) -> sp.csr_matrix:
        """Rows ``v_in``, columns ``(sigma, v_out)``."""
        d = self.bond_dim
        cols = self.sigma * d + self.v_out
        return sp.csr_matrix((self.amp, (self.v_in, cols)), shape=(d, (1 << self.height) * d))

    def doubled(self) -> sp.csr_matrix:
        """``T[(a, a'), (b, b')] = sum_sigma A[sigma][a, b] A[sigma][a', b']``."""
        d = self.bond_dim
        order = np.argsort(self.sigma, kind="stable")
        sig = self.sigma[order]
        starts = np.flatnonzero(np.r_[True, sig[1:] != sig[:-1]])
        ends = np.r_[starts[1:], sig.size]
        rows, cols, vals = [], [], []
        for s, e in zip(starts, ends):
            idx = order[s:e]
            a, b, v = self.v_in[idx], self.v_out[idx], self.amp[idx]
            rows.append((a[:, None] * d + a[None, :]).ravel())
            cols.append((b[:, None] * d + b[None, :]).ravel())
            vals.append((v[:, None] * v[None, :]).ravel())
        return sp.csr_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(d * d, d * d)
        )

    def propagate_left(self, gram: np.ndarray) -> np.ndarray:
        """``sum_sigma A[sigma]^T gram A[sigma]`` for a Gram matrix on the incoming cut."""
        out = np.zeros_like(gram)
        for s, a, b, v in self._by_sigma():
            sub = gram[np.ix_(a, a)] * np.outer(v, v)
            np.add.at(out, (b[:, None], b[None, :]), sub)
        return out

    def propagate_right(self, gram: np.ndarray) -> np.ndarray:
        """``sum_sigma A[sigma] gram A[sigma]^T`` for a Gram matrix on the outgoing cut."""
        out = np.zeros_like(gram)
        for s, a, b, v in self._by_sigma():
            sub = gram[np.ix_(b, b)] * np.outer(v, v)
            np.add.at(out, (a[:, None], a[None, :]), sub)
        return out

    def _by_sigma(self):
        order = np.argsort(self.sigma, kind="stable")
        sig = self.sigma[order]
        starts = np.flatnonzero(np.r_[True, sig[1:] != sig[:-1]])
        ends = np.r_[starts[1:], sig.size]
        for s, e in zip(starts, ends):
            idx = order[s:e]
            yield sig[s], self.v_in[idx], self.v_out[idx], self.amp[idx]


def _virtual_states(height: int) -> tuple[list[tuple[int, int]], dict[tuple[int, int], int]]:
    """All ``(crossing mask, endpoint spins)`` with spins a subset of the mask; index 0 is the empty cut."""
    states = []
    for w in range(1 << height):
        s = w
        subs = []
        while True:
            subs.append(s)
            if s == 0:
                break
            s = (s - 1) & w
        states.extend((w, t) for t in sorted(subs))
    return states, {st: i for i, st in enumerate(states)}


def _vertical_pairs(free: int, height: int) -> list[tuple[int, int]] | None:
    """Unique vertical tiling of the rows in ``free``, or ``None`` if a run has odd length."""
    pairs = []
    r = 0
    while r < height:
        if (free >> r) & 1:
            if r + 1 >= height or not (free >> (r + 1)) & 1:
                return None
            pairs.append((r, r + 1))
            r += 2
        else:
            r += 1
    return pairs


@lru_cache(maxsize=None)
def column_tensor(height: int, parity: int) -> ColumnTensor:
    """Exact RVB column tensor for a column of the given height and index parity.

    Raises
    ------
    HeightTooLarge
        Above :data:`DEFAULT_TRANSFER_HEIGHT_CAP` rows.
    """
    if height < 1:
        raise InputError("column height must be positive")
    if height > DEFAULT_TRANSFER_HEIGHT_CAP:
        raise HeightTooLarge(f"column transfer supports at most {DEFAULT_TRANSFER_HEIGHT_CAP} rows")
    parity %= 2
    full = (1 << height) - 1
    states, index = _virtual_states(height)
    out_sig, out_in, out_out, out_amp = [], [], [], []
    for vi, (w_in, s_in) in enumerate(states):
        base_sigma = 0
        base_amp = 1.0
        for r in range(height):
            if (w_in >> r) & 1:
                left_down = (s_in >> r) & 1
                here_down = 1 - left_down
                base_sigma |= here_down << r
                a_down = here_down if (r + parity) % 2 == 0 else left_down
                base_amp *= -_HALF if a_down else _HALF
        rest = full & ~w_in
        w_out = rest
        while True:
            pairs = _vertical_pairs(rest & ~w_out, height)
            if pairs is not None:
                out_rows = [r for r in range(height) if (w_out >> r) & 1]
                for vchoice in range(1 << len(pairs)):
                    sigma = base_sigma
                    amp = base_amp * _HALF ** len(pairs)
                    for t, (r0, r1) in enumerate(pairs):
                        a_row, b_row = (r0, r1) if (r0 + parity) % 2 == 0 else (r1, r0)
                        if (vchoice >> t) & 1:
                            sigma |= 1 << a_row
                            amp = -amp
                        else:
                            sigma |= 1 << b_row
                    for ochoice in range(1 << len(out_rows)):
                        s_out = 0
                        for t, r in enumerate(out_rows):
                            if (ochoice >> t) & 1:
                                s_out |= 1 << r
                        out_sig.append(sigma | s_out)
                        out_in.append(vi)
                        out_out.append(index[(w_out, s_out)])
                        out_amp.append(amp)
            if w_out == 0:
                break
            w_out = (w_out - 1) & rest
    arr = lambda x, t: np.array(x, dtype=t)
    return ColumnTensor(
        height,
        parity,
        arr(out_sig, np.int64),
        arr(out_in, np.int64),
        arr(out_out, np.int64),
        arr(out_amp, np.float64),
    )


def _pair_block(left: ColumnTensor, right: ColumnTensor) -> sp.csr_matrix:
    """Rows ``sigma + (tau << h)``, columns ``a * D + b`` holding ``(A[sigma] A[tau])[a, b]``."""
    h, d = left.height, left.bond_dim
    prod = (left.stacked_left() @ right.stacked_right()).tocoo()
    sigma, a = np.divmod(prod.row, d)
    tau, b = np.divmod(prod.col, d)
    rows = sigma + (tau << h)
    return sp.csr_matrix((prod.data, (rows, a * d + b)), shape=(1 << (2 * h), d * d))


def _swap_virtual(block: sp.csr_matrix, d: int) -> sp.csr_matrix:
    """Reindex columns from ``a * D + b`` to ``b * D + a``."""
    coo = block.tocoo()
    a, b = np.divmod(coo.col, d)
    return sp.csr_matrix((coo.data, (coo.row, b * d + a)), shape=block.shape)


def _psd_factor(gram: np.ndarray, rel_tol: float = 1e-14) -> np.ndarray:
    w, v = np.linalg.eigh((gram + gram.T) / 2)
    keep = w > rel_tol * max(w[-1], 0.0)
    return v[:, keep] * np.sqrt(w[keep])


def _open_density(spec: LatticeSpec, first: int) -> np.ndarray:
    h = spec.m_prime
    d = 3 ** h
    left = np.zeros((d, d))
    left[0, 0] = 1.0
    for c in range(first):
        left = column_tensor(h, c).propagate_left(left)
        left /= np.max(np.abs(left))
    right = np.zeros((d, d))
    right[0, 0] = 1.0
    for c in range(spec.m - 1, first + 1, -1):
        right = column_tensor(h, c).propagate_right(right)
        right /= np.max(np.abs(right))
    ul, ur = _psd_factor(left), _psd_factor(right)
    block = _pair_block(column_tensor(h, first), column_tensor(h, first + 1))
    coo = block.tocoo()
    a, b = np.divmod(coo.col, d)
    # G[i, p, q] = sum_ab L_i[a, b] ul[a, p] ur[b, q]
    stacked = sp.csr_matrix((coo.data, (coo.row * d + a, b)), shape=(block.shape[0] * d, d))
    half = np.asarray(stacked @ ur).reshape(block.shape[0], d, -1)
    g = np.einsum("iaq,ap->ipq", half, ul).reshape(block.shape[0], -1)
    return g @ g.T


def _ring_density(spec: LatticeSpec, first: int, ring_cap: int) -> np.ndarray:
    h, m = spec.m_prime, spec.m
    d = 3 ** h
    block = _pair_block(column_tensor(h, first), column_tensor(h, first + 1))
    if m == 4:
        # the two traced columns form a block with the same parity pattern
        psi = block @ _swap_virtual(block, d).T
        psi = psi.toarray()
        return psi @ psi.T
    if h > ring_cap:
        raise HeightTooLarge(
            f"periodic transfer with {m} columns supports at most {ring_cap} rows; got {h}"
        )
    w = None
    for c in range(first + 2, first + m):
        t = column_tensor(h, c % m).doubled()
        w = t.toarray() if w is None else np.asarray(t.T @ w.T).T
        w /= np.max(np.abs(w))
    # w[(b, b'), (a, a')] -> k[(a, b), (a', b')]
    k = w.reshape(d, d, d, d).transpose(2, 0, 3, 1).reshape(d * d, d * d)
    dense = block.toarray()
    return dense @ k @ dense.T


def column_pair_density(spec: LatticeSpec, first_col: int | None = None, ring_cap: int = DEFAULT_RING_HEIGHT_CAP) -> DensityMatrix:
    """Reduced density matrix of the RVB state on columns ``first_col`` and ``first_col + 1``.

    Parameters
    ----------
    spec : LatticeSpec
        Lattice with at least two columns.
    first_col : int, optional
        Left column of the kept pair; defaults to the last pair, ``m - 2``.
    ring_cap : int
        Largest height for periodic lattices with more than four columns.

    Returns
    -------
    DensityMatrix
        Trace-one matrix on the two columns' sites, bit ``r`` of the row
        index being row ``r`` of the left column and bit ``m_prime + r`` row
        ``r`` of the right one.
    """
    if spec.m < 2:
        raise InputError("a column pair needs at least two columns")
    first = spec.m - 2 if first_col is None else int(first_col)
    if not 0 <= first <= spec.m - 2:
        raise InputError(f"column pair starting at {first} lies outside {spec.label}")
    if spec.periodic:
        rho = _ring_density(spec, first, ring_cap)
    else:
        rho = _open_density(spec, first)
    trace = np.trace(rho)
    if not trace > 0:
        raise InputError(f"{spec.label} admits no dimer covering")
    rho = (rho + rho.T) / (2 * trace)
    sites = spec.column_sites(first) + spec.column_sites(first + 1)
    return DensityMatrix(sites, rho)
