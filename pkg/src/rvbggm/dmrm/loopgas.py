"""Spin correlations of the RVB state from its transition-graph loop gas.

The overlap of two singlet coverings with A-to-B orientation is
``2**(loops - D)`` with ``D`` the number of dimers, so the squared norm of
the RVB state is a sum over pairs of coverings weighted by ``2**loops``. Two sites in the same loop have
``<S_i . S_j> = (3/4) eps_i eps_j`` (``eps = +1`` on A, ``-1`` on B) and zero
otherwise, hence the correlation is ``(3/4) eps_i eps_j`` times the weighted
probability that both sites share a loop.

Both sums are evaluated exactly with a row-by-row transfer over connectivity
states. The frontier holds, per column plus one horizontal and one wrap slot,
the two layers (ket covering, bra covering) of open strands encoded as a
parenthesis word of 3 bits per slot. For correlations two 5-bit marks follow
the strands through the two chosen sites, plus a flag that is set once both
marks close on the same loop. Weights are renormalized after each row and the
logarithm of the scale is carried separately.

With the SU(2) invariance of the state the two-site reduced matrix is fixed by
the correlation ``C``: its eigenvalues are ``1/4 - C`` (singlet) and
``1/4 + C/3`` (triplet, threefold).
"""
from __future__ import annotations

import numpy as np

from .._jit import HAVE_NUMBA, njit, use_numba
from ..errors import CapExceeded, InputError
from ..lattice import LatticeSpec

__all__ = [
    "DEFAULT_LOOP_WIDTH_CAP",
    "loop_weight",
    "pair_correlation",
    "pair_lambda_sq",
    "lambda_sq_from_correlation",
]

DEFAULT_LOOP_WIDTH_CAP = 12

_NOT_YET = 31
_CLEARED = 30


@njit
def _slot(t, c, m):
    # slots in left-to-right order: down_0 .. down_{c-1}, left, down_c .. down_{m-1}, wrap
    if t < c:
        return t
    if t == c:
        return m
    if t <= m:
        return t - 1
    return m + 1


@njit
def _position(s, c, m):
    if s < c:
        return s
    if s == m:
        return c
    if s < m:
        return s + 1
    return m + 1


@njit
def _decode(key, n_slots, c, partner, stack):
    m = n_slots - 2
    sp_ = 0
    for e in range(2 * n_slots):
        partner[e] = -1
    for t in range(n_slots):
        s = _slot(t, c, m)
        v = (key >> (3 * s)) & 7
        if v == 0:
            continue
        if v == 5:
            partner[2 * s] = 2 * s + 1
            partner[2 * s + 1] = 2 * s
            continue
        e = 2 * s + (0 if v <= 2 else 1)
        if v == 1 or v == 3:
            stack[sp_] = e
            sp_ += 1
        else:
            sp_ -= 1
            o = stack[sp_]
            partner[e] = o
            partner[o] = e


@njit
def _encode(n_slots, c, partner):
    m = n_slots - 2
    key = np.int64(0)
    for t in range(n_slots):
        s = _slot(t, c, m)
        k = partner[2 * s] >= 0
        b = partner[2 * s + 1] >= 0
        if not k and not b:
            continue
        if k and b and partner[2 * s] == 2 * s + 1:
            v = 5
        else:
            e = 2 * s + (0 if k else 1)
            o = partner[e]
            to = _position(o // 2, c, m)
            opener = to > t or (to == t and o > e)
            if k:
                v = 1 if opener else 2
            else:
                v = 3 if opener else 4
        key |= np.int64(v) << (3 * s)
    return key


@njit
def _step(keys, weights, m, height, wrap, r, c, mark_i, mark_j, marked):
    """Successors of every frontier state after placing site ``(r, c)``; not aggregated."""
    n_slots = m + 2
    left = m
    wslot = m + 1
    shift = 3 * n_slots
    cfg_mask = (np.int64(1) << shift) - 1
    site = r * m + c
    nxt_c = c + 1 if c + 1 < m else 0
    out_k = np.empty(keys.size * 9, np.int64)
    out_w = np.empty(keys.size * 9, np.float64)
    count = 0
    partner = np.empty(2 * n_slots, np.int64)
    stack = np.empty(2 * n_slots, np.int64)
    p = np.empty(2 * n_slots, np.int64)
    inc = np.empty(2, np.int64)
    nopt = np.empty(2, np.int64)
    opts = np.empty((2, 3), np.int64)
    for idx in range(keys.size):
        key = keys[idx]
        w = weights[idx]
        cfg = key & cfg_mask
        ma = (key >> shift) & 31
        mb = (key >> (shift + 5)) & 31
        done = (key >> (shift + 10)) & 1
        _decode(cfg, n_slots, c, partner, stack)
        ok = True
        for lay in range(2):
            inc[lay] = -1
            cnt = 0
            if partner[2 * c + lay] >= 0:
                cnt += 1
                inc[lay] = 2 * c + lay
            if c > 0 and partner[2 * left + lay] >= 0:
                cnt += 1
                inc[lay] = 2 * left + lay
            if c == m - 1 and wrap and partner[2 * wslot + lay] >= 0:
                cnt += 1
                inc[lay] = 2 * wslot + lay
            if cnt > 1:
                ok = False
        if not ok:
            continue
        for lay in range(2):
            if inc[lay] >= 0:
                nopt[lay] = 1
                opts[lay, 0] = -1
            else:
                n = 0
                if r < height - 1:
                    opts[lay, n] = 2 * c + lay
                    n += 1
                if c < m - 1:
                    opts[lay, n] = 2 * left + lay
                    n += 1
                if c == 0 and wrap:
                    opts[lay, n] = 2 * wslot + lay
                    n += 1
                nopt[lay] = n
        for a in range(nopt[0]):
            for b in range(nopt[1]):
                for e in range(2 * n_slots):
                    p[e] = partner[e]
                na = ma
                nb = mb
                dn = done
                fac = 1.0
                ek = inc[0]
                eb = inc[1]
                skip = False
                if ek >= 0 and eb >= 0:
                    pk = p[ek]
                    pb = p[eb]
                    ck = ek if ek < pk else pk
                    cb = eb if eb < pb else pb
                    p[ek] = -1
                    p[eb] = -1
                    if pk == eb:
                        # the strands through this site close a loop
                        fac = 2.0
                        has_a = na == ck or site == mark_i
                        has_b = nb == ck or site == mark_j
                        if has_a or has_b:
                            if has_a and has_b:
                                dn = 1
                                na = _CLEARED
                                nb = _CLEARED
                            else:
                                skip = True
                    else:
                        p[pk] = pb
                        p[pb] = pk
                        nc = pk if pk < pb else pb
                        if na == ck or na == cb:
                            na = nc
                        if nb == ck or nb == cb:
                            nb = nc
                        if site == mark_i:
                            na = nc
                        if site == mark_j:
                            nb = nc
                elif ek >= 0:
                    pk = p[ek]
                    ck = ek if ek < pk else pk
                    p[ek] = -1
                    y = opts[1, b]
                    p[y] = pk
                    p[pk] = y
                    nc = pk if pk < y else y
                    if na == ck:
                        na = nc
                    if nb == ck:
                        nb = nc
                    if site == mark_i:
                        na = nc
                    if site == mark_j:
                        nb = nc
                elif eb >= 0:
                    pb = p[eb]
                    cb = eb if eb < pb else pb
                    p[eb] = -1
                    x = opts[0, a]
                    p[x] = pb
                    p[pb] = x
                    nc = pb if pb < x else x
                    if na == cb:
                        na = nc
                    if nb == cb:
                        nb = nc
                    if site == mark_i:
                        na = nc
                    if site == mark_j:
                        nb = nc
                else:
                    x = opts[0, a]
                    y = opts[1, b]
                    p[x] = y
                    p[y] = x
                    nc = x if x < y else y
                    if site == mark_i:
                        na = nc
                    if site == mark_j:
                        nb = nc
                if skip:
                    continue
                k2 = _encode(n_slots, nxt_c, p)
                if marked:
                    k2 |= (na << shift) | (nb << (shift + 5)) | (dn << (shift + 10))
                out_k[count] = k2
                out_w[count] = w * fac
                count += 1
    return out_k[:count], out_w[:count]


@njit
def _aggregate_numba(keys, weights):
    order = np.argsort(keys)
    out_k = np.empty(keys.size, np.int64)
    out_w = np.empty(keys.size, np.float64)
    n = 0
    i = 0
    while i < order.size:
        k = keys[order[i]]
        acc = 0.0
        while i < order.size and keys[order[i]] == k:
            acc += weights[order[i]]
            i += 1
        out_k[n] = k
        out_w[n] = acc
        n += 1
    return out_k[:n].copy(), out_w[:n].copy()


def _aggregate_numpy(keys, weights):
    uniq, inverse = np.unique(keys, return_inverse=True)
    return uniq, np.bincount(inverse, weights=weights, minlength=uniq.size)


def _run(m: int, height: int, wrap: bool, mark_i: int, mark_j: int) -> tuple[float, float]:
    marked = mark_i >= 0
    shift = 3 * (m + 2)
    start = (_NOT_YET << shift) | (_NOT_YET << (shift + 5)) if marked else 0
    keys = np.array([start], dtype=np.int64)
    weights = np.array([1.0])
    fast = use_numba() and HAVE_NUMBA
    step = _step if fast else getattr(_step, "py_func", _step)
    aggregate = _aggregate_numba if fast else _aggregate_numpy
    log_scale = 0.0
    for r in range(height):
        for c in range(m):
            raw_k, raw_w = step(keys, weights, m, height, wrap, r, c, mark_i, mark_j, marked)
            keys, weights = aggregate(raw_k, raw_w)
        if weights.size == 0:
            return 0.0, 0.0
        top = float(np.max(weights))
        weights = weights / top
        log_scale += np.log(top)
    if marked:
        weights = weights[((keys >> (shift + 10)) & 1) == 1]
    return float(np.sum(weights)), log_scale


def _check(spec: LatticeSpec, cap: int) -> None:
    if spec.m > cap:
        raise CapExceeded(f"loop-gas transfer supports at most {cap} columns; got {spec.m}")


def loop_weight(spec: LatticeSpec, cap: int = DEFAULT_LOOP_WIDTH_CAP) -> tuple[float, float]:
    """Loop-gas partition sum ``sum_{c, c'} 2**loops`` as ``(mantissa, log_scale)``.

    The value is ``mantissa * exp(log_scale)``; it equals ``2**D`` (``D`` the
    number of dimers) times the squared norm of the unnormalized RVB state.
    """
    _check(spec, cap)
    return _run(spec.m, spec.m_prime, spec.periodic, -1, -1)


def pair_correlation(spec: LatticeSpec, i: int, j: int, cap: int = DEFAULT_LOOP_WIDTH_CAP) -> float:
    """``<S_i . S_j>`` of the normalized RVB state for two distinct sites."""
    if i == j:
        raise InputError("pair correlation needs two distinct sites")
    _check(spec, cap)
    ri, ci = spec.coords(i)
    rj, cj = spec.coords(j)
    z, lz = _run(spec.m, spec.m_prime, spec.periodic, -1, -1)
    if z == 0.0:
        raise InputError(f"{spec.label} admits no dimer covering")
    n, ln = _run(spec.m, spec.m_prime, spec.periodic, ri * spec.m + ci, rj * spec.m + cj)
    eps = -1.0 if (ri + ci + rj + cj) % 2 else 1.0
    return 0.75 * eps * n / z * float(np.exp(ln - lz))


def lambda_sq_from_correlation(corr: float) -> float:
    """Largest eigenvalue of an SU(2)-invariant two-qubit state with correlation ``corr``."""
    return max(0.25 - corr, 0.25 + corr / 3.0)


def pair_lambda_sq(spec: LatticeSpec, i: int, j: int, cap: int = DEFAULT_LOOP_WIDTH_CAP) -> float:
    """Largest eigenvalue of the two-site reduced matrix of the RVB state."""
    return lambda_sq_from_correlation(pair_correlation(spec, i, j, cap))
