"""Column-block recursion for the two-column-block valence-bond ansatz.

The recursion builds an ``N``-column strip of height ``h`` as

    |N> = |N-1> |1>  +  |N-2> |2bar>,      |2bar> = |2> - |1>|1>,

where ``|1>`` is the single all-vertical column and ``|2>`` the full RVB state
of a two-column strip. Unrolling it sums exactly the dimer coverings whose
horizontal dimers never cross two consecutive vertical cuts, that is the
coverings that split into blocks of width one or two. The full RVB state also
contains coverings with wider blocks (already at three columns of height
four), so the objects in this module describe that block ansatz; the exact
RVB reduced matrices come from :mod:`rvbggm.dmrm.transfer`.

Conventions
-----------
All column vectors are stored in the frame of a block whose left column has
even index ("raw" frame). Moving a single-column ``|1>`` by one column
reverses all ``h/2`` of its singlets, so the physical ``|1>`` at column ``c``
is ``column_sign**c`` times the raw vector with ``column_sign = (-1)**(h/2)``.
Two-column blocks of even height have ``h`` singlets and are frame
independent. This sign is kept as an explicit table constant and applied in
the recursion, never folded into the stored coefficients.

Scalar recursions run on rescaled quantities: after every step the norm is
divided out and its logarithm is accumulated, so ``Z_N`` never overflows.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Sequence

import numpy as np

from ..errors import BasisBlowup, HeightTooLarge, InputError, NoCoverings, NumericOverflow
from ..lattice import Boundary, DimerCovering, LatticeSpec, enumerate_coverings
from ..statevec import DensityMatrix, PureState, build_rvb, singlet_product

__all__ = [
    "StateLabel",
    "ColumnState",
    "BaseStates",
    "RecursionTable",
    "ChiTable",
    "DEFAULT_HEIGHT_CAP",
    "DEFAULT_BASIS_CAP",
    "build_base_states",
    "derive_alpha_basis",
    "recurse_inner_products",
    "build_chi_table",
    "is_block_covering",
    "ansatz_state",
    "ansatz_rho2_open",
    "ansatz_rho2_periodic",
    "ansatz_rho2_imperfect",
    "block_mps_rho2",
    "dump_table_json",
]

DEFAULT_HEIGHT_CAP = 12
DEFAULT_BASIS_CAP = 64
CLOSURE_TOL = 1e-10


class StateLabel(str, Enum):
    ONE = "one"
    TWO = "two"
    TWO_BAR = "two_bar"
    ALPHA = "alpha"
    F = "f"


@dataclass(frozen=True)
class ColumnState:
    """Dense real amplitudes of a one- or two-column object in the raw frame.

    For two columns, bit ``r`` of the index is row ``r`` of the left column
    and bit ``height + r`` row ``r`` of the right column.
    """

    width: int
    height: int
    amps: np.ndarray
    label: StateLabel
    index: int | None = None

    def __post_init__(self) -> None:
        if self.width not in (1, 2):
            raise InputError("column states span one or two columns")
        amps = np.ascontiguousarray(self.amps, dtype=np.float64)
        if amps.shape != (1 << (self.width * self.height),):
            raise InputError("amplitude vector does not match width and height")
        amps.setflags(write=False)
        object.__setattr__(self, "amps", amps)

    @property
    def norm_squared(self) -> float:
        return float(self.amps @ self.amps)

    @property
    def matrix(self) -> np.ndarray:
        """Two-column amplitudes as ``M[left, right]``."""
        if self.width != 2:
            raise InputError("only two-column states have a matrix form")
        d = 1 << self.height
        return self.amps.reshape(d, d).T


def _dense(state: PureState) -> np.ndarray:
    return state.to_dense().real


@dataclass(frozen=True)
class BaseStates:
    """``|1>``, ``|2>`` and ``|2bar>`` for one column height.

    ``one`` is ``None`` for odd heights (a single column has no covering); then
    ``two_bar`` equals ``two``.
    """

    height: int
    one: ColumnState | None
    two: ColumnState
    two_bar: ColumnState

    @property
    def column_sign(self) -> int:
        """Sign picked up by ``|1>`` when moved by one column."""
        return -1 if (self.height // 2) % 2 else 1

    @property
    def block_sign(self) -> int:
        """Sign picked up by a two-column block when moved by one column."""
        return -1 if self.height % 2 else 1

    def require_one(self) -> ColumnState:
        if self.one is None:
            raise NoCoverings(f"a single column of height {self.height} has no dimer covering")
        return self.one


def build_base_states(m_prime: int, cap: int = DEFAULT_HEIGHT_CAP) -> BaseStates:
    """Exact unnormalized ``|1>``, ``|2>`` and ``|2bar>`` for columns of ``m_prime`` rows.

    Raises
    ------
    HeightTooLarge
        If ``m_prime`` exceeds ``cap``.
    """
    if m_prime < 2:
        raise InputError("column height must be at least 2")
    if m_prime > cap:
        raise HeightTooLarge(f"height {m_prime} exceeds the exact-build cap of {cap}")
    strip = LatticeSpec(2, m_prime)
    two = ColumnState(2, m_prime, _dense(build_rvb(strip, normalize=False)), StateLabel.TWO)
    if m_prime % 2:
        return BaseStates(m_prime, None, two, replace(two, label=StateLabel.TWO_BAR))
    one = ColumnState(1, m_prime, _dense(build_rvb(LatticeSpec(1, m_prime), normalize=False)), StateLabel.ONE)
    vertical = DimerCovering.from_pairs(
        strip, [(strip.site(r, c), strip.site(r + 1, c)) for c in range(2) for r in range(0, m_prime, 2)]
    )
    bar = two.amps - _dense(singlet_product(vertical))
    return BaseStates(m_prime, one, two, ColumnState(2, m_prime, bar, StateLabel.TWO_BAR))


def _contract_left(bar: np.ndarray, vec: np.ndarray) -> np.ndarray:
    """``<vec|_n |2bar>_{n,n+1}`` as a vector on column ``n+1``."""
    return bar.T @ vec


@dataclass(frozen=True)
class RecursionTable:
    """Coefficients of the inner-product recursion for one column height.

    Attributes
    ----------
    basis : (k_dim, 2**h) array
        The alpha basis, ``basis[0]`` being ``|1>``.
    alpha : (k_dim, k_dim) array
        ``alpha[i, j]`` is the coefficient of ``|alpha_i>`` in ``<alpha_j|2bar>``.
    a : (k_dim, k_dim) array
        Gram matrix ``<alpha_i|alpha_j>``.
    log_z : array
        ``log Z_N`` for ``N = 0 .. n_max``.
    coef : (n_max + 1, k_dim) array
        ``<N-1|N>`` in the alpha basis, divided by ``Z_N``.
    y : (n_max + 1, k_dim) array
        ``Y_N^j = <alpha_j|(<N-1|N>)``, divided by ``Z_N``.
    xi : (n_max + 1, k_dim) array
        ``<xi_N| = <2bar|<N-1|N>`` in the alpha basis, divided by ``Z_N``.
    g : (n_max + 1, k_dim) array
        ``<F_i|`` in the alpha basis, ``g[0]`` being ``|1>``.
    """

    height: int
    k_dim: int
    basis: np.ndarray
    alpha: np.ndarray
    a: np.ndarray
    z1: float
    z2_bar: float
    column_sign: int
    closure_residual: float
    n_max: int = -1
    log_z: np.ndarray = field(default_factory=lambda: np.zeros(0))
    coef: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))
    y: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))
    xi: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))
    g: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))

    # conventions fixing the base cases the recursion leaves open
    Z0: float = 1.0
    Y0: float = 0.0
    F0: str = StateLabel.ONE.value

    def z(self, n: int) -> float:
        """``Z_N`` as a float (may overflow to ``inf`` for very long strips)."""
        self._check(n)
        with np.errstate(over="ignore"):
            return float(np.exp(self.log_z[n]))

    def z_ratio(self, n: int, m: int) -> float:
        """``Z_n / Z_m`` computed from the logarithms."""
        self._check(n)
        self._check(m)
        return float(np.exp(self.log_z[n] - self.log_z[m]))

    def overlap_vector(self, n: int) -> np.ndarray:
        """``<N-1|N>`` as a single-column vector at column ``N`` (unscaled)."""
        self._check(n)
        return (self.coef[n] @ self.basis) * self.z(n)

    def xi_vector(self, n: int) -> np.ndarray:
        self._check(n)
        return (self.xi[n] @ self.basis) * self.z(n)

    def f_vector(self, i: int) -> np.ndarray:
        if not 0 <= i <= self.n_max:
            raise InputError(f"F_{i} not tabulated")
        return self.g[i] @ self.basis

    def _check(self, n: int) -> None:
        if not 0 <= n <= self.n_max:
            raise InputError(f"N={n} outside the recursion table (0..{self.n_max})")

    def conventions(self) -> dict:
        return {
            "frame": "left column of every block has even index",
            "column_sign": self.column_sign,
            "alpha_index": "alpha[i][j] = coefficient of basis i in <alpha_j|2bar>",
            "Z0": self.Z0,
            "Y0": self.Y0,
            "F0": self.F0,
            "z_pairs": "[mantissa, exponent] with Z = mantissa * 2**exponent",
        }


def derive_alpha_basis(base: BaseStates, cap: int = DEFAULT_BASIS_CAP) -> RecursionTable:
    """Grow the alpha basis from ``|1>`` by repeated contraction with ``|2bar>``.

    Each new vector ``<alpha_j|2bar>`` is either expanded in the current basis
    (least-squares residual below ``1e-10``) or appended to it.

    Raises
    ------
    BasisBlowup
        If more than ``cap`` independent vectors appear.
    NoCoverings
        For odd heights.
    """
    one = base.require_one()
    bar = base.two_bar.matrix
    vectors = [one.amps.copy()]
    images: list[np.ndarray] = []
    j = 0
    while j < len(vectors):
        img = _contract_left(bar, vectors[j])
        images.append(img)
        mat = np.array(vectors).T
        sol, *_ = np.linalg.lstsq(mat, img, rcond=None)
        resid = np.linalg.norm(mat @ sol - img)
        if resid > CLOSURE_TOL * max(1.0, np.linalg.norm(img)):
            if len(vectors) >= cap:
                raise BasisBlowup(f"alpha basis exceeds {cap} vectors at height {base.height}")
            vectors.append(img)
        j += 1
    basis = np.array(vectors)
    k = basis.shape[0]
    alpha, *_ = np.linalg.lstsq(basis.T, np.array(images).T, rcond=None)
    residual = float(np.max(np.abs(basis.T @ alpha - np.array(images).T))) if k else 0.0
    if residual > CLOSURE_TOL:
        raise BasisBlowup(f"alpha basis does not close (residual {residual:.2e})")
    return RecursionTable(
        height=base.height,
        k_dim=k,
        basis=basis,
        alpha=alpha,
        a=basis @ basis.T,
        z1=one.norm_squared,
        z2_bar=base.two_bar.norm_squared,
        column_sign=base.column_sign,
        closure_residual=residual,
    )


def recurse_inner_products(table: RecursionTable, n_max: int) -> RecursionTable:
    """Fill ``Z_N``, ``<N-1|N>``, ``Y_N``, ``xi_N`` and ``F_i`` up to ``n_max``.

    With ``s = column_sign`` and ``e_1`` the coordinates of ``|1>``:

    * ``c_N = s**(N-1) Z_{N-1} e_1 + alpha c_{N-1}``  (``<N-1|N>``)
    * ``Y_N = A c_N``
    * ``Z_N = Z_1 Z_{N-1} + Z'_2 Z_{N-2} + 2 s**(N-1) sum_i alpha[i, 0] Y_{N-1}^i``
    * ``g^i = alpha g^{i-1}``, ``g^0 = e_1``, and ``xi_N = alpha c_N``, which
      equals ``sum_{i=1..N} s**(N-i) Z_{N-i} g^i``.

    Base cases: ``Z_0 = 1``, ``c_0 = Y_0 = 0``.

    Raises
    ------
    NumericOverflow
        If a rescaled quantity stops being finite.
    """
    if n_max < 1:
        raise InputError("n_max must be at least 1")
    k = table.k_dim
    s = table.column_sign
    e1 = np.zeros(k)
    e1[0] = 1.0
    alpha, gram = table.alpha, table.a
    log_z = np.zeros(n_max + 1)
    coef = np.zeros((n_max + 1, k))
    # N = 1: Z_1 = <1|1>, c_1 = e_1
    log_z[1] = np.log(table.z1)
    coef[1] = e1 / table.z1
    ratio_prev = table.z1  # Z_1 / Z_0
    for n in range(2, n_max + 1):
        c_prev = coef[n - 1]  # c_{N-1} / Z_{N-1}
        y_prev = gram @ c_prev
        sign = s ** (n - 1)
        # everything below is divided by Z_{N-1}
        z_new = table.z1 + table.z2_bar / ratio_prev + 2.0 * sign * float(alpha[:, 0] @ y_prev)
        c_new = sign * e1 + alpha @ c_prev
        if not (np.isfinite(z_new) and z_new > 0 and np.all(np.isfinite(c_new))):
            raise NumericOverflow(f"recursion lost precision at N={n}")
        log_z[n] = log_z[n - 1] + np.log(z_new)
        coef[n] = c_new / z_new
        ratio_prev = z_new
    y = coef @ gram.T
    xi = coef @ alpha.T
    g = np.zeros((n_max + 1, k))
    g[0] = e1
    for i in range(1, n_max + 1):
        g[i] = alpha @ g[i - 1]
    return replace(table, n_max=n_max, log_z=log_z, coef=coef, y=y, xi=xi, g=g)


@dataclass(frozen=True)
class ChiTable:
    """Alternating-overlap objects for periodic lattices built from ``|2>`` blocks only.

    ``chi[N]`` holds ``<chi_N|`` on the kept column pair, divided by ``Z_N``;
    ``Z_N = Z_2**(N/2)``.
    """

    height: int
    z2: float
    block_sign: int
    n_max: int
    chi: dict[int, np.ndarray]

    def z(self, n: int) -> float:
        return self.z2 ** (n // 2)

    def log_z(self, n: int) -> float:
        return (n // 2) * math.log(self.z2)


def build_chi_table(base: BaseStates, n_max: int) -> ChiTable:
    """``<chi_N| = <2|_{n+2,1} <N|_{2..n+1} |N>_{1..n}`` for even ``N <= n_max``.

    The contraction is a chain of ``N + 1`` two-column amplitude matrices,
    obtained by repeatedly applying one block map.
    """
    if n_max < 2:
        raise InputError("n_max must be at least 2")
    b = base.two.matrix
    z2 = base.two.norm_squared
    chi = {}
    power = b @ b / z2  # N = 0 chain has one factor; N = 2 has three
    power = b @ power
    for n in range(2, n_max + 1, 2):
        # the bra blocks sit at odd columns: N/2 blocks plus the wrap block
        sign = base.block_sign ** (n // 2 + 1)
        chi[n] = sign * power.ravel()
        power = b @ b @ power / z2
    return ChiTable(base.height, z2, base.block_sign, n_max, chi)


def is_block_covering(covering: DimerCovering, widths: Sequence[int]) -> bool:
    """True when the covering splits at uncrossed vertical cuts into blocks of the allowed widths.

    On a horizontally periodic lattice the blocks wrap around.
    """
    spec = covering.spec
    h, m = spec.m_prime, spec.m
    crossed = [False] * m  # crossed[c]: cut between columns c and c+1 (mod m)
    for a, b in covering.bonds:
        ca, cb = a // h, b // h
        if ca != cb:
            lo, hi = min(ca, cb), max(ca, cb)
            crossed[hi if (lo == 0 and hi == m - 1 and m > 2) else lo] = True
    if spec.periodic:
        cuts = [c for c in range(m) if not crossed[c]]
        if not cuts:
            return False
        spans = [(cuts[(t + 1) % len(cuts)] - cuts[t]) % m or m for t in range(len(cuts))]
    else:
        cuts = [-1] + [c for c in range(m - 1) if not crossed[c]] + [m - 1]
        spans = [cuts[t + 1] - cuts[t] for t in range(len(cuts) - 1)]
    return all(w in widths for w in spans)


def ansatz_state(spec: LatticeSpec) -> PureState:
    """Explicit block-ansatz state: equal-weight sum over the block coverings.

    Widths one and two for even heights, width two for odd heights. Each
    singlet product keeps unit norm (no global normalization).
    """
    widths = (1, 2) if spec.m_prime % 2 == 0 else (2,)
    covs = [c for c in enumerate_coverings(spec) if is_block_covering(c, widths)]
    if not covs:
        raise NoCoverings(f"{spec.label} has no block covering")
    return build_rvb(spec, covs, normalize=False)


def _pair_sites(spec: LatticeSpec) -> tuple[int, ...]:
    return spec.column_sites(spec.m - 2) + spec.column_sites(spec.m - 1)


def _finish(spec: LatticeSpec, rho: np.ndarray) -> DensityMatrix:
    rho = (rho + rho.T) / 2
    return DensityMatrix(_pair_sites(spec), rho / np.trace(rho))


def _open_terms(table: RecursionTable, base: BaseStates, n: int) -> np.ndarray:
    """Open-strip reduced matrix of the last two columns of ``N + 2`` columns, divided by ``Z_N``.

    ``Z_N |2><2| + Z_{N-1} rhobar (x) |1><1| + (|2><xi_N| (x) <1| + h.c.)``.
    """
    s = table.column_sign
    two = base.two.amps
    one_last = base.require_one().amps * s ** (n + 1)
    bar = base.two_bar.matrix
    rho = np.outer(two, two)
    if n >= 1:
        rho_right = bar.T @ bar
        rho = rho + table.z_ratio(n - 1, n) * np.kron(np.outer(one_last, one_last), rho_right)
        cross = np.outer(two, np.kron(one_last, table.xi[n] @ table.basis))
        rho = rho + cross + cross.T
    return rho


def ansatz_rho2_open(table: RecursionTable, base: BaseStates, m: int) -> DensityMatrix:
    """Ansatz reduced matrix on the last two columns of an open ``m``-column strip."""
    n = m - 2
    if n < 0:
        raise InputError("at least two columns are needed")
    if n > table.n_max:
        raise InputError(f"recursion table only reaches N={table.n_max}")
    spec = LatticeSpec(m, table.height, Boundary.OPEN)
    return _finish(spec, _open_terms(table, base, n))


def _last_column_density(table: RecursionTable, base: BaseStates, n: int) -> np.ndarray:
    """Reduced matrix of the last column of an ``N``-column strip, divided by ``Z_N``."""
    s = table.column_sign
    one = base.require_one().amps * s ** (n - 1)
    rho = table.z_ratio(n - 1, n) * np.outer(one, one)
    if n >= 2:
        bar = base.two_bar.matrix
        rho = rho + table.z_ratio(n - 2, n) * (bar.T @ bar)
        xi = (table.xi[n - 1] @ table.basis) * table.z_ratio(n - 1, n)
        rho = rho + np.outer(one, xi) + np.outer(xi, one)
    return rho


def ansatz_rho2_periodic(table: RecursionTable, base: BaseStates, m: int) -> DensityMatrix:
    """Ansatz reduced matrix on the last two columns of a horizontally periodic ``m``-column lattice.

    Assembled as open part + wrap part + cross terms. The open part and the
    wrap part come from the recursion tables; the cross terms, where the ket
    has an uncrossed wrap cut and the bra a ``|2bar>`` across it, are
    contracted with the block transfer of :func:`block_mps_rho2`.
    """
    n = m - 2
    if n < 2 or m % 2:
        raise InputError("periodic block recursion needs an even m >= 4")
    if n > table.n_max:
        raise InputError(f"recursion table only reaches N={table.n_max}")
    spec = LatticeSpec(m, table.height, Boundary.PERIODIC_HORIZONTAL)
    bar = base.two_bar.matrix
    open_part = _open_terms(table, base, n)
    wrap_part = np.kron(bar @ bar.T, _last_column_density(table, base, n))
    parts, log_scale = block_mps_rho2(base, m, split_wrap=True)
    scale = np.exp(log_scale - table.log_z[n])
    cross = parts["open_wrap"] * scale
    return _finish(spec, open_part + wrap_part + cross + cross.T)


def ansatz_rho2_imperfect(chi: ChiTable, base: BaseStates, m: int) -> DensityMatrix:
    """``Z_N |2><2| + Z_{N-2} rhobar (x) rhobar + (|2><chi_N| + h.c.)`` for odd heights, normalized."""
    n = m - 2
    if base.height % 2 == 0:
        raise InputError("the imperfect recursion needs an odd column height")
    if n < 2 or n % 2 or n > chi.n_max:
        raise InputError(f"N={n} outside the chi table")
    spec = LatticeSpec(m, base.height, Boundary.PERIODIC_HORIZONTAL)
    two = base.two.amps
    b = base.two.matrix
    rho = np.outer(two, two) + np.kron(b @ b.T, b.T @ b) / chi.z2
    cross = np.outer(two, chi.chi[n])
    return _finish(spec, rho + cross + cross.T)


def _block_tensor(base: BaseStates, col: int) -> np.ndarray:
    """Block-ansatz column tensor ``G[v_in, sigma, v_out]`` with ``v = 0`` an uncrossed cut."""
    h = base.height
    d = 1 << h
    g = np.zeros((d + 1, d, d + 1))
    if base.one is not None:
        g[0, :, 0] = base.one.amps * base.column_sign ** col
    g[0, np.arange(d), 1 + np.arange(d)] = base.block_sign ** col
    g[1:, :, 0] = base.two_bar.matrix
    return g


def block_mps_rho2(base: BaseStates, m: int, split_wrap: bool = False):
    """Reduced matrix of the last two columns of the periodic block ansatz by direct transfer.

    Returns ``(matrix, log_scale)``; with ``split_wrap`` the matrix is replaced
    by a dict of the four pieces keyed ``"open_open"``, ``"open_wrap"``,
    ``"wrap_open"``, ``"wrap_wrap"`` (ket cut type first), where "open"
    means the wrap cut is uncrossed.
    """
    h = base.height
    d = 1 << h
    dv = d + 1
    env = np.eye(dv * dv)
    log_scale = 0.0
    for c in range(m - 2):
        g = _block_tensor(base, c)
        t = np.einsum("asb,csd->acbd", g, g).reshape(dv * dv, dv * dv)
        env = env @ t
        top = np.max(np.abs(env))
        env /= top
        log_scale += np.log(top)
    # env maps the wrap cut (left of column 0) to the cut left of column m-2
    g1, g2 = _block_tensor(base, m - 2), _block_tensor(base, m - 1)
    pair = np.einsum("asb,btc->stac", g1, g2).reshape(d * d, dv, dv)  # index sigma + tau * d
    pair = pair.reshape(d, d, dv, dv).transpose(1, 0, 2, 3).reshape(d * d, dv, dv)
    e4 = env.reshape(dv, dv, dv, dv)  # [w, w', a, a']

    def piece(ket_sel, bra_sel):
        pk = np.zeros_like(pair)
        pb = np.zeros_like(pair)
        pk[:, :, ket_sel] = pair[:, :, ket_sel]
        pb[:, :, bra_sel] = pair[:, :, bra_sel]
        # rho[i, j] = sum pair_i[a, w] pair_j[a', w'] env[w, w', a, a']
        return np.einsum("iaw,jbv,wvab->ij", pk, pb, e4, optimize=True)

    opened, wrapped = slice(0, 1), slice(1, dv)
    # tensor index order is sigma-fastest; flip to match "bit r = left column"
    pieces = {
        "open_open": piece(opened, opened),
        "open_wrap": piece(opened, wrapped),
        "wrap_open": piece(wrapped, opened),
        "wrap_wrap": piece(wrapped, wrapped),
    }
    if split_wrap:
        return pieces, log_scale
    return sum(pieces.values()), log_scale


def _frexp_pairs(log_values: np.ndarray) -> list[list[float]]:
    out = []
    for lv in log_values:
        log2 = float(lv) / math.log(2.0)
        exponent = math.floor(log2) + 1
        out.append([2.0 ** (log2 - exponent), exponent])
    return out


def dump_table_json(table: RecursionTable) -> str:
    """Deterministic JSON of the recursion table for cross-implementation checks."""
    payload = {
        "height": table.height,
        "k_dim": table.k_dim,
        "alpha": np.round(table.alpha, 15).tolist(),
        "a": np.round(table.a, 15).tolist(),
        "z1": table.z1,
        "z2_bar": table.z2_bar,
        "closure_residual": table.closure_residual,
        "n_max": table.n_max,
        "z": _frexp_pairs(table.log_z),
        "conventions": table.conventions(),
    }
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"
