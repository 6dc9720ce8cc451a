"""Large-lattice reduced states and restricted GGM searches.

Two exact engines feed the restricted search:

* the column transfer (:mod:`.transfer`) gives two-column reduced matrices,
  hence adjacent-column-pair, single-column and in-pair site-pair spectra;
* the loop gas (:mod:`.loopgas`) gives any two-site correlation, hence
  two-site spectra at widths the column transfer cannot reach.

Single-site reduced states are exactly ``I/2`` for any total-spin singlet, so
that family is answered analytically. Lattice symmetries (reflections and,
for periodic lattices, column translations) map every subsystem onto a
representative, and each representative is evaluated once.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

from ..errors import CapExceeded, InputError, UnsupportedFamily
from ..ggm import Family, GgmResult, ggm_restricted
from ..lattice import Boundary, LatticeSpec
from ..statevec import DensityMatrix
from . import loopgas, transfer

__all__ = [
    "DEFAULT_FAMILIES",
    "rho2_perfect",
    "rho2_imperfect",
    "DmrmHandle",
    "ggm_from_dmrm",
]

DEFAULT_FAMILIES = (Family.SINGLE_SITE, Family.ADJACENT_COLUMN_PAIRS, Family.SITE_PAIRS)


def _spec(m: int, m_prime: int, boundary: Boundary | str) -> LatticeSpec:
    return LatticeSpec(int(m), int(m_prime), Boundary.parse(boundary))


def rho2_perfect(m: int, m_prime: int | None = None, boundary: Boundary | str = Boundary.PERIODIC_HORIZONTAL,
                 first_col: int | None = None) -> DensityMatrix:
    """Two-column reduced matrix for even column heights (default the square ``m x m`` lattice).

    The default pair is the last one, columns ``m - 2`` and ``m - 1``.
    """
    m_prime = m if m_prime is None else m_prime
    if m % 2 or m_prime % 2:
        raise InputError(f"even-height recursion needs even sides, got {m}x{m_prime}")
    return transfer.column_pair_density(_spec(m, m_prime, boundary), first_col)


def rho2_imperfect(m: int, m_prime: int, boundary: Boundary | str = Boundary.PERIODIC_HORIZONTAL,
                   first_col: int | None = None) -> DensityMatrix:
    """Two-column reduced matrix for an even number of columns of odd height."""
    if m % 2 or m_prime % 2 == 0:
        raise InputError(f"odd-height recursion needs even m and odd m_prime, got {m}x{m_prime}")
    return transfer.column_pair_density(_spec(m, m_prime, boundary), first_col)


def _symmetries(spec: LatticeSpec):
    """Site permutations of the lattice that leave the RVB state invariant up to sign."""
    h, m = spec.m_prime, spec.m
    shifts = range(m) if spec.periodic else range(1)
    for shift, flip_r, flip_c in itertools.product(shifts, (False, True), (False, True)):
        perm = []
        for i in range(spec.num_sites):
            r, c = spec.coords(i)
            r = h - 1 - r if flip_r else r
            c = m - 1 - c if flip_c else c
            perm.append(spec.site(r, (c + shift) % m))
        yield tuple(perm)


@dataclass
class DmrmHandle:
    """Restricted-search source for one lattice, evaluated without the full state.

    Parameters
    ----------
    spec : LatticeSpec
    loop_cap : int
        Largest number of columns for loop-gas correlations.
    ring_cap : int
        Largest column height for periodic column transfers with more than
        four columns.
    """

    spec: LatticeSpec
    loop_cap: int = loopgas.DEFAULT_LOOP_WIDTH_CAP
    ring_cap: int = transfer.DEFAULT_RING_HEIGHT_CAP
    sources: dict[str, str] = field(default_factory=dict)
    _pairs: dict[int, DensityMatrix] = field(default_factory=dict, repr=False)
    _pair_values: dict[tuple[int, int], float] = field(default_factory=dict, repr=False)

    def __post_init__(self) -> None:
        self._perms = list(dict.fromkeys(_symmetries(self.spec)))

    @property
    def num_sites(self) -> int:
        return self.spec.num_sites

    # -- engines -----------------------------------------------------------

    def transfer_available(self) -> bool:
        h, m = self.spec.m_prime, self.spec.m
        if m < 2 or h > transfer.DEFAULT_TRANSFER_HEIGHT_CAP:
            return False
        if self.spec.periodic and m > 4:
            return h <= self.ring_cap
        return h <= 5

    def column_pair(self, first: int) -> DensityMatrix:
        """Reduced matrix of columns ``first`` and ``first + 1``.

        Periodic lattices are translation invariant, so one transfer serves
        every pair and only the site labels change.
        """
        if not 0 <= first < self.spec.m - 1:
            raise InputError(f"no column pair starts at column {first}")
        if first not in self._pairs:
            if not self.transfer_available():
                raise CapExceeded(f"column transfer unavailable for {self.spec.label}")
            sites = self.spec.column_sites(first) + self.spec.column_sites(first + 1)
            if self.spec.periodic and 0 in self._pairs:
                self._pairs[first] = DensityMatrix(sites, self._pairs[0].matrix)
            else:
                base = 0 if self.spec.periodic else first
                self._pairs[base] = transfer.column_pair_density(self.spec, base, ring_cap=self.ring_cap)
                if base != first:
                    self._pairs[first] = DensityMatrix(sites, self._pairs[0].matrix)
        return self._pairs[first]

    def _canonical(self, sites: tuple[int, ...]) -> tuple[int, ...]:
        return min(tuple(sorted(p[s] for s in sites)) for p in self._perms)

    def pair_lambda_sq(self, i: int, j: int) -> float:
        """Largest eigenvalue of the two-site reduced matrix of sites ``i`` and ``j``."""
        key = self._canonical((i, j))
        if key not in self._pair_values:
            a, b = key
            ca, cb = a // self.spec.m_prime, b // self.spec.m_prime
            first = self._pair_column(ca, cb)
            if first is not None and self.transfer_available():
                value = self.column_pair(first).marginal([a, b]).lambda_sq_max
                self.sources.setdefault("site_pairs", "column_transfer")
            else:
                value = loopgas.pair_lambda_sq(self.spec, a, b, cap=self.loop_cap)
                self.sources["site_pairs"] = "loop_gas"
            self._pair_values[key] = value
        return self._pair_values[key]

    def _pair_column(self, ca: int, cb: int) -> int | None:
        m = self.spec.m
        if ca == cb:
            return ca if ca + 1 < m else ca - 1
        lo, hi = min(ca, cb), max(ca, cb)
        if hi == lo + 1:
            return lo
        return None

    # -- family candidates -------------------------------------------------

    def supported(self, families: Sequence[Family | str]) -> tuple[Family, ...]:
        """Families this lattice can be searched over with the configured caps."""
        out = []
        for fam in (Family.parse(f) for f in families):
            if fam in (Family.ADJACENT_COLUMN_PAIRS, Family.SINGLE_COLUMN) and not self.transfer_available():
                continue
            if fam is Family.ADJACENT_COLUMN_PAIRS and self.spec.m <= 2:
                continue  # two columns are the whole lattice
            if fam in (Family.SITE_PAIRS, Family.NEAREST_NEIGHBOR_PAIRS) and self.spec.m > self.loop_cap:
                continue
            out.append(fam)
        return tuple(dict.fromkeys(out))

    def _adjacent_pairs(self) -> list[tuple[int, ...]]:
        m = self.spec.m
        last = m if self.spec.periodic else m - 1
        return [
            tuple(sorted(self.spec.column_sites(c) + self.spec.column_sites((c + 1) % m)))
            for c in range(last)
        ]

    def lambda_sq_candidates(self, families: Sequence[Family]) -> list[tuple[Family, tuple[int, ...], float]]:
        spec = self.spec
        out: list[tuple[Family, tuple[int, ...], float]] = []
        for fam in families:
            fam = Family.parse(fam)
            if fam is Family.SINGLE_SITE:
                self.sources["single_site"] = "analytic"
                out.extend((fam, (i,), 0.5) for i in range(spec.num_sites))
            elif fam is Family.ADJACENT_COLUMN_PAIRS:
                self.sources["adjacent_column_pairs"] = "column_transfer"
                for sub in self._adjacent_pairs():
                    if len(sub) < spec.num_sites:
                        first = min(sub) // spec.m_prime
                        if spec.periodic:
                            first = 0  # translation invariance
                        out.append((fam, sub, self.column_pair(first).lambda_sq_max))
            elif fam is Family.SINGLE_COLUMN:
                self.sources["single_column"] = "column_transfer"
                for c in range(spec.m):
                    first = c if c + 1 < spec.m else c - 1
                    rho = self.column_pair(first).marginal(list(spec.column_sites(c)))
                    out.append((fam, spec.column_sites(c), rho.lambda_sq_max))
            elif fam is Family.SITE_PAIRS:
                for i, j in itertools.combinations(range(spec.num_sites), 2):
                    out.append((fam, (i, j), self.pair_lambda_sq(i, j)))
            elif fam is Family.NEAREST_NEIGHBOR_PAIRS:
                for i, j in spec.edges:
                    out.append((fam, (i, j), self.pair_lambda_sq(i, j)))
            else:  # pragma: no cover
                raise UnsupportedFamily(fam.value)
        return out


def ggm_from_dmrm(m: int, m_prime: int, boundary: Boundary | str = Boundary.PERIODIC_HORIZONTAL,
                  families: Sequence[Family | str] | None = None, handle: DmrmHandle | None = None) -> GgmResult:
    """Restricted GGM from the large-lattice engines.

    Parameters
    ----------
    m, m_prime, boundary
        Lattice.
    families : sequence, optional
        Families to search; defaults to single sites, adjacent column pairs
        and site pairs within two adjacent columns, restricted to what the
        configured caps can evaluate.
    handle : DmrmHandle, optional
        Reuse cached reduced states across calls.

    Returns
    -------
    GgmResult
        Flagged ``restricted``; an upper bound on the exhaustive value.
    """
    spec = _spec(m, m_prime, boundary)
    handle = handle or DmrmHandle(spec)
    if handle.spec != spec:
        raise InputError("handle belongs to a different lattice")
    requested = DEFAULT_FAMILIES if families is None else tuple(Family.parse(f) for f in families)
    fams = handle.supported(requested)
    if families is not None and len(fams) < len(set(requested)):
        missing = sorted({f.value for f in requested} - {f.value for f in fams})
        raise CapExceeded(f"families {missing} exceed the configured caps for {spec.label}")
    if not fams:
        raise CapExceeded(f"no requested family can be evaluated for {spec.label}")
    return ggm_restricted(handle, fams)
