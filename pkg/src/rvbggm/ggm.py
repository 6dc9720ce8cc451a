"""Generalized geometric measure, entanglement certification and strong subadditivity.

The measure is ``G = 1 - max lambda^2`` where ``lambda^2`` is the largest
eigenvalue of a reduced density matrix and the maximum runs over bipartitions.
Exhaustive search enumerates canonical bipartitions; restricted search only
visits named families of subsystems and therefore returns an upper bound.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Iterator, Protocol, Sequence

import numpy as np

from .errors import InputError, OverlappingSets, TooLargeForExhaustive, UnsupportedFamily
from .lattice import LatticeSpec
from . import _kernels
from .statevec import PureState, clipped_spectrum, partial_trace, total_spin_squared, von_neumann_entropy

__all__ = [
    "Family",
    "Bipartition",
    "GgmResult",
    "CertificationReport",
    "TIE_TOL",
    "canonical_bipartitions",
    "ggm_exact",
    "ggm_restricted",
    "family_subsystems",
    "certify_genuine_entanglement",
    "ssa_check",
    "random_ssa_trials",
]

TIE_TOL = 1e-12
DEFAULT_EXHAUSTIVE_CAP = 16
CERTIFY_TOL = 1e-10


class Family(str, Enum):
    """Named subsystem families for restricted searches."""

    SINGLE_SITE = "single_site"
    SITE_PAIRS = "site_pairs"
    SINGLE_COLUMN = "single_column"
    ADJACENT_COLUMN_PAIRS = "adjacent_column_pairs"
    NEAREST_NEIGHBOR_PAIRS = "nearest_neighbor_pairs"

    @classmethod
    def parse(cls, value: "Family | str") -> "Family":
        if isinstance(value, Family):
            return value
        try:
            return cls(str(value).strip().lower().replace("-", "_"))
        except ValueError as exc:
            raise UnsupportedFamily(f"unknown bipartition family {value!r}") from exc


def _canonical_side(sites: Iterable[int], num_sites: int) -> tuple[int, ...]:
    part = tuple(sorted(set(int(s) for s in sites)))
    if not part or len(part) >= num_sites or part[0] < 0 or part[-1] >= num_sites:
        raise InputError("a bipartition side must be a nonempty proper subset of the sites")
    rest = tuple(s for s in range(num_sites) if s not in set(part))
    if len(rest) < len(part) or (len(rest) == len(part) and rest < part):
        return rest
    return part


@dataclass(frozen=True, order=True)
class Bipartition:
    """A split ``K : L`` stored by its canonical side.

    The canonical side is the smaller one, or for equal halves the
    lexicographically smaller. Partitions order by ``(|K|, K)``, which is
    the canonical enumeration order used for tie-breaking.
    """

    size: int = field(init=False, repr=False)
    part_k: tuple[int, ...]
    num_sites: int = field(compare=False)

    def __init__(self, part_k: Iterable[int], num_sites: int):
        side = _canonical_side(part_k, num_sites)
        object.__setattr__(self, "part_k", side)
        object.__setattr__(self, "num_sites", int(num_sites))
        object.__setattr__(self, "size", len(side))

    @property
    def complement(self) -> tuple[int, ...]:
        k = set(self.part_k)
        return tuple(s for s in range(self.num_sites) if s not in k)

    def to_list(self) -> list[int]:
        return list(self.part_k)


@dataclass(frozen=True)
class GgmResult:
    """Outcome of a GGM search.

    ``search`` is ``"exhaustive"`` or ``"restricted"``; restricted results
    list the families visited and are upper bounds on the exhaustive value.
    """

    value: float
    lambda_sq_max: float
    achieving_partition: Bipartition
    search: str
    families: tuple[Family, ...] = ()
    achieving_family: Family | None = None
    partitions_checked: int = 0

    @property
    def restricted(self) -> bool:
        return self.search == "restricted"

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "lambda_sq_max": self.lambda_sq_max,
            "achieving_partition": self.achieving_partition.to_list(),
            "search": self.search,
            "families": [f.value for f in self.families],
            "achieving_family": None if self.achieving_family is None else self.achieving_family.value,
            "partitions_checked": self.partitions_checked,
            "bound": "upper" if self.restricted else "exact",
        }


@dataclass(frozen=True)
class CertificationReport:
    min_mixedness: float
    worst_partition: Bipartition
    partitions_checked: int
    certified: bool
    tolerance: float = CERTIFY_TOL

    def to_dict(self) -> dict:
        return {
            "min_mixedness": self.min_mixedness,
            "worst_partition": self.worst_partition.to_list(),
            "partitions_checked": self.partitions_checked,
            "certified": self.certified,
            "tolerance": self.tolerance,
        }


def canonical_bipartitions(num_sites: int) -> Iterator[tuple[int, ...]]:
    """Canonical sides in canonical order: by size, then lexicographically."""
    half = num_sites // 2
    for p in range(1, half + 1):
        for part in itertools.combinations(range(num_sites), p):
            if 2 * p == num_sites and part[0] != 0:
                continue
            yield part


class _SplitScanner:
    """Reduced density matrices of one state across many bipartitions.

    For a total-spin singlet every reduced matrix is invariant under
    rotations of the kept sites, so each of its eigenvalues also occurs in the
    block of smallest kept-side magnetization. The largest eigenvalue is then
    read from that block alone.
    """

    def __init__(self, state: PureState):
        self.state = state
        self.n = state.num_sites
        self.singlet = abs(total_spin_squared(state)) < 1e-10
        self.amps = state.amps.real.copy() if state.max_imag() == 0.0 else state.amps
        self.norm = state.norm_squared
        self._positions: dict[tuple[int, bool], np.ndarray] = {}

    def _position(self, bits: int, central: bool) -> np.ndarray:
        key = (bits, central)
        if key not in self._positions:
            if central:
                pop = np.array([bin(v).count("1") for v in range(1 << bits)])
                pos = np.full(1 << bits, -1, dtype=np.int64)
                sel = np.flatnonzero(pop == (bits + 1) // 2)
                pos[sel] = np.arange(sel.size)
            else:
                pos = np.arange(1 << bits, dtype=np.int64)
            self._positions[key] = pos
        return self._positions[key]

    def _density(self, part: tuple[int, ...], central: bool) -> np.ndarray:
        keep = np.array(part, dtype=np.int64)
        mask = np.ones(self.n, dtype=bool)
        mask[keep] = False
        rest = np.flatnonzero(mask)
        pos = self._position(keep.size, central)
        return _kernels.sector_density(self.state.basis, self.amps, keep, rest, pos) / self.norm

    def density(self, part: tuple[int, ...]) -> np.ndarray:
        return self._density(part, central=False)

    def lambda_sq(self, part: tuple[int, ...]) -> float:
        return float(clipped_spectrum(self._density(part, central=self.singlet))[-1])

    def purity(self, part: tuple[int, ...]) -> float:
        return float(np.sum(np.abs(self.density(part)) ** 2))


def _check_exhaustive(state: PureState, cap: int) -> None:
    if state.num_sites > cap:
        raise TooLargeForExhaustive(
            f"{state.num_sites} sites exceed the exhaustive cap of {cap}; use a restricted search"
        )
    if state.num_sites < 2:
        raise InputError("a bipartition needs at least two sites")


def _pick(values: np.ndarray, parts: Sequence, tol: float = TIE_TOL) -> int:
    """Index of the first entry attaining the maximum within ``tol``."""
    best = float(np.max(values))
    return int(np.flatnonzero(values >= best - tol)[0])


def ggm_exact(state: PureState, cap: int = DEFAULT_EXHAUSTIVE_CAP) -> GgmResult:
    """GGM maximized over every canonical bipartition.

    Parameters
    ----------
    state : PureState
        Any pure state with at most ``cap`` sites.
    cap : int
        Exhaustive-search site cap.

    Raises
    ------
    TooLargeForExhaustive
    """
    _check_exhaustive(state, cap)
    scan = _SplitScanner(state)
    parts = list(canonical_bipartitions(state.num_sites))
    values = np.array([scan.lambda_sq(part) for part in parts])
    best = _pick(values, parts)
    lam = float(np.max(values))
    return GgmResult(
        value=1.0 - lam,
        lambda_sq_max=lam,
        achieving_partition=Bipartition(parts[best], state.num_sites),
        search="exhaustive",
        partitions_checked=len(parts),
    )


def family_subsystems(family: Family, num_sites: int, spec: LatticeSpec | None = None) -> list[tuple[int, ...]]:
    """Subsystems belonging to ``family`` on a state of ``num_sites`` sites.

    Column-based and nearest-neighbour families need the lattice geometry.
    """
    family = Family.parse(family)
    if family is Family.SINGLE_SITE:
        return [(i,) for i in range(num_sites)]
    if family is Family.SITE_PAIRS:
        return list(itertools.combinations(range(num_sites), 2))
    if spec is None:
        raise UnsupportedFamily(f"family {family.value} needs the lattice geometry")
    if spec.num_sites != num_sites:
        raise InputError("lattice does not match the state size")
    if family is Family.NEAREST_NEIGHBOR_PAIRS:
        return list(spec.edges)
    if family is Family.SINGLE_COLUMN:
        return [spec.column_sites(c) for c in range(spec.m)]
    if family is Family.ADJACENT_COLUMN_PAIRS:
        last = spec.m if spec.periodic else spec.m - 1
        out = []
        for c in range(last):
            pair = spec.column_sites(c) + spec.column_sites((c + 1) % spec.m)
            out.append(tuple(sorted(pair)))
        return out
    raise UnsupportedFamily(family.value)  # pragma: no cover


class RestrictedSource(Protocol):
    """Anything that can report ``(family, subsystem, lambda^2)`` candidates."""

    num_sites: int

    def lambda_sq_candidates(self, families: Sequence[Family]) -> list[tuple[Family, tuple[int, ...], float]]:
        ...


def _state_candidates(state: PureState, families: Sequence[Family], spec: LatticeSpec | None):
    out = []
    for family in families:
        for sub in family_subsystems(family, state.num_sites, spec):
            if len(sub) >= state.num_sites:
                continue
            part = Bipartition(sub, state.num_sites)
            rho = partial_trace(state, part.part_k, cap=None)
            out.append((family, part.part_k, rho.lambda_sq_max))
    return out


def ggm_restricted(target: PureState | RestrictedSource, families: Sequence[Family | str], spec: LatticeSpec | None = None) -> GgmResult:
    """GGM over the listed subsystem families only (an upper bound on the exact value).

    Parameters
    ----------
    target : PureState or a source with ``lambda_sq_candidates``
        Explicit state, or a handle that yields reduced-state eigenvalues
        directly (the column-transfer backend does this at large sizes).
    families : sequence of Family or str
    spec : LatticeSpec, optional
        Geometry for column and nearest-neighbour families of an explicit state.
    """
    fams = tuple(dict.fromkeys(Family.parse(f) for f in families))
    if not fams:
        raise UnsupportedFamily("at least one family is required")
    if isinstance(target, PureState):
        cands = _state_candidates(target, fams, spec)
        num_sites = target.num_sites
    else:
        cands = target.lambda_sq_candidates(fams)
        num_sites = target.num_sites
    if not cands:
        raise UnsupportedFamily("the requested families contain no proper subsystem")
    parts = [Bipartition(sub, num_sites) for _, sub, _ in cands]
    order = sorted(range(len(cands)), key=lambda i: parts[i])
    values = np.array([cands[i][2] for i in order])
    best = order[_pick(values, [parts[i] for i in order])]
    lam = float(np.max(values))
    return GgmResult(
        value=1.0 - lam,
        lambda_sq_max=lam,
        achieving_partition=parts[best],
        search="restricted",
        families=fams,
        achieving_family=cands[best][0],
        partitions_checked=len({p.part_k for p in parts}),
    )


def certify_genuine_entanglement(state: PureState, cap: int = DEFAULT_EXHAUSTIVE_CAP, tol: float = CERTIFY_TOL) -> CertificationReport:
    """Check that every bipartition of ``state`` is mixed.

    The mixedness of a split is ``1 - Tr rho^2`` of its smaller side. The state
    is certified genuinely multipartite entangled when the minimum over all
    canonical splits exceeds ``tol``.
    """
    _check_exhaustive(state, cap)
    scan = _SplitScanner(state)
    parts = list(canonical_bipartitions(state.num_sites))
    mixed = np.array([1.0 - scan.purity(part) for part in parts])
    worst = _pick(-mixed, parts)
    value = float(np.min(mixed))
    return CertificationReport(
        min_mixedness=value,
        worst_partition=Bipartition(parts[worst], state.num_sites),
        partitions_checked=len(parts),
        certified=bool(value > tol),
        tolerance=tol,
    )


def _entropy(state: PureState, sites: Sequence[int], cap: int | None) -> float:
    sites = sorted(set(sites))
    if not sites or len(sites) == state.num_sites:
        return 0.0
    if 2 * len(sites) > state.num_sites:
        sites = [s for s in range(state.num_sites) if s not in set(sites)]
    return von_neumann_entropy(partial_trace(state, sites, cap))


def ssa_check(state: PureState, x_prime: Sequence[int], y_prime: Sequence[int], c: Sequence[int], cap: int | None = 14) -> float:
    """Slack of strong subadditivity, ``S(X'c) + S(Y'c) - S(X') - S(Y')``.

    Entropies of sets larger than half the system are taken from the
    complement, which is exact for pure states.

    Raises
    ------
    OverlappingSets
        If the three sets are not pairwise disjoint.
    InputError
        If ``c`` is empty.
    """
    xs, ys, cs = (set(int(s) for s in v) for v in (x_prime, y_prime, c))
    if not cs:
        raise InputError("the shared set c must be nonempty")
    if xs & ys or xs & cs or ys & cs:
        raise OverlappingSets("X', Y' and c must be pairwise disjoint")
    for s in xs | ys | cs:
        if not 0 <= s < state.num_sites:
            raise InputError(f"site {s} outside the state")
    return (
        _entropy(state, sorted(xs | cs), cap)
        + _entropy(state, sorted(ys | cs), cap)
        - _entropy(state, sorted(xs), cap)
        - _entropy(state, sorted(ys), cap)
    )


def random_ssa_trials(state: PureState, trials: int, rng: np.random.Generator, cap: int | None = 14) -> list[dict]:
    """Strong-subadditivity slack on random disjoint triples.

    Each trial shuffles the sites, draws a nonempty ``c`` of odd size and
    possibly empty ``X'``, ``Y'`` from the remainder.
    """
    n = state.num_sites
    out = []
    for _ in range(trials):
        perm = rng.permutation(n)
        n_c = int(rng.choice(np.arange(1, n, 2)))
        rest = n - n_c
        n_x = int(rng.integers(0, rest + 1))
        n_y = int(rng.integers(0, rest - n_x + 1))
        c = sorted(int(s) for s in perm[:n_c])
        x = sorted(int(s) for s in perm[n_c:n_c + n_x])
        y = sorted(int(s) for s in perm[n_c + n_x:n_c + n_x + n_y])
        out.append({"x": x, "y": y, "c": c, "slack": ssa_check(state, x, y, c, cap)})
    return out
