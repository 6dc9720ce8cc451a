"""Square-lattice geometry and nearest-neighbour dimer coverings.

Sites are addressed by ``(row, col)`` with ``0 <= row < m_prime`` and
``0 <= col < m``. The linear index is column-major, ``col * m_prime + row``,
so a block of whole columns occupies a contiguous range of bits. Sublattice A
holds the sites with ``row + col`` even.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Iterable, Iterator

from .errors import InputError, InvalidLattice

__all__ = [
    "Boundary",
    "LatticeSpec",
    "DimerCovering",
    "enumerate_coverings",
    "iter_coverings",
    "covering_count_transfer",
    "format_coverings",
    "parse_coverings",
]


class Boundary(str, Enum):
    """Boundary condition. Periodicity, when present, is along the rows (horizontal)."""

    OPEN = "open"
    PERIODIC_HORIZONTAL = "ph"

    @classmethod
    def parse(cls, value: "Boundary | str") -> "Boundary":
        if isinstance(value, Boundary):
            return value
        try:
            return cls(str(value).lower())
        except ValueError as exc:
            raise InvalidLattice(f"unknown boundary {value!r}; expected 'open' or 'ph'") from exc


@dataclass(frozen=True)
class LatticeSpec:
    """An ``m`` (columns) by ``m_prime`` (rows) square lattice.

    Raises
    ------
    InvalidLattice
        For non-positive sides, an odd number of sites, or a horizontally
        periodic lattice whose wrap bonds would double existing bonds
        (``m <= 2``) or join two sites of the same sublattice (odd ``m``).
    """

    m: int
    m_prime: int
    boundary: Boundary = Boundary.OPEN

    def __post_init__(self) -> None:
        object.__setattr__(self, "boundary", Boundary.parse(self.boundary))
        for name in ("m", "m_prime"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int) or value < 1:
                raise InvalidLattice(f"{name} must be a positive integer, got {value!r}")
        if (self.m * self.m_prime) % 2:
            raise InvalidLattice(
                f"{self.m}x{self.m_prime} lattice has an odd number of sites; no dimer covering exists"
            )
        if self.periodic:
            if self.m <= 2:
                raise InvalidLattice(
                    f"horizontal periodicity with m={self.m} duplicates existing bonds"
                )
            if self.m % 2:
                raise InvalidLattice(
                    f"horizontal periodicity with odd m={self.m} breaks the A/B bipartition"
                )

    @property
    def periodic(self) -> bool:
        return self.boundary is Boundary.PERIODIC_HORIZONTAL

    @property
    def num_sites(self) -> int:
        return self.m * self.m_prime

    @property
    def num_bonds(self) -> int:
        return self.num_sites // 2

    @property
    def parity_class(self) -> str | None:
        """``"perfect"`` for even square lattices, ``"imperfect"`` for even by odd, else ``None``."""
        if self.m % 2 == 0 and self.m == self.m_prime:
            return "perfect"
        if self.m % 2 == 0 and self.m_prime % 2 == 1:
            return "imperfect"
        return None

    @property
    def label(self) -> str:
        return f"{self.m}x{self.m_prime}-{self.boundary.value}"

    def site(self, row: int, col: int) -> int:
        if not (0 <= row < self.m_prime and 0 <= col < self.m):
            raise InputError(f"site ({row},{col}) outside {self.m}x{self.m_prime} lattice")
        return col * self.m_prime + row

    def coords(self, index: int) -> tuple[int, int]:
        if not 0 <= index < self.num_sites:
            raise InputError(f"site index {index} outside lattice of {self.num_sites} sites")
        col, row = divmod(index, self.m_prime)
        return row, col

    def sublattice(self, index: int) -> int:
        """0 for sublattice A, 1 for sublattice B."""
        row, col = self.coords(index)
        return (row + col) % 2

    def column_sites(self, col: int) -> tuple[int, ...]:
        return tuple(range(col * self.m_prime, (col + 1) * self.m_prime))

    @cached_property
    def edges(self) -> tuple[tuple[int, int], ...]:
        """Nearest-neighbour bonds as sorted ``(i, j)`` pairs with ``i < j``."""
        out = set()
        h = self.m_prime
        for col in range(self.m):
            for row in range(h):
                i = col * h + row
                if row + 1 < h:
                    out.add((i, i + 1))
                if col + 1 < self.m:
                    out.add((i, i + h))
                elif self.periodic:
                    out.add((row, i))
        return tuple(sorted(out))

    @cached_property
    def neighbors(self) -> tuple[tuple[int, ...], ...]:
        adj: list[list[int]] = [[] for _ in range(self.num_sites)]
        for i, j in self.edges:
            adj[i].append(j)
            adj[j].append(i)
        return tuple(tuple(sorted(a)) for a in adj)

    def config(self) -> dict:
        return {"m": self.m, "m_prime": self.m_prime, "boundary": self.boundary.value}


def _bond_key(bond: tuple[int, int]) -> tuple[int, int]:
    a, b = bond
    return (a, b) if a < b else (b, a)


@dataclass(frozen=True)
class DimerCovering:
    """A perfect matching of the lattice into nearest-neighbour bonds.

    ``bonds`` holds ``(a, b)`` with ``a`` on sublattice A and ``b`` on
    sublattice B, ordered by ``(min(a, b), max(a, b))``.
    """

    spec: LatticeSpec
    bonds: tuple[tuple[int, int], ...] = field(default=())

    @classmethod
    def from_pairs(cls, spec: LatticeSpec, pairs: Iterable[tuple[int, int]]) -> "DimerCovering":
        edge_set = set(spec.edges)
        seen: set[int] = set()
        bonds = []
        for i, j in pairs:
            i, j = int(i), int(j)
            if _bond_key((i, j)) not in edge_set:
                raise InputError(f"({i},{j}) is not a nearest-neighbour bond of {spec.label}")
            if i in seen or j in seen:
                raise InputError(f"site used twice in covering at bond ({i},{j})")
            seen.update((i, j))
            bonds.append((i, j) if spec.sublattice(i) == 0 else (j, i))
        if len(seen) != spec.num_sites:
            raise InputError("covering does not cover every site")
        return cls(spec, tuple(sorted(bonds, key=_bond_key)))

    def sort_key(self) -> tuple[tuple[int, int], ...]:
        return tuple(_bond_key(b) for b in self.bonds)

    def is_vertical(self, bond: tuple[int, int]) -> bool:
        return abs(bond[0] - bond[1]) == 1 and bond[0] // self.spec.m_prime == bond[1] // self.spec.m_prime


def iter_coverings(spec: LatticeSpec) -> Iterator[tuple[tuple[int, int], ...]]:
    """Yield coverings as tuples of ``(low, high)`` index pairs in canonical order.

    Backtracking always matches the lowest unmatched site, trying partners in
    increasing order, so the output is lexicographic in the sorted bond list.
    A placement is pruned when it leaves some unmatched neighbour with no free
    partner.
    """
    n = spec.num_sites
    nbrs = spec.neighbors
    matched = [False] * n
    stack: list[tuple[int, int]] = []

    def stranded(site: int) -> bool:
        for k in nbrs[site]:
            if not matched[k] and k != site:
                for q in nbrs[k]:
                    if not matched[q]:
                        break
                else:
                    return True
        return False

    def rec(start: int) -> Iterator[tuple[tuple[int, int], ...]]:
        i = start
        while i < n and matched[i]:
            i += 1
        if i == n:
            yield tuple(stack)
            return
        matched[i] = True
        for j in nbrs[i]:
            if matched[j]:
                continue
            matched[j] = True
            if not (stranded(i) or stranded(j)):
                stack.append((i, j))
                yield from rec(i + 1)
                stack.pop()
            matched[j] = False
        matched[i] = False

    yield from rec(0)


def enumerate_coverings(spec: LatticeSpec) -> list[DimerCovering]:
    """Every nearest-neighbour dimer covering of ``spec``, in canonical order.

    Examples
    --------
    >>> len(enumerate_coverings(LatticeSpec(2, 2)))
    2
    """
    out = []
    for pairs in iter_coverings(spec):
        bonds = tuple((i, j) if spec.sublattice(i) == 0 else (j, i) for i, j in pairs)
        out.append(DimerCovering(spec, bonds))
    out.sort(key=DimerCovering.sort_key)
    return out


def _vertical_fill_ok(free: int, height: int) -> bool:
    """True when the rows set in ``free`` split into runs of even length."""
    run = 0
    for r in range(height):
        if (free >> r) & 1:
            run += 1
        else:
            if run % 2:
                return False
            run = 0
    return run % 2 == 0


def _column_transitions(height: int) -> list[list[int]]:
    full = (1 << height) - 1
    table = []
    for incoming in range(1 << height):
        outs = []
        rest = full & ~incoming
        sub = rest
        while True:
            if _vertical_fill_ok(rest & ~sub, height):
                outs.append(sub)
            if sub == 0:
                break
            sub = (sub - 1) & rest
        table.append(sorted(outs))
    return table


def covering_count_transfer(spec: LatticeSpec) -> int:
    """Number of dimer coverings from a column transfer over boundary profiles.

    The profile of a cut is the set of rows crossed by horizontal bonds. Exact
    integer arithmetic; with horizontal periodicity the count is the trace of
    the transfer power.
    """
    h = spec.m_prime
    table = _column_transitions(h)

    def propagate(start: int) -> dict[int, int]:
        vec = {start: 1}
        for _ in range(spec.m):
            nxt: dict[int, int] = {}
            for incoming, count in vec.items():
                for out in table[incoming]:
                    nxt[out] = nxt.get(out, 0) + count
            vec = nxt
        return vec

    if not spec.periodic:
        return propagate(0).get(0, 0)
    return sum(propagate(w).get(w, 0) for w in range(1 << h))


_HEADER = re.compile(r"^#\s*lattice\s+m=(\d+)\s+mp=(\d+)\s+bc=(open|ph)\s*$")
_BOND = re.compile(r"\((\d+),(\d+)\)-\((\d+),(\d+)\)")


def _format_bond(spec: LatticeSpec, bond: tuple[int, int]) -> tuple[tuple[int, int, int, int], str]:
    ra, ca = spec.coords(bond[0])
    rb, cb = spec.coords(bond[1])
    return (ra, ca, rb, cb), f"({ra},{ca})-({rb},{cb})"


def format_coverings(spec: LatticeSpec, coverings: Iterable[DimerCovering], meta_lines: Iterable[str] = ()) -> str:
    """Serialize coverings, one per line, A endpoint first in every bond.

    Extra ``meta_lines`` are written as ``#`` comments after the lattice header.
    """
    lines = [f"# lattice m={spec.m} mp={spec.m_prime} bc={spec.boundary.value}"]
    lines.extend(f"# {line}" for line in meta_lines)
    for cov in coverings:
        parts = sorted(_format_bond(spec, b) for b in cov.bonds)
        lines.append(",".join(text for _, text in parts))
    return "\n".join(lines) + "\n"


def parse_coverings(text: str) -> tuple[LatticeSpec, list[DimerCovering]]:
    """Inverse of :func:`format_coverings`; comment lines other than the header are ignored."""
    lines = text.splitlines()
    if not lines:
        raise InputError("empty covering list")
    head = _HEADER.match(lines[0].strip())
    if head is None:
        raise InputError(f"missing lattice header, got {lines[0]!r}")
    spec = LatticeSpec(int(head.group(1)), int(head.group(2)), Boundary(head.group(3)))
    coverings = []
    for line in lines[1:]:
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        pairs = [
            (spec.site(int(ra), int(ca)), spec.site(int(rb), int(cb)))
            for ra, ca, rb, cb in _BOND.findall(line)
        ]
        coverings.append(DimerCovering.from_pairs(spec, pairs))
    return spec, coverings
