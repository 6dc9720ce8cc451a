import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from frozen_values import COVERING_COUNTS_OPEN
from rvbggm.errors import InputError, InvalidLattice
from rvbggm.lattice import (
    Boundary,
    DimerCovering,
    LatticeSpec,
    covering_count_transfer,
    enumerate_coverings,
    format_coverings,
    parse_coverings,
)


def test_site_indexing_round_trip():
    spec = LatticeSpec(4, 3)
    for i in range(spec.num_sites):
        assert spec.site(*spec.coords(i)) == i
    assert spec.site(2, 1) == 1 * 3 + 2
    assert spec.sublattice(0) == 0 and spec.sublattice(1) == 1


@pytest.mark.parametrize("m,mp,bc", [(3, 3, "open"), (0, 2, "open"), (3, 2, "ph"), (2, 4, "ph"), (5, 4, "ph")])
def test_invalid_lattices(m, mp, bc):
    with pytest.raises(InvalidLattice):
        LatticeSpec(m, mp, bc)


def test_boundary_parse_rejects_unknown():
    assert Boundary.parse("ph") is Boundary.PERIODIC_HORIZONTAL
    with pytest.raises(InputError):
        Boundary.parse("torus")


def test_edges_match_independent_construction():
    for m, mp, bc in [(4, 3, "ph"), (3, 4, "open"), (6, 2, "ph")]:
        spec = LatticeSpec(m, mp, bc)
        assert list(spec.edges) == oracles.grid_edges(m, mp, bc == "ph")


@pytest.mark.parametrize("m,mp", sorted(COVERING_COUNTS_OPEN))
def test_transfer_count_matches_closed_form(m, mp):
    assert covering_count_transfer(LatticeSpec(m, mp)) == COVERING_COUNTS_OPEN[(m, mp)]
    assert covering_count_transfer(LatticeSpec(m, mp)) == oracles.kasteleyn_count(m, mp)


@pytest.mark.parametrize("m,mp,bc", [(2, 2, "open"), (4, 4, "open"), (4, 3, "ph"), (4, 4, "ph"), (6, 3, "ph"), (3, 6, "open")])
def test_enumeration_matches_brute_force(m, mp, bc):
    spec = LatticeSpec(m, mp, bc)
    covs = enumerate_coverings(spec)
    mine = {frozenset(c.sort_key()) for c in covs}
    assert len(mine) == len(covs)
    assert mine == set(oracles.brute_matchings(m, mp, bc == "ph"))
    assert len(covs) == covering_count_transfer(spec)


def test_coverings_are_sorted_and_oriented():
    spec = LatticeSpec(4, 4, "ph")
    covs = enumerate_coverings(spec)
    keys = [c.sort_key() for c in covs]
    assert keys == sorted(keys)
    for c in covs:
        assert all(spec.sublattice(a) == 0 and spec.sublattice(b) == 1 for a, b in c.bonds)


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 6), st.integers(1, 6), st.booleans())
def test_count_property(m, mp, periodic):
    if (m * mp) % 2 or (periodic and (m <= 2 or m % 2)):
        return
    spec = LatticeSpec(m, mp, "ph" if periodic else "open")
    assert covering_count_transfer(spec) == len(oracles.brute_matchings(m, mp, periodic))


def test_covering_rejects_bad_pairs():
    spec = LatticeSpec(2, 2)
    with pytest.raises(InputError):
        DimerCovering.from_pairs(spec, [(0, 3), (1, 2)])  # diagonal
    with pytest.raises(InputError):
        DimerCovering.from_pairs(spec, [(0, 1)])  # incomplete


def test_format_parse_round_trip():
    spec = LatticeSpec(4, 3, "ph")
    covs = enumerate_coverings(spec)
    text = format_coverings(spec, covs, ["seed=0"])
    assert text.splitlines()[0] == "# lattice m=4 mp=3 bc=ph"
    spec2, covs2 = parse_coverings(text)
    assert spec2 == spec
    assert [c.sort_key() for c in covs2] == [c.sort_key() for c in covs]


def test_format_bond_syntax():
    spec = LatticeSpec(2, 2)
    line = format_coverings(spec, enumerate_coverings(spec)[:1]).splitlines()[1]
    assert line == "(0,0)-(1,0),(1,1)-(0,1)"


def test_parse_rejects_missing_header():
    with pytest.raises(InputError):
        parse_coverings("(0,0)-(1,0)\n")
