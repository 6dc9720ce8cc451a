import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from frozen_values import EXHAUSTIVE, RESTRICTED_PAIRS
from rvbggm.errors import InputError, OverlappingSets, TooLargeForExhaustive, UnsupportedFamily
from rvbggm.ggm import (
    Bipartition,
    Family,
    canonical_bipartitions,
    certify_genuine_entanglement,
    family_subsystems,
    ggm_exact,
    ggm_restricted,
    random_ssa_trials,
    ssa_check,
)
from rvbggm.lattice import LatticeSpec
from rvbggm.statevec import PureState, build_rvb, product_state

FAST = [k for k in EXHAUSTIVE if k[0] * k[1] <= 12]


def _ghz(n):
    return PureState(n, np.array([0, (1 << n) - 1]), np.array([1.0, 1.0]) / np.sqrt(2))


def test_bipartition_canonical_side():
    assert Bipartition((2, 3), 4).part_k == (0, 1)
    assert Bipartition((1,), 4).part_k == (1,)
    with pytest.raises(InputError):
        Bipartition((0, 1, 2, 3), 4)


def test_canonical_bipartition_count():
    for n in (4, 5, 6):
        assert len(list(canonical_bipartitions(n))) == 2 ** (n - 1) - 1


@pytest.mark.parametrize("key", FAST)
def test_exhaustive_matches_oracle(key, rvb_state):
    g, part, _ = EXHAUSTIVE[key]
    res = ggm_exact(rvb_state(*key))
    assert abs(res.value - g) < 1e-10
    assert res.achieving_partition.part_k == part
    assert res.search == "exhaustive" and res.partitions_checked == 2 ** (key[0] * key[1] - 1) - 1


@pytest.mark.slow
@pytest.mark.parametrize("key", [k for k in EXHAUSTIVE if k not in FAST])
def test_exhaustive_matches_oracle_16_sites(key, rvb_state):
    g, part, mixed = EXHAUSTIVE[key]
    res = ggm_exact(rvb_state(*key))
    assert abs(res.value - g) < 1e-10
    assert res.achieving_partition.part_k == part


def test_known_states():
    assert ggm_exact(product_state([0, 1, 1])).value < 1e-12
    assert abs(ggm_exact(_ghz(4)).value - 0.5) < 1e-12
    assert abs(ggm_exact(build_rvb(LatticeSpec(2, 1))).value - 0.5) < 1e-12


def test_ggm_matches_dense_on_random_states():
    rng = np.random.default_rng(3)
    for n in (3, 4, 5):
        vec = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
        vec /= np.linalg.norm(vec)
        tensor = vec.reshape((2,) * n).transpose(tuple(reversed(range(n))))
        g_ref, _, _ = oracles.dense_ggm(tensor)
        assert abs(ggm_exact(PureState.from_dense(vec)).value - g_ref) < 1e-10


def test_exhaustive_cap():
    with pytest.raises(TooLargeForExhaustive):
        ggm_exact(build_rvb(LatticeSpec(6, 3, "ph")))


@pytest.mark.parametrize("key", [(4, 3, "ph")])
def test_restricted_pairs_match_oracle(key, rvb_state):
    spec = LatticeSpec(*key)
    res = ggm_restricted(rvb_state(*key), [Family.SINGLE_SITE, Family.SITE_PAIRS], spec)
    assert abs(res.value - RESTRICTED_PAIRS[key]) < 1e-10
    assert res.restricted and res.to_dict()["bound"] == "upper"


def test_restricted_is_upper_bound_and_monotone(rvb_state):
    spec = LatticeSpec(4, 3, "ph")
    state = rvb_state(4, 3, "ph")
    exact = ggm_exact(state).value
    small = ggm_restricted(state, [Family.SINGLE_SITE], spec).value
    large = ggm_restricted(state, [Family.SINGLE_SITE, Family.SITE_PAIRS, Family.ADJACENT_COLUMN_PAIRS], spec).value
    assert abs(small - 0.5) < 1e-10
    assert exact <= large + 1e-12 <= small + 2e-12


def test_families_need_geometry():
    with pytest.raises(UnsupportedFamily):
        family_subsystems(Family.SINGLE_COLUMN, 8)
    spec = LatticeSpec(4, 2, "ph")
    assert len(family_subsystems(Family.ADJACENT_COLUMN_PAIRS, 8, spec)) == 4
    assert len(family_subsystems(Family.NEAREST_NEIGHBOR_PAIRS, 8, spec)) == len(spec.edges)
    with pytest.raises(InputError):
        Family.parse("triples")


@pytest.mark.parametrize("key", FAST)
def test_certification_matches_oracle(key, rvb_state):
    _, _, mixed = EXHAUSTIVE[key]
    rep = certify_genuine_entanglement(rvb_state(*key))
    assert rep.certified
    assert abs(rep.min_mixedness - mixed) < 1e-10
    assert set(rep.to_dict()) >= {"min_mixedness", "worst_partition", "partitions_checked", "certified"}


def test_product_state_not_certified():
    state = product_state([0, 1]).tensor(build_rvb(LatticeSpec(2, 1)))
    assert not certify_genuine_entanglement(state).certified


def test_ssa_examples():
    state = build_rvb(LatticeSpec(2, 2))
    assert ssa_check(state, [0], [1], [2]) >= -1e-12
    with pytest.raises(OverlappingSets):
        ssa_check(state, [0], [0], [2])
    with pytest.raises(InputError):
        ssa_check(state, [0], [1], [])


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_ssa_random_states(seed):
    rng = np.random.default_rng(seed)
    vec = rng.normal(size=32) + 1j * rng.normal(size=32)
    state = PureState.from_dense(vec / np.linalg.norm(vec))
    for trial in random_ssa_trials(state, 3, rng):
        assert trial["slack"] >= -1e-10


def test_ssa_trials_are_seeded(rvb_state):
    state = rvb_state(4, 2, "ph")
    a = random_ssa_trials(state, 5, np.random.default_rng(7))
    b = random_ssa_trials(state, 5, np.random.default_rng(7))
    assert a == b
