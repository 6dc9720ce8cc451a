import json
import math

import numpy as np
import pytest

from frozen_values import EXHAUSTIVE, RESTRICTED_PAIRS, TRACE_DISTANCE_TOL
from rvbggm import backend
from rvbggm.dmrm import (
    DmrmHandle,
    ansatz_rho2_imperfect,
    ansatz_rho2_open,
    ansatz_rho2_periodic,
    ansatz_state,
    block_mps_rho2,
    build_base_states,
    build_chi_table,
    column_pair_density,
    derive_alpha_basis,
    dump_table_json,
    ggm_from_dmrm,
    is_block_covering,
    lambda_sq_from_correlation,
    loop_weight,
    pair_correlation,
    recurse_inner_products,
    rho2_imperfect,
    rho2_perfect,
)
from rvbggm.errors import CapExceeded, InputError
from rvbggm.ggm import Family, ggm_exact, ggm_restricted
from rvbggm.lattice import LatticeSpec, enumerate_coverings
from rvbggm.statevec import build_rvb, partial_trace, spin_correlation


def trace_distance(a, b):
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(a - b))))


def pair_sites(spec, first):
    return spec.column_sites(first) + spec.column_sites(first + 1)


# -- column transfer ---------------------------------------------------------


@pytest.mark.parametrize("m,mp,bc,first", [
    (4, 2, "ph", 2), (4, 3, "ph", 0), (4, 3, "ph", 1), (3, 4, "open", 0), (3, 4, "open", 1),
    (4, 4, "open", 1), (6, 2, "ph", 3), (5, 2, "open", 2),
])
def test_transfer_matches_brute_force(m, mp, bc, first, rvb_state):
    spec = LatticeSpec(m, mp, bc)
    rho = column_pair_density(spec, first)
    assert rho.sites == pair_sites(spec, first)
    ref = partial_trace(rvb_state(m, mp, bc), list(rho.sites), cap=None).matrix
    assert trace_distance(rho.matrix, ref) < TRACE_DISTANCE_TOL
    assert abs(np.trace(rho.matrix) - 1) < 1e-12
    assert np.min(np.linalg.eigvalsh(rho.matrix)) > -1e-12


def test_public_entry_points_validate_parity():
    assert rho2_perfect(4).sites == pair_sites(LatticeSpec(4, 4, "ph"), 2)
    assert rho2_imperfect(4, 3).sites == pair_sites(LatticeSpec(4, 3, "ph"), 2)
    with pytest.raises(InputError):
        rho2_perfect(4, 3)
    with pytest.raises(InputError):
        rho2_imperfect(4, 4)


def test_ring_height_cap():
    with pytest.raises(CapExceeded):
        column_pair_density(LatticeSpec(6, 5, "ph"))


def test_single_site_marginal_of_rho2():
    rho = rho2_imperfect(4, 3)
    for s in rho.sites:
        assert np.max(np.abs(rho.marginal([s]).matrix - np.eye(2) / 2)) < 1e-12


# -- loop gas ----------------------------------------------------------------


def test_loop_weight_counts_norm():
    for spec in (LatticeSpec(4, 3, "ph"), LatticeSpec(3, 4)):
        z, log_scale = loop_weight(spec)
        raw = build_rvb(spec, normalize=False)
        assert abs(z * math.exp(log_scale) / raw.norm_squared - 2 ** (spec.num_sites // 2)) < 1e-9


@pytest.mark.parametrize("which", ["numba", "numpy"])
@pytest.mark.parametrize("m,mp,bc", [(4, 3, "ph"), (3, 4, "open"), (4, 4, "ph")])
def test_loop_gas_correlations(which, m, mp, bc, rvb_state):
    spec = LatticeSpec(m, mp, bc)
    state = rvb_state(m, mp, bc)
    pairs = [(0, 1), (0, spec.m_prime), (1, spec.num_sites - 1), (0, 5), (2, 7)]
    with backend(which):
        for i, j in pairs:
            assert abs(pair_correlation(spec, i, j) - spin_correlation(state, i, j)) < 1e-12


def test_two_site_spectrum_from_correlation():
    assert lambda_sq_from_correlation(-0.75) == 1.0
    assert lambda_sq_from_correlation(0.0) == 0.25
    rho = partial_trace(build_rvb(LatticeSpec(4, 3, "ph")), [0, 4])
    c = float(np.trace(rho.matrix @ np.diag([0.25, -0.25, -0.25, 0.25])).real)  # zz part only
    assert abs(lambda_sq_from_correlation(3 * c) - rho.lambda_sq_max) < 1e-12


def test_loop_gas_cap():
    with pytest.raises(CapExceeded):
        pair_correlation(LatticeSpec(14, 2, "ph"), 0, 1)
    with pytest.raises(InputError):
        pair_correlation(LatticeSpec(4, 2, "ph"), 1, 1)


# -- block recursion -----------------------------------------------------------


@pytest.fixture(scope="module", params=[2, 4])
def table(request):
    base = build_base_states(request.param)
    return base, recurse_inner_products(derive_alpha_basis(base), 6)


def test_alpha_basis_properties(table):
    base, t = table
    assert t.k_dim == {2: 1, 4: 2}[base.height]
    assert t.closure_residual < 1e-10
    assert np.max(np.abs(t.alpha.T @ t.a - t.a @ t.alpha)) < 1e-12
    assert t.column_sign == (-1) ** (base.height // 2)


def test_block_covering_filter():
    spec = LatticeSpec(3, 4)
    blocks = [c for c in enumerate_coverings(spec) if is_block_covering(c, (1, 2))]
    assert (len(blocks), len(enumerate_coverings(spec))) == (9, 11)


def test_recursion_norms_match_explicit_ansatz(table):
    base, t = table
    for n in range(1, 5):
        z = ansatz_state(LatticeSpec(n, base.height)).norm_squared
        assert abs(t.z(n) - z) / z < 1e-10


def test_xi_closed_form(table):
    _, t = table
    s = t.column_sign
    for n in range(1, 6):
        rhs = sum(s ** (n - i) * t.z(n - i) * t.g[i] for i in range(1, n + 1))
        assert np.max(np.abs(t.xi[n] * t.z(n) - rhs)) < 1e-9 * max(1.0, t.z(n))


def test_open_ansatz_rho2(table):
    base, t = table
    for m in (3, 4):
        spec = LatticeSpec(m, base.height)
        ref = partial_trace(ansatz_state(spec), list(pair_sites(spec, m - 2)), cap=None).matrix
        assert trace_distance(ansatz_rho2_open(t, base, m).matrix, ref) < 1e-10


def test_periodic_ansatz_rho2(table):
    base, t = table
    spec = LatticeSpec(4, base.height, "ph")
    ref = partial_trace(ansatz_state(spec), list(pair_sites(spec, 2)), cap=None).matrix
    assert trace_distance(ansatz_rho2_periodic(t, base, 4).matrix, ref) < 1e-10
    mps, _ = block_mps_rho2(base, 4)
    assert trace_distance(mps / np.trace(mps), ref) < 1e-10


@pytest.mark.parametrize("h", [3, 5])
def test_imperfect_chi_recursion(h):
    base = build_base_states(h)
    chi = build_chi_table(base, 6)
    spec = LatticeSpec(4, h, "ph")
    ref = partial_trace(ansatz_state(spec), list(pair_sites(spec, 2)), cap=None).matrix
    assert trace_distance(ansatz_rho2_imperfect(chi, base, 4).matrix, ref) < 1e-10
    # closed form Z_N = Z_2**(N/2) is the norm of one product of N/2 blocks
    for n in (2, 4):
        z = ansatz_state(LatticeSpec(n, h)).norm_squared
        assert abs(chi.z(n) - z) / z < 1e-10


def test_table_dump(table):
    base, t = table
    data = json.loads(dump_table_json(t))
    assert {"k_dim", "alpha", "a", "z", "conventions"} <= set(data)
    for n, (mant, exp) in enumerate(data["z"]):
        assert abs(math.ldexp(mant, int(exp)) - t.z(n)) <= 1e-12 * t.z(n)
    assert data["k_dim"] == t.k_dim


def test_table_bounds(table):
    _, t = table
    with pytest.raises(InputError):
        t.z(t.n_max + 1)


# -- restricted search handle --------------------------------------------------


ALL_FAMILIES = [Family.SINGLE_SITE, Family.SITE_PAIRS, Family.SINGLE_COLUMN,
                Family.ADJACENT_COLUMN_PAIRS, Family.NEAREST_NEIGHBOR_PAIRS]


@pytest.mark.parametrize("m,mp,bc", [(4, 3, "ph"), (4, 2, "ph"), (3, 4, "open")])
def test_handle_matches_explicit_state(m, mp, bc, rvb_state):
    spec = LatticeSpec(m, mp, bc)
    state = rvb_state(m, mp, bc)
    handle = DmrmHandle(spec)
    for fam in ALL_FAMILIES:
        a = ggm_restricted(state, [fam], spec)
        b = ggm_restricted(handle, [fam])
        assert abs(a.value - b.value) < 1e-10, fam


def test_default_families_upper_bound(rvb_state):
    res = ggm_from_dmrm(4, 3, "ph")
    assert res.restricted
    assert abs(res.value - RESTRICTED_PAIRS[(4, 3, "ph")]) < 1e-10
    assert res.value >= EXHAUSTIVE[(4, 3, "ph")][0]


def test_default_families_reach_open_square_maximizer():
    # the maximizer of the open 4x4 lattice is an adjacent column pair
    res = ggm_from_dmrm(4, 4, "open")
    assert abs(res.value - EXHAUSTIVE[(4, 4, "open")][0]) < 1e-10
    assert res.achieving_family is Family.ADJACENT_COLUMN_PAIRS


def test_periodic_square_defaults_miss_maximizer():
    res = ggm_from_dmrm(4, 4, "ph")
    assert abs(res.value - RESTRICTED_PAIRS[(4, 4, "ph")]) < 1e-10
    assert res.value > EXHAUSTIVE[(4, 4, "ph")][0] + 0.2


def test_families_over_caps():
    with pytest.raises(CapExceeded):
        ggm_from_dmrm(6, 5, "ph", families=[Family.ADJACENT_COLUMN_PAIRS])
    res = ggm_from_dmrm(6, 5, "ph")  # defaults drop what the caps exclude
    assert Family.ADJACENT_COLUMN_PAIRS not in res.families


def test_handle_rejects_other_lattice():
    with pytest.raises(InputError):
        ggm_from_dmrm(4, 3, "ph", handle=DmrmHandle(LatticeSpec(4, 2, "ph")))
