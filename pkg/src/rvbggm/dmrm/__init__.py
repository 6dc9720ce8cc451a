"""Reduced states of large RVB lattices without the full state vector.

* :mod:`.transfer`: exact two-column reduced matrices by column transfer.
* :mod:`.loopgas`: exact two-site correlations from the loop gas.
* :mod:`.blocks`: inner-product recursions for states built from one- and
  two-column blocks, and their reduced matrices.
* :mod:`.pipeline`: public entry points and the restricted GGM search.
"""
from .blocks import (
    BaseStates,
    ChiTable,
    ColumnState,
    RecursionTable,
    StateLabel,
    ansatz_rho2_imperfect,
    ansatz_rho2_open,
    ansatz_rho2_periodic,
    ansatz_state,
    block_mps_rho2,
    build_base_states,
    build_chi_table,
    derive_alpha_basis,
    dump_table_json,
    is_block_covering,
    recurse_inner_products,
)
from .loopgas import lambda_sq_from_correlation, loop_weight, pair_correlation, pair_lambda_sq
from .pipeline import DEFAULT_FAMILIES, DmrmHandle, ggm_from_dmrm, rho2_imperfect, rho2_perfect
from .transfer import column_pair_density

__all__ = [
    "BaseStates", "ChiTable", "ColumnState", "RecursionTable", "StateLabel",
    "ansatz_rho2_imperfect", "ansatz_rho2_open", "ansatz_rho2_periodic", "ansatz_state",
    "block_mps_rho2", "build_base_states", "build_chi_table", "derive_alpha_basis",
    "dump_table_json", "is_block_covering", "recurse_inner_products",
    "lambda_sq_from_correlation", "loop_weight", "pair_correlation", "pair_lambda_sq",
    "DEFAULT_FAMILIES", "DmrmHandle", "ggm_from_dmrm", "rho2_imperfect", "rho2_perfect",
    "column_pair_density",
]
