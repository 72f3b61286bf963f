"""
Sparse storage, products and direct solves.
"""

from .sparse_core import (
    CooMatrix, CsrMatrix, DenseLU, canonicalize, coo_from_entries, coo_to_csr,
    csr_to_coo, lu_solve_dense, read_matrix_market, spmv, transpose,
    triple_product, write_matrix_market,
)

__all__ = [
    'CooMatrix', 'CsrMatrix', 'DenseLU', 'canonicalize', 'coo_from_entries',
    'coo_to_csr', 'csr_to_coo', 'lu_solve_dense', 'read_matrix_market', 'spmv',
    'transpose', 'triple_product', 'write_matrix_market',
]
