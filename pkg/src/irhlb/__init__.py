"""Interior singular triplets of large sparse matrices by implicitly restarted
harmonic Lanczos bidiagonalization."""

from .driver import RunStats, SingularTriplet, SolverConfig, SolverResult, generate_test_matrix, solve
from .sparse import (
    MatvecCounter,
    SparseMatrix,
    matvec,
    matvec_transpose,
    one_norm,
    parse_matrix_market,
    read_matrix_market,
    write_matrix_market,
)

__version__ = "0.1.0"

__all__ = [
    "MatvecCounter",
    "RunStats",
    "SingularTriplet",
    "SolverConfig",
    "SolverResult",
    "SparseMatrix",
    "generate_test_matrix",
    "matvec",
    "matvec_transpose",
    "one_norm",
    "parse_matrix_market",
    "read_matrix_market",
    "solve",
    "write_matrix_market",
]
