from reference.direct import reference_order, solve_fem_direct
from reference.oracle import harmonic_vertex_trace, oracle_acms_dense
from reference.views import (
    DIRECT_SOLVE_CAP,
    ORACLE_MAX_ACMS,
    ORACLE_MAX_FEM,
    CapExceededError,
    OracleResult,
    ReferenceSolution,
)

__all__ = [
    "reference_order",
    "solve_fem_direct",
    "harmonic_vertex_trace",
    "oracle_acms_dense",
    "DIRECT_SOLVE_CAP",
    "ORACLE_MAX_ACMS",
    "ORACLE_MAX_FEM",
    "CapExceededError",
    "OracleResult",
    "ReferenceSolution",
]
