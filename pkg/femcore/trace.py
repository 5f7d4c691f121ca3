import numpy as np

from femcore.basis import interval_basis
from femcore.quadrature import quadrature_rule
from femcore.views import EdgeTrace


def edge_trace_matrices(trace: EdgeTrace) -> tuple[np.ndarray, np.ndarray]:
    """Dense 1D Laplace stiffness and L2 mass on a decomposition edge.

    Rows follow the trace positions of ``trace`` in the along-edge orientation.
    """
    rule = quadrature_rule(2 * trace.p, "interval")
    values, derivs = interval_basis(trace.p, rule.points)
    ref_stiffness = derivs.T @ (rule.weights[:, None] * derivs)
    ref_mass = values.T @ (rule.weights[:, None] * values)
    stiffness = np.zeros((trace.size, trace.size))
    mass = np.zeros((trace.size, trace.size))
    for s, length in enumerate(trace.segment_lengths):
        pos = trace.segment_positions(s)
        stiffness[np.ix_(pos, pos)] += ref_stiffness / length
        mass[np.ix_(pos, pos)] += ref_mass * length
    return stiffness, mass


def trace_values(trace: EdgeTrace, coeffs: np.ndarray) -> np.ndarray:
    """Along-edge trace coefficients of a global coefficient vector."""
    return trace.signs * coeffs[trace.dofs]
