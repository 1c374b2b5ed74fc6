"""Resistor-network learning toolkit (Python bindings)."""

from ._ohmgrad import (  # noqa: F401
    Circuit,
    CircuitGraph,
    OhmgradError,
    Selectors,
    analytical_gradient,
    choose_io_edges,
    cycle_matrix,
    grid_graph,
    hinge_subgradient,
    io_map,
    make_selectors,
    nanowire_graph,
    solve,
    two_phase_gradient,
    two_phase_limit,
)

__version__ = "0.1.0"
