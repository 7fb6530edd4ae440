"""Photon-counting simulator and analysis for a ten-cell temporally
multiplexed quantum-memory array.

The heavy lifting lives in the compiled extension ``qmem._core``; this
package re-exports its operations under stable names.
"""

from ._core import (
    analyze,
    bound_table,
    classical_bound,
    closed_form_visibility,
    fidelity_from_counts,
    fit_fringe,
    fock_fidelity,
    fringe,
    mc_fidelity,
    report,
    simulate,
    solve_p_succ,
)

__version__ = "0.1.0"

__all__ = [
    "analyze",
    "bound_table",
    "classical_bound",
    "closed_form_visibility",
    "fidelity_from_counts",
    "fit_fringe",
    "fock_fidelity",
    "fringe",
    "mc_fidelity",
    "report",
    "simulate",
    "solve_p_succ",
    "__version__",
]
