"""Exact truncated-Fock-space toolkit for binary coherent-state receivers."""

from cohdisc.fock import (
    CutoffPolicy,
    DensityOperator,
    FockOperator,
    FockVector,
    choose_cutoff,
    coherent_state,
    displaced_squeezed_state,
    displacement_operator,
    expectation,
    number_state,
    squeeze_operator,
    wigner,
)

__version__ = "0.1.0"

__all__ = [
    "CutoffPolicy",
    "DensityOperator",
    "FockOperator",
    "FockVector",
    "choose_cutoff",
    "coherent_state",
    "displaced_squeezed_state",
    "displacement_operator",
    "expectation",
    "number_state",
    "squeeze_operator",
    "wigner",
    "__version__",
]
