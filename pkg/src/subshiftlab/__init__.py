"""Frequency-constrained subshifts, Wang tiles and Gibbs states at desk scale.

Modules: ``core`` (patterns and forbidden sets), ``bounds`` (binomial and
entropy bounds, level schedules), ``subshift`` (the signed frequency
subshifts and their counting chains), ``wang`` (Wang tiles), ``tm``
(Turing machines compiled to tiles), ``gibbs`` (pressure and equilibrium
states), ``recoding`` (block recoding) and ``cli``.
"""
from .errors import CapExceeded, PrecisionError, WorkbenchError

__version__ = "0.1.0"
__all__ = ["WorkbenchError", "CapExceeded", "PrecisionError", "__version__"]
