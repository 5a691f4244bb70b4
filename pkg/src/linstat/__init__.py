"""Finite-n and limiting fluctuation statistics of unitary-invariant matrix models."""

__version__ = "0.1.0"

from .equilibrium import Potential, equilibrium_measure, minimize_energy  # noqa: E402
from .errors import ConfigError, LinstatError, NumericError  # noqa: E402
from .orthopoly import cd_kernel, kernel_for, stieltjes_recurrence  # noqa: E402

__all__ = ["Potential", "equilibrium_measure", "minimize_energy", "stieltjes_recurrence",
           "kernel_for", "cd_kernel", "LinstatError", "NumericError", "ConfigError", "__version__"]
