"""Zeta measures, pressure and zero-temperature limits for locally constant potentials."""

from .exceptions import (ConvergenceError, InadmissibleWordError, InadmissibleWordWarning,
                         InvalidShiftError, NotPositiveError, PeriodCapExceeded, ZetathermError)
from .symbolic import PeriodicWord, ShiftSpec, block_graph, enumerate_fix, parse_word, periodic
from .potentials import LocallyConstantPotential, discretize
from .thermo import GibbsState, epsilon_c, gibbs_cylinder, pressure, pressure_derivative
from .ergopt import beta, critical_graph, deviation_I, h_max, inf_I_cylinder, tilde_I
from .zeta import (SeriesResult, ZetaParams, eta_measure, ldp_rate, log_partition_rate,
                   pi_measure, series_gibbs_decomposition, zeta_level_sum, zeta_measure)

__version__ = "0.1.0"

__all__ = [
    "ConvergenceError", "InadmissibleWordError", "InadmissibleWordWarning", "InvalidShiftError",
    "NotPositiveError", "PeriodCapExceeded", "ZetathermError",
    "PeriodicWord", "ShiftSpec", "block_graph", "enumerate_fix", "parse_word", "periodic",
    "LocallyConstantPotential", "discretize",
    "GibbsState", "epsilon_c", "gibbs_cylinder", "pressure", "pressure_derivative",
    "beta", "critical_graph", "deviation_I", "h_max", "inf_I_cylinder", "tilde_I",
    "SeriesResult", "ZetaParams", "eta_measure", "ldp_rate", "log_partition_rate", "pi_measure",
    "series_gibbs_decomposition", "zeta_level_sum", "zeta_measure",
]
