"""Positivity-preserving central DG solver for ideal compressible MHD."""

from cdgmhd.config import ConfigError, RunConfig, make_config
from cdgmhd.physics import IdealGas
from cdgmhd.problems import PROBLEM_NAMES, build_problem
from cdgmhd.runner import RunResult, build_scheme, convergence_study, run
from cdgmhd.solver1d import Scheme1D
from cdgmhd.solver2d import LOCALLY_DF_PP, STANDARD, Scheme2D, SchemeVariant
from cdgmhd.verification import CounterexampleFamily, fuzz_lemmas, run_counterexample

__all__ = [
    "ConfigError",
    "CounterexampleFamily",
    "IdealGas",
    "LOCALLY_DF_PP",
    "PROBLEM_NAMES",
    "RunConfig",
    "RunResult",
    "STANDARD",
    "Scheme1D",
    "Scheme2D",
    "SchemeVariant",
    "build_problem",
    "build_scheme",
    "convergence_study",
    "fuzz_lemmas",
    "make_config",
    "run",
    "run_counterexample",
]
__version__ = "0.1.0"
