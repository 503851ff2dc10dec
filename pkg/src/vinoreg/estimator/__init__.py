"""Censored random-effects estimation under the NIRW adding-up restriction."""

from .fit import HessianWarning, covariance, fit, standard_errors
from .inference import HypothesisTest, hypothesis_test, split_hypothesis_tests
from .likelihood import loglik
from .model import ConvergenceError, FitResult, ModelSpec, NumericalOverflowError
from .quadrature import gauss_hermite
from .restriction import Restriction, canonical_names, expand_restricted

__all__ = [
    "ConvergenceError", "FitResult", "HessianWarning", "HypothesisTest", "ModelSpec",
    "NumericalOverflowError", "Restriction", "canonical_names", "covariance",
    "expand_restricted", "fit", "gauss_hermite", "hypothesis_test", "loglik",
    "split_hypothesis_tests", "standard_errors",
]
