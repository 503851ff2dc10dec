"""One-sided test that New World exporters gained more from NIRW than the Old World."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from .model import FitResult


@dataclass(frozen=True)
class HypothesisTest:
    """Test of ``H0: beta_entrant <= beta_incumbent`` against the greater side."""

    entrant: str
    incumbent: str
    delta: float
    se: float
    p_value: float

    @property
    def z(self) -> float:
        return self.delta / self.se

    def rejects(self, level: float = 0.05) -> bool:
        return self.p_value < level


def hypothesis_test(result: FitResult, entrant: str = "NIRW_x_NW",
                    incumbent: str = "NIRW_x_OW") -> HypothesisTest:
    """Difference of two interaction coefficients with its one-sided p-value.

    ``se`` combines both variances and their covariance, so the eliminated
    coefficient's dependence on the others is accounted for.

    Raises
    ------
    ValueError
        If the fit carries no covariance, a name is unknown, or the variance
        of the difference is not positive.
    """
    if result.cov is None:
        raise ValueError("fit has no covariance matrix; refit or load a fit.json with 'cov'")
    for name in (entrant, incumbent):
        if name not in result.names:
            raise ValueError(f"unknown coefficient {name!r}")
    i, j = result.index(entrant), result.index(incumbent)
    cov = np.asarray(result.cov)
    var = cov[i, i] + cov[j, j] - 2.0 * cov[i, j]
    if not np.isfinite(var) or var <= 0.0:
        raise ValueError(f"variance of {entrant} - {incumbent} is not positive ({var})")
    delta = float(result.beta[i] - result.beta[j])
    se = math.sqrt(var)
    return HypothesisTest(entrant, incumbent, delta, se, float(norm.sf(delta / se)))


def split_hypothesis_tests(result: FitResult) -> list[HypothesisTest]:
    """Pairwise tests of each New World subgroup against the Old World."""
    return [hypothesis_test(result, e) for e in ("NIRW_x_LNW", "NIRW_x_ANW")]
