"""
Adding-up restriction on the NIRW effects across the wine worlds.

Each group's response to rest-of-world demand is the NIRW coefficient plus
its own interaction; weighted by group size the responses sum to zero::

    N * b_NIRW + n_ow * b_NIRW_x_OW + n_nw * b_NIRW_x_NW = 0

with ``N`` the total number of countries.  The Old World interaction is the
coordinate solved out of the parameter vector.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

ELIMINATED = "NIRW_x_OW"


@dataclass(frozen=True)
class Restriction:
    n_rw: int
    n_ow: int
    n_nw: int | None = None
    n_lnw: int | None = None
    n_anw: int | None = None

    def __post_init__(self):
        if self.split:
            if self.n_nw is not None:
                raise ValueError("give either n_nw or the LNW/ANW pair, not both")
            sizes = (self.n_rw, self.n_ow, self.n_lnw, self.n_anw)
        else:
            if self.n_nw is None or self.n_lnw is not None or self.n_anw is not None:
                raise ValueError("three-group restriction needs n_rw, n_ow and n_nw only")
            sizes = (self.n_rw, self.n_ow, self.n_nw)
        if any(int(s) != s or s <= 0 for s in sizes):
            raise ValueError(f"group sizes must be positive integers, got {sizes}")

    @property
    def split(self) -> bool:
        return self.n_lnw is not None or self.n_anw is not None

    @property
    def total(self) -> int:
        if self.split:
            return self.n_rw + self.n_ow + self.n_lnw + self.n_anw
        return self.n_rw + self.n_ow + self.n_nw

    @classmethod
    def from_counts(cls, counts: dict) -> "Restriction":
        if "NW" in counts:
            return cls(n_rw=counts["RW"], n_ow=counts["OW"], n_nw=counts["NW"])
        return cls(n_rw=counts["RW"], n_ow=counts["OW"], n_lnw=counts["LNW"], n_anw=counts["ANW"])

    def weights(self) -> dict[str, float]:
        """Coefficients of the linear form that must vanish."""
        w = {"NIRW": float(self.total), ELIMINATED: float(self.n_ow)}
        if self.split:
            w["NIRW_x_LNW"] = float(self.n_lnw)
            w["NIRW_x_ANW"] = float(self.n_anw)
        else:
            w["NIRW_x_NW"] = float(self.n_nw)
        return w

    def vector(self, names) -> np.ndarray:
        names = list(names)
        a = np.zeros(len(names))
        for name, value in self.weights().items():
            a[names.index(name)] = value
        return a

    def residual(self, beta, names) -> float:
        """Value of the restricted linear form at ``beta``."""
        beta = np.asarray(beta, dtype=float)
        return float(sum(v * beta[list(names).index(k)] for k, v in self.weights().items()))

    def solve(self, values: dict[str, float]) -> float:
        """Old World interaction implied by the other NIRW coefficients."""
        acc = self.total * values["NIRW"]
        if self.split:
            acc += self.n_lnw * values["NIRW_x_LNW"] + self.n_anw * values["NIRW_x_ANW"]
        else:
            acc += self.n_nw * values["NIRW_x_NW"]
        return -acc / self.n_ow


def canonical_names(split: bool) -> tuple[str, ...]:
    from ..features import BASE_REGRESSORS, SPLIT_REGRESSORS

    return ("const",) + (SPLIT_REGRESSORS if split else BASE_REGRESSORS)


def expand_restricted(theta_free, restriction: Restriction, names=None) -> np.ndarray:
    """Reinsert the eliminated coefficient into a reduced parameter vector.

    ``names`` lists the full coefficient vector (intercept first); entries of
    ``theta_free`` past the coefficients (the log-sigmas) pass through.
    """
    if names is None:
        names = canonical_names(restriction.split)
    names = list(names)
    k = names.index(ELIMINATED)
    free = np.asarray(theta_free, dtype=float)
    if len(free) < len(names) - 1:
        raise ValueError(f"reduced vector has {len(free)} entries, need at least {len(names) - 1}")
    full = np.insert(free, k, 0.0)
    values = {n: full[names.index(n)] for n in restriction.weights() if n != ELIMINATED}
    full[k] = restriction.solve(values)
    return full


def reduction_matrix(restriction: Restriction, names, n_extra: int = 0) -> np.ndarray:
    """Linear map ``T`` with ``theta_full = T @ theta_free``."""
    names = list(names)
    p = len(names) + n_extra
    k = names.index(ELIMINATED)
    T = np.zeros((p, p - 1))
    cols = [j for j in range(p) if j != k]
    for c, j in enumerate(cols):
        T[j, c] = 1.0
    for name, w in restriction.weights().items():
        if name == ELIMINATED:
            continue
        j = names.index(name)
        T[k, cols.index(j)] = -w / restriction.n_ow
    return T
