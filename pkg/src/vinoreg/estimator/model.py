"""Model configuration and fitted-result containers."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from ..features import Measure


class ConvergenceError(RuntimeError):
    """No start reached the gradient tolerance within ``max_iter``."""

    def __init__(self, message: str, loglik_trace=()):
        super().__init__(message)
        self.loglik_trace = tuple(loglik_trace)


class NumericalOverflowError(FloatingPointError):
    def __init__(self, message: str, country_id=None):
        super().__init__(message)
        self.country_id = country_id


@dataclass(frozen=True)
class ModelSpec:
    """Settings of one censored random-effects fit.

    ``restriction_penalty`` switches from eliminating the Old World
    interaction to a quadratic penalty of that weight on the restriction, a
    cross-check route whose restriction residual shrinks only as 1/weight.  ``random_effects=False`` pins the random-effect
    standard deviation at zero (pooled censored regression).  ``adaptive``
    centres and scales the quadrature rule on each country's posterior mode.
    """

    measure: Measure = Measure.VOLUME
    split: bool = False
    restriction_on: bool = True
    quad_nodes: int = 12
    lower_limit: float | None = 0.0
    upper_limit: float | None = None
    max_iter: int = 500
    grad_tol: float = 1e-6
    seed_starts: int = 5
    random_effects: bool = True
    adaptive: bool = True
    restriction_penalty: float | None = None
    start_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "measure", Measure.parse(self.measure))
        if int(self.quad_nodes) != self.quad_nodes or not 4 <= self.quad_nodes <= 100:
            raise ValueError(f"quad_nodes must be an integer in 4..100, got {self.quad_nodes}")
        if (self.lower_limit is not None and self.upper_limit is not None
                and not self.lower_limit < self.upper_limit):
            raise ValueError("lower_limit must be below upper_limit")
        if self.max_iter < 1 or self.seed_starts < 1:
            raise ValueError("max_iter and seed_starts must be positive")
        if self.grad_tol <= 0:
            raise ValueError("grad_tol must be positive")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["measure"] = self.measure.value
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ModelSpec":
        return cls(**d)

    def replace(self, **changes) -> "ModelSpec":
        return replace(self, **changes)


def _floats(a):
    return None if a is None else [None if not math.isfinite(v) else float(v) for v in np.ravel(a)]


def _array(a, shape=None):
    if a is None:
        return None
    out = np.array([np.nan if v is None else v for v in a], dtype=float)
    return out.reshape(shape) if shape is not None else out


@dataclass
class FitResult:
    """Estimates of one censored random-effects regression.

    ``beta`` starts with the intercept and follows ``names``.  ``cov`` is the
    covariance of ``beta``; ``theta`` is the full internal parameter vector
    ``(beta, log sigma_alpha, log sigma_eps)`` at the optimum.
    """

    names: tuple[str, ...]
    beta: np.ndarray
    se: np.ndarray
    sigma_alpha: float
    sigma_eps: float
    loglik: float
    converged: bool
    iterations: int
    gradient_norm: float
    n_censored: int
    n_obs: int = 0
    n_countries: int = 0
    cov: np.ndarray | None = None
    se_sigma_alpha: float = float("nan")
    se_sigma_eps: float = float("nan")
    spec: ModelSpec = field(default_factory=ModelSpec)
    theta: np.ndarray | None = None
    flagged: tuple[str, ...] = ()
    loglik_trace: tuple[float, ...] = ()
    restriction_residual: float | None = None

    def __post_init__(self):
        self.names = tuple(self.names)
        self.beta = np.asarray(self.beta, dtype=float)
        self.se = np.asarray(self.se, dtype=float)

    def index(self, name: str) -> int:
        return self.names.index(name)

    def coef(self, name: str) -> float:
        return float(self.beta[self.index(name)])

    def stderr(self, name: str) -> float:
        return float(self.se[self.index(name)])

    def pvalues(self) -> np.ndarray:
        """Two-sided normal-approximation p-values of the coefficients."""
        from scipy.stats import norm

        with np.errstate(divide="ignore", invalid="ignore"):
            z = np.abs(self.beta / self.se)
        p = 2.0 * norm.sf(z)
        return np.where(np.isfinite(p), p, np.nan)

    def to_dict(self) -> dict:
        return {
            "spec": self.spec.to_dict(),
            "names": list(self.names),
            "beta": _floats(self.beta),
            "se": _floats(self.se),
            "cov": None if self.cov is None else [_floats(row) for row in self.cov],
            "sigma_alpha": self.sigma_alpha,
            "sigma_eps": self.sigma_eps,
            "se_sigma_alpha": _floats([self.se_sigma_alpha])[0],
            "se_sigma_eps": _floats([self.se_sigma_eps])[0],
            "loglik": self.loglik,
            "n_obs": self.n_obs,
            "n_countries": self.n_countries,
            "n_censored": self.n_censored,
            "restriction_residual": self.restriction_residual,
            "convergence": {
                "converged": self.converged,
                "iterations": self.iterations,
                "gradient_norm": self.gradient_norm,
                "loglik_trace": list(self.loglik_trace),
                "flagged": list(self.flagged),
            },
            "theta": _floats(self.theta),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FitResult":
        conv = d.get("convergence", {})
        k = len(d["names"])
        nan = float("nan")
        return cls(
            names=tuple(d["names"]),
            beta=_array(d["beta"]),
            se=_array(d["se"]),
            cov=None if d.get("cov") is None else np.array(
                [_array(row) for row in d["cov"]]).reshape(k, k),
            sigma_alpha=d["sigma_alpha"],
            sigma_eps=d["sigma_eps"],
            se_sigma_alpha=nan if d.get("se_sigma_alpha") is None else d["se_sigma_alpha"],
            se_sigma_eps=nan if d.get("se_sigma_eps") is None else d["se_sigma_eps"],
            loglik=d["loglik"],
            converged=conv.get("converged", False),
            iterations=conv.get("iterations", 0),
            gradient_norm=conv.get("gradient_norm", nan),
            loglik_trace=tuple(conv.get("loglik_trace", ())),
            flagged=tuple(conv.get("flagged", ())),
            n_censored=d.get("n_censored", 0),
            n_obs=d.get("n_obs", 0),
            n_countries=d.get("n_countries", 0),
            restriction_residual=d.get("restriction_residual"),
            spec=ModelSpec.from_dict(d["spec"]) if "spec" in d else ModelSpec(),
            theta=_array(d.get("theta")),
        )

    def to_json(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2)
            fh.write("\n")

    @classmethod
    def from_json(cls, path) -> "FitResult":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))
