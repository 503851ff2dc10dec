"""
Maximum-likelihood fitting and observed-information standard errors.

The optimiser works in a centred and scaled version of the reduced
parameter vector: ``theta = M @ psi`` where ``M`` folds together the
restriction (if eliminated), the pinned random-effect scale (pooled fits)
and a per-column standardisation of the reduced design.
"""

from __future__ import annotations

import warnings

import numpy as np
from scipy import optimize

from .likelihood import PanelArrays, country_loglik
from .model import ConvergenceError, FitResult, ModelSpec
from .restriction import ELIMINATED, Restriction, expand_restricted, reduction_matrix

EPS_CBRT = np.finfo(float).eps ** (1.0 / 3.0)


class HessianWarning(RuntimeWarning):
    """Observed information is not positive definite in some direction."""


def _names(design) -> tuple[str, ...]:
    return ("const",) + tuple(design.names)


def _check_spec(design, spec: ModelSpec) -> None:
    if bool(design.split) != bool(spec.split):
        raise ValueError(f"design split={design.split} but spec split={spec.split}")
    if design.measure is not spec.measure:
        raise ValueError(f"design measure {design.measure.value} but spec measure {spec.measure.value}")


class _Problem:
    def __init__(self, design, spec: ModelSpec):
        self.spec = spec
        self.names = _names(design)
        self.data = PanelArrays.from_design(design, spec.lower_limit, spec.upper_limit)
        k = len(self.names)
        self.k = k
        p = k + 2
        self.restriction = None
        if spec.restriction_on:
            self.restriction = Restriction.from_counts(design.group_counts)
        eliminate = self.restriction is not None and spec.restriction_penalty is None
        T = reduction_matrix(self.restriction, self.names, 2) if eliminate else np.eye(p)
        if not spec.random_effects:
            T = np.delete(T, -2, axis=1)
        self.eliminate = eliminate
        self.T = T
        n_free_beta = T.shape[1] - (2 if spec.random_effects else 1)

        # standardise the reduced design so the optimiser sees unit-scale columns
        m = self.data.mask
        X = self.data.X[m]
        Z = X @ T[:k, :n_free_beta]
        S = np.eye(T.shape[1])
        mean = Z.mean(axis=0)
        sd = Z.std(axis=0)
        for j in range(1, n_free_beta):
            if sd[j] > 0:
                S[j, j] = 1.0 / sd[j]
                S[0, j] = -mean[j] / sd[j]
        self.S = S
        self.M = T @ S
        self.a = None
        if self.restriction is not None and spec.restriction_penalty is not None:
            a = np.zeros(p)
            a[:k] = self.restriction.vector(self.names)
            self.a = self.M.T @ a
        self.n_free_beta = n_free_beta

    def theta(self, psi) -> np.ndarray:
        theta = self.M @ psi
        if self.eliminate:
            # recompute the eliminated entry from its closed form rather than the matrix product
            free = np.delete(theta, self.names.index(ELIMINATED))
            theta = expand_restricted(free, self.restriction, self.names)
        if not self.spec.random_effects:
            theta[-2] = -np.inf
        return theta

    def value_grad(self, psi):
        """Negative log-likelihood (plus penalty) and its gradient in ``psi``."""
        ll, g = country_loglik(self.theta(psi), self.data, self.spec, gradient=True)
        f = -float(np.sum(ll))
        grad = -(self.M.T @ g)
        if self.a is not None:
            r = self.a @ psi
            f += 0.5 * self.spec.restriction_penalty * r * r
            grad = grad + self.spec.restriction_penalty * r * self.a
        return f, grad

    def hessian(self, psi) -> np.ndarray:
        """Central-difference Hessian of the objective from analytic gradients."""
        n = len(psi)
        H = np.empty((n, n))
        for j in range(n):
            h = EPS_CBRT * max(1.0, abs(psi[j]))
            e = np.zeros(n)
            e[j] = h
            H[:, j] = (self.value_grad(psi + e)[1] - self.value_grad(psi - e)[1]) / (2.0 * h)
        return 0.5 * (H + H.T)

    def warm_start(self) -> np.ndarray:
        d = self.data
        interior = d.mask & ~d.lo & ~d.hi
        if not interior.any():
            raise ValueError("no uncensored observations to start from")
        Z = d.X[interior] @ self.M[: self.k, : self.n_free_beta]
        coef, *_ = np.linalg.lstsq(Z, d.y[interior], rcond=None)
        resid = d.y[interior] - Z @ coef
        s_eps = max(float(np.sqrt(np.mean(resid**2))), 1e-8 * max(1.0, float(np.abs(d.y).max())))
        tail = [np.log(0.5 * s_eps), np.log(s_eps)] if self.spec.random_effects else [np.log(s_eps)]
        return np.concatenate([coef, tail])

    def starts(self) -> list[np.ndarray]:
        psi0 = self.warm_start()
        out = [psi0]
        s_eps = np.exp(psi0[-1])
        for k in range(1, self.spec.seed_starts):
            rng = np.random.default_rng([self.spec.start_seed, k])
            step = np.empty_like(psi0)
            step[: self.n_free_beta] = 0.5 * s_eps * rng.standard_normal(self.n_free_beta)
            step[self.n_free_beta:] = 0.3 * rng.standard_normal(len(psi0) - self.n_free_beta)
            out.append(psi0 + step)
        return out


def _polish(problem: _Problem, psi, f, g, tol, max_steps=8):
    """Newton steps on the numerical Hessian; returns psi, f, g, steps taken."""
    steps = 0
    for _ in range(max_steps):
        if np.max(np.abs(g)) <= 1e-3 * tol:
            break
        H = problem.hessian(psi)
        try:
            L = np.linalg.cholesky(H)
        except np.linalg.LinAlgError:
            break
        delta = -np.linalg.solve(L.T, np.linalg.solve(L, g))
        accepted = False
        for _ in range(20):
            try:
                f_new, g_new = problem.value_grad(psi + delta)
            except FloatingPointError:
                f_new, g_new = np.inf, g
            if f_new <= f + 1e-12 * abs(f) or np.max(np.abs(g_new)) < np.max(np.abs(g)):
                accepted = np.isfinite(f_new)
                break
            delta = 0.5 * delta
        if not accepted:
            break
        psi, f, g = psi + delta, f_new, g_new
        steps += 1
    return psi, f, g, steps


def _optimise(problem: _Problem, psi0):
    spec = problem.spec
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        res = optimize.minimize(
            problem.value_grad, psi0, jac=True, method="BFGS",
            options={"maxiter": spec.max_iter, "gtol": spec.grad_tol},
        )
    psi, f = res.x, res.fun
    f, g = problem.value_grad(psi)
    psi, f, g, steps = _polish(problem, psi, f, g, spec.grad_tol)
    return psi, f, g, int(res.nit) + steps


def _information_cov(problem: _Problem, psi):
    """Covariance of theta from the observed information in psi-space."""
    H = problem.hessian(psi)
    w, V = np.linalg.eigh(H)
    good = w > 1e-9 * max(1.0, np.max(np.abs(w)))
    inv = (V[:, good] / w[good]) @ V[:, good].T
    cov = problem.M @ inv @ problem.M.T
    flagged = np.zeros(problem.M.shape[0], dtype=bool)
    if not good.all():
        proj = problem.M @ V[:, ~good]
        scale = np.linalg.norm(problem.M, axis=1)
        flagged = np.any(np.abs(proj) > 1e-6 * np.maximum(scale, 1e-300)[:, None], axis=1)
    return cov, flagged


def _result_from(problem: _Problem, psi, f, g, iterations, converged, cov, flagged, trace):
    spec, k, names = problem.spec, problem.k, problem.names
    theta = problem.theta(psi)
    beta = theta[:k]
    var = np.diag(cov).copy()
    var[flagged] = np.nan
    se_theta = np.sqrt(np.where(var >= 0, var, np.nan))
    flagged_names = [n for n, bad in zip(names, flagged[:k]) if bad]
    if flagged.any():
        warnings.warn(
            "observed information is singular or indefinite; "
            f"standard errors withheld for {', '.join(flagged_names) or 'the dispersion parameters'}",
            HessianWarning,
            stacklevel=3,
        )
    cov_beta = cov[:k, :k].copy()
    cov_beta[flagged[:k], :] = np.nan
    cov_beta[:, flagged[:k]] = np.nan
    s_alpha = float(np.exp(theta[k]))
    s_eps = float(np.exp(theta[k + 1]))
    ll = -f
    if problem.a is not None:
        r = problem.a @ psi
        ll += 0.5 * spec.restriction_penalty * r * r
    residual = problem.restriction.residual(beta, names) if problem.restriction else None
    return FitResult(
        names=names,
        beta=beta,
        se=se_theta[:k],
        cov=cov_beta,
        sigma_alpha=s_alpha,
        sigma_eps=s_eps,
        se_sigma_alpha=s_alpha * se_theta[k] if spec.random_effects else float("nan"),
        se_sigma_eps=s_eps * se_theta[k + 1],
        loglik=float(ll),
        converged=bool(converged),
        iterations=int(iterations),
        gradient_norm=float(np.max(np.abs(g))),
        n_censored=problem.data.n_censored,
        n_obs=int(problem.data.mask.sum()),
        n_countries=len(problem.data.country_ids),
        spec=spec,
        theta=theta,
        flagged=tuple(flagged_names),
        loglik_trace=tuple(trace),
        restriction_residual=residual,
    )


def fit(design, spec: ModelSpec | None = None) -> FitResult:
    """Fit the censored random-effects model by multi-start BFGS.

    Every start is finished with Newton steps on the numerical Hessian.  The
    best converged start wins; standard errors come from the observed
    information at that optimum.

    Raises
    ------
    ConvergenceError
        If no start reaches ``spec.grad_tol``.
    """
    spec = spec or ModelSpec()
    _check_spec(design, spec)
    problem = _Problem(design, spec)
    best = None
    trace = []
    for psi0 in problem.starts():
        try:
            psi, f, g, nit = _optimise(problem, psi0)
        except FloatingPointError:
            trace.append(float("nan"))
            continue
        trace.append(-f)
        ok = np.max(np.abs(g)) <= spec.grad_tol
        if ok and (best is None or f < best[1]):
            best = (psi, f, g, nit)
    if best is None:
        finite = [t for t in trace if np.isfinite(t)]
        raise ConvergenceError(
            f"no start converged within {spec.max_iter} iterations "
            f"(best log-likelihood {max(finite) if finite else float('nan'):.6g})",
            trace,
        )
    psi, f, g, nit = best
    cov, flagged = _information_cov(problem, psi)
    return _result_from(problem, psi, f, g, nit, True, cov, flagged, trace)


def _psi_from_theta(problem: _Problem, theta) -> np.ndarray:
    theta = np.asarray(theta, dtype=float).copy()
    if not problem.spec.random_effects:
        theta[-2] = 0.0
    psi, *_ = np.linalg.lstsq(problem.M, theta, rcond=None)
    return psi


def covariance(theta, design, spec: ModelSpec | None = None):
    """Covariance of the full parameter vector and a per-entry flag mask."""
    spec = spec or ModelSpec()
    problem = _Problem(design, spec)
    return _information_cov(problem, _psi_from_theta(problem, theta))


def standard_errors(result: FitResult, design, spec: ModelSpec | None = None) -> np.ndarray:
    """Standard errors of ``result.beta`` (NaN where the information is degenerate).

    The eliminated coefficient gets its error by the delta method through the
    linear restriction.
    """
    spec = spec or result.spec
    if not result.converged:
        raise ValueError("standard errors need a converged fit")
    cov, flagged = covariance(result.theta, design, spec)
    k = len(result.names)
    var = np.diag(cov)[:k].copy()
    var[flagged[:k]] = np.nan
    if flagged[:k].any():
        names = [n for n, bad in zip(result.names, flagged[:k]) if bad]
        warnings.warn(f"standard errors withheld for {', '.join(names)}", HessianWarning, stacklevel=2)
    return np.sqrt(np.where(var >= 0, var, np.nan))
