"""
Log-likelihood of the censored regression with a Gaussian country effect.

For country ``i`` the contribution is

    log  integral  prod_t f(y_it | x_it b + a)  phi(a; 0, s_a^2)  da

where ``f`` is the normal density for interior observations and the normal
mass beyond the limit for censored ones.  The integral is evaluated by
Gauss-Hermite quadrature, by default re-centred on each country's posterior
mode (adaptive quadrature).  Countries with censored rows are integrated
by parts first when the effect's conditional spread is not small next to
``sigma_eps`` (see ``_by_parts``).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import log_ndtr, logsumexp

from .model import ModelSpec, NumericalOverflowError
from .quadrature import gauss_hermite

LOG_2PI = np.log(2.0 * np.pi)
ROOT2 = np.sqrt(2.0)
# countries with censored rows switch to the integrated-by-parts rule once
# the effect's sd given the interior rows reaches this multiple of sigma_eps
BY_PARTS_RATIO = 0.75


@dataclass(frozen=True)
class PanelArrays:
    """Design reshaped to (country, period) blocks, padded with ``mask``."""

    y: np.ndarray
    X: np.ndarray
    mask: np.ndarray
    lo: np.ndarray
    hi: np.ndarray
    country_ids: np.ndarray
    lower: float | None
    upper: float | None

    @property
    def n_coef(self) -> int:
        return self.X.shape[2]

    @property
    def n_censored(self) -> int:
        return int(((self.lo | self.hi) & self.mask).sum())

    @classmethod
    def from_design(cls, design, lower=0.0, upper=None) -> "PanelArrays":
        ids, inverse = np.unique(np.asarray(design.country_ids).astype(str), return_inverse=True)
        counts = np.bincount(inverse, minlength=len(ids))
        order = np.lexsort((np.asarray(design.period_index), inverse))
        n, t_max = len(ids), counts.max()
        k = design.X.shape[1] + 1
        y = np.zeros((n, t_max))
        X = np.zeros((n, t_max, k))
        mask = np.zeros((n, t_max), dtype=bool)
        slot = np.zeros(len(order), dtype=int)
        seen = np.zeros(n, dtype=int)
        for r in order:
            slot[r] = seen[inverse[r]]
            seen[inverse[r]] += 1
        y[inverse, slot] = design.y
        X[inverse, slot, 0] = 1.0
        X[inverse, slot, 1:] = design.X
        mask[inverse, slot] = True
        lo = mask & (y <= lower) if lower is not None else np.zeros_like(mask)
        hi = mask & (y >= upper) if upper is not None else np.zeros_like(mask)
        if lower is not None and upper is not None and (lo & hi).any():
            raise ValueError("an observation sits at both limits")
        return cls(y, X, mask, lo, hi, ids, lower, upper)

    def row(self, i: int) -> "PanelArrays":
        """The single-country block ``i``."""
        sl = slice(i, i + 1)
        return PanelArrays(self.y[sl], self.X[sl], self.mask[sl], self.lo[sl], self.hi[sl],
                           self.country_ids[sl], self.lower, self.upper)


def _terms(y, mu, sigma, lo, hi, lower, upper, mask, curvature=False):
    """Per-observation log f and its derivatives in the index and log sigma."""
    z = (y - mu) / sigma
    logf = -0.5 * LOG_2PI - np.log(sigma) - 0.5 * z * z
    dmu = z / sigma
    dls = z * z - 1.0
    d2 = np.full_like(z, -1.0 / sigma**2) if curvature else None
    if lo.any():
        c = (lower - mu) / sigma
        lc = log_ndtr(c)
        lam = np.exp(-0.5 * c * c - 0.5 * LOG_2PI - lc)
        logf = np.where(lo, lc, logf)
        dmu = np.where(lo, -lam / sigma, dmu)
        dls = np.where(lo, -lam * c, dls)
        if curvature:
            d2 = np.where(lo, -lam * (c + lam) / sigma**2, d2)
    if hi.any():
        u = (mu - upper) / sigma
        lu = log_ndtr(u)
        lam = np.exp(-0.5 * u * u - 0.5 * LOG_2PI - lu)
        logf = np.where(hi, lu, logf)
        dmu = np.where(hi, lam / sigma, dmu)
        dls = np.where(hi, -lam * u, dls)
        if curvature:
            d2 = np.where(hi, -lam * (u + lam) / sigma**2, d2)
    logf = np.where(mask, logf, 0.0)
    dmu = np.where(mask, dmu, 0.0)
    dls = np.where(mask, dls, 0.0)
    if curvature:
        d2 = np.where(mask, d2, 0.0)
    return logf, dmu, dls, d2


def _posterior_mode(data: PanelArrays, mu, s_eps, s_alpha, max_iter=100):
    """Mode and curvature scale of each country's effect posterior (Newton)."""
    m = data.mask
    interior = m & ~data.lo & ~data.hi
    resid = np.where(interior, data.y - mu, 0.0).sum(axis=1)
    alpha = resid / (interior.sum(axis=1) + (s_eps / s_alpha) ** 2)
    prec = 1.0 / s_alpha**2

    def evaluate(a):
        logf, dmu, _, d2 = _terms(data.y, mu + a[:, None], s_eps, data.lo, data.hi,
                                  data.lower, data.upper, m, curvature=True)
        h = logf.sum(axis=1) - 0.5 * prec * a * a
        g = dmu.sum(axis=1) - prec * a
        H = d2.sum(axis=1) - prec
        return h, g, H

    h, g, H = evaluate(alpha)
    for _ in range(max_iter):
        step = -g / H
        scale = 1.0 / np.sqrt(-H)
        if np.all(np.abs(step) <= 1e-10 * scale):
            break
        trial = alpha + step
        h_new, g_new, H_new = evaluate(trial)
        # absolute floor: h near 0 comes from cancelling O(1) terms and keeps their rounding
        slack = 1e-12 * (np.abs(h) + 1.0)
        worse = h_new < h - slack
        halvings = 0
        while worse.any() and halvings < 40:
            step = np.where(worse, 0.5 * step, step)
            trial = alpha + step
            h_new, g_new, H_new = evaluate(trial)
            worse = h_new < h - slack
            halvings += 1
        alpha, h, g, H = trial, h_new, g_new, H_new
    return alpha, 1.0 / np.sqrt(-H)


def _on_rule(data: "PanelArrays", mu, a, log_q, s_alpha, s_eps, gradient):
    """Integrate the country likelihood on per-country nodes ``a`` (n, q).

    ``log_q`` holds the log quadrature weights for integrals against ``da``;
    the prior density of the effect is added here.  Scores are posterior
    averages at each node.
    """
    m = data.mask
    log_w = log_q - 0.5 * LOG_2PI - np.log(s_alpha) - 0.5 * (a / s_alpha) ** 2
    logf, dmu, dls, _ = _terms(
        data.y[:, :, None], mu[:, :, None] + a[:, None, :], s_eps,
        data.lo[:, :, None], data.hi[:, :, None], data.lower, data.upper, m[:, :, None],
    )
    lj = log_w + logf.sum(axis=1)
    ll = logsumexp(lj, axis=1)
    if not gradient:
        return ll, None
    post = np.exp(lj - ll[:, None])
    g_mu = np.einsum("ntq,nq->nt", dmu, post)
    g_eps = np.einsum("ntq,nq->n", dls, post)
    g_alpha = np.sum(post * ((a / s_alpha) ** 2 - 1.0), axis=1)
    return ll, (g_mu, g_alpha, g_eps)


BOX_DROP = 50.0
BOX_MAX_POINTS = 200_000


def _box_rule(one: "PanelArrays", mu, mode, scale, s_alpha, s_eps, width):
    """Trapezoid nodes for one country, spanning the posterior down to e**-50.

    The integrand is log-concave, so walking out from the mode until the log
    integrand has fallen by ``BOX_DROP`` brackets all of its mass; a spacing
    of half the narrowest feature width makes the rule spectrally accurate.
    """
    def log_g(a):
        a = np.atleast_1d(np.asarray(a, dtype=float))
        logf, _, _, _ = _terms(one.y[:, :, None], mu[:, :, None] + a[None, None, :], s_eps,
                               one.lo[:, :, None], one.hi[:, :, None], one.lower, one.upper,
                               one.mask[:, :, None])
        return logf.sum(axis=1)[0] - 0.5 * (a / s_alpha) ** 2

    top = log_g(mode)[0]
    ends = []
    for direction in (-1.0, 1.0):
        step = max(scale, width)
        while log_g(mode + direction * step)[0] > top - BOX_DROP:
            step *= 2.0
        ends.append(mode + direction * step)
    h = 0.5 * width
    n = int(min(BOX_MAX_POINTS, np.ceil((ends[1] - ends[0]) / h) + 1))
    a = np.linspace(ends[0], ends[1], n)
    log_q = np.full(n, np.log(a[1] - a[0]))
    return a[None, :], log_q[None, :]


def _min_terms(w, m, mask, s_eps):
    """Log density of ``W = min_t (m_t - eps_t)`` at ``w`` with its pieces.

    ``w`` is (n, q), ``m`` and ``mask`` are (n, t).  Returns log f_W, the
    softmax weights of the per-row hazards, z, lambda and the first and
    second derivatives of log f_W in ``w``.
    """
    z = (m[:, :, None] - w[:, None, :]) / s_eps
    lc = log_ndtr(z)
    log_lam = -0.5 * z * z - 0.5 * LOG_2PI - lc
    lam = np.exp(log_lam)
    mk = mask[:, :, None]
    log_lam = np.where(mk, log_lam, -np.inf)
    log_a = logsumexp(log_lam, axis=1)
    soft = np.exp(log_lam - log_a[:, None, :])
    a = np.exp(log_a)
    zl = z + lam
    b_a = np.sum(soft * zl, axis=1)
    c_a = np.sum(soft * (1.0 - zl * (z + 2.0 * lam)), axis=1)
    logf = np.sum(np.where(mk, lc, 0.0), axis=1) + log_a - np.log(s_eps)
    d1 = (b_a - a) / s_eps
    d2 = -(a * b_a + c_a + b_a * b_a) / s_eps**2
    return logf, soft, z, lam, d1, d2


def _censored_block(m, mask, s_alpha, s_eps, nodes, weights, gradient):
    """``log E_a[prod_t Phi((m_t - a)/s_eps)]`` for ``a ~ N(0, s_alpha^2)``.

    Integrating by parts turns the expectation into  E_W[Phi(W / s_alpha)]
    for the minimum ``W`` of  m_t - eps_t.  The new integrand is a bump of
    width ~s_eps instead of a Gaussian cut by a sharp step, which adaptive
    Gauss-Hermite handles far better once s_alpha is not small next to
    s_eps.  ``s_alpha`` holds one value per row of ``m``.

    The gradient is ``(d/d m_t, d/d log s_alpha, d/d log s_eps)``.
    """
    s_alpha = np.asarray(s_alpha, dtype=float)[:, None]

    def log_q(w):
        u = w / s_alpha
        lu = log_ndtr(u)
        lam_u = np.exp(-0.5 * u * u - 0.5 * LOG_2PI - lu)
        logf, soft, z, lam, d1, d2 = _min_terms(w, m, mask, s_eps)
        h = lu + logf
        g = lam_u / s_alpha + d1
        H = -lam_u * (u + lam_u) / s_alpha**2 + d2
        return h, g, H, (u, lam_u, soft, z, lam)

    big = 1e300
    w = np.where(mask, m, big).min(axis=1)[:, None]
    w = np.where(s_alpha < s_eps, np.minimum(w, 0.0), w)
    h, g, H, _ = log_q(w)
    for _ in range(100):
        step = np.where(H < 0, -g / np.where(H < 0, H, -1.0), np.sign(g) * s_eps)
        if np.all(np.abs(step) <= 1e-10 * s_eps):
            break
        h_new, g_new, H_new, _ = log_q(w + step)
        worse = ~(h_new >= h - 1e-12 * np.abs(h))
        halvings = 0
        while worse.any() and halvings < 40:
            step = np.where(worse, 0.5 * step, step)
            h_new, g_new, H_new, _ = log_q(w + step)
            worse = ~(h_new >= h - 1e-12 * np.abs(h))
            halvings += 1
        w, h, g, H = w + step, h_new, g_new, H_new
    scale = 1.0 / np.sqrt(-np.minimum(H, -1e-300 / s_eps**2))
    at = w + ROOT2 * scale * nodes[None, :]
    hq, _, _, (u, lam_u, soft, z, lam) = log_q(at)
    lj = (np.log(weights) + nodes**2)[None, :] + np.log(ROOT2 * scale) + hq
    ll = logsumexp(lj, axis=1)
    if not gradient:
        return ll, None
    post = np.exp(lj - ll[:, None])
    mk = mask[:, :, None]
    d_m = np.where(mk, lam - soft * (z + lam), 0.0) / s_eps
    g_m = np.einsum("ntq,nq->nt", d_m, post)
    zl = z + lam
    d_eps = (-np.sum(np.where(mk, lam * z, 0.0), axis=1)
             + np.sum(soft * z * zl, axis=1) - 1.0)
    g_eps = np.sum(post * d_eps, axis=1)
    g_alpha = np.sum(post * (-lam_u * u), axis=1)
    return ll, (g_m, g_alpha, g_eps)


def _by_parts(y, mu, interior, cens, lower, s_alpha, s_eps, nodes, weights, gradient):
    """Countries whose censored rows all sit at the lower limit, by parts.

    The interior rows and the prior are conjugate: together they are a
    constant ``K`` times the normal density of the effect with mean ``a*``
    and sd ``s``.  What is left is the censored block of
    ``_censored_block`` at ``m_t - a*`` with ``s`` in place of ``s_alpha``.
    Returns the log-likelihood and the (mu, log s_alpha, log s_eps) scores.
    """
    v_eps = s_eps**2
    n_int = interior.sum(axis=1)
    r = np.where(interior, y - mu, 0.0)
    s2 = 1.0 / (1.0 / s_alpha**2 + n_int / v_eps)
    s = np.sqrt(s2)
    a_star = s2 * r.sum(axis=1) / v_eps
    q = np.sum(r * r, axis=1)
    log_k = (-0.5 * n_int * LOG_2PI - n_int * np.log(s_eps) + np.log(s / s_alpha)
             - 0.5 * q / v_eps + 0.5 * a_star**2 / s2)
    m = np.where(cens, lower - mu - a_star[:, None], 0.0)
    ll_f, g_f = _censored_block(m, cens, s, s_eps, nodes, weights, gradient)
    ll = log_k + ll_f
    if not gradient:
        return ll, None
    f_m, f_s, f_eps = g_f
    total = f_m.sum(axis=1)
    # a* moves with the interior indices and with both sigmas
    ratio_a = s2 / s_alpha**2
    ratio_e = n_int * s2 / v_eps
    g_mu = np.where(cens, -f_m, 0.0)
    g_mu = g_mu + np.where(interior, ((r - a_star[:, None]) / v_eps
                                      + (s2 / v_eps * total)[:, None]), 0.0)
    g_alpha = ratio_a - 1.0 + a_star**2 / s_alpha**2 + f_s * ratio_a - total * 2.0 * a_star * ratio_a
    g_eps = (-n_int + ratio_e + q / v_eps + n_int * a_star**2 / v_eps - 2.0 * a_star**2 / s2
             + f_eps + f_s * ratio_e - total * a_star * (2.0 * ratio_e - 2.0))
    return ll, (g_mu, g_alpha, g_eps)


def country_loglik(theta, data: PanelArrays, spec: ModelSpec, gradient: bool = False):
    """Per-country log-likelihood (and optionally the summed gradient).

    ``theta`` is ``(beta, log sigma_alpha, log sigma_eps)``.  The gradient is
    the quadrature estimate of the posterior mean score, which matches the
    derivative of the integral up to quadrature error.

    Raises
    ------
    NumericalOverflowError
        If some country's term is not finite.
    """
    # non-finite terms are reported below with the country id
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        ll, grad = _country_loglik(theta, data, spec, gradient)
    bad = ~np.isfinite(ll)
    if bad.any():
        cid = data.country_ids[np.argmax(bad)]
        raise NumericalOverflowError(f"non-finite log-likelihood for country {cid}", cid)
    return (ll, grad) if gradient else ll


def _country_loglik(theta, data: PanelArrays, spec: ModelSpec, gradient: bool):
    theta = np.asarray(theta, dtype=float)
    k = data.n_coef
    beta = theta[:k]
    s_alpha = np.exp(theta[k])
    s_eps = np.exp(theta[k + 1])
    mu = data.X @ beta
    m = data.mask
    lo, hi = data.lo, data.hi
    grad = None

    if not spec.random_effects or s_alpha == 0.0:
        logf, dmu, dls, _ = _terms(data.y, mu, s_eps, lo, hi, data.lower, data.upper, m)
        ll = logf.sum(axis=1)
        if gradient:
            grad = np.concatenate([
                np.einsum("nt,ntk->k", dmu, data.X), [0.0], [dls.sum()],
            ])
    else:
        nodes, weights = gauss_hermite(spec.quad_nodes)
        if spec.adaptive:
            mode, scale = _posterior_mode(data, mu, s_eps, s_alpha)
            a = mode[:, None] + ROOT2 * scale[:, None] * nodes[None, :]
            log_q = (np.log(weights) + nodes**2)[None, :] + np.log(ROOT2 * scale)[:, None]
            ll, g_r = _on_rule(data, mu, a, log_q, s_alpha, s_eps, gradient)
            if gradient:
                g_mu, g_alpha, g_eps = g_r
        else:
            a = np.broadcast_to(ROOT2 * s_alpha * nodes, (len(mu), len(nodes)))
            log_w = np.broadcast_to(np.log(weights) - 0.5 * np.log(np.pi), a.shape)
            logf, dmu, dls, _ = _terms(
                data.y[:, :, None], mu[:, :, None] + a[:, None, :], s_eps,
                lo[:, :, None], hi[:, :, None], data.lower, data.upper, m[:, :, None],
            )
            lj = log_w + logf.sum(axis=1)
            ll = logsumexp(lj, axis=1)
            if gradient:
                post = np.exp(lj - ll[:, None])
                g_mu = np.einsum("ntq,nq->nt", dmu, post)
                g_eps = np.einsum("ntq,nq->n", dls, post)
                g_alpha = np.einsum("ntq,nq,nq->n", dmu, post, a)

        if spec.adaptive and (lo.any() or hi.any()):
            interior = m & ~lo & ~hi
            n_int = interior.sum(axis=1)
            s_post = 1.0 / np.sqrt(1.0 / s_alpha**2 + n_int / s_eps**2)
            wide = s_post >= BY_PARTS_RATIO * s_eps
            # the transformed integrand is skewed, so it gets a finer rule
            bp_nodes, bp_weights = gauss_hermite(min(100, 2 * spec.quad_nodes))
            # upper-censored countries are the mirror image (y, mu, a) -> -(y, mu, a)
            for cens, other, sign, limit in ((lo, hi, 1.0, data.lower), (hi, lo, -1.0, data.upper)):
                route = cens.any(axis=1) & ~other.any(axis=1) & wide
                if not route.any():
                    continue
                sub = np.flatnonzero(route)
                ll_r, g_r = _by_parts(sign * data.y[sub], sign * mu[sub], interior[sub], cens[sub],
                                      sign * limit, s_alpha, s_eps, bp_nodes, bp_weights, gradient)
                ll = ll.copy()
                ll[sub] = ll_r
                if gradient:
                    g_mu[sub] = sign * g_r[0]
                    g_alpha[sub], g_eps[sub] = g_r[1], g_r[2]
            # rows at both limits: the effect is boxed in, so the curvature at the
            # mode says nothing about the width; use a dense rule instead
            for i in np.flatnonzero(lo.any(axis=1) & hi.any(axis=1) & wide):
                one = data.row(i)
                a_i, log_q = _box_rule(one, mu[i:i + 1], mode[i], scale[i], s_alpha, s_eps,
                                       min(s_eps, s_post[i]))
                ll_i, g_i = _on_rule(one, mu[i:i + 1], a_i, log_q, s_alpha, s_eps, gradient)
                ll = ll.copy()
                ll[i] = ll_i[0]
                if gradient:
                    g_mu[i], g_alpha[i], g_eps[i] = g_i[0][0], g_i[1][0], g_i[2][0]
        if gradient:
            grad = np.concatenate([
                np.einsum("nt,ntk->k", g_mu, data.X), [g_alpha.sum()], [g_eps.sum()],
            ])

    return ll, grad


def loglik(theta, design, spec: ModelSpec | None = None) -> float:
    """Total log-likelihood of ``design`` at the full parameter vector ``theta``."""
    spec = spec or ModelSpec()
    data = PanelArrays.from_design(design, spec.lower_limit, spec.upper_limit)
    return float(np.sum(country_loglik(theta, data, spec)))


def loglik_and_grad(theta, data: PanelArrays, spec: ModelSpec):
    ll, grad = country_loglik(theta, data, spec, gradient=True)
    return float(np.sum(ll)), grad


def quadrature_check(theta, design, spec: ModelSpec | None = None, factor: int = 2):
    """Per-country change in log-likelihood when the node count is multiplied.

    Returns ``(country_ids, difference)`` with ``difference`` the finer rule
    minus the configured one; large entries mark countries the rule does not
    resolve.
    """
    spec = spec or ModelSpec()
    fine = spec.replace(quad_nodes=min(100, spec.quad_nodes * factor))
    data = PanelArrays.from_design(design, spec.lower_limit, spec.upper_limit)
    diff = country_loglik(theta, data, fine) - country_loglik(theta, data, spec)
    return data.country_ids, diff
