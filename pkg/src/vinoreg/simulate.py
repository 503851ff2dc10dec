"""
Synthetic panels with known parameters, a brute-force likelihood oracle and
a Monte-Carlo recovery harness.

Replication ``r`` of a run with master seed ``s`` draws its data from
``SeedSequence([s, r])``, so any subset of replications can be reproduced
(or run in parallel) independently.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import norm

from .estimator.fit import fit
from .estimator.model import ConvergenceError, ModelSpec, NumericalOverflowError
from .estimator.restriction import ELIMINATED, Restriction, canonical_names
from .features import DesignMatrix, Measure, dist_lat_3050

Z95 = norm.ppf(0.975)
ORACLE_MAX_COUNTRIES = 50
ORACLE_POINTS = 10_000
ORACLE_MAX_POINTS = 2_000_000


@dataclass(frozen=True)
class TrueParams:
    """Data-generating parameters; ``beta`` follows :func:`canonical_names`."""

    beta: tuple[float, ...]
    sigma_alpha: float
    sigma_eps: float
    n_rw: int
    n_ow: int
    n_nw: int | None = None
    n_lnw: int | None = None
    n_anw: int | None = None
    n_periods: int = 9
    nirw_range: tuple[float, float] = (0.1, 0.9)
    censor_rate_hint: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "beta", tuple(float(b) for b in self.beta))
        if len(self.beta) != len(self.names):
            raise ValueError(f"beta has {len(self.beta)} entries, expected {len(self.names)}")
        if not all(math.isfinite(b) for b in self.beta):
            raise ValueError("beta must be finite")
        if not (self.sigma_alpha >= 0 and self.sigma_eps >= 0):
            raise ValueError("need sigma_alpha >= 0 and sigma_eps >= 0")
        if self.n_periods < 1:
            raise ValueError("need at least one period")
        self.restriction  # validates the group sizes

    @property
    def split(self) -> bool:
        return self.n_lnw is not None or self.n_anw is not None

    @property
    def names(self) -> tuple[str, ...]:
        return canonical_names(self.split)

    @property
    def restriction(self) -> Restriction:
        return Restriction(self.n_rw, self.n_ow, self.n_nw, self.n_lnw, self.n_anw)

    @property
    def group_sizes(self) -> dict[str, int]:
        if self.split:
            return {"RW": self.n_rw, "OW": self.n_ow, "LNW": self.n_lnw, "ANW": self.n_anw}
        return {"RW": self.n_rw, "OW": self.n_ow, "NW": self.n_nw}

    @property
    def n_countries(self) -> int:
        return sum(self.group_sizes.values())

    def coef(self, name: str) -> float:
        return self.beta[self.names.index(name)]

    def restriction_residual(self) -> float:
        return self.restriction.residual(self.beta, self.names)

    def with_restriction(self) -> "TrueParams":
        """Copy whose Old World interaction satisfies the adding-up restriction."""
        beta = list(self.beta)
        values = {n: beta[self.names.index(n)] for n in self.restriction.weights() if n != ELIMINATED}
        beta[self.names.index(ELIMINATED)] = self.restriction.solve(values)
        return _replace(self, beta=tuple(beta))


def _replace(params: TrueParams, **changes) -> TrueParams:
    from dataclasses import replace

    return replace(params, **changes)


def canonical_params(n_countries: int = 200, gap: float = 0.05, sigma_alpha: float = 0.08,
                     sigma_eps: float = 0.08, n_periods: int = 9) -> TrueParams:
    """Reference design: study group proportions, NW-minus-OW NIRW gap ``gap``.

    The NIRW coefficients satisfy the adding-up restriction; about 40% of
    the simulated shares are censored at zero.
    """
    n_ow = max(1, round(n_countries * 12 / 47))
    n_nw = max(1, round(n_countries * 10 / 47))
    n_rw = n_countries - n_ow - n_nw
    coefs = {
        "const": -0.11, "NIRW": -0.10, "OW": 0.15, "NW": 0.06, "RMP": 0.005,
        "EU68-98": 0.03, "EURO99-05": 0.02, "CHRIST_RULER": 0.05, "MUSLIM_RULER": -0.08,
        "DISTLAT3050": -0.004, "AVERAGE_TEMP": 0.003, "QUINQ61-65": 0.01,
        "QUINQ61-65_x_OW": -0.02, "QUINQ61-65_x_RW": 0.02,
    }
    # NIRW_x_OW from the restriction once NIRW_x_NW = NIRW_x_OW + gap
    total = n_rw + n_ow + n_nw
    b4 = -(total * coefs["NIRW"] + n_nw * gap) / (n_ow + n_nw)
    coefs["NIRW_x_OW"] = b4
    coefs["NIRW_x_NW"] = b4 + gap
    names = canonical_names(False)
    return TrueParams(
        beta=tuple(coefs[n] for n in names), sigma_alpha=sigma_alpha, sigma_eps=sigma_eps,
        n_rw=n_rw, n_ow=n_ow, n_nw=n_nw, n_periods=n_periods, censor_rate_hint=0.4,
    ).with_restriction()


@dataclass(frozen=True)
class LatentRecord:
    alpha: np.ndarray
    eps: np.ndarray
    y_star: np.ndarray
    n_censored: int

    @property
    def censored_fraction(self) -> float:
        return self.n_censored / len(self.y_star)


_RULERS = ((1.0, 0.0), (0.0, 1.0), (0.0, 0.0), (0.5, 0.5))
_RULER_P = (0.5, 0.25, 0.15, 0.10)
_EU_YEARS = (1958, 1973, 1981, 1986, 1995)


def _window_years(first_year: int, start: int, end: int) -> int:
    return sum(start <= y <= end for y in range(first_year, first_year + 5))


def generate_design(params: TrueParams, seed) -> tuple[DesignMatrix, LatentRecord]:
    """Draw one synthetic panel from ``params`` (deterministic under ``seed``)."""
    rng = np.random.default_rng(seed)
    T = params.n_periods
    groups = [g for g, n in params.group_sizes.items() for _ in range(n)]
    N = len(groups)
    ids = np.array([f"{g}{k:04d}" for k, g in enumerate(groups)], dtype=object)
    g = np.array(groups)
    ow = (g == "OW").astype(float)
    rw = (g == "RW").astype(float)
    new_world = ~np.isin(g, ("OW", "RW"))
    t = np.arange(T)

    lo, hi = params.nirw_range
    nirw = lo + (hi - lo) * (t / max(T - 1, 1)) ** 1.2

    level = rng.uniform(2.0, 12.0, N)
    rmp = level[:, None] * (1.0 + 0.1 * t[None, :]) * np.exp(0.03 * rng.standard_normal((N, T)))

    member = np.where(g == "OW", rng.random(N) < 0.7, (g == "RW") & (rng.random(N) < 0.2))
    entry = rng.choice(_EU_YEARS, N)
    euro = member & (entry <= 1995) & (rng.random(N) < 0.8)
    euro_entry = np.where(rng.random(N) < 0.85, 1999, 2001)
    first = 1961 + 5 * t
    eu_y = np.array([[_window_years(f, max(1968, e), 1998) if m else 0 for f in first]
                     for m, e in zip(member, entry)])
    euro_y = np.array([[_window_years(f, e, 2005) if m else 0 for f in first]
                       for m, e in zip(euro, euro_entry)])

    kind = rng.choice(len(_RULERS), N, p=_RULER_P)
    # every ruler category appears among RW, or CHRIST + MUSLIM can equal the constant
    rw_rows = np.flatnonzero(g == "RW")
    if len(rw_rows) >= len(_RULERS):
        kind[rng.choice(rw_rows, len(_RULERS), replace=False)] = np.arange(len(_RULERS))
    ruler = np.array([_RULERS[k] for k in kind])
    ruler[g != "RW"] = (1.0, 0.0)
    lat = np.where(
        g == "OW", rng.uniform(36.0, 52.0, N),
        np.where(new_world, rng.choice((-1.0, 1.0), N) * rng.uniform(28.0, 45.0, N),
                 rng.uniform(-40.0, 65.0, N)),
    )
    temp = 26.0 - 0.35 * np.abs(lat) + 1.5 * rng.standard_normal(N)
    q = (t == 0).astype(float)

    def const_t(v):
        return np.repeat(np.asarray(v, dtype=float)[:, None], T, axis=1)

    def const_i(v):
        return np.repeat(np.asarray(v, dtype=float)[None, :], N, axis=0)

    cols = {
        "NIRW": const_i(nirw),
        "OW": const_t(ow),
        "NIRW_x_OW": const_i(nirw) * const_t(ow),
        "RMP": rmp,
        "EU68-98": eu_y / 5.0,
        "EURO99-05": euro_y / 5.0,
        "CHRIST_RULER": const_t(ruler[:, 0]),
        "MUSLIM_RULER": const_t(ruler[:, 1]),
        "DISTLAT3050": const_t([dist_lat_3050(v) for v in lat]),
        "AVERAGE_TEMP": const_t(temp),
        "QUINQ61-65": const_i(q),
        "QUINQ61-65_x_OW": const_i(q) * const_t(ow),
        "QUINQ61-65_x_RW": const_i(q) * const_t(rw),
    }
    for label in ("NW",) if not params.split else ("LNW", "ANW"):
        d = const_t((g == label) | ((label == "NW") & new_world))
        cols[label] = d
        cols[f"NIRW_x_{label}"] = const_i(nirw) * d

    names = params.names[1:]
    X = np.column_stack([cols[n].reshape(-1) for n in names])
    beta = np.asarray(params.beta)
    alpha = params.sigma_alpha * rng.standard_normal(N)
    eps = params.sigma_eps * rng.standard_normal((N, T))
    y_star = beta[0] + X @ beta[1:] + np.repeat(alpha, T) + eps.reshape(-1)
    y = np.maximum(y_star, 0.0)
    design = DesignMatrix(
        y=y, X=X, names=names, country_ids=np.repeat(ids, T), period_index=np.tile(t, N),
        measure=Measure.VOLUME, split=params.split, group_counts=dict(params.group_sizes),
    )
    return design, LatentRecord(alpha, eps, y_star, int(np.sum(y_star <= 0.0)))


def oracle_loglik(theta, design: DesignMatrix, lower: float | None = 0.0,
                  upper: float | None = None) -> float:
    """Censored random-effects log-likelihood by dense trapezoid integration.

    Written independently of the estimator: row-wise scipy densities and a
    trapezoid rule of at least 10**4 points on [-w, w].  The window spans
    the prior (``8 sigma_alpha``) and reaches every row's peak: the observed
    value for interior rows, the limit for censored ones, plus
    ``8 sigma_eps``.  The grid is refined so its spacing stays below a tenth
    of the narrowest width in the integrand.
    """
    ids = np.asarray(design.country_ids).astype(str)
    countries = list(dict.fromkeys(ids))
    if len(countries) > ORACLE_MAX_COUNTRIES:
        raise ValueError(f"oracle is limited to {ORACLE_MAX_COUNTRIES} countries, got {len(countries)}")
    theta = np.asarray(theta, dtype=float)
    k = design.X.shape[1] + 1
    beta = theta[:k]
    s_alpha = math.exp(theta[k])
    s_eps = math.exp(theta[k + 1])
    index = beta[0] + design.X @ beta[1:]

    def row_terms(y, mu):
        if lower is not None and y <= lower:
            return norm.logcdf((lower - mu) / s_eps)
        if upper is not None and y >= upper:
            return norm.logsf((upper - mu) / s_eps)
        return norm.logpdf(y, loc=mu, scale=s_eps)

    total = 0.0
    if s_alpha == 0.0:
        for y, mu in zip(design.y, index):
            total += float(row_terms(y, mu))
        return total
    for c in countries:
        rows = np.flatnonzero(ids == c)
        targets = []
        for r in rows:
            y = design.y[r]
            if lower is not None and y <= lower:
                y = lower
            elif upper is not None and y >= upper:
                y = upper
            targets.append(abs(y - index[r]))
        half = 8.0 * s_alpha + max(targets) + 8.0 * s_eps
        # a wide window must not leave the narrowest feature under-resolved
        narrow = min(s_alpha, s_eps / math.sqrt(len(rows)))
        points = max(ORACLE_POINTS, min(ORACLE_MAX_POINTS, math.ceil(20.0 * half / narrow)))
        grid = np.linspace(-half, half, points)
        log_g = norm.logpdf(grid, loc=0.0, scale=s_alpha)
        for r in rows:
            log_g = log_g + row_terms(design.y[r], index[r] + grid)
        top = log_g.max()
        total += top + math.log(np.trapezoid(np.exp(log_g - top), grid))
    return total


# ---------------------------------------------------------------------------
# Monte Carlo
# ---------------------------------------------------------------------------

def replication_seed(seed: int, replication: int) -> int:
    return int(np.random.SeedSequence([seed, replication]).generate_state(1, dtype=np.uint64)[0])


@dataclass
class MonteCarloReport:
    names: tuple[str, ...]
    truth: np.ndarray
    replications: int
    n_failed: int
    estimates: np.ndarray
    std_errors: np.ndarray
    entrant: str = "NIRW_x_NW"
    incumbent: str = "NIRW_x_OW"
    failures: list = field(default_factory=list)

    @property
    def n_ok(self) -> int:
        return len(self.estimates)

    @property
    def errors(self) -> np.ndarray:
        return self.estimates - self.truth[None, :]

    @property
    def bias(self) -> np.ndarray:
        return self.errors.mean(axis=0)

    @property
    def rmse(self) -> np.ndarray:
        return np.sqrt((self.errors**2).mean(axis=0))

    @property
    def mc_se(self) -> np.ndarray:
        """Monte-Carlo standard error of the mean estimate."""
        if self.n_ok < 2:
            return np.full(len(self.names), np.nan)
        return self.estimates.std(axis=0, ddof=1) / np.sqrt(self.n_ok)

    @property
    def coverage(self) -> np.ndarray:
        """Share of 95% intervals holding the truth, over replications with an SE."""
        has_se = np.isfinite(self.std_errors)
        hit = (np.abs(self.errors) <= Z95 * self.std_errors) & has_se
        n = has_se.sum(axis=0)
        return np.where(n > 0, hit.sum(axis=0) / np.maximum(n, 1), np.nan)

    @property
    def ordering_rate(self) -> float:
        i, j = self.names.index(self.entrant), self.names.index(self.incumbent)
        return float(np.mean(self.estimates[:, i] > self.estimates[:, j]))

    def to_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(("name", "truth", "bias", "rmse", "coverage", "mc_se"))
            for row in zip(self.names, self.truth, self.bias, self.rmse, self.coverage, self.mc_se):
                w.writerow([row[0]] + [repr(float(v)) for v in row[1:]])
            w.writerow(("ordering_rate", repr(self.ordering_rate), "", "", "", ""))
            w.writerow(("replications", self.replications, "failed", self.n_failed, "", ""))


def _one_replication(args):
    params, spec, seed = args
    design, _ = generate_design(params, seed)
    try:
        res = fit(design, spec)
    except (ConvergenceError, NumericalOverflowError, np.linalg.LinAlgError) as exc:
        return None, f"{type(exc).__name__}: {exc}"
    est = np.concatenate([res.beta, [res.sigma_alpha, res.sigma_eps]])
    se = np.concatenate([res.se, [res.se_sigma_alpha, res.se_sigma_eps]])
    return (est, se), None


def monte_carlo(params: TrueParams, reps: int, spec: ModelSpec | None = None, seed: int = 0,
                n_jobs: int = 1) -> MonteCarloReport:
    """Generate-and-fit ``reps`` times and summarise recovery of ``params``.

    Failed fits are counted in ``n_failed`` rather than raised.
    """
    if reps < 1:
        raise ValueError("need at least one replication")
    spec = spec or ModelSpec(split=params.split)
    jobs = [(params, spec, replication_seed(seed, r)) for r in range(reps)]
    if n_jobs > 1:
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            outcomes = list(pool.map(_one_replication, jobs))
    else:
        outcomes = [_one_replication(j) for j in jobs]
    ok = [o for o, _ in outcomes if o is not None]
    failures = [(r, msg) for r, (o, msg) in enumerate(outcomes) if o is None]
    names = params.names + ("sigma_alpha", "sigma_eps")
    truth = np.array(params.beta + (params.sigma_alpha, params.sigma_eps))
    width = len(names)
    return MonteCarloReport(
        names=names,
        truth=truth,
        replications=reps,
        n_failed=len(failures),
        estimates=np.array([e for e, _ in ok]).reshape(-1, width),
        std_errors=np.array([s for _, s in ok]).reshape(-1, width),
        entrant="NIRW_x_LNW" if params.split else "NIRW_x_NW",
        failures=failures,
    )


# ---------------------------------------------------------------------------
# parameter files
# ---------------------------------------------------------------------------

_INT_KEYS = ("n_rw", "n_ow", "n_nw", "n_lnw", "n_anw", "n_periods")


def write_params(params: TrueParams, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("name", "value"))
        for n, b in zip(params.names, params.beta):
            w.writerow((n, repr(b)))
        w.writerow(("sigma_alpha", repr(params.sigma_alpha)))
        w.writerow(("sigma_eps", repr(params.sigma_eps)))
        for k in _INT_KEYS:
            v = getattr(params, k)
            if v is not None:
                w.writerow((k, v))
        w.writerow(("nirw_low", repr(params.nirw_range[0])))
        w.writerow(("nirw_high", repr(params.nirw_range[1])))


def read_params(path) -> TrueParams:
    """Read a two-column ``name,value`` parameter file."""
    values = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["name", "value"]:
            raise ValueError(f"{path}: expected header 'name,value'")
        for row in reader:
            if not row:
                continue
            if len(row) != 2:
                raise ValueError(f"{path}:{reader.line_num}: expected two fields")
            values[row[0].strip()] = row[1].strip()
    sizes = {k: int(values.pop(k)) for k in _INT_KEYS if k in values}
    split = "n_lnw" in sizes or "n_anw" in sizes
    names = canonical_names(split)
    missing = [n for n in names if n not in values]
    if missing:
        raise ValueError(f"{path}: missing coefficients {', '.join(missing)}")
    lo = float(values.pop("nirw_low", 0.1))
    hi = float(values.pop("nirw_high", 0.9))
    return TrueParams(
        beta=tuple(float(values[n]) for n in names),
        sigma_alpha=float(values["sigma_alpha"]),
        sigma_eps=float(values["sigma_eps"]),
        nirw_range=(lo, hi),
        **sizes,
    )
