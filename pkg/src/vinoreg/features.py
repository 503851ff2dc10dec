"""
Dependent variable and regressors of the wine export-share regression.

All builders work on the (country, period) matrices exposed by
:meth:`vinoreg.panel.Panel.matrix`, so row order everywhere is countries
sorted by id, then periods in chronological order.
"""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass
from typing import Callable, Literal

import numpy as np

from .panel import Country, Panel, Period, WorldClass

EARTH_RADIUS_KM = 6371.0

BASE_REGRESSORS = (
    "NIRW", "OW", "NW", "NIRW_x_OW", "NIRW_x_NW", "RMP", "EU68-98", "EURO99-05",
    "CHRIST_RULER", "MUSLIM_RULER", "DISTLAT3050", "AVERAGE_TEMP",
    "QUINQ61-65", "QUINQ61-65_x_OW", "QUINQ61-65_x_RW",
)
SPLIT_REGRESSORS = (
    "NIRW", "OW", "LNW", "ANW", "NIRW_x_OW", "NIRW_x_LNW", "NIRW_x_ANW", "RMP",
    "EU68-98", "EURO99-05", "CHRIST_RULER", "MUSLIM_RULER", "DISTLAT3050",
    "AVERAGE_TEMP", "QUINQ61-65", "QUINQ61-65_x_OW", "QUINQ61-65_x_RW",
)

DummyMode = Literal["fractional", "binary"]


class DegeneratePeriodError(ValueError):
    """A period whose world total (exports or gross imports) is zero."""


class CoincidentCoordinatesError(ValueError):
    """Two distinct countries share the same coordinates."""


class Measure(enum.Enum):
    VOLUME = "volume"
    VALUE = "value"

    @classmethod
    def parse(cls, value) -> "Measure":
        if isinstance(value, cls):
            return value
        return cls(str(value).lower())

    @property
    def suffix(self) -> str:
        return "vol" if self is Measure.VOLUME else "val"


def _flows(panel: Panel, measure: Measure, kind: str) -> np.ndarray:
    return panel.matrix(f"{kind}_{Measure.parse(measure).suffix}")


def _period_column(panel: Panel, period: Period) -> int:
    for j, p in enumerate(panel.periods):
        if p == period:
            return j
    raise KeyError(f"period {period.label} not in panel")


# ---------------------------------------------------------------------------
# scalar feature definitions
# ---------------------------------------------------------------------------

def export_shares(panel: Panel, measure: Measure) -> np.ndarray:
    """Matrix of country export shares, one column per period."""
    exports = _flows(panel, measure, "export")
    totals = exports.sum(axis=0)
    bad = [p.label for p, tot in zip(panel.periods, totals) if not tot > 0.0]
    if bad:
        raise DegeneratePeriodError(f"world exports are zero in period(s) {', '.join(bad)}")
    return exports / totals


def export_share(panel: Panel, country: str, period: Period, measure: Measure) -> float:
    """Exports of ``country`` over world exports in ``period``."""
    j = _period_column(panel, period)
    exports = _flows(panel, measure, "export")[:, j]
    total = exports.sum()
    if not total > 0.0:
        raise DegeneratePeriodError(f"world exports are zero in period {period.label}")
    i = panel.country_ids.index(country)
    return float(exports[i] / total)


def nirw_series(panel: Panel, measure: Measure) -> np.ndarray:
    """Rest-of-world net imports over world gross imports, per period.

    Net imports are not floored at zero, so the ratio is negative whenever
    the rest of the world is a net exporter.
    """
    imports = _flows(panel, measure, "import")
    exports = _flows(panel, measure, "export")
    rw = np.array([c.world is WorldClass.REST_OF_WORLD for c in panel.countries])
    net = (imports[rw] - exports[rw]).sum(axis=0)
    gross = imports.sum(axis=0)
    bad = [p.label for p, g in zip(panel.periods, gross) if not g > 0.0]
    if bad:
        raise DegeneratePeriodError(f"world gross imports are zero in period(s) {', '.join(bad)}")
    return net / gross


def nirw(panel: Panel, period: Period, measure: Measure) -> float:
    return float(nirw_series(panel, measure)[_period_column(panel, period)])


def great_circle_km(a: tuple[float, float], b: tuple[float, float]) -> float:
    """Haversine distance between two (latitude, longitude) pairs in degrees."""
    lat1, lon1 = map(math.radians, a)
    lat2, lon2 = map(math.radians, b)
    h = math.sin((lat2 - lat1) / 2) ** 2 + math.cos(lat1) * math.cos(lat2) * math.sin((lon2 - lon1) / 2) ** 2
    return 2.0 * EARTH_RADIUS_KM * math.asin(min(1.0, math.sqrt(h)))


def distance_matrix(countries, distance_fn: Callable = great_circle_km) -> np.ndarray:
    coords = [(c.latitude, c.longitude) for c in countries]
    n = len(coords)
    out = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            out[i, j] = out[j, i] = distance_fn(coords[i], coords[j])
    return out


def _check_distances(dist: np.ndarray, ids) -> None:
    off = ~np.eye(len(dist), dtype=bool)
    zero = np.argwhere(off & (dist <= 0.0))
    if len(zero):
        i, j = zero[0]
        raise CoincidentCoordinatesError(f"{ids[i]} and {ids[j]} are at zero distance")


def rmp_matrix(panel: Panel, distance_fn: Callable = great_circle_km) -> np.ndarray:
    """Inverse-distance weighted mean of partner GDP per capita, (country, period).

    A unit without partners gets 0.
    """
    dist = distance_matrix(panel.countries, distance_fn)
    _check_distances(dist, panel.country_ids)
    with np.errstate(divide="ignore"):
        w = np.where(dist > 0.0, 1.0 / dist, 0.0)
    np.fill_diagonal(w, 0.0)
    gdp = panel.matrix("gdp_pc")
    norm = w.sum(axis=1, keepdims=True)
    num = w @ gdp
    return np.divide(num, norm, out=np.zeros_like(num), where=norm > 0.0)


def rmp(panel: Panel, country: str, period: Period, distance_fn: Callable = great_circle_km) -> float:
    i = panel.country_ids.index(country)
    j = _period_column(panel, period)
    me = panel.countries[i]
    gdp = panel.matrix("gdp_pc")[:, j]
    num = den = 0.0
    for k, other in enumerate(panel.countries):
        if k == i:
            continue
        d = distance_fn((me.latitude, me.longitude), (other.latitude, other.longitude))
        if d <= 0.0:
            raise CoincidentCoordinatesError(f"{me.id} and {other.id} are at zero distance")
        num += gdp[k] / d
        den += 1.0 / d
    return num / den if den > 0.0 else 0.0


def dist_lat_3050(latitude: float) -> float:
    """Degrees of absolute latitude outside the 30-50 degree vine band."""
    a = abs(latitude)
    if a > 50.0:
        return a - 50.0
    if a < 30.0:
        return 30.0 - a
    return 0.0


def membership_dummy(years_in_window: int, mode: DummyMode = "fractional") -> float:
    """Coverage of a five-year period by a membership window.

    ``fractional`` returns years/5; ``binary`` returns 1 when at least three
    of the five years are covered.
    """
    if isinstance(years_in_window, bool) or int(years_in_window) != years_in_window \
            or not 0 <= years_in_window <= 5:
        raise ValueError(f"years in window must be an integer in 0..5, got {years_in_window!r}")
    if mode == "fractional":
        return years_in_window / 5.0
    if mode == "binary":
        return 1.0 if years_in_window >= 3 else 0.0
    raise ValueError(f"unknown dummy mode {mode!r}")


def quinq_dummies(country: Country, period: Period) -> tuple[float, float, float]:
    q = 1.0 if period.label == "1961-65" else 0.0
    return (
        q,
        q * (country.world is WorldClass.OLD_WORLD),
        q * (country.world is WorldClass.REST_OF_WORLD),
    )


# ---------------------------------------------------------------------------
# design matrix
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DesignMatrix:
    """Stacked regression data, one row per (country, period).

    ``X`` holds the regressors only (no intercept column) in the order of
    ``names``.
    """

    y: np.ndarray
    X: np.ndarray
    names: tuple[str, ...]
    country_ids: np.ndarray
    period_index: np.ndarray
    measure: Measure = Measure.VOLUME
    split: bool = False
    group_counts: dict | None = None
    dummy_mode: str = "fractional"

    def __post_init__(self):
        n = len(self.y)
        if self.X.shape != (n, len(self.names)):
            raise ValueError(f"X has shape {self.X.shape}, expected {(n, len(self.names))}")
        if len(self.country_ids) != n or len(self.period_index) != n:
            raise ValueError("row labels do not match the number of observations")

    @property
    def n_obs(self) -> int:
        return len(self.y)

    @property
    def n_countries(self) -> int:
        return len(np.unique(self.country_ids))

    def column(self, name: str) -> np.ndarray:
        return self.X[:, self.names.index(name)]

    def to_csv(self, path) -> None:
        from .panel import PERIODS

        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(("country_id", "period", "y") + tuple(self.names))
            for k in range(self.n_obs):
                t = int(self.period_index[k])
                label = PERIODS[t].label if 0 <= t < len(PERIODS) else str(t)
                w.writerow(
                    [self.country_ids[k], label, repr(float(self.y[k]))]
                    + [repr(float(v)) for v in self.X[k]]
                )


def build_design(
    panel: Panel,
    measure: Measure | str = Measure.VOLUME,
    split: bool = False,
    dummy_mode: DummyMode = "fractional",
    distance_fn: Callable = great_circle_km,
) -> DesignMatrix:
    """Assemble the export-share design matrix for one measure."""
    measure = Measure.parse(measure)
    if dummy_mode not in ("fractional", "binary"):
        raise ValueError(f"unknown dummy mode {dummy_mode!r}")
    countries = panel.countries
    periods = panel.periods
    n_c, n_t = len(countries), len(periods)

    share = export_shares(panel, measure)
    z = nirw_series(panel, measure)
    market = rmp_matrix(panel, distance_fn)
    eu = panel.matrix("eu_years")
    euro = panel.matrix("euro_years")
    dummy = np.vectorize(lambda k: membership_dummy(int(k), dummy_mode), otypes=[float])

    def per_country(fn):
        return np.repeat(np.array([fn(c) for c in countries], dtype=float)[:, None], n_t, axis=1)

    ow = per_country(lambda c: c.world is WorldClass.OLD_WORLD)
    rw = per_country(lambda c: c.world is WorldClass.REST_OF_WORLD)
    nirw_m = np.repeat(z[None, :], n_c, axis=0)
    q = np.repeat(np.array([p.label == "1961-65" for p in periods], dtype=float)[None, :], n_c, axis=0)

    cols = {
        "NIRW": nirw_m,
        "OW": ow,
        "NIRW_x_OW": nirw_m * ow,
        "RMP": market,
        "EU68-98": dummy(eu),
        "EURO99-05": dummy(euro),
        "CHRIST_RULER": per_country(lambda c: c.christ_ruler),
        "MUSLIM_RULER": per_country(lambda c: c.muslim_ruler),
        "DISTLAT3050": per_country(lambda c: dist_lat_3050(c.latitude)),
        "AVERAGE_TEMP": per_country(lambda c: c.avg_temp),
        "QUINQ61-65": q,
        "QUINQ61-65_x_OW": q * ow,
        "QUINQ61-65_x_RW": q * rw,
    }
    if split:
        for label, world in (("LNW", WorldClass.LATIN_NEW_WORLD), ("ANW", WorldClass.ANGLO_NEW_WORLD)):
            d = per_country(lambda c, w=world: c.world is w)
            cols[label] = d
            cols[f"NIRW_x_{label}"] = nirw_m * d
        names = SPLIT_REGRESSORS
    else:
        nw = per_country(lambda c: c.world.is_new_world)
        cols["NW"] = nw
        cols["NIRW_x_NW"] = nirw_m * nw
        names = BASE_REGRESSORS

    X = np.column_stack([cols[name].reshape(-1) for name in names])
    return DesignMatrix(
        y=share.reshape(-1),
        X=X,
        names=names,
        country_ids=np.repeat(np.array(panel.country_ids, dtype=object), n_t),
        period_index=np.tile(np.array([p.index for p in periods]), n_c),
        measure=measure,
        split=split,
        group_counts=panel.group_counts(split=split),
        dummy_mode=dummy_mode,
    )
