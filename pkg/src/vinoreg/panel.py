"""
Country attributes and the balanced country x quinquennium panel.

The two input files are plain CSV (see ``COUNTRY_COLUMNS`` and
``PANEL_COLUMNS``).  A loaded ``Panel`` is immutable; transformations such
as :func:`reassign_north_africa` return new objects.
"""

from __future__ import annotations

import csv
import enum
import math
from collections import Counter
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np


class PanelFormatError(ValueError):
    """Raised when an input file cannot be turned into a valid panel."""

    def __init__(self, message: str, path: str | None = None, line: int | None = None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}"
            if line is not None:
                where += f":{line}"
            where += ": "
        super().__init__(where + message)


class WorldClass(enum.Enum):
    OLD_WORLD = "OW"
    LATIN_NEW_WORLD = "LNW"
    ANGLO_NEW_WORLD = "ANW"
    REST_OF_WORLD = "RW"

    @property
    def is_new_world(self) -> bool:
        return self in (WorldClass.LATIN_NEW_WORLD, WorldClass.ANGLO_NEW_WORLD)

    @property
    def group(self) -> str:
        """Three-group label: OW, NW or RW."""
        return "NW" if self.is_new_world else self.value


@dataclass(frozen=True, order=True)
class Period:
    index: int
    label: str

    @property
    def first_year(self) -> int:
        return 1961 + 5 * self.index

    @property
    def years(self) -> range:
        return range(self.first_year, self.first_year + 5)


PERIODS: tuple[Period, ...] = tuple(
    Period(i, f"{1961 + 5 * i}-{(1965 + 5 * i) % 100:02d}") for i in range(9)
)
_PERIOD_BY_LABEL = {p.label: p for p in PERIODS}


def period_from_label(label: str) -> Period:
    try:
        return _PERIOD_BY_LABEL[label.strip()]
    except KeyError:
        raise ValueError(f"unknown period label {label!r}") from None


RULER_LEVELS = (0.0, 0.5, 1.0)


@dataclass(frozen=True)
class Country:
    id: str
    name: str
    world: WorldClass
    latitude: float
    longitude: float
    avg_temp: float
    christ_ruler: float
    muslim_ruler: float
    is_north_africa: bool = False


@dataclass(frozen=True)
class PanelObservation:
    country_id: str
    period: Period
    export_vol: float
    export_val: float
    import_vol: float
    import_val: float
    gdp_pc: float
    eu_years: int = 0
    euro_years: int = 0


FLOW_FIELDS = ("export_vol", "export_val", "import_vol", "import_val")


@dataclass(frozen=True)
class Panel:
    countries: tuple[Country, ...]
    observations: tuple[PanelObservation, ...]
    _country_index: dict = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "countries", tuple(sorted(self.countries, key=lambda c: c.id)))
        object.__setattr__(
            self,
            "observations",
            tuple(sorted(self.observations, key=lambda o: (o.country_id, o.period.index))),
        )
        object.__setattr__(self, "_country_index", {c.id: k for k, c in enumerate(self.countries)})

    @property
    def country_ids(self) -> list[str]:
        return [c.id for c in self.countries]

    @property
    def periods(self) -> tuple[Period, ...]:
        return tuple(sorted({o.period for o in self.observations}))

    def country(self, country_id: str) -> Country:
        try:
            return self.countries[self._country_index[country_id]]
        except KeyError:
            raise KeyError(f"unknown country {country_id!r}") from None

    def matrix(self, name: str) -> np.ndarray:
        """Observation field as a (country, period) array; holes are NaN.

        Columns follow :attr:`periods`, rows follow :attr:`countries`.
        """
        periods = self.periods
        col = {p: j for j, p in enumerate(periods)}
        out = np.full((len(self.countries), len(periods)), np.nan)
        for o in self.observations:
            out[self._country_index[o.country_id], col[o.period]] = getattr(o, name)
        return out

    def group_counts(self, split: bool = False) -> dict[str, int]:
        counts = Counter(c.world.value if split else c.world.group for c in self.countries)
        keys = ("RW", "OW", "LNW", "ANW") if split else ("RW", "OW", "NW")
        return {k: counts.get(k, 0) for k in keys}


COUNTRY_COLUMNS = (
    "id", "name", "world", "latitude", "longitude", "avg_temp",
    "christ_ruler", "muslim_ruler", "is_north_africa",
)
PANEL_COLUMNS = (
    "country_id", "period", "export_vol", "export_val", "import_vol",
    "import_val", "gdp_pc", "eu_years", "euro_years",
)

_TRUE = {"1", "true", "yes", "y", "t"}
_FALSE = {"0", "false", "no", "n", "f"}


def _read_rows(path, columns):
    path = str(path)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise PanelFormatError("empty file", path, 1) from None
        header = [h.strip() for h in header]
        if tuple(header) != tuple(columns):
            raise PanelFormatError(
                f"expected header {','.join(columns)}, got {','.join(header)}", path, 1
            )
        for row in reader:
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(columns):
                raise PanelFormatError(
                    f"expected {len(columns)} fields, got {len(row)}", path, reader.line_num
                )
            yield reader.line_num, dict(zip(columns, (cell.strip() for cell in row)))


def _number(value: str, name: str, path, line) -> float:
    if value == "":
        raise PanelFormatError(f"missing value for {name}", path, line)
    try:
        out = float(value)
    except ValueError:
        raise PanelFormatError(f"{name}: cannot parse {value!r} as a number", path, line) from None
    if not math.isfinite(out):
        raise PanelFormatError(f"{name}: non-finite value {value!r}", path, line)
    return out


def _integer(value: str, name: str, path, line) -> int:
    out = _number(value, name, path, line)
    if out != int(out):
        raise PanelFormatError(f"{name}: expected an integer, got {value!r}", path, line)
    return int(out)


def _parse_country(rec: dict, path, line) -> Country:
    try:
        world = WorldClass(rec["world"])
    except ValueError:
        raise PanelFormatError(f"unknown world label {rec['world']!r}", path, line) from None
    flag = rec["is_north_africa"].lower()
    if flag not in _TRUE | _FALSE:
        raise PanelFormatError(f"is_north_africa: cannot parse {rec['is_north_africa']!r}", path, line)
    country = Country(
        id=rec["id"],
        name=rec["name"],
        world=world,
        latitude=_number(rec["latitude"], "latitude", path, line),
        longitude=_number(rec["longitude"], "longitude", path, line),
        avg_temp=_number(rec["avg_temp"], "avg_temp", path, line),
        christ_ruler=_number(rec["christ_ruler"], "christ_ruler", path, line),
        muslim_ruler=_number(rec["muslim_ruler"], "muslim_ruler", path, line),
        is_north_africa=flag in _TRUE,
    )
    if not country.id:
        raise PanelFormatError("empty country id", path, line)
    problems = _country_problems(country)
    if problems:
        raise PanelFormatError(problems[0], path, line)
    return country


def _parse_observation(rec: dict, path, line) -> PanelObservation:
    try:
        period = period_from_label(rec["period"])
    except ValueError as exc:
        raise PanelFormatError(str(exc), path, line) from None
    obs = PanelObservation(
        country_id=rec["country_id"],
        period=period,
        export_vol=_number(rec["export_vol"], "export_vol", path, line),
        export_val=_number(rec["export_val"], "export_val", path, line),
        import_vol=_number(rec["import_vol"], "import_vol", path, line),
        import_val=_number(rec["import_val"], "import_val", path, line),
        gdp_pc=_number(rec["gdp_pc"], "gdp_pc", path, line),
        eu_years=_integer(rec["eu_years"], "eu_years", path, line),
        euro_years=_integer(rec["euro_years"], "euro_years", path, line),
    )
    problems = _observation_problems(obs)
    if problems:
        raise PanelFormatError(problems[0], path, line)
    return obs


def load_panel(countries_path, panel_path) -> Panel:
    """Read ``countries.csv`` and ``panel.csv`` into a balanced :class:`Panel`.

    Raises
    ------
    PanelFormatError
        On malformed rows (with the offending line number), unknown labels,
        out-of-range values, duplicate (country, period) keys, observations
        for undeclared countries, or an unbalanced panel.
    FileNotFoundError
        If either path does not exist.
    """
    countries = {}
    for line, rec in _read_rows(countries_path, COUNTRY_COLUMNS):
        c = _parse_country(rec, str(countries_path), line)
        if c.id in countries:
            raise PanelFormatError(f"duplicate country id {c.id!r}", str(countries_path), line)
        countries[c.id] = c

    seen = {}
    observations = []
    for line, rec in _read_rows(panel_path, PANEL_COLUMNS):
        obs = _parse_observation(rec, str(panel_path), line)
        if obs.country_id not in countries:
            raise PanelFormatError(f"unknown country id {obs.country_id!r}", str(panel_path), line)
        key = (obs.country_id, obs.period.index)
        if key in seen:
            raise PanelFormatError(
                f"duplicate observation for ({obs.country_id}, {obs.period.label}); "
                f"first seen on line {seen[key]}",
                str(panel_path),
                line,
            )
        seen[key] = line
        observations.append(obs)

    panel = Panel(tuple(countries.values()), tuple(observations))
    holes = _balance_problems(panel)
    if holes:
        raise PanelFormatError(f"unbalanced panel: {holes[0]}", str(panel_path))
    return panel


def _fmt(x: float) -> str:
    return repr(float(x))


def write_panel(panel: Panel, countries_path, panel_path) -> None:
    """Inverse of :func:`load_panel`."""
    with open(countries_path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(COUNTRY_COLUMNS)
        for c in panel.countries:
            w.writerow([
                c.id, c.name, c.world.value, _fmt(c.latitude), _fmt(c.longitude),
                _fmt(c.avg_temp), _fmt(c.christ_ruler), _fmt(c.muslim_ruler),
                int(c.is_north_africa),
            ])
    with open(panel_path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(PANEL_COLUMNS)
        for o in panel.observations:
            w.writerow([
                o.country_id, o.period.label, _fmt(o.export_vol), _fmt(o.export_val),
                _fmt(o.import_vol), _fmt(o.import_val), _fmt(o.gdp_pc),
                o.eu_years, o.euro_years,
            ])


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------

CANONICAL_COUNTS = {"OW": 12, "NW": 10, "RW": 25}
CANONICAL_SPLIT = {"LNW": 5, "ANW": 5}


def _country_problems(c: Country) -> list[str]:
    out = []
    if not -90.0 <= c.latitude <= 90.0:
        out.append(f"{c.id}: latitude {c.latitude} outside [-90, 90]")
    if not -180.0 <= c.longitude <= 180.0:
        out.append(f"{c.id}: longitude {c.longitude} outside [-180, 180]")
    if not math.isfinite(c.avg_temp):
        out.append(f"{c.id}: avg_temp is not finite")
    for name in ("christ_ruler", "muslim_ruler"):
        v = getattr(c, name)
        if v not in RULER_LEVELS:
            out.append(f"{c.id}: {name} = {v} not in {{0, 0.5, 1}}")
    if c.christ_ruler == 1.0 and c.muslim_ruler == 1.0:
        out.append(f"{c.id}: christ_ruler and muslim_ruler are both 1")
    return out


def _observation_problems(o: PanelObservation) -> list[str]:
    out = []
    where = f"({o.country_id}, {o.period.label})"
    for name in FLOW_FIELDS:
        v = getattr(o, name)
        if not (math.isfinite(v) and v >= 0.0):
            out.append(f"{where}: {name} = {v} must be finite and non-negative")
    if not (math.isfinite(o.gdp_pc) and o.gdp_pc > 0.0):
        out.append(f"{where}: gdp_pc = {o.gdp_pc} must be positive")
    for name in ("eu_years", "euro_years"):
        v = getattr(o, name)
        if v not in range(6):
            out.append(f"{where}: {name} = {v} not in 0..5")
    return out


def _balance_problems(panel: Panel) -> list[str]:
    keys = Counter((o.country_id, o.period.index) for o in panel.observations)
    out = [f"({cid}, {PERIODS[t].label}) appears {n} times" for (cid, t), n in keys.items() if n > 1]
    periods = panel.periods
    for c in panel.countries:
        have = {t for (cid, t) in keys if cid == c.id}
        missing = [p.label for p in periods if p.index not in have]
        if missing:
            out.append(f"{c.id} missing period(s) {', '.join(missing)}")
    known = set(panel.country_ids)
    for cid in sorted({o.country_id for o in panel.observations} - known):
        out.append(f"observations for undeclared country {cid!r}")
    return out


@dataclass(frozen=True)
class ValidationReport:
    group_counts: dict[str, int]
    split_counts: dict[str, int]
    periods: tuple[str, ...]
    n_observations: int
    violations: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not self.violations

    @property
    def canonical_shape(self) -> bool:
        """True for the 47-unit, 9-period study layout with its group sizes."""
        return (
            self.group_counts == CANONICAL_COUNTS
            and {k: self.split_counts[k] for k in CANONICAL_SPLIT} == CANONICAL_SPLIT
            and self.periods == tuple(p.label for p in PERIODS)
        )

    def summary(self) -> str:
        lines = [
            "groups: " + ", ".join(f"{k}={v}" for k, v in self.group_counts.items()),
            "new world split: " + ", ".join(f"{k}={self.split_counts[k]}" for k in CANONICAL_SPLIT),
            f"periods: {len(self.periods)} ({self.periods[0] if self.periods else '-'}"
            f" .. {self.periods[-1] if self.periods else '-'})",
            f"observations: {self.n_observations}",
            f"canonical shape: {'yes' if self.canonical_shape else 'no'}",
            f"violations: {len(self.violations)}",
        ]
        lines.extend(f"  - {v}" for v in self.violations)
        return "\n".join(lines)


def validate_panel(panel: Panel) -> ValidationReport:
    """Collect every invariant violation in ``panel``; never raises."""
    violations = []
    for c in panel.countries:
        violations.extend(_country_problems(c))
    for o in panel.observations:
        violations.extend(_observation_problems(o))
    violations.extend(_balance_problems(panel))
    ids = Counter(panel.country_ids)
    violations.extend(f"duplicate country id {cid!r}" for cid, n in ids.items() if n > 1)
    g = panel.group_counts()
    s = panel.group_counts(split=True)
    return ValidationReport(
        group_counts={"OW": g["OW"], "NW": g["NW"], "RW": g["RW"]},
        split_counts={"LNW": s["LNW"], "ANW": s["ANW"]},
        periods=tuple(p.label for p in panel.periods),
        n_observations=len(panel.observations),
        violations=tuple(violations),
    )


def reassign_north_africa(panel: Panel) -> Panel:
    """Copy of ``panel`` with every North-Africa-flagged unit moved to the Old World.

    Only meant for the descriptive share charts; estimation uses the
    original classification.
    """
    countries = tuple(
        replace(c, world=WorldClass.OLD_WORLD) if c.is_north_africa else c
        for c in panel.countries
    )
    return Panel(countries, panel.observations)


def make_panel(countries: Iterable[Country], observations: Sequence[PanelObservation]) -> Panel:
    return Panel(tuple(countries), tuple(observations))
