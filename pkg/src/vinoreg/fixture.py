"""
Bundled SYNTHETIC panel with the shape of the study data.

The wine flows are invented: they follow the broad historical pattern
(Old World dominance, New World take-off from the 1980s, growing
rest-of-world imports, large North African exports in the 1960s) but are
not the compendium figures, which cannot be redistributed.  Coordinates are
representative centroids: the main wine region for producers, the capital
(or a regional hub for aggregates) otherwise.

Set ``VINOREG_FIXTURE`` to a directory holding ``countries.csv`` and
``panel.csv`` to point the CLI at other data.
"""

from __future__ import annotations

import os
from pathlib import Path

import numpy as np

from .panel import PERIODS, Country, Panel, PanelObservation, WorldClass, load_panel, write_panel

DATA_DIR = Path(__file__).parent / "data"
FIXTURE_SEED = 19610205

OW, LNW, ANW, RW = (WorldClass.OLD_WORLD, WorldClass.LATIN_NEW_WORLD,
                    WorldClass.ANGLO_NEW_WORLD, WorldClass.REST_OF_WORLD)

# id, name, world, lat, lon, avg temp, christ, muslim, north africa
UNITS = [
    ("FRA", "France", OW, 44.8, -0.6, 13.0, 1, 0, 0),
    ("ITA", "Italy", OW, 43.5, 11.2, 14.5, 1, 0, 0),
    ("ESP", "Spain", OW, 39.4, -3.0, 15.0, 1, 0, 0),
    ("PRT", "Portugal", OW, 41.1, -7.8, 15.5, 1, 0, 0),
    ("DEU", "Germany", OW, 49.9, 7.9, 10.0, 1, 0, 0),
    ("AUT", "Austria", OW, 47.8, 16.4, 10.5, 1, 0, 0),
    ("CHE", "Switzerland", OW, 46.4, 6.9, 9.5, 1, 0, 0),
    ("BEL", "Belgium-Luxembourg", OW, 49.6, 6.3, 10.0, 1, 0, 0),
    ("GRC", "Greece", OW, 38.0, 22.6, 17.0, 1, 0, 0),
    ("BGR", "Bulgaria", OW, 42.4, 25.0, 12.0, 1, 0, 0),
    ("HUN", "Hungary", OW, 48.1, 21.3, 11.0, 1, 0, 0),
    ("ROU", "Romania", OW, 45.7, 26.8, 10.5, 1, 0, 0),
    ("ARG", "Argentina", LNW, -32.9, -68.8, 16.5, 1, 0, 0),
    ("CHL", "Chile", LNW, -34.6, -71.2, 15.0, 1, 0, 0),
    ("BRA", "Brazil", LNW, -29.2, -51.5, 17.5, 1, 0, 0),
    ("MEX", "Mexico", LNW, 32.0, -116.6, 17.0, 1, 0, 0),
    ("URY", "Uruguay", LNW, -34.8, -56.2, 16.5, 1, 0, 0),
    ("USA", "United States", ANW, 38.5, -122.3, 15.0, 1, 0, 0),
    ("AUS", "Australia", ANW, -34.5, 138.9, 16.0, 1, 0, 0),
    ("NZL", "New Zealand", ANW, -41.5, 173.9, 12.5, 1, 0, 0),
    ("ZAF", "South Africa", ANW, -33.9, 18.9, 17.0, 1, 0, 0),
    ("CAN", "Canada", ANW, 43.2, -79.2, 9.0, 1, 0, 0),
    ("AZE", "Azerbaijan", RW, 40.4, 49.9, 14.5, 0, 1, 0),
    ("CHN", "China", RW, 39.9, 116.4, 12.5, 0, 0, 0),
    ("HRV", "Croatia", RW, 45.8, 16.0, 12.0, 1, 0, 0),
    ("DNK", "Denmark", RW, 55.7, 12.6, 8.5, 1, 0, 0),
    ("FIN", "Finland", RW, 60.2, 24.9, 5.5, 1, 0, 0),
    ("GEO", "Georgia", RW, 41.7, 44.8, 13.0, 1, 0, 0),
    ("IRL", "Ireland", RW, 53.3, -6.3, 9.8, 1, 0, 0),
    ("JPN", "Japan", RW, 35.7, 139.7, 15.5, 0, 0, 0),
    ("MDE", "Middle East", RW, 31.9, 35.9, 18.0, 0.5, 0.5, 0),
    ("MDA", "Moldova", RW, 47.0, 28.9, 10.0, 1, 0, 0),
    ("NLD", "Netherlands", RW, 52.4, 4.9, 10.0, 1, 0, 0),
    ("NAF", "North Africa", RW, 36.8, 3.1, 18.0, 0, 1, 1),
    ("OAF", "Other Africa", RW, -1.3, 36.8, 19.0, 0, 0, 0),
    ("OAP", "Other Asia-Pacific", RW, 28.6, 77.2, 25.0, 0, 0, 0),
    ("OCE", "Other Central and Eastern Europe", RW, 52.2, 21.0, 8.5, 1, 0, 0),
    ("OLA", "Other Latin America and Caribbean", RW, 4.7, -74.1, 14.0, 1, 0, 0),
    ("ONE", "Other North and East Asia", RW, 37.6, 127.0, 12.5, 0, 0, 0),
    ("OWE", "Other West Europe", RW, 59.9, 10.8, 6.0, 1, 0, 0),
    ("RUS", "Russia", RW, 55.8, 37.6, 5.8, 1, 0, 0),
    ("SEA", "South-East Asia", RW, 1.4, 103.8, 27.5, 0, 0, 0),
    ("SWE", "Sweden", RW, 59.3, 18.1, 7.0, 1, 0, 0),
    ("TUR", "Turkey", RW, 39.9, 32.9, 12.0, 0, 1, 0),
    ("UKR", "Ukraine", RW, 50.5, 30.5, 8.0, 1, 0, 0),
    ("GBR", "United Kingdom", RW, 51.5, -0.1, 11.0, 1, 0, 0),
    ("UZB", "Uzbekistan", RW, 41.3, 69.3, 14.5, 0, 1, 0),
]

# EU accession / euro-zone entry years (only years inside the windows matter)
EU_ENTRY = {
    "FRA": 1958, "ITA": 1958, "DEU": 1958, "BEL": 1958, "NLD": 1958,
    "DNK": 1973, "IRL": 1973, "GBR": 1973, "GRC": 1981, "ESP": 1986,
    "PRT": 1986, "AUT": 1995, "FIN": 1995, "SWE": 1995,
}
EURO_ENTRY = {
    "FRA": 1999, "ITA": 1999, "DEU": 1999, "BEL": 1999, "NLD": 1999, "ESP": 1999,
    "PRT": 1999, "AUT": 1999, "FIN": 1999, "IRL": 1999, "GRC": 2001,
}

# export profile: (early weight, late weight, take-off period); zero = no exports
EXPORT_PROFILE = {
    "FRA": (24.0, 20.0, 0), "ITA": (20.0, 19.0, 0), "ESP": (9.0, 14.0, 0),
    "PRT": (6.0, 3.5, 0), "DEU": (3.0, 4.5, 0), "AUT": (0.8, 0.8, 0),
    "CHE": (0.2, 0.2, 0), "BEL": (0.5, 0.9, 0), "GRC": (2.5, 1.0, 0),
    "BGR": (4.0, 1.5, 0), "HUN": (3.5, 1.0, 0), "ROU": (2.0, 0.6, 0),
    "ARG": (0.15, 2.2, 6), "CHL": (0.1, 4.5, 5), "BRA": (0.0, 0.1, 6),
    "MEX": (0.05, 0.1, 5), "URY": (0.0, 0.12, 6), "USA": (0.3, 4.0, 4),
    "AUS": (0.4, 9.0, 4), "NZL": (0.0, 1.0, 5), "ZAF": (0.6, 4.0, 6),
    "CAN": (0.0, 0.08, 5), "NAF": (22.0, 0.4, 0), "MDA": (2.0, 2.5, 0),
    "GEO": (0.8, 0.6, 0), "HRV": (0.6, 0.4, 0), "NLD": (0.2, 0.6, 0),
    "GBR": (0.4, 0.9, 0), "DNK": (0.1, 0.3, 0), "TUR": (0.3, 0.1, 0),
    "MDE": (0.3, 0.3, 0), "OCE": (1.5, 0.8, 0), "RUS": (0.2, 0.3, 0),
    "UKR": (0.5, 0.4, 0), "SEA": (0.0, 0.2, 5), "UZB": (0.3, 0.0, 0),
    "CHN": (0.0, 0.15, 6), "AZE": (0.2, 0.0, 0), "OAF": (0.1, 0.0, 0),
    # re-exporters: small flows that appear part-way through the sample
    "FIN": (0.0, 0.06, 4), "IRL": (0.0, 0.08, 3), "JPN": (0.05, 0.1, 0),
    "OAP": (0.0, 0.1, 2), "OLA": (0.1, 0.2, 0), "ONE": (0.0, 0.15, 3),
    "OWE": (0.03, 0.1, 0), "SWE": (0.0, 0.1, 4),
}


def _ramp(t: np.ndarray, start: int) -> np.ndarray:
    return np.clip((t - start + 1) / (8 - start + 1.0), 0.0, 1.0)


def synthetic_panel(seed: int = FIXTURE_SEED) -> Panel:
    """Generate the synthetic 47 x 9 panel (deterministic under ``seed``)."""
    rng = np.random.default_rng(seed)
    t = np.arange(len(PERIODS), dtype=float)
    countries = [
        Country(cid, name, world, lat, lon, temp, float(ch), float(mu), bool(na))
        for cid, name, world, lat, lon, temp, ch, mu, na in UNITS
    ]
    world_exports = 2.6e6 * (1.0 + 0.19 * t)  # kL
    world_imports = world_exports * (1.0 + 0.02 * rng.standard_normal(len(t)))
    rw_import_weight = 0.35 + 0.35 * (t / 8.0) ** 1.3

    exp_w, imp_w = {}, {}
    for c in countries:
        early, late, start = EXPORT_PROFILE.get(c.id, (0.0, 0.0, 0))
        if c.id == "NAF":
            w = early * np.exp(-0.9 * t) + late
        elif start == 0:
            w = early + (late - early) * (t / 8.0)
        else:
            w = early + (late - early) * _ramp(t, start) ** 1.5
        w = w * np.exp(0.08 * rng.standard_normal(len(t)))
        w[w < 0.02] = 0.0
        exp_w[c.id] = w
        base = rng.uniform(0.3, 3.0)
        if c.id in ("GBR", "DEU", "BEL", "NLD", "USA", "RUS", "CHE", "JPN", "DNK", "CAN"):
            base *= 4.0
        growth = rng.uniform(0.0, 0.25)
        imp_w[c.id] = base * (1.0 + growth * t) * np.exp(0.05 * rng.standard_normal(len(t)))

    ex_tot = sum(exp_w.values())
    rw_ids = [c.id for c in countries if c.world is WorldClass.REST_OF_WORLD]
    rw_imp = sum(imp_w[k] for k in rw_ids)
    other_imp = sum(v for k, v in imp_w.items() if k not in rw_ids)

    observations = []
    for k, c in enumerate(countries):
        vol_e = world_exports * exp_w[c.id] / ex_tot
        if c.world is WorldClass.REST_OF_WORLD:
            vol_i = world_imports * rw_import_weight * imp_w[c.id] / rw_imp
        else:
            vol_i = world_imports * (1.0 - rw_import_weight) * imp_w[c.id] / other_imp
        price_e = rng.uniform(0.8, 2.5) * (1.0 + (0.12 if c.world.is_new_world else 0.05) * t)
        price_i = rng.uniform(1.0, 2.5) * (1.0 + 0.06 * t)
        gdp0 = {OW: 9000.0, LNW: 4500.0, ANW: 14000.0, RW: 3500.0}[c.world]
        gdp = gdp0 * rng.uniform(0.5, 1.6) * (1.0 + rng.uniform(0.02, 0.05)) ** (5 * t)
        for p in PERIODS:
            j = p.index
            eu_from = max(EU_ENTRY.get(c.id, 9999), 1968)
            euro_from = max(EURO_ENTRY.get(c.id, 9999), 1999)
            observations.append(PanelObservation(
                country_id=c.id,
                period=p,
                export_vol=round(float(vol_e[j]), 3),
                export_val=round(float(vol_e[j] * price_e[j]), 3),
                import_vol=round(float(vol_i[j]), 3),
                import_val=round(float(vol_i[j] * price_i[j]), 3),
                gdp_pc=round(float(gdp[j]), 2),
                eu_years=sum(eu_from <= y <= 1998 for y in p.years),
                euro_years=sum(euro_from <= y <= 2005 for y in p.years),
            ))
    return Panel(tuple(countries), tuple(observations))


def fixture_dir() -> Path:
    env = os.environ.get("VINOREG_FIXTURE")
    return Path(env) if env else DATA_DIR


def fixture_paths() -> tuple[Path, Path]:
    d = fixture_dir()
    return d / "countries.csv", d / "panel.csv"


def load_fixture() -> Panel:
    """Load the synthetic fixture (or the ``VINOREG_FIXTURE`` override)."""
    return load_panel(*fixture_paths())


def write_fixture(directory: str | os.PathLike = DATA_DIR, seed: int = FIXTURE_SEED) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    write_panel(synthetic_panel(seed), directory / "countries.csv", directory / "panel.csv")
