import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from vinoreg.features import (BASE_REGRESSORS, SPLIT_REGRESSORS, CoincidentCoordinatesError,
                              DegeneratePeriodError, Measure, build_design, dist_lat_3050,
                              export_share, export_shares, great_circle_km, membership_dummy,
                              nirw, nirw_series, quinq_dummies, rmp, rmp_matrix)
from vinoreg.fixture import fixture_paths
from vinoreg.panel import PERIODS, WorldClass, make_panel

import oracles
from conftest import country, observation, small_panel

OW, LNW, ANW, RW = (WorldClass.OLD_WORLD, WorldClass.LATIN_NEW_WORLD,
                    WorldClass.ANGLO_NEW_WORLD, WorldClass.REST_OF_WORLD)


@pytest.fixture(scope="module")
def raw():
    return oracles.read_raw(*fixture_paths())


# export shares ---------------------------------------------------------------

def test_single_exporter_has_full_share():
    panel = small_panel({"AAA": (OW, 500.0, 1.0), "BBB": (RW, 0.0, 1.0), "CCC": (RW, 0.0, 1.0)})
    assert export_share(panel, "AAA", PERIODS[0], Measure.VOLUME) == 1.0
    assert export_share(panel, "BBB", PERIODS[0], Measure.VOLUME) == 0.0


def test_share_by_definition():
    panel = small_panel({"A": (OW, 30.0, 1.0), "B": (OW, 70.0, 1.0), "C": (RW, 0.0, 1.0)})
    assert export_share(panel, "A", PERIODS[3], Measure.VOLUME) == pytest.approx(0.3, abs=1e-15)


def test_zero_world_exports_is_degenerate():
    panel = small_panel({"A": (OW, 0.0, 1.0), "B": (RW, 0.0, 1.0)})
    with pytest.raises(DegeneratePeriodError):
        export_share(panel, "A", PERIODS[0], Measure.VOLUME)


@pytest.mark.parametrize("measure", list(Measure))
def test_fixture_shares_match_brute_force(fixture_panel, raw, measure):
    countries, rows = raw
    for period in PERIODS:
        expected = oracles.shares(countries, rows, period.label, f"export_{measure.suffix}")
        for cid, value in expected.items():
            assert abs(export_share(fixture_panel, cid, period, measure) - value) <= 1e-12


@pytest.mark.parametrize("measure", list(Measure))
def test_shares_partition_unity(fixture_panel, measure):
    np.testing.assert_allclose(export_shares(fixture_panel, measure).sum(axis=0), 1.0, atol=1e-9)


# NIRW -------------------------------------------------------------------------

def test_nirw_zero_numerator():
    panel = small_panel({"A": (OW, 5.0, 3.0), "B": (RW, 2.0, 2.0)})
    assert nirw(panel, PERIODS[0], Measure.VOLUME) == 0.0


def test_nirw_direct_arithmetic():
    panel = small_panel({"A": (OW, 5.0, 70.0), "B": (RW, 0.0, 10.0), "C": (RW, 0.0, 20.0)})
    assert nirw(panel, PERIODS[0], Measure.VOLUME) == pytest.approx(0.30, abs=1e-15)


def test_nirw_can_be_negative():
    panel = small_panel({"A": (OW, 0.0, 10.0), "B": (RW, 50.0, 10.0)})
    assert nirw(panel, PERIODS[0], Measure.VOLUME) == pytest.approx(-2.0)


def test_nirw_zero_gross_imports_is_degenerate():
    panel = small_panel({"A": (OW, 1.0, 0.0), "B": (RW, 1.0, 0.0)})
    with pytest.raises(DegeneratePeriodError):
        nirw(panel, PERIODS[0], Measure.VOLUME)


@pytest.mark.parametrize("measure", list(Measure))
def test_fixture_nirw_matches_brute_force(fixture_panel, raw, measure):
    countries, rows = raw
    for period in PERIODS:
        expected = oracles.nirw(countries, rows, period.label, measure.suffix)
        assert abs(nirw(fixture_panel, period, measure) - expected) <= 1e-12


def test_nirw_vanishes_when_rest_of_world_rows_are_zeroed():
    spec = {"A": (OW, 5.0, 3.0), "B": (ANW, 1.0, 2.0), "C": (RW, 0.0, 0.0), "D": (RW, 0.0, 0.0)}
    np.testing.assert_array_equal(nirw_series(small_panel(spec), Measure.VALUE), 0.0)


# distances and RMP ----------------------------------------------------------------

def test_great_circle_closed_forms():
    assert great_circle_km((12.0, 34.0), (12.0, 34.0)) == 0.0
    assert great_circle_km((0.0, 0.0), (0.0, 180.0)) == pytest.approx(math.pi * 6371.0, abs=0.1)
    assert great_circle_km((90.0, 0.0), (0.0, 0.0)) == pytest.approx(math.pi * 6371.0 / 2, abs=0.1)


def _line_panel(gdps, distances):
    # partners placed on the equator so that the distance function below is exact
    countries = [country("C0", lon=0.0)] + [country(f"P{k}", lon=float(d)) for k, d in enumerate(distances)]
    obs = [observation("C0", 0, 1.0, 1.0, gdp=1.0)]
    obs += [observation(f"P{k}", 0, 1.0, 1.0, gdp=g) for k, g in enumerate(gdps)]
    return make_panel(countries, obs)


def _line_distance(a, b):
    return abs(a[1] - b[1])


def test_rmp_equal_weights_is_plain_mean():
    panel = _line_panel([10.0, 30.0], [5.0, -5.0])
    assert rmp(panel, "C0", PERIODS[0], _line_distance) == pytest.approx(20.0, abs=1e-12)


def test_rmp_direct_arithmetic():
    panel = _line_panel([12.0, 6.0], [1.0, 2.0])
    assert rmp(panel, "C0", PERIODS[0], _line_distance) == pytest.approx(10.0, abs=1e-12)


def test_rmp_coincident_coordinates_raise():
    panel = _line_panel([12.0, 6.0], [1.0, 1.0])
    with pytest.raises(CoincidentCoordinatesError):
        rmp_matrix(panel, _line_distance)
    with pytest.raises(CoincidentCoordinatesError):
        rmp(small_panel({"A": (OW, 1.0, 1.0), "B": (RW, 1.0, 1.0)}), "A", PERIODS[0])


def test_rmp_of_lone_unit_is_zero():
    panel = small_panel({"A": (OW, 1.0, 1.0)})
    assert rmp_matrix(panel)[0, 0] == 0.0


def test_fixture_rmp_matches_double_loop(fixture_panel, raw):
    countries, rows = raw
    m = rmp_matrix(fixture_panel)
    ids = fixture_panel.country_ids
    expected = oracles.rmp(countries, rows, "GBR", PERIODS[0].label)
    assert m[ids.index("GBR"), 0] == pytest.approx(expected, rel=1e-12, abs=0)
    for i, cid in enumerate(ids):
        for t in (0, 4, 8):
            value = oracles.rmp(countries, rows, cid, PERIODS[t].label)
            assert m[i, t] == pytest.approx(value, rel=1e-12, abs=0)
            assert rmp(fixture_panel, cid, PERIODS[t]) == pytest.approx(value, rel=1e-12, abs=0)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.01, 1e3))
def test_rmp_invariant_to_distance_scale(fixture_panel, c):
    base = rmp_matrix(fixture_panel)
    scaled = rmp_matrix(fixture_panel, lambda a, b: c * great_circle_km(a, b))
    np.testing.assert_allclose(scaled, base, rtol=1e-12)


# latitude band, membership, period dummies -----------------------------------------

@pytest.mark.parametrize("lat,expected", [(45, 0.0), (-34.6, 0.0), (60, 10.0), (10, 20.0),
                                          (30, 0.0), (50, 0.0), (-90, 40.0), (0, 30.0)])
def test_dist_lat_closed_forms(lat, expected):
    assert dist_lat_3050(lat) == pytest.approx(expected, abs=1e-12)


def test_fixture_dist_lat_matches_brute_force(fixture_panel, raw):
    countries, _ = raw
    for cid, row in countries.items():
        assert abs(dist_lat_3050(fixture_panel.country(cid).latitude) - oracles.dist_lat(float(row["latitude"]))) <= 1e-12


@settings(max_examples=200, deadline=None)
@given(st.floats(-90.0, 90.0))
def test_dist_lat_symmetric_and_lipschitz(lat):
    assert dist_lat_3050(lat) == dist_lat_3050(-lat)
    h = 1e-3
    if -90.0 <= lat + h <= 90.0:
        assert abs(dist_lat_3050(lat + h) - dist_lat_3050(lat)) <= h * (1 + 1e-9)


@pytest.mark.parametrize("years,fractional,binary", [(5, 1.0, 1.0), (0, 0.0, 0.0), (3, 0.6, 1.0), (2, 0.4, 0.0)])
def test_membership_dummy(years, fractional, binary):
    assert membership_dummy(years) == pytest.approx(fractional)
    assert membership_dummy(years, "binary") == binary


def test_membership_years_from_window():
    # EU member from 1968: within 1966-70 the covered years are 1968, 1969, 1970
    covered = sum(1968 <= y <= 1998 for y in PERIODS[1].years)
    assert covered == 3 and membership_dummy(covered) == pytest.approx(0.6)


@pytest.mark.parametrize("bad", [-1, 6, 2.5, True])
def test_membership_dummy_rejects_out_of_range(bad):
    with pytest.raises(ValueError):
        membership_dummy(bad)


def test_quinq_dummies():
    assert quinq_dummies(country("FRA", OW), PERIODS[0]) == (1.0, 1.0, 0.0)
    assert quinq_dummies(country("FRA", OW), PERIODS[2]) == (0.0, 0.0, 0.0)
    assert quinq_dummies(country("GBR", RW), PERIODS[0]) == (1.0, 0.0, 1.0)
    assert quinq_dummies(country("CHL", LNW), PERIODS[0]) == (1.0, 0.0, 0.0)


# design matrix --------------------------------------------------------------------------

def test_design_shapes(fixture_panel):
    d = build_design(fixture_panel, Measure.VOLUME, split=False)
    assert d.X.shape == (423, 15) and d.names == BASE_REGRESSORS
    assert d.group_counts == {"RW": 25, "OW": 12, "NW": 10}
    d = build_design(fixture_panel, Measure.VALUE, split=True)
    assert d.X.shape == (423, 17) and d.names == SPLIT_REGRESSORS
    assert d.group_counts == {"RW": 25, "OW": 12, "LNW": 5, "ANW": 5}


@pytest.mark.parametrize("split", [False, True])
@pytest.mark.parametrize("measure", list(Measure))
def test_design_invariants(fixture_panel, measure, split):
    d = build_design(fixture_panel, measure, split=split)
    assert np.all(np.isfinite(d.X)) and np.all((d.y >= 0) & (d.y <= 1))
    for t in range(9):
        assert abs(d.y[d.period_index == t].sum() - 1.0) <= 1e-9
    groups = ("OW", "LNW", "ANW") if split else ("OW", "NW")
    dummies = np.column_stack([d.column(g) for g in groups])
    assert set(np.unique(dummies)) <= {0.0, 1.0} and dummies.sum(axis=1).max() <= 1
    for g in groups:
        assert np.array_equal(d.column(f"NIRW_x_{g}"), d.column("NIRW") * d.column(g))
    for g in ("OW", "RW"):
        parent = d.column(g) if g == "OW" else 1.0 - dummies.sum(axis=1)
        assert np.array_equal(d.column(f"QUINQ61-65_x_{g}"), d.column("QUINQ61-65") * parent)
    assert sum(d.group_counts.values()) == d.n_countries


def test_design_matches_brute_force_rows(fixture_panel, raw):
    countries, rows = raw
    d = build_design(fixture_panel, Measure.VOLUME)
    for k in range(0, d.n_obs, 17):
        cid, t = d.country_ids[k], int(d.period_index[k])
        period = PERIODS[t].label
        assert abs(d.y[k] - oracles.shares(countries, rows, period)[cid]) <= 1e-12
        assert abs(d.column("NIRW")[k] - oracles.nirw(countries, rows, period)) <= 1e-12
        assert d.column("RMP")[k] == pytest.approx(oracles.rmp(countries, rows, cid, period), rel=1e-12)


def test_single_country_design_is_degenerate_but_defined():
    panel = small_panel({"A": (OW, 3.0, 2.0)})
    d = build_design(panel)
    np.testing.assert_array_equal(d.y, 1.0)
    np.testing.assert_array_equal(d.column("NIRW"), 0.0)


def test_design_csv_export(fixture_panel, tmp_path):
    d = build_design(fixture_panel)
    d.to_csv(tmp_path / "design.csv")
    lines = (tmp_path / "design.csv").read_text().splitlines()
    assert lines[0].split(",") == ["country_id", "period", "y", *BASE_REGRESSORS]
    assert len(lines) == 424
    first = lines[1].split(",")
    assert float(first[2]) == d.y[0] and [float(v) for v in first[3:]] == list(d.X[0])


def test_unknown_dummy_mode(fixture_panel):
    with pytest.raises(ValueError):
        build_design(fixture_panel, dummy_mode="ternary")
