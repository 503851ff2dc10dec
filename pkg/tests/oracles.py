"""Brute-force recomputation of the regressors straight from the raw CSV files.

Nothing here imports the package; every quantity is re-derived with plain
loops so the comparisons in the tests are independent of the library code.
"""

import csv
import math


def read_raw(countries_path, panel_path):
    with open(countries_path, newline="") as fh:
        countries = {row["id"]: row for row in csv.DictReader(fh)}
    with open(panel_path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return countries, rows


def shares(countries, rows, period, column="export_vol"):
    total = 0.0
    for r in rows:
        if r["period"] == period:
            total += float(r[column])
    return {r["country_id"]: float(r[column]) / total for r in rows if r["period"] == period}


def nirw(countries, rows, period, suffix="vol"):
    net = 0.0
    gross = 0.0
    for r in rows:
        if r["period"] != period:
            continue
        imp = float(r["import_" + suffix])
        gross += imp
        if countries[r["country_id"]]["world"] == "RW":
            net += imp - float(r["export_" + suffix])
    return net / gross


def haversine(lat1, lon1, lat2, lon2, radius=6371.0):
    p1, p2 = math.radians(lat1), math.radians(lat2)
    dp = p2 - p1
    dl = math.radians(lon2 - lon1)
    a = math.sin(dp / 2) ** 2 + math.cos(p1) * math.cos(p2) * math.sin(dl / 2) ** 2
    return 2 * radius * math.atan2(math.sqrt(a), math.sqrt(1 - a))


def rmp(countries, rows, cid, period):
    gdp = {r["country_id"]: float(r["gdp_pc"]) for r in rows if r["period"] == period}
    me = countries[cid]
    num = den = 0.0
    for other, c in countries.items():
        if other == cid:
            continue
        d = haversine(float(me["latitude"]), float(me["longitude"]),
                      float(c["latitude"]), float(c["longitude"]))
        num += gdp[other] / d
        den += 1 / d
    return num / den


def dist_lat(latitude):
    a = abs(latitude)
    return max(0.0, a - 50.0) + max(0.0, 30.0 - a)
