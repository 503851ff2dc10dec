import numpy as np
import pytest

from vinoreg.fixture import load_fixture
from vinoreg.panel import PERIODS, Country, PanelObservation, WorldClass, make_panel


@pytest.fixture(scope="session")
def fixture_panel():
    return load_fixture()


def country(cid, world=WorldClass.REST_OF_WORLD, lat=10.0, lon=0.0, temp=20.0,
            christ=1.0, muslim=0.0, north_africa=False):
    return Country(cid, cid.title(), world, lat, lon, temp, christ, muslim, north_africa)


def observation(cid, t, export=0.0, imp=0.0, gdp=1.0, eu=0, euro=0, value_factor=2.0):
    return PanelObservation(cid, PERIODS[t], export, export * value_factor, imp,
                            imp * value_factor, gdp, eu, euro)


def small_panel(spec, periods=range(9)):
    """Panel from ``{id: (world, exports, imports)}`` with constant flows."""
    countries = [country(cid, world) for cid, (world, _, _) in spec.items()]
    obs = [observation(cid, t, e, i) for cid, (_, e, i) in spec.items() for t in periods]
    return make_panel(countries, obs)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def toy_design(rng, n_countries=3, n_periods=4, n_regressors=2, theta=None, censor_shift=0.0,
               scales=None):
    """Small random censored RE design and the theta it was drawn from.

    ``theta`` defaults to a random draw with sigmas log-uniform on [0.05, 2].
    ``censor_shift`` lowers the index to push more rows to the limit.
    """
    from vinoreg.features import DesignMatrix

    k = n_regressors + 1
    if theta is None:
        beta = rng.normal(0.0, 1.0, k)
        theta = np.concatenate([beta, rng.uniform(np.log(0.05), np.log(2.0), 2)])
    theta = np.asarray(theta, dtype=float)
    scales = np.ones(n_regressors) if scales is None else np.asarray(scales, dtype=float)
    n = n_countries * n_periods
    X = rng.standard_normal((n, n_regressors)) * scales
    ids = np.repeat([f"C{i}" for i in range(n_countries)], n_periods)
    period = np.tile(np.arange(n_periods), n_countries)
    alpha = np.repeat(rng.standard_normal(n_countries) * np.exp(theta[k]), n_periods)
    y_star = theta[0] - censor_shift + X @ theta[1:k] + alpha + rng.standard_normal(n) * np.exp(theta[k + 1])
    design = DesignMatrix(np.maximum(y_star, 0.0), X, tuple(f"x{j + 1}" for j in range(n_regressors)),
                          ids.astype(object), period)
    return design, theta
