"""Fit the bundled synthetic panel and read off the entrant-versus-incumbent test.

Run with ``python3 demos/fit_fixture.py``.  Takes a few seconds.
"""

from vinoreg.estimator import ModelSpec, fit, hypothesis_test
from vinoreg.features import build_design
from vinoreg.fixture import load_fixture
from vinoreg.report import StarConvention, emit_chart_data, render_table

panel = load_fixture()
print(f"{len(panel.countries)} countries, {len(panel.periods)} periods")

# One fit per flow measure; the restriction on the NIRW terms is on by default.
results = []
for measure in ("volume", "value"):
    design = build_design(panel, measure)
    result = fit(design, ModelSpec(measure=measure))
    print(f"{measure}: loglik {result.loglik:.3f}, {result.n_censored} of {result.n_obs} rows at zero, "
          f"restriction residual {result.restriction_residual:.1e}")
    results.append(result)

print()
print(render_table(results, headers=["Volume", "Value"]))
print(render_table(results, StarConvention.CONVENTIONAL, fmt="markdown", headers=["Volume", "Value"]))

# Did New World exporters gain more from RW import growth than Old World ones?
for measure, result in zip(("volume", "value"), results):
    t = hypothesis_test(result)
    print(f"{measure}: delta = {t.delta:.4f} (se {t.se:.4f}), one-sided p = {t.p_value:.3f}")

# Share series behind the charts: OW, NW, RW exports and the RW import share.
for s in emit_chart_data(panel, "volume", north_africa_to_ow=True):
    print(f"{s.label:>10}: " + " ".join(f"{v:.3f}" for v in s.values))
