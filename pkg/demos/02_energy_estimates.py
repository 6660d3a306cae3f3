"""
Energy estimates across eps
===========================

Fit the constant of the differential inequality for y on an eps = 0.5
calibration run, then check that it still controls y at smaller eps. The
dissipation table shows which integrals stay bounded as the domain grows.
"""

# %%
import numpy as np

from nutaxis import MonitorConfig, SolverParams, build_initial, get_fixture, make_grid, simulate
from nutaxis.harness import check_dissipation_bounds, check_gronwall, dissipation_table


def run(eps, dx=1 / 32):
    grid = make_grid(eps, int(round(2 / (eps * dx))))
    init = build_initial(get_fixture("gaussian"), grid)
    return simulate(init, SolverParams(), 1.0, monitors=MonitorConfig(sample_interval=0.01))


family = {eps: run(eps) for eps in (1.0, 0.5, 0.25, 0.125)}

# %%
cal = family[0.5]
for eps in (0.25, 0.125):
    rep = check_gronwall(family[eps], p=2.0, q=4.0, calibration=cal, tol=0.1)
    print(rep.summary())

# %%
# Time integrals of the dissipation terms. Everything but the quartic
# Fisher-type term settles; that one keeps growing while the sech tail of v0
# is still being uncovered by the larger domains.
table = dissipation_table(list(family.values()), 2.0)
for name, vals in table.items():
    print(f"{name:>15s}  " + "  ".join(f"{v:9.5f}" for v in np.atleast_1d(vals)))
print(check_dissipation_bounds(list(family.values()), 2.0, slack=0.2).summary())
