"""
Bounds on a causal risk difference
==================================

With a binary instrument Z, treatment X and outcome Y the average effect of
X on Y is only partially identified. Its sharp lower and upper bounds are
functions of P(x, y | z), which makes them multinomial parameter functions
with two samples (one per instrument arm) of four cells each.
"""

import numpy as np

import exactmultinom as em
from exactmultinom.simulation import DiscreteSEM, load_scenario, run_coverage

# %%
# A confounded model where the instrument moves X a lot.
sem = DiscreteSEM(pu=[0.6, 0.4], qx=[[0.1, 0.8, 0, 0.1], [0.2, 0.6, 0, 0.2]],
                  qy=[[0.3, 0.3, 0.1, 0.3], [0.35625, 0.14375, 0.2, 0.3]])
p = sem.observed()
lower, upper = em.causal_lower_bound(), em.causal_upper_bound()
print("true effect", sem.beta(), " bounds", (lower(p), upper(p)))

# %%
# Ten observations, five per arm, and an exact interval for the lower bound.
rng = np.random.default_rng(3)
data = em.Dataset.from_counts([rng.multinomial(5, p[:4]), rng.multinomial(5, p[4:])])
print("counts", data.counts)
print("exact CI for the lower bound", em.confidence_interval(data, lower))

# %%
# A short coverage run of the bundled scenario (see ``exactmultinom simulate``).
for row in run_coverage(load_scenario("causal_lower_n10"), replicates=40):
    print(row.method, row.coverage, round(row.mean_width, 3))
