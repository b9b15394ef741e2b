"""
One binomial sample
===================

With a single two-cell sample and psi = theta_1 the exact interval is the
Clopper-Pearson interval. Here we check that against scipy's beta quantiles.
"""

import math

from scipy import stats

import exactmultinom as em

data = em.Dataset.from_counts([[7, 3]])
psi = em.cell_probability(0)

# %%
# B = 200 * 50 = 10 000 candidate parameter values per p-value.
config = em.InferenceConfig(alpha=0.05, psi0=0.5, maxit=200, chunksize=50)
result = em.infer(data, psi, config)
print("estimate      ", result.estimate)
print("exact CI      ", result.conf_int)
print("Clopper-Pearson", (float(stats.beta.ppf(0.025, 7, 4)), float(stats.beta.ppf(0.975, 8, 3))))

# %%
# The reported p-value stops early once it clears alpha/2 + 0.001. With
# early stopping switched off it converges to P(Bin(10, 0.5) >= 7).
p, diag = em.p_value(data, psi, 0.5, config=em.InferenceConfig(maxit=200, chunksize=50,
                                                             early_stop_threshold=math.inf))
print("p(0.5) =", p, " analytic", stats.binom.sf(6, 10, 0.5))
print("maximising theta", diag.argmax_theta)
