"""
Similarity of two categorical distributions
===========================================

The Bhattacharyya coefficient sum_i sqrt(theta_1i * theta_2i) equals 1 only
when both distributions agree. Below we get an exact interval for it from two
small samples and set it beside the percentile bootstrap.
"""

import exactmultinom as em

psi = em.bhattacharyya(2, 4)
print("psi at a fixed theta:", psi([0.45, 0.15, 0.3, 0.1, 0.05, 0.15, 0.4, 0.4]))

data = em.Dataset.from_counts([[4, 3, 2, 1], [2, 3, 3, 2]])
print("joint outcomes:", em.enumerate_joint(data.shape, psi).size)

result = em.infer(data, psi, em.InferenceConfig(seed=1))
print("estimate ", round(result.estimate, 4))
print("exact    ", [round(v, 4) for v in result.conf_int])
print("bootstrap", [round(v, 4) for v in em.bootstrap_ci(data, psi, em.BootstrapConfig(seed=1))])

# %%
# With estimates close to the upper limit of 1 the bootstrap interval
# collapses and often misses the truth, while the exact interval still
# reaches up to the boundary.
