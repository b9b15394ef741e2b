"""
How the running p-value settles
===============================

The p-value is a maximum over random candidates, so its running value can
only go up. This traces it chunk by chunk for a few null values.
"""

import exactmultinom as em
from exactmultinom.simulation import stability_traces

data = em.Dataset.from_counts([[5, 0]])
rows = stability_traces(data, em.cell_probability(0), [0.3, 0.5, 0.7],
                        em.InferenceConfig(maxit=200, chunksize=50))
for psi0 in (0.3, 0.5, 0.7):
    series = [(it, p) for x, it, p in rows if x == psi0]
    picks = [series[i] for i in (0, 9, 49, 199)]
    print(psi0, "  ".join(f"B={it}: {p:.5f}" for it, p in picks), f"  analytic {psi0 ** 5:.5f}")
