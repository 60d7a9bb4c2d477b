"""
Queries always name the whole experiment
========================================

A joint distribution is built for a complete measurement plan. Marginals
sum over observed-but-ignored slots; dropping a slot is a different plan.
"""

import numpy as np

from retrodictor import MeasurementPlan, conditional, event_probability, joint_distribution
from retrodictor.qla import coarsen, random_density, random_fine_pvm

rng = np.random.default_rng(4)
rho = random_density(3, rng)
P = random_fine_pvm(3, rng, ["p1", "p2", "p3"])
Q = random_fine_pvm(3, rng, ["q1", "q2", "q3"])
R = coarsen(random_fine_pvm(3, rng, ["r1", "r2", "r3"]), [["r1"], ["r2", "r3"]])

three = joint_distribution(rho, MeasurementPlan([P, Q, R]))
two = joint_distribution(rho, MeasurementPlan([Q, R]))

# Pr(r1 last) with and without the first observation of P
print("Pr(r1 | P, Q measured) =", event_probability(three, [(3, "r1")]))
print("Pr(r1 | Q measured)    =", event_probability(two, [(2, "r1")]))

# retrodict the first outcome from the last one
for p in P.labels:
    print(p, conditional(three, [(1, p)], [(3, "r1")]))
