"""
When Bayes's formula divides by zero
====================================

A spin-1/2 particle is prepared in z+, its y component is measured, and
then z- is found. How likely is it that the y measurement gave y+?

Plugging the unmeasured probability of z- into Bayes's formula fails:
that probability is zero, yet z- does happen once y has been measured.
"""

import math

from retrodictor import (
    DensityOperator,
    Ket,
    MeasurementPlan,
    RetrodictionQuery,
    UndefinedConditional,
    abl_fine,
    event_probability,
    joint_distribution,
    naive_bayes,
    pvm_from_kets,
)

s = 1 / math.sqrt(2)
z = pvm_from_kets([Ket([1, 0]), Ket([0, 1])], ["z+", "z-"])
y = pvm_from_kets([Ket([s, 1j * s]), Ket([s, -1j * s])], ["y+", "y-"])
rho = DensityOperator.from_ket(z.ket("z+"))

# the full joint distribution of (y outcome, z outcome): every entry is 1/4
dist = joint_distribution(rho, MeasurementPlan([y, z]))
for outcome, p in dist.items():
    print(outcome, round(p, 12))

# z- after an ignored y measurement vs. z- on the untouched state
print("Pr(z- after measuring y) =", event_probability(dist, [(2, "z-")]))
print("<z-|rho|z->              =", rho.expectation(z.ket("z-")))

query = RetrodictionQuery(rho, y, z.ket("z-"), "y+")
try:
    naive_bayes(query)
except UndefinedConditional as exc:
    print("naive Bayes:", exc)
print("ABL retrodiction:", abl_fine(query))
