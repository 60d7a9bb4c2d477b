"""Numerical tolerances shared by every module.

All scenarios live in dimension <= 8 in double precision, which leaves
several digits of headroom under each of these thresholds.
"""

#: unit norm of kets
EPS_NORM = 1e-10
#: Hermiticity, idempotence, orthogonality, completeness, unit trace
EPS_STRUCT = 1e-10
#: floor on density-operator eigenvalues
EPS_PSD = 1e-9
#: |Tr P - rank| for projectors
EPS_RANK = 1e-8
#: cross-checks that accumulate arithmetic
EPS_CROSS = 1e-8
#: normalization of a joint distribution
EPS_JOINT = 1e-9
#: table entries above -EPS_NEGATIVE are clamped to zero on read
EPS_NEGATIVE = 1e-12
#: a branch or conditioning probability at or below this is "zero"
EPS_ZERO = 1e-14
#: prior and likelihood sums of a classical model
EPS_CLASSICAL = 1e-12
