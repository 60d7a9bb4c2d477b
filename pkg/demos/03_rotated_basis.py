"""
Same vector, different answer
=============================

Two observables share the eigenvector for box 1 but differ on the other two
boxes. The retrodicted probability of box 1 still depends on which of them
was measured, because the rest of the measurement is part of the condition.
"""

import math

import numpy as np

from retrodictor import (
    DensityOperator,
    Ket,
    pvm_from_kets,
    rotate_fixing_axis,
    rotated_basis_comparison,
)

s = 1 / math.sqrt(3)
boxes = pvm_from_kets([Ket(v) for v in np.eye(3)], ["box1", "box2", "box3"])
rho = DensityOperator.from_ket(Ket([s, s, s]))
phi = Ket([s, s, -s])

# sweep the rotation angle of boxes 2 and 3 about box 1
for angle in np.linspace(0, math.pi / 2, 7):
    value_P, value_rot = rotated_basis_comparison(rho, boxes, phi, [angle], "box1")
    print(f"angle {angle:5.3f}: Pr(box1) = {value_P:.6f} -> {value_rot:.6f}")

# phases are part of the parameterization as well
rotated = rotate_fixing_axis(boxes, "box1", [(math.pi / 4, math.pi / 3)])
print(rotated.ket("box2"))
