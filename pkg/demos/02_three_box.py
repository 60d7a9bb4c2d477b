"""
Three boxes, two certainties
============================

A particle is pre-selected in (1,1,1)/sqrt3 and post-selected in
(1,1,-1)/sqrt3. Looking only in box 1 it is certainly found there; looking
only in box 2 it is certainly found there too. Opening all boxes gives 1/3
each. Each number answers a different experiment.
"""

from retrodictor import three_box_scenario

report = three_box_scenario()

for box, (value, oracle) in report.coarse.items():
    print(f"only ask about {box}: Pr = {value:.12g}  (oracle {oracle:.12g})")

for box, (value, oracle) in report.fine.items():
    print(f"open all boxes, {box}: Pr = {value:.12g}  (oracle {oracle:.12g})")

print("difference for box 1:", report.coarse_fine_gap)
