"""Positivity threshold in the size of the negative part of the weight.

Sweep the family a_s = a+ - s a- built from sin(pi x) on (0, 2): for small
s the relaxed solution stays positive on the ball inside {a > 0}; past a
threshold s* it collapses to zero there.  `estimate_threshold` brackets s*
by coarse probing plus bisection.

Run:  python3 demos/demo_threshold_sweep.py
"""

import numpy as np

from deadcore import (Grid, WeightField, OperatorSpec, ProblemSpec,
                      IterationControl, estimate_threshold)

g = Grid.interval(0.0, 2.0, 199)
w = WeightField.sinsplit(g, 1.0).scaled(30.0)
spec = OperatorSpec.linear_trace(np.eye(1))
ball = (0.1, 0.9)


def family(s):
    return ProblemSpec(g, spec, 0.0, 0.5, w.with_negative_scale(s))


rep = estimate_threshold(family, "s", (0.0, 4.0), ball,
                         ctl=IterationControl(tolerance=1e-7),
                         probes=8, bisect_steps=8)

print("status   :", rep.status)
print("monotone :", rep.monotone)
print("estimate : s* = %.4f" % rep.estimate)
print("bracket  : [%.4f, %.4f]" % rep.final_bracket)
print()
print("probe record (parameter, verdict):")
for pr in rep.probes:
    print("  s = %.4f  ->  %s" % (pr.value, pr.verdict))
