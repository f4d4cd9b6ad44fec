"""Recover a dead-core solution and classify its free boundary.

The closed-form profile of the worked example (gamma = 1, q = 0.8 on
(-pi/2, pi)) vanishes identically on a subinterval and is positive near the
right endpoint; relaxing the discrete problem from a perturbed start should
come back to it, and `classify` should flag the dead core.

Run:  python3 demos/demo_deadcore_solution.py
"""

import numpy as np

from deadcore import (Grid, GridFunction, OperatorSpec, ProblemSpec,
                      IterationControl, example_instance, solve, classify,
                      hopf_bound, residual)

inst = example_instance(gamma=1.0, q=0.8)
print("worked example: gamma=%g, q=%g on (%.4f, %.4f)"
      % (inst.gamma, inst.q, *inst.domain))

g = Grid.interval(*inst.domain, 400)
spec = OperatorSpec.linear_trace(np.eye(1))
p = ProblemSpec(g, spec, inst.gamma, inst.q, inst.weight_on(g))

# start 10 percent above the known profile and relax back down
v = inst.solution_on(g)
u0 = GridFunction(g, 1.1 * v.values)
rep = solve(p, init="given", u0=u0, ctl=IterationControl(tolerance=1e-8))
print("converged=%s after %d steps, residual %.2e"
      % (rep.converged, rep.steps, rep.residual_sup))

err = np.max(np.abs(rep.solution.values - v.values))
print("sup error against the closed form: %.3e  (h = %.3e)" % (err, g.h[0]))

cls = classify(rep.solution)
print("verdict: %s" % cls.verdict)
x = g.axis(0)
core = x[cls.dead_core_nodes]
if core.size:
    print("dead core spans [%.4f, %.4f] (%d nodes)"
          % (core[0], core[-1], core.size))
print("Hopf boundary-derivative bound: %.4f" % hopf_bound(rep.solution))

r = residual(p, rep.solution)
print("pointwise residual sup over interior: %.3e"
      % np.max(np.abs(g.interior(r.values))))
