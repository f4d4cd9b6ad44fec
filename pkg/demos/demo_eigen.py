"""Principal half-eigenvalue of |D phi|^gamma F(D^2 phi) on an interval.

For gamma = 0 and F = trace on (0, pi) the exact value is 1 (first
Dirichlet Laplace eigenvalue); under refinement the discrete value is
second-order accurate.  For gamma > 0 the eigenvalue scales like
t^-(gamma+2) under domain dilation x -> t x.

Run:  python3 demos/demo_eigen.py
"""

import numpy as np

from deadcore import (Grid, OperatorSpec, EigenControl, IterationControl,
                      principal_eigenpair)

spec = OperatorSpec.linear_trace(np.eye(1))

print("gamma = 0 on (0, pi): exact lambda+ = 1")
g = Grid.interval(0.0, np.pi, 101)
for _ in range(4):
    pair = principal_eigenpair(g, spec, 0.0)
    print("  n=%4d  lambda+ = %.8f  error %.2e  (outer iterations %d)"
          % (g.n[0], pair.lambda_plus, abs(pair.lambda_plus - 1.0),
             pair.iterations))
    g = g.refine()

print()
print("gamma = 1: domain dilation x -> t x scales lambda+ by t^-3")
ctl = EigenControl(tol_lambda=1e-7, tol_residual=np.inf,
                   inner=IterationControl(tolerance=1e-9, max_steps=2_000_000))
t = 2.0
l1 = principal_eigenpair(Grid.interval(0.0, 1.0, 99), spec, 1.0, ctl).lambda_plus
l2 = principal_eigenpair(Grid.interval(0.0, t, 99), spec, 1.0, ctl).lambda_plus
print("  lambda+(0,1) = %.6f" % l1)
print("  lambda+(0,2) = %.6f  vs  lambda+(0,1)/8 = %.6f" % (l2, l1 / t ** 3))
