"""Auditing local optimality conditions at candidate points.

Fits Lagrange multipliers by least squares, then decides: CQC (independent
active gradients), SCC (strict complementarity), SONC / SOSC (the Lagrangian
Hessian on the null space of the active Jacobian).

Run with:  python3 demos/02_local_optimality_audit.py
"""

import math

import numpy as np

from polyopt import audit_point
from polyopt.gallery import gallery_instance


def show(title, inst, point):
    report = audit_point(inst, point)
    word = {True: "yes", False: "NO", None: "inconclusive"}
    print(f"\n{title}")
    print(f"  point {np.round(report.point, 6)}  active set {list(report.active.indices)}")
    print(f"  stationarity residual {report.stationarity_residual:.2e}"
          + ("" if report.kkt_point else "   <- not a KKT point"))
    print(f"  lambda {np.round(report.lam, 6)}  mu {np.round(report.mu, 6)}")
    print(f"  CQC {word[report.cqc]}   SCC {word[report.scc]}   "
          f"SONC {word[report.sonc]}   SOSC {word[report.sosc]}")
    print(f"  projected Hessian eigenvalues {np.round(report.projected_eigenvalues, 6)}")
    return report


# A boundary minimizer: linear objective over the unit ball.  All four
# conditions hold, with the ball multiplier mu = |c|/2 strictly positive.
lin = gallery_instance("linear-ball")
s = math.sqrt(5.0)
show("linear objective at its ball-boundary minimizer", lin, [-1.0 / s, -2.0 / s])

# The same instance at a non-critical interior point: the gradient cannot be
# matched by any multipliers, so the stationarity residual stays large.
show("same instance at a non-critical point", lin, [0.0, 0.5])

# Equality-constrained least-norm point: strict second-order sufficiency.
eq = gallery_instance("equality-quadratic")
show("least-norm point on a line", eq, [0.5, 0.5])

# x^4 at the origin: a genuine minimizer whose Hessian vanishes, so the
# necessary condition holds while the sufficient one fails.
quartic = gallery_instance("quartic-flat")
show("flat quartic at the origin", quartic, [0.0])

# The Motzkin polynomial at the origin behaves the same way: the origin is a
# global minimizer but its Hessian is identically zero.
motzkin = gallery_instance("motzkin-ball")
show("Motzkin polynomial at the origin", motzkin, [0.0, 0.0, 0.0])
