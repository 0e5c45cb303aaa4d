"""Fold the Euler system dX = X dt/(2t) and look at its monodromy before and after."""
import numpy as np

from qsys import fixtures
from qsys.analytic import PathPlan, is_quasi_unipotent, monodromy, restricted, small_loop_monodromy
from qsys.qsystem import singular_fiber
from qsys.transforms import fold

q = fixtures.euler_half()
M = small_loop_monodromy(restricted(q), 0, 0.5).matrix
print("euler_half profile (s, m, d, l):", q.profile)
print("monodromy around 0:", np.round(M, 12).tolist(), "->", is_quasi_unipotent(M))

f = fold(q)
print("\nfolded profile:", f.profile, "law holds:", f.record.law_holds())
print("folded fiber:", singular_fiber(f).to_json())
rhs = restricted(f)
M1 = monodromy(rhs, PathPlan.circle(0, 0.5)).matrix
M2 = monodromy(rhs, PathPlan.circle(0, 0.5, turns=2)).matrix
print("folded monodromy:\n", np.round(M1, 10))
print("|M(γ²) - M(γ)²| =", float(np.max(np.abs(M2 - M1 @ M1))))
print("verdict:", is_quasi_unipotent(M1))
