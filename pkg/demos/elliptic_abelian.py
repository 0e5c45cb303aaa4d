"""Abelian integrals over the ovals of H = x2² + x1³ - x1."""
import numpy as np

from qsys.abelian import (
    Hamiltonian,
    OneForm,
    OvalFamily,
    count_ai_zeros,
    critical_values,
    envelope_fit,
    verify_against_bound,
)

H = Hamiltonian.parse("x2**2 + x1**3 - x1")
print("critical values:", [round(v.real, 9) for v in critical_values(H)])
fam = OvalFamily.around_minimum(H)
print("oval interval:", fam.interval)

ts = np.linspace(-0.37, 0.37, 40)
for i, j in [(1, 0), (2, 0), (4, 0), (5, 0), (3, 2)]:
    om = OneForm.monomial_dx2(i, j)
    fit = envelope_fit(fam, om, ts)
    print(f"x1^{i} x2^{j} dx2: envelope degree {fit.degree}, residual {fit.residual:.1e}")

# a combination of x1 dx2 and x1² dx2 with a zero at t = 0.1
a, b = fam.periods(0.1, [OneForm.monomial_dx2(2, 0), OneForm.monomial_dx2(1, 0)])
om = OneForm.monomial_dx2(2, 0) + OneForm.monomial_dx2(1, 0).scale(-a / b)
rep = count_ai_zeros(fam, om, samples=600)
print("\nzeros:", rep.count, rep.roots)
print("bound check:", verify_against_bound(fam, om, report=rep).to_json())
