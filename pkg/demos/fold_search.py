"""Folding polynomials for a few point sets."""
from qsys.foldsearch import search_min_degree, shift_square_fold

for S in ([1j], [1 + 1j, 1 - 1j], [1j, 1 + 2j], [1j, 2 + 1j, -1 + 3j]):
    q = shift_square_fold(S)
    rep = search_min_degree(S, d_max=6, restarts=24)
    table = ", ".join(f"{r.degree}:{r.best_residual:.1e}" for r in rep.table)
    found = rep.best.degree if rep.found else None
    print(f"S={S}\n  shift-square degree {q.degree} (stages {q.stages})\n"
          f"  search: degree {found}  [{table}]")
