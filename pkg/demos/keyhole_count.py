"""Argument-principle counts on a keyhole and a triangle, with the per-piece ledger."""
from qsys.zerocount import KeyholeContour, Triangle, count_zeros

f = lambda t: (t * t - 1) * (t - 2j) * (t + 0.5)  # noqa: E731
K = KeyholeContour.around([0.0, 3.0])
rep = count_zeros(f, K)
print(f"keyhole around {K.points}, eps={K.eps}, R={K.R}")
for tag, v in rep.var_arg_ledger:
    print(f"  {tag:>8} {v:+.6f}")
print("zeros (exterior convention):", rep.zero_count, "residual", f"{rep.error_margin:.2e}",
      "deformed:", rep.deformation_applied)
print("zeros (interior convention):", count_zeros(f, K, boundary="interior").zero_count)

tri = Triangle(-1 - 1j, 2 - 1j, 0.5 + 3j)
print("\ntriangle", tri.vertices(), "->", count_zeros(f, tri).zero_count, "zeros")
