import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qsys.analytic import PathPlan, ZeroOnPath, restricted
from qsys.fixtures import euler_half
from qsys.zerocount import (
    CountRejected,
    KeyholeContour,
    QSolution,
    Triangle,
    count_zeros,
    counting_function_estimate,
    petrov_segment_bound,
    sampled_variation,
    sign_changes,
    triangle_preimage_count,
    variation_of_argument,
)


def test_circle_windings():
    assert variation_of_argument(lambda z: z, PathPlan.circle(0, 1)) == pytest.approx(2 * math.pi)
    assert variation_of_argument(lambda z: z * z, PathPlan.circle(0, 1)) == pytest.approx(4 * math.pi)
    assert variation_of_argument(lambda z: z - 3, PathPlan.circle(0, 1)) == pytest.approx(0, abs=1e-12)


def test_keyhole_boundary_modes():
    # t² − 1 has +1 on the slit (boundary) and -1 on the uncut interval
    K = KeyholeContour.around([0.0])
    f = lambda t: t * t - 1  # noqa: E731
    ext = count_zeros(f, K)
    assert ext.zero_count == 1 and ext.deformation_applied
    assert count_zeros(f, K, boundary="interior").zero_count == 2


def test_keyhole_validation():
    with pytest.raises(ValueError):
        KeyholeContour([0.0, 1.0], eps=0.6, R=5)
    with pytest.raises(ValueError):
        KeyholeContour([0.0, 3.0], eps=0.1, R=5)
    K = KeyholeContour.around([-1.0, 2.0])
    assert K.eps == pytest.approx(0.25) and K.R == pytest.approx(5.0)
    assert K.contains(-1.5) and not K.contains(0.5) and K.contains(0.5 + 0.1j)
    assert K.path().is_closed()


def test_keyhole_ledger_tags():
    rep = count_zeros(lambda t: t - 2j, KeyholeContour.around([-1.0, 1.0]))
    tags = [tag for tag, _ in rep.var_arg_ledger]
    assert tags[:2] == ["Gamma+", "Gamma-"] and "gamma1-" in tags and "delta2+" in tags
    assert rep.zero_count == 1 and rep.accepted


def test_triangle_counts():
    tri = Triangle(-1 - 1j, 2 - 1j, 0 + 2j)
    assert tri.signed_area() > 0
    assert count_zeros(lambda z: (z - 0.1) * (z + 0.2j) * (z - 5), tri).zero_count == 2
    # clockwise input is reoriented
    assert count_zeros(lambda z: z, Triangle(0 + 2j, 2 - 1j, -1 - 1j)).zero_count == 1
    # zero on an edge: excluded by default, included on request
    edge = Triangle(-1 - 1j, 1 - 1j, 1j)
    f = lambda z: z + 1j  # noqa: E731
    assert count_zeros(f, edge).zero_count == 0
    assert count_zeros(f, edge, boundary="interior").zero_count == 1


def test_rejected_report_carries_residual():
    # √t around 0 winds by half a turn: a triangle cannot repair that
    sol = QSolution(restricted(euler_half()), 1.0, np.eye(1), [1.0])
    with pytest.raises(CountRejected) as err:
        count_zeros(sol, Triangle(-1 - 1j, 1 - 1j, 1j))
    assert err.value.report is not None
    assert err.value.report.error_margin == pytest.approx(0.5)


def test_qsolution_branch_count():
    # √t on a keyhole around 0 has no zeros in the domain
    rhs = restricted(euler_half())
    sol = QSolution(rhs, 1.0, np.eye(1), [1.0])
    assert count_zeros(sol, KeyholeContour.around([0.0])).zero_count == 0


def test_sign_changes_and_sampled_variation():
    assert sign_changes([1, -1, 0, -2, 3]) == 2
    ts = np.linspace(0, 2 * math.pi, 400)
    assert sampled_variation(np.exp(1j * ts)) == pytest.approx(2 * math.pi)
    with pytest.raises(ZeroOnPath):
        sampled_variation(np.exp(1j * np.linspace(0, 2 * math.pi, 5)))


def test_petrov_bound():
    assert petrov_segment_bound(lambda t: t * t + 1, (0, 1)) == 0.0
    F = lambda t: (t - 0.5) + 1j * (t - 0.3) * (t - 0.7)  # noqa: E731
    b = petrov_segment_bound(F, (0, 1))
    assert b == pytest.approx(3 * math.pi)
    ts = np.linspace(0, 1, 2001)
    assert abs(sampled_variation(F(ts))) <= b


@given(st.lists(st.complex_numbers(max_magnitude=1.5, allow_nan=False, allow_infinity=False),
                min_size=1, max_size=4))
def test_hypothesis_triangle_vs_roots(roots):
    tri = Triangle(-2 - 2j, 2 - 2j, 2j)
    a, b, c = tri.vertices()
    edges = [PathPlan.line(a, b), PathPlan.line(b, c), PathPlan.line(c, a)]
    if any(min(seg.distance(z) for seg in p.segments) < 1e-3 for z in roots for p in edges):
        return
    f = lambda z: np.prod([z - r for r in roots])  # noqa: E731
    assert count_zeros(f, tri).zero_count == sum(tri.contains(z) for z in roots)


def test_preimage_components():
    assert triangle_preimage_count(Triangle(-1 - 1j, 1 - 1j, 1j)) == 1
    assert triangle_preimage_count(Triangle(1 + 1j, 3 + 1j, 2 + 3j)) == 2


def test_counting_function_estimate():
    est = counting_function_estimate(lambda z: z ** 3 - 0.125, radius=1.0, samples=40, seed=3)
    assert 1 <= est.lower_bound <= 3
    assert est.to_json()["triangles_tried"] == 40


def test_even_order_zero_on_contour():
    # a double root on a slit turns the argument without any jump
    K = KeyholeContour.around([-3.0, 3.0])
    f = lambda t: -(t - 1) ** 2  # noqa: E731
    rep = count_zeros(f, K)
    assert rep.zero_count == 0 and rep.deformation_applied
    assert count_zeros(f, K, boundary="interior").zero_count == 2
    tri = Triangle(-1 - 1j, 2 - 1j, 0 + 2j)
    assert count_zeros(lambda z: (z + 1j) ** 2, tri).zero_count == 0
