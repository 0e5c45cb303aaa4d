import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from qsys.bounds import (
    BoundParams,
    TooLarge,
    add,
    bound_abelian,
    bound_main,
    bound_qsystem,
    bound_real_pk,
    compare,
    envelope_degree,
    evaluate_exact,
    exp_plus,
    exp_tower,
    gauss_manin_profile,
    geom,
    linear_part,
    lit,
    mul,
    order_bound,
    power,
    real_pk_step,
    render,
)


def test_oplus_instantiation():
    # exp⁺(x) = (2+x)^x
    assert [evaluate_exact(exp_plus(x)) for x in (1, 3, 4)] == [3, 125, 1296]


def test_order_bound_values():
    assert evaluate_exact(order_bound(2, 1, 2, 2)) == 16
    assert evaluate_exact(order_bound(2, 2, 2, 2)) == 65536


def test_render():
    assert render(bound_qsystem(2, 1, 1, 1)) == "2↑(2↑10.0)"
    assert render(lit(5)) == "5.0"


def test_main_linear_coefficient():
    c, k, _ = linear_part(bound_main(2, 1, 1, 1, 1, 1))
    assert evaluate_exact(c) == 3280


def test_real_pk_geometric_coefficients():
    assert evaluate_exact(linear_part(bound_real_pk(2, 1, 1, 1, 3, 2, 1))[0]) == 7
    assert evaluate_exact(linear_part(bound_real_pk(2, 1, 1, 1, 5, 1, 1))[0]) == 5


def test_gauss_manin_and_envelope():
    p = gauss_manin_profile(2)
    assert (p.m, p.ell, p.d) == (10, 4, 4)
    assert envelope_degree(10, 2) == 4
    assert envelope_degree(9, 2) == 3


def test_parameter_validation():
    with pytest.raises(ValueError):
        BoundParams(ell=0)
    with pytest.raises(ValueError):
        bound_main(2, 1, 1, 1, 0, 1)


def test_tower_ordering():
    assert compare(exp_tower(1, 3), exp_tower(10, 2)) == "<"
    assert compare(exp_tower(10, 2), exp_tower(1, 3)) == ">"
    assert compare(exp_tower(3, 6), exp_tower(3, 6)) == "="


def test_monotone_in_parameters():
    assert compare(bound_abelian(2, 3), bound_abelian(2, 4)) == "<"
    assert compare(bound_abelian(2, 3), bound_abelian(3, 3)) == "<"
    assert compare(bound_main(2, 1, 1, 1, 1, 1), bound_main(2, 1, 1, 1, 1, 2)) == "<"


def test_real_pk_induction():
    # with the literal dimension map ℓ -> 4ℓ² the step inequality fails;
    # with ℓ -> ℓ² it holds
    for r in (2, 3, 4):
        assert compare(*real_pk_step(2, 1, 1, 1, r, 2, 1)) == ">"
        assert compare(*real_pk_step(2, 1, 1, 1, r, 2, 1, ell_map=lambda l: l * l)) == "<"


def test_exact_limit():
    with pytest.raises(TooLarge):
        evaluate_exact(exp_tower(2, 6))


small = st.integers(0, 40)


@st.composite
def exprs(draw, depth=2):
    if depth == 0:
        return lit(draw(small))
    kind = draw(st.sampled_from(["lit", "add", "mul", "pow", "geom", "expp"]))
    if kind == "lit":
        return lit(draw(small))
    if kind == "pow":
        return power(draw(exprs(depth - 1)), lit(draw(st.integers(0, 6))))
    if kind == "geom":
        return geom(draw(st.integers(1, 9)), draw(st.integers(0, 12)))
    if kind == "expp":
        return exp_plus(draw(st.integers(0, 30)))
    op = add if kind == "add" else mul
    return op(draw(exprs(depth - 1)), draw(exprs(depth - 1)))


@given(exprs(), exprs())
def test_compare_agrees_with_integers(a, b):
    x, y = evaluate_exact(a), evaluate_exact(b)
    v = compare(a, b)
    assert v == ("<" if x < y else ">" if x > y else "=")


def test_compare_near_ties():
    rng = random.Random(3)
    for _ in range(200):
        x = rng.randint(1, 10 ** 6)
        e = power(lit(x), lit(rng.randint(2, 40)))
        assert compare(e, add(e, 1)) == "<"
        assert compare(mul(e, 2), add(e, e)) == "="
