import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qsys.abelian import (
    Hamiltonian,
    OneForm,
    OvalError,
    OvalFamily,
    Poly2,
    TrivialForm,
    basic_forms,
    count_ai_zeros,
    critical_values,
    envelope_fit,
    envelope_structure,
    period,
    verify_against_bound,
)
from qsys.analytic import restricted
from qsys.fixtures import elliptic

ELL = Hamiltonian.parse("x2**2 + x1**3 - x1")
CV = 2 / (3 * math.sqrt(3))


@pytest.fixture(scope="module")
def fam():
    return OvalFamily.around_minimum(ELL)


def test_poly2_basics():
    p = Poly2("x1**2*x2 + 3*x2")
    assert p.degree == 3
    assert p(2.0, 1.0) == 7.0
    assert p.diff(0).terms == {(1, 1): 2}
    assert (p * Poly2("x1")).degree == 4


def test_hamiltonian_profile():
    assert ELL.degree == 3 and ELL.n == 2
    assert ELL.chart_dimension == len(ELL.chart())


def test_critical_values():
    vals = critical_values(ELL)
    assert [v.real for v in vals] == pytest.approx([-CV, CV], abs=1e-12)
    assert critical_values(Hamiltonian.parse("x1**2 + x2**2")) == pytest.approx([0])
    assert critical_values(Hamiltonian.parse("x1*x2")) == pytest.approx([0])


def test_family_interval(fam):
    assert fam.interval == pytest.approx((-CV, CV))
    with pytest.raises(OvalError):
        fam.seed(0.5)


def test_circle_area():
    circle = Hamiltonian.parse("x1**2 + x2**2")
    # ∮ x1 dx2 is the enclosed area
    assert period(circle, 1.0, OneForm.monomial_dx2(1, 0)) == pytest.approx(math.pi, rel=1e-11)
    assert period(circle, 4.0, OneForm.monomial_dx2(1, 0)) == pytest.approx(4 * math.pi, rel=1e-11)


def test_trace_closes(fam):
    tr = fam.trace(0.1, [OneForm.monomial_dx2(1, 0)])
    assert tr.closure < 1e-8
    assert tr.level_drift < 1e-10
    assert tr.orientation == 1
    assert tr.integrals[0] > 0


def test_polar_agrees_with_trace(fam):
    forms = basic_forms(2) + [OneForm.monomial_dx2(4, 1)]
    ts = np.linspace(-0.3, 0.3, 7)
    I, dI, ok = fam.polar_periods(ts, forms, derivatives=True)
    assert ok.all()
    for k, t in enumerate(ts):
        J, dJ = fam.periods(float(t), forms, derivatives=True)
        assert np.allclose(I[k], J, rtol=1e-10, atol=1e-12)
        assert np.allclose(dI[k], dJ, rtol=1e-8, atol=1e-10)


@given(st.floats(-0.37, 0.37), st.integers(0, 3), st.integers(0, 3))
@settings(max_examples=20)
def test_exact_and_udH_vanish(t, i, j):
    family = OvalFamily.around_minimum(ELL)
    v = Poly2({(i, j): 1})
    u = Poly2({(j, i): 1, (0, 0): 2})
    vals = family.periods(t, [OneForm.exact(v), OneForm.u_dH(u, ELL)])
    assert np.all(np.abs(vals) < 1e-9)


def test_fixture_consistency(fam):
    """The hand-derived Picard-Fuchs system is satisfied by the quadrature periods."""
    rhs = restricted(elliptic(), (-1, 0))
    forms = [OneForm.monomial_dx2(1, 0), OneForm.monomial_dx2(2, 0)]
    ts = np.linspace(-0.37, 0.37, 15)
    I, dI = fam.periods_many(ts, forms, derivatives=True)
    for k, t in enumerate(ts):
        Om = np.asarray(rhs(complex(t))).real
        r = np.linalg.norm(dI[k] - Om @ I[k]) / max(1.0, np.linalg.norm(dI[k]))
        assert r < 1e-8


def test_fallback_near_separatrix(fam):
    forms = basic_forms(2)
    ts = [0.2, 0.383]
    _, _, ok = fam.polar_periods(ts, forms)
    assert ok[0] and not ok[1]
    I = fam.periods_many(ts, forms)
    assert np.allclose(I[1], fam.periods(0.383, forms), rtol=1e-12)


def test_envelope_structure():
    k, basis = envelope_structure(5, 2)
    assert k == 2 and len(basis) == len(basic_forms(2))
    with pytest.raises(ValueError):
        envelope_structure(0, 2)


@pytest.mark.parametrize("i,j", [(i, j) for i in range(6) for j in range(6) if 1 <= i + j + 1 <= 6])
def test_envelope_fit_all_monomials(fam, i, j):
    omega = OneForm.monomial_dx2(i, j)
    fit = envelope_fit(fam, omega, np.linspace(-0.36, 0.36, 40))
    assert fit.residual < 1e-7


def test_envelope_degree_is_needed(fam):
    omega = OneForm.monomial_dx2(4, 0)
    assert envelope_fit(fam, omega, np.linspace(-0.36, 0.36, 40), degree=0).residual > 1e-4


def _ratio_form(fam, tstar):
    a, b = fam.periods(tstar, [OneForm.monomial_dx2(2, 0), OneForm.monomial_dx2(1, 0)])
    c = a / b
    return OneForm.monomial_dx2(2, 0) + OneForm.monomial_dx2(1, 0).scale(-c)


def test_one_zero_at_chosen_level(fam):
    omega = _ratio_form(fam, 0.1)
    rep = count_ai_zeros(fam, omega, samples=400)
    assert rep.count == 1
    assert rep.roots[0] == pytest.approx(0.1, abs=1e-8)
    assert count_ai_zeros(fam, omega, samples=800).count == 1


def test_trivial_form(fam):
    exact = OneForm.exact(Poly2("x1**2*x2"))
    with pytest.raises(TrivialForm):
        count_ai_zeros(fam, exact, samples=100)
    chk = verify_against_bound(fam, exact, samples=100)
    assert chk.trivial and chk.verdict == "skipped"


def test_verify_against_bound(fam):
    chk = verify_against_bound(fam, _ratio_form(fam, -0.2), samples=300)
    assert chk.measured == 1 and chk.verdict == "<="
    assert chk.n == 2 and chk.form_degree == 3
