"""Q-system data model: a matrix one-form with its certified (s, m, d, ℓ) profile."""
from __future__ import annotations

import json
from fractions import Fraction
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .algebra import (
    AlgebraError,
    LatticePolynomial,
    MatrixOneForm,
    RationalFunction,
    integrability_defect,
    restrict_line,
)

SCHEMA = "qsys-schema-1"
CLUSTER_TOL = 1e-8


class ProfileError(AlgebraError):
    pass


class QSystem:
    """A rational matrix one-form together with its complexity profile.

    ``d`` is a certified upper bound on the degree in the time coordinate
    of every numerator and denominator (the quantity that bounds the number
    of poles on each fiber).  ``s``, ``m`` and ``ℓ`` are recomputed from the
    form; ``d`` may be declared larger than measured, never smaller.
    """

    def __init__(self, form: MatrixOneForm, d: int | None = None, *, name: str = "",
                 integrability_checked: bool = False, regularity_probed: bool = False,
                 quasiunipotence_probed: bool = False):
        measured = form.time_degree()
        if d is None:
            d = measured
        if d < measured:
            raise ProfileError(f"declared degree {d} is below the measured time degree {measured}")
        self.form = form
        self.s = form.size()
        self.m = form.base_dim
        self.d = int(d)
        self.ell = form.dims
        self.name = name
        self.integrability_checked = integrability_checked
        self.regularity_probed = regularity_probed
        self.quasiunipotence_probed = quasiunipotence_probed
        self.record = None  # TransformRecord of the construction that produced this system

    @property
    def profile(self) -> tuple[int, int, int, int]:
        return (self.s, self.m, self.d, self.ell)

    def __repr__(self):
        s, m, d, ell = self.profile
        label = f"{self.name!r}, " if self.name else ""
        return f"QSystem({label}s={s}, m={m}, d={d}, ell={ell})"

    def __eq__(self, other):
        if not isinstance(other, QSystem):
            return NotImplemented
        return self.form == other.form and self.d == other.d

    def to_json(self) -> dict:
        return {
            "schema": SCHEMA,
            "kind": "qsystem",
            "name": self.name,
            "profile": {"s": self.s, "m": self.m, "d": self.d, "l": self.ell},
            "flags": {
                "integrability_checked": self.integrability_checked,
                "regularity_probed": self.regularity_probed,
                "quasiunipotence_probed": self.quasiunipotence_probed,
            },
            "form": self.form.to_json(),
        }

    @classmethod
    def from_json(cls, data: dict) -> "QSystem":
        if data.get("schema") != SCHEMA:
            raise ProfileError(f"unsupported schema {data.get('schema')!r}, expected {SCHEMA!r}")
        form = MatrixOneForm.from_json(data["form"])
        prof = data.get("profile", {})
        q = cls(form, prof.get("d"), name=data.get("name", ""), **data.get("flags", {}))
        for key, val in (("s", q.s), ("m", q.m), ("l", q.ell)):
            if key in prof and int(prof[key]) != val:
                raise ProfileError(f"declared {key}={prof[key]} but the form gives {val}")
        return q

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))

    def save(self, path) -> None:
        Path(path).write_text(self.dumps() + "\n")

    @classmethod
    def load(cls, path) -> "QSystem":
        return cls.from_json(json.loads(Path(path).read_text()))


@dataclass(frozen=True)
class IntegrabilityVerdict:
    integrable: bool
    witness: tuple | None = None  # ((i, j), (a, b), entry of dΩ - Ω∧Ω)

    def __bool__(self):
        return self.integrable


def check_integrability(Q: QSystem | MatrixOneForm) -> IntegrabilityVerdict:
    """Exact test of ``dΩ = Ω∧Ω``; the witness is the first nonzero defect entry."""
    form = Q.form if isinstance(Q, QSystem) else Q
    defect = integrability_defect(form)
    hit = defect.first_nonzero()
    if hit is None:
        if isinstance(Q, QSystem):
            Q.integrability_checked = True
        return IntegrabilityVerdict(True)
    return IntegrabilityVerdict(False, hit)


@dataclass
class SingularFiber:
    params: tuple
    points: list = field(default_factory=list)
    multiplicities: list = field(default_factory=list)
    includes_infinity: bool = False

    def __len__(self):
        return len(self.points) + int(self.includes_infinity)

    @property
    def finite(self) -> np.ndarray:
        return np.array(self.points, dtype=complex)

    def to_json(self) -> dict:
        return {
            "params": [str(p) for p in self.params],
            "points": [[float(z.real), float(z.imag)] for z in self.points],
            "multiplicities": list(self.multiplicities),
            "includes_infinity": self.includes_infinity,
        }


def _cluster(roots, tol=CLUSTER_TOL):
    """Greedy merge of complex numbers closer than ``tol`` (relative)."""
    centers, members = [], []
    for z, mult in roots:
        for k, c in enumerate(centers):
            if abs(z - c) <= tol * max(1.0, abs(c)):
                members[k] = max(members[k], mult)
                break
        else:
            centers.append(complex(z))
            members.append(mult)
    return centers, members


def _polish(coeffs_high_low, r):
    p = np.poly1d(coeffs_high_low)
    dp = p.deriv()
    out = []
    for z in r:
        for _ in range(3):
            dz = dp(z)
            if dz == 0:
                break
            step = p(z) / dz
            if not np.isfinite(step):
                break
            z = z - step
        out.append(z)
    return out


def _roots_with_multiplicity(coeffs_low_high) -> list[tuple[complex, int]]:
    """Roots of a univariate polynomial; exact square-free splitting for rational input."""
    if len(coeffs_low_high) <= 1:
        return []
    if all(isinstance(c, (int, Fraction)) for c in coeffs_low_high):
        import sympy

        x = sympy.Symbol("x")
        poly = sympy.Poly([sympy.Rational(c.numerator, c.denominator) if isinstance(c, Fraction)
                           else sympy.Integer(c) for c in reversed(coeffs_low_high)], x, domain="QQ")
        out = []
        for factor, mult in poly.sqf_list()[1]:
            cs = [complex(c) for c in factor.all_coeffs()]
            if len(cs) <= 1:
                continue
            for z in _polish(cs, np.roots(cs)):
                out.append((complex(z), mult))
        return out
    cs = [complex(c) for c in reversed(coeffs_low_high)]
    return [(complex(z), 1) for z in _polish(cs, np.roots(cs))]


def singular_fiber(Q: QSystem | MatrixOneForm, params=()) -> SingularFiber:
    """Poles of the restricted system ``Ω_{λ'}(t)`` on the line, plus infinity.

    Roots of all nonzero entry denominators are merged within a relative
    tolerance of 1e-8.  Infinity is singular when, after ``t -> 1/u``, some
    entry of ``-Ω(1/u)/u^2`` has a pole at ``u = 0``.
    """
    form = Q.form if isinstance(Q, QSystem) else Q
    rs = restrict_line(form, params)
    seen = set()
    roots = []
    infinity = False
    for num, den in rs.nonzero_entries():
        if len(num) - 1 >= len(den) - 2:
            infinity = True
        key = tuple(den)
        if key in seen:
            continue
        seen.add(key)
        roots.extend(_roots_with_multiplicity(den))
    centers, mults = _cluster(roots)
    order = sorted(range(len(centers)),
                   key=lambda k: (round(centers[k].real, 10), round(centers[k].imag, 10)))
    return SingularFiber(
        params=tuple(rs.params),
        points=[centers[k] for k in order],
        multiplicities=[mults[k] for k in order],
        includes_infinity=infinity,
    )


def nu_upper_bound(Q: QSystem) -> int:
    """``ℓ²·d``: each of the ℓ² entries has at most ``d`` poles on a fiber."""
    return Q.ell ** 2 * Q.d


def poly_from_sympy(expr, gens) -> LatticePolynomial:
    import sympy

    p = sympy.Poly(sympy.expand(expr), *gens)
    terms = {}
    for mono, c in p.terms():
        c = sympy.Rational(c)
        if c.q != 1:
            raise AlgebraError(f"non-integer coefficient {c} in {expr}")
        terms[tuple(int(e) for e in mono)] = int(c.p)
    return LatticePolynomial(terms, len(gens))


def rational_from_sympy(expr, gens) -> RationalFunction:
    """Integer-coefficient fraction from a sympy expression (after ``together``)."""
    import sympy

    num, den = sympy.fraction(sympy.together(sympy.sympify(expr)))
    num, den = sympy.expand(num), sympy.expand(den)
    # clear rational coefficients that ``together`` may leave behind
    scale = sympy.ilcm(*[sympy.Rational(c).q for c in
                         sympy.Poly(num, *gens).coeffs() + sympy.Poly(den, *gens).coeffs()])
    return RationalFunction(poly_from_sympy(num * scale, gens), poly_from_sympy(den * scale, gens))


def form_from_sympy(components, names) -> MatrixOneForm:
    """Build a one-form from nested lists of sympy expressions (strings allowed)."""
    import sympy

    gens = sympy.symbols(list(names))
    local = {n: g for n, g in zip(names, gens)}
    comps = []
    for mat in components:
        comps.append([[rational_from_sympy(sympy.sympify(x, locals=local), gens) for x in row]
                      for row in mat])
    return MatrixOneForm(comps, names)
