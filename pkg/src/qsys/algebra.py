"""Exact sparse polynomials, rational functions and matrix one-forms over Z.

Nothing here ever reduces a fraction behind the caller's back: the size of
an object depends on the representation, so ``x**2/x`` and ``x/1`` are
different values.  :func:`normalize` exists for when a reduced form is
wanted explicitly.
"""
from __future__ import annotations

from fractions import Fraction
from itertools import combinations
from numbers import Number
from typing import Iterable, Mapping, Sequence

Monomial = tuple

_PACK_BITS = 20
_PACK_MASK = (1 << _PACK_BITS) - 1


class AlgebraError(ValueError):
    pass


class DimensionMismatch(AlgebraError):
    pass


class SingularRestriction(AlgebraError):
    """The restricted line lies inside the polar locus of some entry."""


def _pack(mono):
    key = 0
    for e in reversed(mono):
        key = (key << _PACK_BITS) | e
    return key


def _unpack(key, n):
    out = []
    for _ in range(n):
        out.append(key & _PACK_MASK)
        key >>= _PACK_BITS
    return tuple(out)


def grlex_key(mono):
    return (sum(mono), mono)


class LatticePolynomial:
    """Polynomial with integer coefficients in ``nvars`` variables.

    ``terms`` maps exponent tuples to nonzero Python ints.  Instances are
    treated as immutable.
    """

    __slots__ = ("terms", "nvars", "_hash")

    def __init__(self, terms: Mapping[Monomial, int] | None = None, nvars: int = 1):
        clean = {}
        if terms:
            for mono, c in terms.items():
                if len(mono) != nvars:
                    raise DimensionMismatch(f"monomial {mono} has wrong length for {nvars} variables")
                if not isinstance(c, int):
                    if isinstance(c, Fraction) and c.denominator == 1:
                        c = c.numerator
                    else:
                        raise AlgebraError(f"lattice polynomials take integer coefficients, got {c!r}")
                if c:
                    clean[tuple(mono)] = c
        self.terms = clean
        self.nvars = nvars
        self._hash = None

    @classmethod
    def _raw(cls, terms, nvars):
        obj = cls.__new__(cls)
        obj.terms = terms
        obj.nvars = nvars
        obj._hash = None
        return obj

    # construction helpers
    @classmethod
    def constant(cls, c: int, nvars: int) -> "LatticePolynomial":
        return cls({(0,) * nvars: c}, nvars)

    @classmethod
    def variable(cls, i: int, nvars: int) -> "LatticePolynomial":
        mono = [0] * nvars
        mono[i] = 1
        return cls({tuple(mono): 1}, nvars)

    @classmethod
    def zero(cls, nvars: int) -> "LatticePolynomial":
        return cls._raw({}, nvars)

    @classmethod
    def from_univariate(cls, coeffs: Sequence[int], var: int, nvars: int) -> "LatticePolynomial":
        """``coeffs[k]`` is the coefficient of ``x_var**k``."""
        terms = {}
        for k, c in enumerate(coeffs):
            if c:
                mono = [0] * nvars
                mono[var] = k
                terms[tuple(mono)] = int(c)
        return cls._raw(terms, nvars)

    # basic queries
    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(not any(m) for m in self.terms)

    def size(self) -> int:
        return sum(abs(c) for c in self.terms.values())

    def degree(self) -> int:
        """Total degree; -1 for the zero polynomial."""
        return max((sum(m) for m in self.terms), default=-1)

    def degree_in(self, i: int) -> int:
        return max((m[i] for m in self.terms), default=-1)

    def involves(self, i: int) -> bool:
        return any(m[i] for m in self.terms)

    def __eq__(self, other):
        if isinstance(other, LatticePolynomial):
            return self.nvars == other.nvars and self.terms == other.terms
        if isinstance(other, int):
            return self == LatticePolynomial.constant(other, self.nvars)
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.nvars, frozenset(self.terms.items())))
        return self._hash

    def __repr__(self):
        return f"LatticePolynomial({self.to_str()})"

    def to_str(self, names: Sequence[str] | None = None) -> str:
        if not self.terms:
            return "0"
        names = names or [f"x{i + 1}" for i in range(self.nvars)]
        parts = []
        for mono in sorted(self.terms, key=grlex_key, reverse=True):
            c = self.terms[mono]
            factors = [n if e == 1 else f"{n}^{e}" for n, e in zip(names, mono) if e]
            body = "*".join(factors)
            if not body:
                parts.append(str(c))
            elif c == 1:
                parts.append(body)
            elif c == -1:
                parts.append("-" + body)
            else:
                parts.append(f"{c}*{body}")
        return " + ".join(parts).replace("+ -", "- ")

    # arithmetic
    def _coerce(self, other):
        if isinstance(other, LatticePolynomial):
            if other.nvars != self.nvars:
                raise DimensionMismatch("polynomials live in different variable counts")
            return other
        if isinstance(other, int):
            return LatticePolynomial.constant(other, self.nvars)
        return None

    def __add__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        terms = dict(self.terms)
        for m, c in other.terms.items():
            v = terms.get(m, 0) + c
            if v:
                terms[m] = v
            else:
                terms.pop(m, None)
        return LatticePolynomial._raw(terms, self.nvars)

    __radd__ = __add__

    def __neg__(self):
        return LatticePolynomial._raw({m: -c for m, c in self.terms.items()}, self.nvars)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, int):
            if other == 0:
                return LatticePolynomial.zero(self.nvars)
            return LatticePolynomial._raw({m: c * other for m, c in self.terms.items()}, self.nvars)
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        if not self.terms or not other.terms:
            return LatticePolynomial.zero(self.nvars)
        a = [(_pack(m), c) for m, c in self.terms.items()]
        b = [(_pack(m), c) for m, c in other.terms.items()]
        acc: dict[int, int] = {}
        get = acc.get
        for ka, ca in a:
            for kb, cb in b:
                k = ka + kb
                acc[k] = get(k, 0) + ca * cb
        n = self.nvars
        terms = {_unpack(k, n): c for k, c in acc.items() if c}
        return LatticePolynomial._raw(terms, n)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise AlgebraError("negative powers are not polynomials")
        result = LatticePolynomial.constant(1, self.nvars)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    # calculus and substitution
    def diff(self, i: int) -> "LatticePolynomial":
        terms = {}
        for m, c in self.terms.items():
            e = m[i]
            if e:
                mm = list(m)
                mm[i] = e - 1
                terms[tuple(mm)] = c * e
        return LatticePolynomial._raw(terms, self.nvars)

    def remap(self, nvars: int, index_map: Sequence[int]) -> "LatticePolynomial":
        """Move variable ``i`` to position ``index_map[i]`` in an ``nvars``-variable ring."""
        terms = {}
        for m, c in self.terms.items():
            mm = [0] * nvars
            for i, e in enumerate(m):
                if e:
                    mm[index_map[i]] += e
            key = tuple(mm)
            v = terms.get(key, 0) + c
            if v:
                terms[key] = v
            else:
                terms.pop(key, None)
        return LatticePolynomial._raw(terms, nvars)

    def extend(self, nvars: int) -> "LatticePolynomial":
        """Append unused variables at the end."""
        return self.remap(nvars, list(range(self.nvars)))

    def compose(self, i: int, poly: "LatticePolynomial") -> "LatticePolynomial":
        """Substitute ``x_i -> poly`` (same variable count)."""
        if poly.nvars != self.nvars:
            raise DimensionMismatch("substituted polynomial has wrong variable count")
        by_power: dict[int, dict] = {}
        for m, c in self.terms.items():
            e = m[i]
            mm = list(m)
            mm[i] = 0
            by_power.setdefault(e, {})[tuple(mm)] = c
        result = LatticePolynomial.zero(self.nvars)
        powers = {0: LatticePolynomial.constant(1, self.nvars)}
        for e in sorted(by_power):
            if e not in powers:
                powers[e] = poly ** e
            result = result + LatticePolynomial._raw(by_power[e], self.nvars) * powers[e]
        return result

    def negate_var(self, i: int) -> "LatticePolynomial":
        return LatticePolynomial._raw(
            {m: (-c if m[i] % 2 else c) for m, c in self.terms.items()}, self.nvars
        )

    def even_odd_split(self, i: int) -> tuple["LatticePolynomial", "LatticePolynomial"]:
        """Return ``(E, O)`` with ``P = E(x_i**2) + x_i * O(x_i**2)``.

        In ``E`` and ``O`` the variable slot ``i`` holds the square ``w = x_i**2``.
        """
        even, odd = {}, {}
        for m, c in self.terms.items():
            e = m[i]
            mm = list(m)
            mm[i] = e // 2
            (odd if e % 2 else even)[tuple(mm)] = c
        return (LatticePolynomial._raw(even, self.nvars), LatticePolynomial._raw(odd, self.nvars))

    def evaluate(self, point: Sequence):
        """Evaluate at a point; exact for ints/Fractions, floating for complex input."""
        total = 0
        for m, c in self.terms.items():
            v = c
            for x, e in zip(point, m):
                if e:
                    v = v * x ** e
            total = total + v
        return total

    def univariate_coeffs(self, var: int, values: Mapping[int, object]) -> list:
        """Coefficient list in ``x_var`` after substituting the other variables.

        ``values`` maps every other variable index to a number.
        """
        deg = self.degree_in(var)
        coeffs = [0] * (deg + 1)
        for m, c in self.terms.items():
            v = c
            for j, e in enumerate(m):
                if j != var and e:
                    v = v * values[j] ** e
            coeffs[m[var]] = coeffs[m[var]] + v
        while coeffs and coeffs[-1] == 0:
            coeffs.pop()
        return coeffs

    # serialization
    def to_json(self) -> list:
        return [[list(m), str(self.terms[m])] for m in sorted(self.terms, key=grlex_key)]

    @classmethod
    def from_json(cls, data: list, nvars: int) -> "LatticePolynomial":
        terms = {}
        for mono, coeff in data:
            mono = tuple(int(e) for e in mono)
            if mono in terms:
                raise AlgebraError(f"duplicate monomial {mono} in serialized polynomial")
            terms[mono] = int(coeff)
        return cls(terms, nvars)


class RationalFunction:
    """A fraction ``num/den`` of lattice polynomials, kept exactly as written."""

    __slots__ = ("num", "den")

    def __init__(self, num: LatticePolynomial, den: LatticePolynomial | None = None):
        if den is None:
            den = LatticePolynomial.constant(1, num.nvars)
        if den.is_zero():
            raise ZeroDivisionError("rational function with zero denominator")
        if num.nvars != den.nvars:
            raise DimensionMismatch("numerator and denominator disagree on variable count")
        self.num = num
        self.den = den

    @property
    def nvars(self) -> int:
        return self.num.nvars

    @classmethod
    def constant(cls, c, nvars: int) -> "RationalFunction":
        c = Fraction(c)
        return cls(LatticePolynomial.constant(c.numerator, nvars),
                   LatticePolynomial.constant(c.denominator, nvars))

    @classmethod
    def zero(cls, nvars: int) -> "RationalFunction":
        return cls(LatticePolynomial.zero(nvars), LatticePolynomial.constant(1, nvars))

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def size(self) -> int:
        # a zero entry is written "0", whatever denominator it carries
        if self.num.is_zero():
            return 0
        return self.num.size() + self.den.size()

    def degree(self) -> int:
        return max(self.num.degree(), self.den.degree())

    def degree_in(self, i: int) -> int:
        return max(self.num.degree_in(i), self.den.degree_in(i))

    def __eq__(self, other):
        if not isinstance(other, RationalFunction):
            return NotImplemented
        return self.num == other.num and self.den == other.den

    def __hash__(self):
        return hash((self.num, self.den))

    def equals_value(self, other: "RationalFunction") -> bool:
        """Mathematical equality (cross-multiplied), independent of representation."""
        return (self.num * other.den - other.num * self.den).is_zero()

    def __repr__(self):
        return f"RationalFunction(({self.num.to_str()}) / ({self.den.to_str()}))"

    def to_str(self, names=None) -> str:
        n = self.num.to_str(names)
        if self.den == 1:
            return n
        return f"({n})/({self.den.to_str(names)})"

    def _coerce(self, other):
        if isinstance(other, RationalFunction):
            return other
        if isinstance(other, LatticePolynomial):
            return RationalFunction(other)
        if isinstance(other, (int, Fraction)):
            return RationalFunction.constant(other, self.nvars)
        return None

    def __add__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        if other.is_zero():
            return self
        if self.is_zero():
            return other
        if self.den == other.den:
            return RationalFunction(self.num + other.num, self.den)
        return RationalFunction(self.num * other.den + other.num * self.den, self.den * other.den)

    __radd__ = __add__

    def __neg__(self):
        return RationalFunction(-self.num, self.den)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        if self.is_zero() or other.is_zero():
            return RationalFunction.zero(self.nvars)
        return RationalFunction(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        if other.is_zero():
            raise ZeroDivisionError("division by the zero rational function")
        return RationalFunction(self.num * other.den, self.den * other.num)

    def diff(self, i: int) -> "RationalFunction":
        dn = self.num.diff(i)
        if not self.den.involves(i):
            return RationalFunction(dn, self.den)
        dd = self.den.diff(i)
        return RationalFunction(dn * self.den - self.num * dd, self.den * self.den)

    def compose(self, i: int, poly: LatticePolynomial) -> "RationalFunction":
        return RationalFunction(self.num.compose(i, poly), self.den.compose(i, poly))

    def remap(self, nvars: int, index_map: Sequence[int]) -> "RationalFunction":
        return RationalFunction(self.num.remap(nvars, index_map), self.den.remap(nvars, index_map))

    def extend(self, nvars: int) -> "RationalFunction":
        return RationalFunction(self.num.extend(nvars), self.den.extend(nvars))

    def evaluate(self, point):
        d = self.den.evaluate(point)
        n = self.num.evaluate(point)
        if isinstance(n, int) and isinstance(d, int):
            return Fraction(n, d)
        return n / d

    def to_json(self) -> dict:
        return {"num": self.num.to_json(), "den": self.den.to_json()}

    @classmethod
    def from_json(cls, data: dict, nvars: int) -> "RationalFunction":
        return cls(LatticePolynomial.from_json(data["num"], nvars),
                   LatticePolynomial.from_json(data["den"], nvars))


def rational_sum(terms: Iterable[RationalFunction], nvars: int) -> RationalFunction:
    """Sum fractions, merging structurally equal denominators before cross-multiplying."""
    groups: dict[LatticePolynomial, LatticePolynomial] = {}
    for r in terms:
        if r.is_zero():
            continue
        if r.den in groups:
            groups[r.den] = groups[r.den] + r.num
        else:
            groups[r.den] = r.num
    items = [(n, d) for d, n in groups.items() if not n.is_zero()]
    if not items:
        return RationalFunction.zero(nvars)
    # balanced pairwise reduction keeps intermediate sizes down
    while len(items) > 1:
        nxt = []
        for k in range(0, len(items) - 1, 2):
            (n1, d1), (n2, d2) = items[k], items[k + 1]
            nxt.append((n1 * d2 + n2 * d1, d1 * d2))
        if len(items) % 2:
            nxt.append(items[-1])
        items = [(n, d) for n, d in nxt if not n.is_zero()]
        if not items:
            return RationalFunction.zero(nvars)
    n, d = items[0]
    return RationalFunction(n, d)


def normalize(r: RationalFunction) -> RationalFunction:
    """GCD-reduced representative with positive leading denominator coefficient.

    Changes the size; never used inside the transformations.
    """
    import sympy

    n = r.nvars
    gens = sympy.symbols(f"x1:{n + 1}")
    ring, *_ = sympy.ring(gens, sympy.ZZ)

    def to_ring(p):
        return ring.from_dict({m: c for m, c in p.terms.items()})

    num, den = to_ring(r.num), to_ring(r.den)
    g = num.gcd(den)
    num, den = num.exquo(g), den.exquo(g)
    if den.LC < 0:
        num, den = -num, -den

    def back(p):
        return LatticePolynomial({tuple(m): int(c) for m, c in p.to_dict().items()}, n)

    return RationalFunction(back(num), back(den))


Matrix = tuple  # tuple of row tuples of RationalFunction


def mat_zero(dim: int, nvars: int) -> Matrix:
    z = RationalFunction.zero(nvars)
    return tuple(tuple(z for _ in range(dim)) for _ in range(dim))


def mat_identity_scaled(dim: int, value: RationalFunction) -> Matrix:
    z = RationalFunction.zero(value.nvars)
    return tuple(tuple(value if i == j else z for j in range(dim)) for i in range(dim))


def mat_mul_terms(A: Matrix, B: Matrix, a: int, b: int) -> list[RationalFunction]:
    return [A[a][k] * B[k][b] for k in range(len(B)) if not A[a][k].is_zero() and not B[k][b].is_zero()]


def mat_mul(A: Matrix, B: Matrix, nvars: int) -> Matrix:
    n = len(A)
    return tuple(tuple(rational_sum(mat_mul_terms(A, B, i, j), nvars) for j in range(n)) for i in range(n))


def mat_add(A: Matrix, B: Matrix) -> Matrix:
    return tuple(tuple(x + y for x, y in zip(ra, rb)) for ra, rb in zip(A, B))


def mat_is_zero(A: Matrix) -> bool:
    return all(x.is_zero() for row in A for x in row)


def block_matrix(blocks: Sequence[Sequence[Matrix]], nvars: int) -> Matrix:
    """Assemble a square matrix from a square grid of equally sized blocks."""
    rows = []
    for brow in blocks:
        size = len(brow[0])
        for r in range(size):
            row = []
            for blk in brow:
                row.extend(blk[r])
            rows.append(tuple(row))
    return tuple(rows)


class MatrixOneForm:
    """Matrix-valued rational one-form ``sum_i A_i dλ_i`` on an affine chart.

    ``components[i]`` is the ``dims x dims`` coefficient matrix of ``dλ_i``;
    the first coordinate plays the role of the time variable ``t``.
    """

    __slots__ = ("components", "dims", "base_dim", "names")

    def __init__(self, components: Sequence[Sequence[Sequence[RationalFunction]]],
                 names: Sequence[str] | None = None):
        comps = tuple(tuple(tuple(row) for row in mat) for mat in components)
        if not comps:
            raise AlgebraError("a one-form needs at least one base coordinate")
        m = len(comps)
        dims = len(comps[0])
        for mat in comps:
            if len(mat) != dims or any(len(row) != dims for row in mat):
                raise DimensionMismatch("all coefficient matrices must be square of the same side")
            for row in mat:
                for x in row:
                    if x.nvars != m:
                        raise DimensionMismatch(
                            f"entry lives in {x.nvars} variables but the chart has {m}")
        self.components = comps
        self.dims = dims
        self.base_dim = m
        if names is None:
            names = ["t"] + [f"l{i + 1}" for i in range(1, m)]
        if len(names) != m:
            raise DimensionMismatch("one variable name per base coordinate")
        self.names = tuple(names)

    def __eq__(self, other):
        if not isinstance(other, MatrixOneForm):
            return NotImplemented
        return self.components == other.components and self.names == other.names

    def __hash__(self):
        return hash(self.components)

    def __repr__(self):
        return f"MatrixOneForm(dims={self.dims}, base_dim={self.base_dim}, size={self.size()})"

    def entries(self):
        for mat in self.components:
            for row in mat:
                yield from row

    def size(self) -> int:
        return sum(x.size() for x in self.entries())

    def degree(self) -> int:
        """Maximal total degree of any numerator or denominator."""
        return max((x.degree() for x in self.entries() if not x.is_zero()), default=0)

    def time_degree(self) -> int:
        """Maximal degree in the time coordinate over all numerators and denominators."""
        return max((x.degree_in(0) for x in self.entries() if not x.is_zero()), default=0)

    def to_json(self) -> dict:
        return {
            "dims": self.dims,
            "base_dim": self.base_dim,
            "names": list(self.names),
            "components": [[[x.to_json() for x in row] for row in mat] for mat in self.components],
        }

    @classmethod
    def from_json(cls, data: dict) -> "MatrixOneForm":
        m = int(data["base_dim"])
        dims = int(data["dims"])
        comps = [[[RationalFunction.from_json(x, m) for x in row] for row in mat]
                 for mat in data["components"]]
        form = cls(comps, data.get("names"))
        if form.dims != dims or form.base_dim != m:
            raise DimensionMismatch("declared dims/base_dim disagree with the component data")
        return form

    def to_str(self) -> str:
        lines = []
        for name, mat in zip(self.names, self.components):
            if mat_is_zero(mat):
                continue
            lines.append(f"d{name}:")
            for row in mat:
                lines.append("  [" + ", ".join(x.to_str(self.names) for x in row) + "]")
        return "\n".join(lines) or "0"


class MatrixTwoForm:
    """Antisymmetric matrix two-form stored on coordinate pairs ``i < j``."""

    __slots__ = ("components", "dims", "base_dim")

    def __init__(self, components: Mapping[tuple, Matrix], dims: int, base_dim: int):
        self.components = dict(components)
        self.dims = dims
        self.base_dim = base_dim

    def is_zero(self) -> bool:
        return all(mat_is_zero(mat) for mat in self.components.values())

    def first_nonzero(self):
        """``((i, j), (a, b), entry)`` of the first nonzero entry, or ``None``."""
        for key in sorted(self.components):
            mat = self.components[key]
            for a, row in enumerate(mat):
                for b, x in enumerate(row):
                    if not x.is_zero():
                        return key, (a, b), x
        return None

    def __sub__(self, other: "MatrixTwoForm") -> "MatrixTwoForm":
        comps = {}
        for key in self.components:
            A, B = self.components[key], other.components[key]
            comps[key] = tuple(
                tuple(rational_sum([x, -y], x.nvars) for x, y in zip(ra, rb)) for ra, rb in zip(A, B))
        return MatrixTwoForm(comps, self.dims, self.base_dim)


class MatrixThreeForm(MatrixTwoForm):
    """Same storage as two-forms, keyed by ``i < j < k``."""


def size(obj) -> int:
    """Size of a lattice polynomial, rational function or one-form."""
    if isinstance(obj, (LatticePolynomial, RationalFunction, MatrixOneForm)):
        return obj.size()
    raise TypeError(f"size is undefined for {type(obj).__name__}")


def _check_compatible(A: MatrixOneForm, B: MatrixOneForm):
    if A.dims != B.dims or A.base_dim != B.base_dim:
        raise DimensionMismatch(
            f"forms of shape ({A.dims}, {A.base_dim}) and ({B.dims}, {B.base_dim}) cannot be wedged")


def wedge_terms(A: MatrixOneForm, B: MatrixOneForm, i: int, j: int, a: int, b: int):
    Ai, Aj = A.components[i], A.components[j]
    Bi, Bj = B.components[i], B.components[j]
    return mat_mul_terms(Ai, Bj, a, b) + [-x for x in mat_mul_terms(Aj, Bi, a, b)]


def wedge(A: MatrixOneForm, B: MatrixOneForm) -> MatrixTwoForm:
    """``A ∧ B`` with component ``A_i B_j - A_j B_i`` on ``dλ_i ∧ dλ_j``."""
    _check_compatible(A, B)
    m, n, ell = A.base_dim, A.base_dim, A.dims
    comps = {}
    for i, j in combinations(range(m), 2):
        comps[(i, j)] = tuple(
            tuple(rational_sum(wedge_terms(A, B, i, j, a, b), n) for b in range(ell))
            for a in range(ell))
    return MatrixTwoForm(comps, ell, m)


def exterior_derivative(A: MatrixOneForm) -> MatrixTwoForm:
    """``dA`` with component ``∂_i A_j - ∂_j A_i`` on ``dλ_i ∧ dλ_j``."""
    m, ell = A.base_dim, A.dims
    comps = {}
    for i, j in combinations(range(m), 2):
        comps[(i, j)] = tuple(
            tuple(rational_sum([A.components[j][a][b].diff(i), -A.components[i][a][b].diff(j)], m)
                  for b in range(ell))
            for a in range(ell))
    return MatrixTwoForm(comps, ell, m)


def exterior_derivative_2(B: MatrixTwoForm) -> MatrixThreeForm:
    """``dB`` for a two-form: ``∂_i B_jk - ∂_j B_ik + ∂_k B_ij`` on ``i < j < k``."""
    m, ell = B.base_dim, B.dims
    comps = {}
    for i, j, k in combinations(range(m), 3):
        Bjk, Bik, Bij = B.components[(j, k)], B.components[(i, k)], B.components[(i, j)]
        comps[(i, j, k)] = tuple(
            tuple(rational_sum([Bjk[a][b].diff(i), -Bik[a][b].diff(j), Bij[a][b].diff(k)], m)
                  for b in range(ell))
            for a in range(ell))
    return MatrixThreeForm(comps, ell, m)


def integrability_defect(A: MatrixOneForm) -> MatrixTwoForm:
    """``dA - A ∧ A`` computed as one exact sum per entry."""
    m, ell = A.base_dim, A.dims
    comps = {}
    for i, j in combinations(range(m), 2):
        rows = []
        for a in range(ell):
            row = []
            for b in range(ell):
                terms = [A.components[j][a][b].diff(i), -A.components[i][a][b].diff(j)]
                terms += [-x for x in wedge_terms(A, A, i, j, a, b)]
                row.append(rational_sum(terms, m))
            rows.append(tuple(row))
        comps[(i, j)] = tuple(rows)
    return MatrixTwoForm(comps, ell, m)


def _exact_or_complex(v):
    if isinstance(v, (int, Fraction)):
        return Fraction(v)
    if isinstance(v, Number):
        return complex(v)
    raise TypeError(f"parameter values must be rationals or complex numbers, got {v!r}")


class RestrictedSystem:
    """Univariate matrix ODE right-hand side ``t -> Ω_{λ'}(t)``.

    Coefficients are kept exactly when the parameters are rational; the
    numerical evaluator uses complex Horner sweeps over all entries at once.
    """

    def __init__(self, num_coeffs, den_coeffs, dims: int, params: tuple):
        import numpy as np

        self.dims = dims
        self.params = params
        self.num_coeffs = num_coeffs  # dims x dims lists, coeffs low -> high
        self.den_coeffs = den_coeffs
        deg = max([len(c) for row in num_coeffs for c in row] +
                  [len(c) for row in den_coeffs for c in row] + [1])
        self._num = np.zeros((deg, dims, dims), dtype=complex)
        self._den = np.zeros((deg, dims, dims), dtype=complex)
        for a in range(dims):
            for b in range(dims):
                n, d = num_coeffs[a][b], den_coeffs[a][b]
                if not n:
                    self._den[0, a, b] = 1.0
                    continue
                for k, c in enumerate(n):
                    self._num[k, a, b] = complex(c)
                for k, c in enumerate(d):
                    self._den[k, a, b] = complex(c)
        self._deg = deg

    def __call__(self, t):
        num = self._num[-1].copy()
        den = self._den[-1].copy()
        for k in range(self._deg - 2, -1, -1):
            num = num * t + self._num[k]
            den = den * t + self._den[k]
        return num / den

    def entry_denominators(self):
        """Coefficient lists (low -> high) of denominators of nonzero entries."""
        out = []
        for a in range(self.dims):
            for b in range(self.dims):
                if self.num_coeffs[a][b]:
                    out.append(self.den_coeffs[a][b])
        return out

    def nonzero_entries(self):
        for a in range(self.dims):
            for b in range(self.dims):
                if self.num_coeffs[a][b]:
                    yield self.num_coeffs[a][b], self.den_coeffs[a][b]


def restrict_line(A: MatrixOneForm, params: Sequence) -> RestrictedSystem:
    """Fix ``λ' = params`` and return the ``dt`` coefficient as a function of ``t``.

    Raises :class:`SingularRestriction` when some entry denominator (of any
    component) vanishes identically on the line.
    """
    params = tuple(_exact_or_complex(p) for p in params)
    if len(params) != A.base_dim - 1:
        raise DimensionMismatch(f"expected {A.base_dim - 1} parameter values, got {len(params)}")
    values = {j + 1: v for j, v in enumerate(params)}
    for k, mat in enumerate(A.components):
        for a, row in enumerate(mat):
            for b, x in enumerate(row):
                if x.is_zero():
                    continue
                if not x.den.univariate_coeffs(0, values):
                    raise SingularRestriction(
                        f"denominator of entry ({a},{b}) of the d{A.names[k]} component vanishes on the line")
    num, den = [], []
    for row in A.components[0]:
        nrow, drow = [], []
        for x in row:
            nrow.append(x.num.univariate_coeffs(0, values))
            drow.append(x.den.univariate_coeffs(0, values))
        num.append(nrow)
        den.append(drow)
    return RestrictedSystem(num, den, A.dims, params)
