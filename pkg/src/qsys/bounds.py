"""Explicit bound formulas as symbolic tower expressions.

Values such as ``exp^{+5}(4)`` cannot be written down, so expressions are
trees that are only ever evaluated in log-tower form: a value is a pair
``(level, x)`` meaning ``2↑2↑…↑x`` with ``level`` arrows.  Lower and upper
bounds are carried through every operation with directed rounding (mpmath
interval arithmetic), which makes strict comparison verdicts sound.

``O⁺(f)`` is instantiated as ``f·log₂(2+f)``, so ``exp⁺(x) = 2^{O⁺(x)}``
equals ``(2+x)^x`` exactly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import mpmath
from mpmath import iv

iv.prec = 96

EXACT_LIMIT_BITS = 1 << 20  # exact fallback only below 2^(2^20)
_NORM_HI = 2.0 ** 64
_NORM_LO = 64.0


class TowerExpr:
    """Immutable expression tree.

    kinds: ``lit`` (nonnegative int), ``add``, ``mul``, ``pow``,
    ``opluslog`` (``f·log₂(2+f)``) and ``geom`` (``1 + q + … + q^(r-1)``).
    """

    __slots__ = ("kind", "args", "_hash")

    def __init__(self, kind: str, args: tuple):
        self.kind = kind
        self.args = args
        self._hash = hash((kind, args))

    def __eq__(self, other):
        if not isinstance(other, TowerExpr):
            return NotImplemented
        if self is other:
            return True
        return self._hash == other._hash and self.kind == other.kind and self.args == other.args

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"TowerExpr({self.to_str()})"

    def __add__(self, other):
        return add(self, other)

    __radd__ = __add__

    def __mul__(self, other):
        return mul(self, other)

    __rmul__ = __mul__

    def __pow__(self, other):
        return power(self, other)

    def __rpow__(self, other):
        return power(other, self)

    def to_str(self) -> str:
        k, a = self.kind, self.args
        if k == "lit":
            return str(a[0])
        if k == "add":
            return f"({a[0].to_str()} + {a[1].to_str()})"
        if k == "mul":
            return f"{a[0].to_str()}·{a[1].to_str()}"
        if k == "pow":
            return f"{a[0].to_str()}^({a[1].to_str()})"
        if k == "opluslog":
            return f"O⁺({a[0].to_str()})"
        return f"geom({a[0].to_str()}, {a[1].to_str()})"

    def to_json(self):
        if self.kind == "lit":
            return str(self.args[0])
        return {self.kind: [x.to_json() for x in self.args]}


def lit(n) -> TowerExpr:
    if isinstance(n, TowerExpr):
        return n
    n = int(n)
    if n < 0:
        raise ValueError("tower literals are nonnegative integers")
    return TowerExpr("lit", (n,))


def add(a, b) -> TowerExpr:
    return TowerExpr("add", (lit(a), lit(b)))


def mul(a, b) -> TowerExpr:
    return TowerExpr("mul", (lit(a), lit(b)))


def power(a, b) -> TowerExpr:
    return TowerExpr("pow", (lit(a), lit(b)))


def opluslog(a) -> TowerExpr:
    return TowerExpr("opluslog", (lit(a),))


def geom(q, r) -> TowerExpr:
    return TowerExpr("geom", (lit(q), lit(r)))


def exp2(a) -> TowerExpr:
    return power(2, a)


def exp_plus(a, times: int = 1) -> TowerExpr:
    """``exp⁺`` iterated ``times`` times."""
    e = lit(a)
    for _ in range(times):
        e = power(2, opluslog(e))
    return e


def exp_tower(a, times: int) -> TowerExpr:
    e = lit(a)
    for _ in range(times):
        e = exp2(e)
    return e


# log-tower interval arithmetic ----------------------------------------------

@dataclass(frozen=True)
class PT:
    """The value ``2↑…↑x`` with ``level`` arrows (``level = 0`` means ``x``)."""

    level: int
    x: mpmath.mpf

    def key(self):
        return (self.level, self.x)


def _end(v, up: bool):
    return v.b if up else v.a


def _ivlog2(x, up):
    return _end(iv.log(iv.mpf(x)) / iv.log(2), up)


def _ivexp2(x, up):
    return _end(iv.power(2, iv.mpf(x)), up)


def _norm(p: PT, up: bool) -> PT:
    """Canonical form: level 0 holds ``x <= 2^64``, higher levels ``64 < x <= 2^64``."""
    level, x = p.level, p.x
    for _ in range(64):
        if x > _NORM_HI:
            x, level = _ivlog2(x, up), level + 1
        elif level >= 1 and x <= _NORM_LO:
            x, level = _ivexp2(x, up), level - 1
        else:
            break
    return PT(level, x)


ZERO = PT(0, mpmath.mpf(0))
ONE = PT(0, mpmath.mpf(1))


def _is_zero(p: PT) -> bool:
    return p.level == 0 and p.x == 0


def _flat(p: PT, up: bool):
    """Level-0 value of a point with level at most 1 (mpf exponents are unbounded)."""
    if p.level == 0:
        return p.x
    return _ivexp2(p.x, up)


def _lt(p: PT, q: PT) -> bool:
    return p.key() < q.key()


def _max(p, q):
    return q if _lt(p, q) else p


def _lg(p: PT, up: bool) -> PT:
    if p.level == 0:
        if p.x <= 0:
            return PT(0, mpmath.mpf("-inf"))
        return PT(0, _ivlog2(p.x, up))
    return _norm(PT(p.level - 1, p.x), up)


def _exp2(p: PT, up: bool) -> PT:
    if p.level == 0:
        if p.x == mpmath.mpf("-inf"):
            return ZERO
        if p.x <= _NORM_LO:
            return PT(0, _ivexp2(p.x, up))
        return _norm(PT(1, p.x), up)
    return _norm(PT(p.level + 1, p.x), up)


def _add(p: PT, q: PT, up: bool) -> PT:
    if _is_zero(p):
        return q
    if _is_zero(q):
        return p
    if p.level == 0 and q.level == 0:
        return _norm(PT(0, _end(iv.mpf(p.x) + iv.mpf(q.x), up)), up)
    big, small = (q, p) if _lt(p, q) else (p, q)
    if not up:
        return big
    # big + small = big·(1 + 2^(lg small - lg big))
    lb, ls = _lg(big, True), _lg(small, False)
    inc = mpmath.mpf(1)
    if lb.level <= 1 and ls.level <= 1:
        d = _end(iv.mpf(_flat(ls, False)) - iv.mpf(_flat(lb, False)), True)
        if d < -2000:
            inc = mpmath.mpf(2) ** -1990
        else:
            inc = _end(iv.log(1 + iv.power(2, iv.mpf(d))) / iv.log(2), True)
    # otherwise keep inc = 1, i.e. big + small <= 2·big
    return _exp2(_add(lb, PT(0, inc), True), True)


def _mul(p: PT, q: PT, up: bool) -> PT:
    if _is_zero(p) or _is_zero(q):
        return ZERO
    if p.level == 0 and q.level == 0:
        return _norm(PT(0, _end(iv.mpf(p.x) * iv.mpf(q.x), up)), up)
    return _exp2(_add(_lg(p, up), _lg(q, up), up), up)


def _pow(p: PT, q: PT, up: bool) -> PT:
    if _is_zero(q):
        return ONE
    if _is_zero(p):
        return ZERO
    if p.level == 0 and p.x == 1:
        return ONE
    if p.level == 0 and q.level == 0 and q.x * abs(_ivlog2(p.x, True)) < 60:
        return PT(0, _end(iv.power(iv.mpf(p.x), iv.mpf(q.x)), up))
    lp = _lg(p, up)
    if lp.level == 0 and lp.x <= 0:
        # base below one: the power is at most 1 and at least 0
        return ONE if up else ZERO
    return _exp2(_mul(lp, q, up), up)


def _geom(q: PT, r: PT, up: bool) -> PT:
    # 1 + q + ... + q^(r-1); for q >= 2 it lies in [q^(r-1), q^r)
    if _is_zero(r):
        return ZERO
    if q.level == 0 and q.x <= 1:
        # q ∈ {0, 1}: value is 1 or r
        return r if q.x == 1 else ONE
    if q.level == 0 and r.level == 0 and r.x * _ivlog2(q.x, True) < 60:
        qi, ri = iv.mpf(q.x), iv.mpf(r.x)
        return PT(0, _end((iv.power(qi, ri) - 1) / (qi - 1), up))
    if up:
        return _pow(q, r, True)
    return _pow(q, _add(r, PT(0, mpmath.mpf(-1)), False) if r.level == 0 else r, False)


def bounds(e: TowerExpr) -> tuple[PT, PT]:
    """Sound lower and upper log-tower bounds for the value of ``e``."""
    return _bounds(e)


@lru_cache(maxsize=200_000)
def _bounds(e: TowerExpr) -> tuple[PT, PT]:
    k = e.kind
    if k == "lit":
        v = iv.mpf(e.args[0])
        return _norm(PT(0, v.a), False), _norm(PT(0, v.b), True)
    if k == "opluslog":
        lo, hi = _bounds(e.args[0])
        two = PT(0, mpmath.mpf(2))
        return (_mul(lo, _lg(_add(lo, two, False), False), False),
                _mul(hi, _lg(_add(hi, two, True), True), True))
    (alo, ahi), (blo, bhi) = _bounds(e.args[0]), _bounds(e.args[1])
    if k == "add":
        return _add(alo, blo, False), _add(ahi, bhi, True)
    if k == "mul":
        return _mul(alo, blo, False), _mul(ahi, bhi, True)
    if k == "pow":
        return _pow(alo, blo, False), _pow(ahi, bhi, True)
    if k == "geom":
        return _geom(alo, blo, False), _geom(ahi, bhi, True)
    raise ValueError(f"unknown node kind {k}")


# exact evaluation -----------------------------------------------------------

class TooLarge(ArithmeticError):
    pass


def _fits(e: TowerExpr, bits: int) -> bool:
    hi = _bounds(e)[1]
    if hi.level == 0:
        return hi.x < mpmath.mpf(2) ** bits
    if hi.level == 1:
        return hi.x < bits
    return False


def evaluate_exact(e: TowerExpr, bits: int = EXACT_LIMIT_BITS):
    """Exact value as ``int`` (or ``Fraction`` for non-integral nodes), if it is below ``2^bits``.

    ``2^(j·O⁺(f))`` is evaluated as ``(2+f)^(f·j)``.  Raises :class:`TooLarge`
    when the value may exceed the limit, and :class:`ValueError` when the
    value is irrational (a bare ``O⁺`` node).
    """
    if not _fits(e, bits):
        raise TooLarge("value may exceed the exact-evaluation limit")
    return _exact(e, bits)


def _exact(e: TowerExpr, bits):
    k, a = e.kind, e.args
    if k == "lit":
        return a[0]
    if k == "add":
        return _exact(a[0], bits) + _exact(a[1], bits)
    if k == "mul":
        return _exact(a[0], bits) * _exact(a[1], bits)
    if k == "geom":
        q, r = _exact(a[0], bits), _exact(a[1], bits)
        if q == 1:
            return r
        return (q ** r - 1) // (q - 1) if isinstance(q, int) else (q ** r - 1) / (q - 1)
    if k == "pow":
        base, ex = a
        if ex.kind == "opluslog":
            b = _exact(base, bits)
            j = _log2_exact(b)
            if j is None:
                raise ValueError("O⁺ exponent over a base that is not a power of two is irrational")
            f = _exact(ex.args[0], bits)
            return (2 + f) ** (f * j)
        b, x = _exact(base, bits), _exact(ex, bits)
        if isinstance(x, Fraction):
            if x.denominator != 1:
                raise ValueError("fractional exponent has no exact value")
            x = x.numerator
        return b ** x
    raise ValueError("O⁺ of a value is irrational in general")


def _log2_exact(b):
    if isinstance(b, int) and b >= 1 and b & (b - 1) == 0:
        return b.bit_length() - 1
    return None


# comparison and rendering -------------------------------------------------

def compare(a: TowerExpr, b: TowerExpr) -> str:
    """Sound verdict in ``{"<", ">", "=", "unknown"}``."""
    a, b = lit(a), lit(b)
    if a == b:
        return "="
    alo, ahi = _bounds(a)
    blo, bhi = _bounds(b)
    if _lt(ahi, blo):
        return "<"
    if _lt(bhi, alo):
        return ">"
    if alo == ahi == blo == bhi and alo.level == 0:
        return "="
    v = _structural(a, b)
    if v != "unknown":
        return v
    try:
        x, y = evaluate_exact(a), evaluate_exact(b)
    except (TooLarge, ValueError):
        return "unknown"
    return "<" if x < y else ">" if x > y else "="


def _positive(e: TowerExpr) -> bool:
    return not _is_zero(_bounds(e)[0])


def _above_one(e: TowerExpr) -> bool:
    return _lt(ONE, _bounds(e)[0])


def _combine(v1: str, v2: str) -> str:
    if v1 == "=":
        return v2
    if v2 == "=" or v1 == v2:
        return v1
    return "unknown"


def _structural(a: TowerExpr, b: TowerExpr) -> str:
    """Monotone comparison of same-shaped trees, e.g. ``c·3 + T`` vs ``c·4 + T``."""
    if a.kind != b.kind or a.kind == "lit":
        return "unknown"
    if a.kind == "opluslog":
        return compare(a.args[0], b.args[0])
    v1, v2 = compare(a.args[0], b.args[0]), compare(a.args[1], b.args[1])
    if "unknown" in (v1, v2):
        return "unknown"
    if a.kind == "add":
        return _combine(v1, v2)
    if a.kind == "mul":
        # a factor that is strictly positive on both sides keeps strictness
        if all(_positive(x) for x in a.args + b.args):
            return _combine(v1, v2)
        return "unknown"
    if a.kind == "pow":
        if v1 == "=" and _above_one(a.args[0]):
            return v2
        if v2 == "=" and _positive(a.args[1]) and _positive(a.args[0]) and _positive(b.args[0]):
            return v1
        if _above_one(a.args[0]) and _above_one(b.args[0]):
            return _combine(v1, v2)
        return "unknown"
    if a.kind == "geom":
        if _above_one(a.args[0]) and _above_one(b.args[0]) and \
                _positive(a.args[1]) and _positive(b.args[1]):
            return _combine(v1, v2)
    return "unknown"


def render(e: TowerExpr) -> str:
    """Log-tower rendering of the lower bound, e.g. ``2↑(2↑10.0)``."""
    p = _bounds(lit(e))[0]
    level, x = p.level, p.x
    if hasattr(x, "_mpi_"):
        x = mpmath.mpf(x._mpi_[0])
    while x >= 64:
        x = mpmath.log(x, 2)
        level += 1
    s = f"{float(x):.1f}" if level else mpmath.nstr(x, 15)
    for _ in range(level):
        s = f"2↑({s})" if s.startswith("2↑") else f"2↑{s}"
    return s


def log2_value(e: TowerExpr) -> float:
    """``log₂`` of the value as a float (``inf`` when it is itself astronomically large)."""
    lo = _bounds(lit(e))[0]
    lg = _lg(lo, False)
    return float(lg.x) if lg.level == 0 else math.inf


def linear_part(e: TowerExpr):
    """Split ``c·k + T`` into ``(c, k, T)``; ``None`` if ``e`` has another shape."""
    if e.kind == "add" and e.args[0].kind == "mul":
        c, k = e.args[0].args
        return c, k, e.args[1]
    return None


# bound formulas ---------------------------------------------------------------

def bound_qsystem(s, m, d, ell) -> TowerExpr:
    """``s^{2^{(O⁺(dℓ⁴m))^5}}``."""
    return power(s, exp2(power(opluslog(mul(mul(d, power(ell, 4)), m)), 5)))


def order_bound(s, m, d, ell, c: int = 1) -> TowerExpr:
    """``s^{(dℓ)^{c·m}}``."""
    return power(s, power(mul(d, ell), mul(c, m)))


def alpha_real_pk(m, d, ell, r) -> TowerExpr:
    """``exp⁺(8^r · ℓ^{5·2^{r+1}} · d^5 · m^5)``."""
    inner = mul(mul(power(8, r), power(ell, mul(5, power(2, add(r, 1))))),
                mul(power(d, 5), power(m, 5)))
    return exp_plus(inner)


def bound_real_pk(s, m, d, ell, r, nu, k) -> TowerExpr:
    if nu < 1 or r < 1:
        raise ValueError("need nu >= 1 and r >= 1")
    return add(mul(geom(nu, r), k), power(s, alpha_real_pk(m, d, ell, r)))


def bound_main(s, m, d, ell, nu, k) -> TowerExpr:
    """``geom(3ν, 8^ν ℓ²)·k + s^{exp⁺(exp⁺(4^{4^ν ℓ²})·d⁵m⁵)}``."""
    if nu < 1:
        raise ValueError("need nu >= 1")
    coeff = geom(3 * nu, mul(power(8, nu), power(ell, 2)))
    inner = exp_plus(power(4, mul(power(4, nu), power(ell, 2))))
    return add(mul(coeff, k), power(s, exp_plus(mul(inner, mul(power(d, 5), power(m, 5))))))


def bound_abelian(n, m) -> TowerExpr:
    """``exp^{+2}(n²)·m + exp^{+5}(n²)``."""
    return add(mul(exp_plus(n * n, 2), m), exp_plus(n * n, 5))


@dataclass(frozen=True)
class BoundParams:
    s: object = None
    m: int | None = None
    d: int | None = None
    ell: int | None = None
    nu: int | None = None
    r: int | None = None
    k: int | None = None
    n: int | None = None
    e: int | None = None

    def __post_init__(self):
        if self.ell is not None and self.ell < 1:
            raise ValueError("ℓ must be at least 1")
        if self.nu is not None and self.nu < 1:
            raise ValueError("ν must be at least 1")

    def to_json(self) -> dict:
        out = {}
        for key in ("s", "m", "d", "ell", "nu", "r", "k", "n", "e"):
            v = getattr(self, key)
            if v is not None:
                out[key] = v.to_json() if isinstance(v, TowerExpr) else v
        return out


def gauss_manin_profile(n: int, size_poly_degree: int = 61, c_d: int = 1) -> BoundParams:
    """Profile of the period system of a degree ``n+1`` Hamiltonian family.

    ``s`` is the placeholder ``2^{n^61}`` (the exponent degree is configurable).
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    return BoundParams(s=exp2(power(n, size_poly_degree)), m=(n + 2) * (n + 3) // 2,
                       d=c_d * n * n, ell=n * n, n=n)


def envelope_degree(e: int, n: int) -> int:
    """``⌈e/(n+1)⌉``."""
    return -(-e // (n + 1))


def real_pk_step(s, m, d, ell, r, nu, k, ell_map=lambda ell: 4 * ell * ell):
    """Both sides of the inductive step for ``bound_real_pk``.

    Returns ``(lhs, rhs)`` with ``lhs = k + ν·(bound at r-1 with ℓ mapped + 1)``
    and ``rhs`` the bound at ``r``.
    """
    lower = bound_real_pk(s, m, d, ell_map(ell), r - 1, nu, k)
    lhs = add(k, mul(nu, add(lower, 1)))
    return lhs, bound_real_pk(s, m, d, ell, r, nu, k)
