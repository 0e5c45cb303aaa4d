"""Abelian integrals over real ovals of a polynomial Hamiltonian."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from .bounds import bound_abelian, compare, envelope_degree, lit, render

CLOSURE_TOL = 1e-8
LEVEL_TOL = 1e-10


class OvalError(RuntimeError):
    pass


class TrivialForm(ValueError):
    """The integral vanishes identically (for example an exact form)."""


def _poly_dict(expr, gens=("x1", "x2")) -> dict:
    import sympy

    syms = sympy.symbols(gens)
    local = dict(zip(gens, syms))
    p = sympy.Poly(sympy.sympify(expr, locals=local), *syms)
    return {tuple(int(e) for e in m): float(c) for m, c in p.terms()}


class Poly2:
    """Polynomial in ``(x1, x2)`` stored as ``{(i, j): coefficient}``."""

    def __init__(self, terms: dict | str):
        if isinstance(terms, str):
            terms = _poly_dict(terms)
        self.terms = {tuple(k): v for k, v in terms.items() if v != 0}
        mons = sorted(self.terms)
        self._i = np.array([m[0] for m in mons], dtype=int)
        self._j = np.array([m[1] for m in mons], dtype=int)
        self._c = np.array([float(self.terms[m]) for m in mons])

    def __call__(self, x1, x2):
        if not self.terms:
            return np.zeros_like(np.asarray(x1, dtype=float))
        x1 = np.asarray(x1, dtype=float)[..., None]
        x2 = np.asarray(x2, dtype=float)[..., None]
        return (x1 ** self._i * x2 ** self._j) @ self._c

    @property
    def degree(self) -> int:
        return max((i + j for i, j in self.terms), default=-1)

    def diff(self, var: int) -> "Poly2":
        out = {}
        for (i, j), c in self.terms.items():
            e = (i, j)[var]
            if e:
                key = (i - 1, j) if var == 0 else (i, j - 1)
                out[key] = out.get(key, 0) + c * e
        return Poly2(out)

    def __mul__(self, other: "Poly2") -> "Poly2":
        out = {}
        for (i, j), c in self.terms.items():
            for (k, l), d in other.terms.items():
                out[(i + k, j + l)] = out.get((i + k, j + l), 0) + c * d
        return Poly2(out)

    def __add__(self, other: "Poly2") -> "Poly2":
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, 0) + c
        return Poly2(out)

    def scale(self, a) -> "Poly2":
        return Poly2({m: a * c for m, c in self.terms.items()})

    def to_sympy(self):
        import sympy

        x1, x2 = sympy.symbols("x1 x2")
        return sum(sympy.nsimplify(c) * x1 ** i * x2 ** j for (i, j), c in self.terms.items())


@dataclass
class Hamiltonian:
    H: Poly2

    @classmethod
    def parse(cls, expr: str) -> "Hamiltonian":
        return cls(Poly2(expr))

    @property
    def degree(self) -> int:
        return self.H.degree

    @property
    def n(self) -> int:
        return self.degree - 1

    @property
    def chart_dimension(self) -> int:
        n = self.n
        return (n + 2) * (n + 3) // 2

    def chart(self) -> list:
        """Coefficient vector over all monomials of degree at most ``n+1``."""
        D = self.degree
        return [float(self.H.terms.get((i, k - i), 0)) for k in range(D + 1) for i in range(k, -1, -1)]

    def __call__(self, x1, x2):
        return self.H(x1, x2)

    def grad(self):
        return self.H.diff(0), self.H.diff(1)


@dataclass
class OneForm:
    """``P dx1 + Q dx2`` with polynomial coefficients."""

    P: Poly2
    Q: Poly2
    label: str = ""

    @classmethod
    def parse(cls, P: str = "0", Q: str = "0", label: str = "") -> "OneForm":
        return cls(Poly2(P), Poly2(Q), label or f"({P})dx1 + ({Q})dx2")

    @classmethod
    def monomial_dx2(cls, i: int, j: int) -> "OneForm":
        return cls(Poly2({}), Poly2({(i, j): 1}), f"x1^{i} x2^{j} dx2")

    @classmethod
    def exact(cls, v: Poly2) -> "OneForm":
        return cls(v.diff(0), v.diff(1), "dv")

    @classmethod
    def u_dH(cls, u: Poly2, H: Hamiltonian) -> "OneForm":
        hx, hy = H.grad()
        return cls(u * hx, u * hy, "u dH")

    @property
    def degree(self) -> int:
        """Degree of a form: coefficient degree plus one."""
        return max(self.P.degree, self.Q.degree) + 1

    def dcoef(self) -> Poly2:
        """``Q_x1 - P_x2``, the coefficient of ``dω``."""
        return self.Q.diff(0) + self.P.diff(1).scale(-1)

    def __add__(self, other: "OneForm") -> "OneForm":
        return OneForm(self.P + other.P, self.Q + other.Q, f"{self.label} + {other.label}")

    def scale(self, a) -> "OneForm":
        return OneForm(self.P.scale(a), self.Q.scale(a), f"{a}·{self.label}")


def basic_forms(n: int) -> list[OneForm]:
    """``x1·x^α dx2`` for ``0 <= α1, α2 <= n-1`` (``n²`` forms)."""
    if n < 1:
        raise ValueError("n must be at least 1")
    return [OneForm.monomial_dx2(a1 + 1, a2) for a1 in range(n) for a2 in range(n)]


# critical values ----------------------------------------------------------------

def critical_points(H: Hamiltonian, tol: float = 1e-9) -> list[tuple[complex, complex]]:
    import sympy

    x1, x2 = sympy.symbols("x1 x2")
    expr = H.H.to_sympy()
    hx, hy = sympy.diff(expr, x1), sympy.diff(expr, x2)
    if hx == 0 and hy == 0:
        raise ValueError("constant Hamiltonian: every point is critical")
    res = sympy.resultant(hx, hy, x2) if hx.has(x2) and hy.has(x2) else None
    if res is not None and sympy.expand(res) == 0:
        raise ValueError("positive-dimensional critical set")
    if res is None:
        # one partial does not involve x2: solve it for x1 directly
        only_x1 = hx if not hx.has(x2) else hy
        res = only_x1
    rpoly = sympy.Poly(res, x1)
    if rpoly.degree() <= 0:
        if rpoly.is_zero:
            raise ValueError("positive-dimensional critical set")
        return []
    roots1 = [complex(r) for r in sympy.Poly(rpoly, x1).nroots(n=30)]
    out = []
    for a in roots1:
        cands = []
        for g in (hx, hy):
            gp = sympy.Poly(g.subs(x1, a), x2)
            if gp.degree() > 0:
                cands += [complex(r) for r in np.roots([complex(c) for c in gp.all_coeffs()])]
        if not cands:
            if sympy.Poly(hx.subs(x1, a), x2).is_zero and sympy.Poly(hy.subs(x1, a), x2).is_zero:
                raise ValueError("positive-dimensional critical set")
            cands = [0j]
        fx = sympy.lambdify((x1, x2), hx, "numpy")
        fy = sympy.lambdify((x1, x2), hy, "numpy")
        for b in cands:
            if abs(complex(fx(a, b))) <= 1e-6 and abs(complex(fy(a, b))) <= 1e-6:
                if not any(abs(a - p) < tol and abs(b - q) < tol for p, q in out):
                    out.append((a, b))
    return out


def critical_values(H: Hamiltonian) -> list[complex]:
    """Values of ``H`` at the solutions of ``∇H = 0`` (complex in general)."""
    import sympy

    x1, x2 = sympy.symbols("x1 x2")
    f = sympy.lambdify((x1, x2), H.H.to_sympy(), "numpy")
    vals = []
    for a, b in critical_points(H):
        v = complex(f(a, b))
        if not any(abs(v - w) < 1e-9 for w in vals):
            vals.append(v)
    return sorted(vals, key=lambda z: (z.real, z.imag))


# oval tracing -------------------------------------------------------------------

@dataclass
class TracedOval:
    t: float
    seed: tuple
    length: float
    closure: float
    level_drift: float
    orientation: int  # +1 when traced counterclockwise
    integrals: np.ndarray
    derivatives: np.ndarray | None = None
    samples: np.ndarray | None = None


def _stack(polys):
    mons = sorted({m for p in polys for m in p.terms})
    index = {m: k for k, m in enumerate(mons)}
    C = np.zeros((len(polys), max(len(mons), 1)))
    for r, p in enumerate(polys):
        for m, c in p.terms.items():
            C[r, index[m]] = float(c)
    I = np.array([m[0] for m in mons] or [0])
    J = np.array([m[1] for m in mons] or [0])
    return C, I, J, int(max(I.max(), J.max()))


def _monomials(x1, x2, top, I, J):
    p1 = [np.ones_like(x1)]
    p2 = [np.ones_like(x2)]
    for _ in range(top):
        p1.append(p1[-1] * x1)
        p2.append(p2[-1] * x2)
    return np.stack([p1[i] * p2[j] for i, j in zip(I, J)], axis=-1)


class OvalFamily:
    """Real ovals ``{H = t}`` around a center (nondegenerate extremum).

    Ovals are traced by the arclength-normalized Hamiltonian flow from a seed
    on the ray ``center + r·direction``; the first return to that ray closes
    the oval.
    """

    def __init__(self, H: Hamiltonian, center: Sequence[float], direction=(1.0, 0.0),
                 interval: tuple[float, float] | None = None, rtol: float = 1e-12):
        self.H = H
        self.center = np.asarray(center, dtype=float)
        u = np.asarray(direction, dtype=float)
        self.direction = u / np.linalg.norm(u)
        self.h0 = float(H(*self.center))
        self.hx, self.hy = H.grad()
        self.interval = interval
        self.rtol = rtol

    @classmethod
    def around_minimum(cls, H: Hamiltonian, **kw) -> "OvalFamily":
        """Family around a real local minimum; the interval ends at the next critical value."""
        pts = [(a.real, b.real) for a, b in critical_points(H)
               if abs(a.imag) < 1e-12 and abs(b.imag) < 1e-12]
        best = None
        for p in pts:
            hxx = float(H.H.diff(0).diff(0)(*p))
            hyy = float(H.H.diff(1).diff(1)(*p))
            hxy = float(H.H.diff(0).diff(1)(*p))
            if hxx > 0 and hxx * hyy - hxy * hxy > 0:
                best = p
                break
        if best is None:
            raise OvalError("no nondegenerate real minimum")
        h0 = float(H(*best))
        above = sorted(v.real for v in critical_values(H) if abs(v.imag) < 1e-12 and v.real > h0 + 1e-12)
        hi = above[0] if above else math.inf
        return cls(H, best, interval=(h0, hi), **kw)

    def seed(self, t: float) -> np.ndarray:
        if self.interval and not (self.interval[0] < t < self.interval[1]):
            raise OvalError(f"level {t} outside the oval interval {self.interval}")
        c, u = self.center, self.direction

        def g(r):
            return float(self.H(*(c + r * u))) - t

        g0 = g(0.0)
        if g0 == 0:
            raise OvalError("level passes through the center")
        r = 1e-6
        while g(r) * g0 > 0:
            r *= 1.5
            if r > 1e8:
                raise OvalError(f"level {t} not reached along the seed ray")
        lo = r / 1.5 if r > 1e-6 else 0.0
        root = brentq(g, lo, r, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
        return c + root * u

    def trace(self, t: float, forms: Sequence[OneForm] = (), derivatives: bool = False,
              samples: int = 0) -> TracedOval:
        p0 = self.seed(t)
        hx, hy = self.hx, self.hy
        K = len(forms)
        polys = [hx, hy] + [f.P for f in forms] + [f.Q for f in forms]
        if derivatives:
            polys += [f.dcoef() for f in forms]
        C, I, J, top = _stack(polys)
        ar = np.arange(top + 1)

        def rhs(s, y):
            mon = (y[0] ** ar)[I] * (y[1] ** ar)[J]
            v = C @ mon
            gx, gy = v[0], v[1]
            g = math.hypot(gx, gy)
            v1, v2 = -gy / g, gx / g
            out = np.empty(2 + K + (K if derivatives else 0))
            out[0], out[1] = v1, v2
            out[2:2 + K] = v[2:2 + K] * v1 + v[2 + K:2 + 2 * K] * v2
            if derivatives:
                out[2 + K:] = v[2 + 2 * K:] / g
            return out

        Ds = [0] * K if derivatives else []
        gx, gy = float(hx(*p0)), float(hy(*p0))
        tangent = np.array([-gy, gx]) / math.hypot(gx, gy)
        r0 = float(np.linalg.norm(p0 - self.center))
        y0 = np.concatenate([p0, np.zeros(K + len(Ds))])
        first = solve_ivp(rhs, (0.0, 0.5 * r0), y0, method="DOP853", rtol=self.rtol, atol=1e-14)

        def section(s, y):
            return float((y[0] - p0[0]) * tangent[0] + (y[1] - p0[1]) * tangent[1])

        section.terminal = True
        section.direction = 1.0
        limit = 1e4 * max(r0, 1.0)
        sol = solve_ivp(rhs, (0.5 * r0, limit), first.y[:, -1], method="DOP853", rtol=self.rtol,
                        atol=1e-14, events=section, dense_output=True)
        if sol.status != 1 or not len(sol.t_events[0]):
            raise OvalError(f"oval at level {t} did not close")
        s_end = float(sol.t_events[0][0])
        y_end = sol.y_events[0][0]
        closure = float(np.hypot(y_end[0] - p0[0], y_end[1] - p0[1]))
        if closure > CLOSURE_TOL * max(1.0, r0):
            raise OvalError(f"oval at level {t} misses its seed by {closure:.3g}")
        ss = np.linspace(0.5 * r0, s_end, 64)
        pts = sol.sol(ss)[:2]
        drift = float(np.max(np.abs(self.H(pts[0], pts[1]) - t)))
        # signed area decides the orientation
        area = self._area(first, sol, s_end)
        orient = 1 if area > 0 else -1
        ints = np.asarray(y_end[2:2 + K]) * orient
        ders = None
        if derivatives:
            outward = 1.0 if t > self.h0 else -1.0
            ders = np.asarray(y_end[2 + K:]) * outward
        smp = None
        if samples:
            grid = np.linspace(0.5 * r0, s_end, samples)
            smp = sol.sol(grid)[:2].T
        return TracedOval(t, tuple(p0), s_end, closure, drift, orient, ints, ders, smp)

    def _area(self, first, sol, s_end):
        head = first.y[:2]
        tail = sol.sol(np.linspace(sol.t[0], s_end, 400))[:2]
        xy = np.concatenate([head, tail], axis=1)
        x, y = xy
        return 0.5 * float(np.sum(x[:-1] * y[1:] - x[1:] * y[:-1]))

    def polar_periods(self, ts, forms: Sequence[OneForm], derivatives: bool = False,
                      nodes: int = 256):
        """Periods on many levels at once by polar trapezoid quadrature.

        Valid when every ray from the center meets the oval once and
        transversally; the integrand is then smooth and periodic in the angle, so
        the trapezoid rule converges geometrically. Returns ``(I, dI, ok)``; levels
        where ``ok`` is false (non-star-shaped oval or unconverged rule) must be
        traced instead.
        """
        ts = np.atleast_1d(np.asarray(ts, dtype=float))
        K = len(forms)
        polys = [self.H.H, self.hx, self.hy] + [f.P for f in forms] + [f.Q for f in forms]
        if derivatives:
            polys += [f.dcoef() for f in forms]
        C, I, J, top = _stack(polys)
        c = self.center

        def evaluate(x1, x2):
            return _monomials(x1, x2, top, I, J) @ C.T

        Ch, Ih, Jh, toph = _stack([self.H.H])

        def level(rad):
            x1, x2 = c[0] + rad * cos, c[1] + rad * sin
            return _monomials(x1, x2, toph, Ih, Jh) @ Ch[0] - T

        theta = 2 * np.pi * np.arange(nodes) / nodes
        cos, sin = np.cos(theta), np.sin(theta)
        T = ts[:, None]
        sgn = np.sign(T - self.h0)
        # radial bracket: first sign change on a geometric grid of radii
        lo = np.zeros(ts.shape + theta.shape)
        hi = np.full_like(lo, np.nan)
        for rad in np.geomspace(1e-7, 1e3, 90):
            hit = np.isnan(hi) & (np.sign(level(np.full_like(lo, rad))) == sgn)
            hi = np.where(hit, rad, hi)
            lo = np.where(np.isnan(hi), rad, lo)
            if not np.isnan(hi).any():
                break
        ok = ~np.isnan(hi).any(axis=1)
        hi = np.where(np.isnan(hi), 1.0, hi)
        for _ in range(40):
            mid = 0.5 * (lo + hi)
            up = np.sign(level(mid)) == sgn
            hi = np.where(up, mid, hi)
            lo = np.where(up, lo, mid)
        r = 0.5 * (lo + hi)
        for _ in range(3):
            v = evaluate(c[0] + r * cos, c[1] + r * sin)
            fr = v[..., 1] * cos + v[..., 2] * sin
            r = r - (v[..., 0] - T) / np.where(fr == 0, 1.0, fr)
        x1, x2 = c[0] + r * cos, c[1] + r * sin
        v = evaluate(x1, x2)
        fr = v[..., 1] * cos + v[..., 2] * sin
        ftheta = r * (-v[..., 1] * sin + v[..., 2] * cos)
        gnorm = np.hypot(v[..., 1], v[..., 2])
        ok &= np.all(fr * sgn > 1e-3 * gnorm, axis=1)
        fr = np.where(fr == 0, 1.0, fr)
        dr = -ftheta / fr
        dx1 = dr * cos - r * sin
        dx2 = dr * sin + r * cos
        P = v[..., 3:3 + K]
        Q = v[..., 3 + K:3 + 2 * K]
        integrand = P * dx1[..., None] + Q * dx2[..., None]
        full = integrand.mean(axis=1) * 2 * np.pi
        half = integrand[:, ::2].mean(axis=1) * 2 * np.pi
        tol = 1e-11 * np.maximum(1.0, np.abs(full))
        ok &= np.all(np.abs(full - half) <= tol, axis=1)
        ders = None
        if derivatives:
            dint = v[..., 3 + 2 * K:] * (r / fr)[..., None]
            ders = dint.mean(axis=1) * 2 * np.pi
            dhalf = dint[:, ::2].mean(axis=1) * 2 * np.pi
            ok &= np.all(np.abs(ders - dhalf) <= 1e-10 * np.maximum(1.0, np.abs(ders)), axis=1)
        return full, ders, ok

    def periods_many(self, ts, forms: Sequence[OneForm], derivatives: bool = False):
        """Periods for a vector of levels; polar quadrature with tracing as fallback."""
        ts = np.atleast_1d(np.asarray(ts, dtype=float))
        if self.interval and not np.all((ts > self.interval[0]) & (ts < self.interval[1])):
            raise OvalError(f"levels outside the oval interval {self.interval}")
        out, ders, ok = self.polar_periods(ts, forms, derivatives)
        for k in np.flatnonzero(~ok):
            res = self.periods(float(ts[k]), forms, derivatives)
            if derivatives:
                out[k], ders[k] = res
            else:
                out[k] = res
        return (out, ders) if derivatives else out

    def periods(self, t: float, forms: Sequence[OneForm], derivatives: bool = False):
        tr = self.trace(t, forms, derivatives)
        if tr.level_drift > LEVEL_TOL * max(1.0, abs(t)):
            raise OvalError(f"level drift {tr.level_drift:.3g} along the oval at t={t}")
        return (tr.integrals, tr.derivatives) if derivatives else tr.integrals


def period(H: Hamiltonian, t: float, omega: OneForm, family: OvalFamily | None = None) -> float:
    """``∮ ω`` over the oval ``{H = t}``, counterclockwise."""
    family = family or OvalFamily.around_minimum(H)
    return float(family.periods(t, [omega])[0])


# envelope structure ---------------------------------------------------------------

@dataclass
class EnvelopeFit:
    degree: int
    residual: float  # relative max residual on the grid
    coefficients: np.ndarray
    rank: int
    condition: float


def envelope_structure(e: int, n: int):
    """``(⌈e/(n+1)⌉, basic forms)``."""
    if e < 1 or n < 1:
        raise ValueError("need e >= 1 and n >= 1")
    return envelope_degree(e, n), basic_forms(n)


def envelope_fit(family: OvalFamily, omega: OneForm, ts: Sequence[float], n: int | None = None,
                 degree: int | None = None) -> EnvelopeFit:
    """Least-squares fit ``I_ω(t) ≈ Σ p_α(t) I_α(t)`` with ``deg p_α <= ⌈e/(n+1)⌉``.

    The residual is the max grid error relative to the larger of ``|I_ω|``
    and the basic periods. Basic periods that vanish identically (by symmetry) give zero columns;
    the fit is rank-deficient rather than ill-posed.
    """
    n = family.H.n if n is None else n
    k, basis = envelope_structure(omega.degree, n)
    if degree is not None:
        k = degree
    ts = np.asarray(ts, dtype=float)
    vals = family.periods_many(ts, list(basis) + [omega])
    basis_vals, b = vals[:, :-1], vals[:, -1]
    A = np.concatenate([ts[:, None] ** j * basis_vals[:, [a]] for a in range(len(basis))
                        for j in range(k + 1)], axis=1)
    scale = np.max(np.abs(A), axis=0)
    dead = scale <= 1e-11 * max(float(scale.max()), 1e-300)
    A[:, dead] = 0.0
    scale[dead] = 1.0
    coef, _, rank, sv = np.linalg.lstsq(A / scale, b, rcond=1e-12)
    # measured against the larger of the target and the basis periods, so an
    # integral that vanishes by symmetry fits with a tiny residual
    ref = max(float(np.max(np.abs(b))), float(np.max(np.abs(basis_vals))), 1e-300)
    resid = float(np.max(np.abs(A / scale @ coef - b)) / ref)
    cond = float(sv[0] / sv[rank - 1]) if rank else math.inf
    return EnvelopeFit(k, resid, coef / scale, int(rank), cond)


# zeros ------------------------------------------------------------------------------

@dataclass
class ZeroReport:
    count: int
    roots: list
    samples: int
    suspected_double: list = field(default_factory=list)
    interval: tuple = ()

    def to_json(self) -> dict:
        return {"count": self.count, "roots": self.roots, "samples": self.samples,
                "suspected_double": self.suspected_double, "interval": list(self.interval)}


def scan_integral(family: OvalFamily, omega: OneForm, interval, samples: int):
    a, b = interval
    ts = np.linspace(a, b, samples + 2)[1:-1]
    vals = family.periods_many(ts, [omega])[:, 0]
    return ts, vals


def count_ai_zeros(family: OvalFamily, omega: OneForm, interval=None, samples: int = 1000,
                   xtol: float = 1e-10) -> ZeroReport:
    """Zeros of ``I_ω`` on an open subinterval of the oval interval.

    Dense sign-change scan, bisection to ``xtol``; interior local minima of
    ``|I|`` that come close to zero without a sign change are flagged as
    possible double roots.
    """
    interval = tuple(interval or family.interval)
    lo, hi = interval
    if not math.isfinite(hi) or not math.isfinite(lo):
        raise ValueError("a finite scan interval is required")
    ts, vals = scan_integral(family, omega, interval, samples)
    scale = float(np.max(np.abs(vals)))
    if scale <= 1e-12 * max(1.0, float(np.max(np.abs(ts)))):
        raise TrivialForm("the integral vanishes identically on the interval")

    def I(t):
        return float(family.periods_many([t], [omega])[0, 0])

    roots = []
    for k in range(len(ts) - 1):
        if vals[k] == 0:
            roots.append(float(ts[k]))
        elif vals[k] * vals[k + 1] < 0:
            roots.append(float(brentq(I, ts[k], ts[k + 1], xtol=xtol)))
    doubles = []
    mags = np.abs(vals)
    for k in range(1, len(ts) - 1):
        if mags[k] < mags[k - 1] and mags[k] < mags[k + 1] and vals[k - 1] * vals[k + 1] > 0 \
                and mags[k] < 1e-6 * scale:
            doubles.append(float(ts[k]))
    return ZeroReport(len(roots), roots, samples, doubles, interval)


@dataclass
class BoundCheck:
    measured: int
    bound: str
    verdict: str  # "<=", ">" or "unknown"
    n: int
    form_degree: int
    trivial: bool = False

    def to_json(self) -> dict:
        return self.__dict__.copy()


def verify_against_bound(family: OvalFamily, omega: OneForm, interval=None,
                         samples: int = 1000, report: ZeroReport | None = None) -> BoundCheck:
    """Measured zero count against ``bound_abelian(n, deg ω)`` with ``n = deg H - 1``."""
    n, e = family.H.n, omega.degree
    bound = bound_abelian(n, e)
    try:
        rep = report or count_ai_zeros(family, omega, interval, samples)
    except TrivialForm:
        return BoundCheck(0, render(bound), "skipped", n, e, trivial=True)
    v = compare(lit(rep.count), bound)
    verdict = "<=" if v in ("<", "=") else ">" if v == ">" else "unknown"
    return BoundCheck(rep.count, render(bound), verdict, n, e)
