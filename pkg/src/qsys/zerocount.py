"""Zero counting by the argument principle on keyhole and triangular contours."""
from __future__ import annotations

import cmath
import math
import random
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .analytic import (
    Arc,
    ContinuationError,
    Line,
    PathPlan,
    ZeroOnPath,
    _as_rhs,
    continue_solution,
)

ARG_STEP = math.pi / 4
RESIDUAL_LIMIT = 0.1
DEFORM_START = 1e-9
DEFORM_DOUBLINGS = 8
REFINE_ROUNDS = 5


class CountRejected(RuntimeError):
    """Winding number stayed non-integral (or a zero stayed on the contour)."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


# functions that can be tracked along paths ------------------------------------

class Holomorphic:
    """A single-valued function given by a Python callable."""

    def __init__(self, fn: Callable[[complex], complex], initial_samples: int = 64):
        self.fn = fn
        self.initial_samples = initial_samples

    def start(self, point: complex):
        return None

    def track(self, state, path: PathPlan):
        total = 0.0
        for seg in path.segments:
            total += _segment_variation(lambda s, seg=seg: complex(self.fn(complex(seg.point(s)))),
                                        self.initial_samples)
        return total, state


def _newton_radius(g, s, f, h):
    """``|g/g'|`` at ``s``: about the distance (in ``s``) to the nearest zero."""
    if s + h == s - h:
        raise ZeroOnPath("argument does not resolve; the function nearly vanishes on the path")
    d = (g(s + h) - g(s - h)) / (2 * h)
    return abs(f / d) if d != 0 else math.inf


def _segment_variation(g, n) -> float:
    ss = np.linspace(0.0, 1.0, n + 1)
    vals = [g(s) for s in ss]
    rads = [_newton_radius(g, s, v, 1e-3 / n) if v != 0 else 0.0 for s, v in zip(ss, vals)]
    total = 0.0
    for k in range(n):
        total += _unwind(g, ss[k], ss[k + 1], vals[k], vals[k + 1], rads[k], rads[k + 1], 0)
    return total


def _unwind(g, s0, s1, f0, f1, r0, r1, depth):
    # besides small and consistent phase steps, a step must stay within the
    # Newton radius at both ends: a zero of even order next to the path turns
    # the argument by a full circle without any visible jump at the samples
    if f0 == 0 or f1 == 0:
        raise ZeroOnPath("function vanishes on the path")
    whole = cmath.phase(f1 / f0)
    sm = 0.5 * (s0 + s1)
    fm = g(sm)
    if fm == 0:
        raise ZeroOnPath("function vanishes on the path")
    left, right = cmath.phase(fm / f0), cmath.phase(f1 / fm)
    if abs(whole) < ARG_STEP and abs(left + right - whole) < 1e-9 and s1 - s0 <= 0.5 * min(r0, r1):
        return whole
    if depth > 48:
        raise ZeroOnPath("argument does not resolve; the function nearly vanishes on the path")
    rm = _newton_radius(g, sm, fm, 1e-3 * (sm - s0))
    return (_unwind(g, s0, sm, f0, fm, r0, rm, depth + 1)
            + _unwind(g, sm, s1, fm, f1, rm, r1, depth + 1))


def variation_of_argument(f, path: PathPlan) -> float:
    """Continuously unwound argument change of ``f`` along ``path``."""
    if callable(f) and not hasattr(f, "track"):
        f = Holomorphic(f)
    var, _ = f.track(f.start(path.start), path)
    return var


class QSolution:
    """``f = c · X[:, column]`` for a fundamental solution of a restricted system.

    ``X`` is fixed by its value ``X0`` at ``base``; values elsewhere come from
    continuation along the straight segment from ``base`` (the branch is the
    one reached that way).
    """

    def __init__(self, rhs, base: complex, X0, direction, column: int = 0):
        self.rhs = _as_rhs(rhs)
        self.base = complex(base)
        self.X0 = np.asarray(X0, dtype=complex)
        self.c = np.asarray(direction, dtype=complex).ravel()
        self.column = column

    def scalar(self, X):
        return self.c @ X[:, self.column]

    def value(self, X):
        return complex(self.scalar(X))

    def start(self, point: complex):
        point = complex(point)
        if point == self.base:
            return self.X0
        return continue_solution(self.rhs, PathPlan.line(self.base, point), self.X0).X

    def track(self, state, path: PathPlan):
        res = continue_solution(self.rhs, path, state, scalar=self.scalar)
        return res.var_arg, res.X

    def with_branch(self, M) -> "QSolution":
        """Same function on another branch: ``X0 -> X0 · M``."""
        return QSolution(self.rhs, self.base, self.X0 @ np.asarray(M, dtype=complex),
                         self.c, self.column)


# contours -----------------------------------------------------------------------

@dataclass
class KeyholeContour:
    """Disc of radius ``R`` cut along the real axis except ``(-R, s_1)``.

    Discs of radius ``eps`` around the real singular points are removed.
    ``offset`` pulls the contour into the domain by that distance (banks to
    ``±offset``, small radii to ``eps + offset``, large radius to ``R - offset``);
    a negative offset pushes it outwards.
    """

    points: list
    eps: float
    R: float
    offset: float = 0.0

    def __post_init__(self):
        self.points = sorted(float(p) for p in self.points)
        gaps = np.diff(self.points)
        if len(gaps) and self.eps >= 0.5 * float(np.min(gaps)):
            raise ValueError("eps must be below half the smallest gap between singular points")
        if self.points and self.R <= 2 * max(abs(p) for p in self.points):
            raise ValueError("R must exceed twice the largest |singular point|")
        if self.eps <= 0 or self.R <= 0:
            raise ValueError("radii must be positive")

    @classmethod
    def around(cls, points, eps=None, R=None) -> "KeyholeContour":
        pts = sorted(float(p) for p in points)
        gaps = np.diff(pts)
        if eps is None:
            eps = 0.25 * float(np.min(gaps)) if len(gaps) else 0.25
            eps = min(eps, 0.25)
        if R is None:
            R = 2.0 * max([abs(p) for p in pts] + [1.0]) + 1.0
        return cls(pts, eps, R)

    def deformed(self, h: float) -> "KeyholeContour":
        return KeyholeContour(self.points, self.eps, self.R, h)

    def refined(self) -> "KeyholeContour":
        return KeyholeContour(self.points, self.eps / 2, self.R * 2, self.offset)

    def pieces(self) -> list[tuple[str, PathPlan]]:
        h = self.offset
        if h < 0:
            return self._expanded_pieces(-h)
        Rr = self.R - h
        if not self.points:
            return [("Gamma+", PathPlan.arc(0, Rr, 0.0, math.pi)),
                    ("Gamma-", PathPlan.arc(0, Rr, math.pi, 2 * math.pi))]
        rho = self.eps + h
        th_r = math.asin(h / Rr)
        th_s = math.asin(h / rho)
        c = math.sqrt(rho * rho - h * h)
        xR = math.sqrt(Rr * Rr - h * h)
        s = self.points
        nu = len(s)
        out = [("Gamma+", PathPlan.arc(0, Rr, th_r, math.pi)),
               ("Gamma-", PathPlan.arc(0, Rr, math.pi, 2 * math.pi - th_r))]
        # lower banks right to left with clockwise lower half-circles
        right = xR
        for i in range(nu - 1, -1, -1):
            out.append((f"delta{i + 1}-", PathPlan.line(complex(right, -h), complex(s[i] + c, -h))))
            if i > 0:
                out.append((f"gamma{i + 1}-", PathPlan.arc(s[i], rho, -th_s, -(math.pi - th_s))))
                right = s[i] - c
        # the circle around s_1 opens onto the uncut interval (-R, s_1)
        out.append(("gamma1-", PathPlan.arc(s[0], rho, -th_s, -math.pi)))
        out.append(("gamma1+", PathPlan.arc(s[0], rho, -math.pi, -(2 * math.pi - th_s))))
        for i in range(nu):
            end = complex(s[i + 1] - c, h) if i + 1 < nu else complex(xR, h)
            out.append((f"delta{i + 1}+", PathPlan.line(complex(s[i] + c, h), end)))
            if i + 1 < nu:
                out.append((f"gamma{i + 2}+", PathPlan.arc(s[i + 1], rho, math.pi - th_s, th_s)))
        return out

    def _expanded_pieces(self, h):
        # growing U by h swallows the slits: what is left is the large circle
        # minus the small discs, which only makes sense for single-valued f
        out = [("Gamma", PathPlan.circle(0, self.R + h))]
        for i, p in enumerate(self.points):
            out.append((f"gamma{i + 1}", PathPlan.circle(p, self.eps - h).reversed()))
        return out

    def path(self) -> PathPlan:
        plan = None
        for _, p in self.pieces():
            plan = p if plan is None else plan + p
        return plan

    def contains(self, z: complex) -> bool:
        """Whether ``z`` lies in the open domain (undeformed)."""
        z = complex(z)
        if abs(z) >= self.R:
            return False
        if any(abs(z - p) <= self.eps for p in self.points):
            return False
        if z.imag == 0 and self.points and z.real > self.points[0]:
            return False
        return True

    def to_json(self) -> dict:
        return {"kind": "keyhole", "points": self.points, "eps": self.eps, "R": self.R,
                "offset": self.offset}


@dataclass
class Triangle:
    a: complex
    b: complex
    c: complex
    offset: float = 0.0

    def __post_init__(self):
        self.a, self.b, self.c = complex(self.a), complex(self.b), complex(self.c)
        if self.signed_area() < 0:
            self.b, self.c = self.c, self.b

    def signed_area(self) -> float:
        u, v = self.b - self.a, self.c - self.a
        return 0.5 * (u.real * v.imag - u.imag * v.real)

    def vertices(self):
        if not self.offset:
            return self.a, self.b, self.c
        g = (self.a + self.b + self.c) / 3
        scale = max(abs(self.a - g), abs(self.b - g), abs(self.c - g))
        k = 1 - self.offset / scale
        return tuple(g + k * (p - g) for p in (self.a, self.b, self.c))

    def deformed(self, h: float) -> "Triangle":
        return Triangle(self.a, self.b, self.c, h)

    @property
    def R(self) -> float:
        return max(abs(self.a), abs(self.b), abs(self.c), 1.0)

    def pieces(self):
        a, b, c = self.vertices()
        return [("ab", PathPlan.line(a, b)), ("bc", PathPlan.line(b, c)), ("ca", PathPlan.line(c, a))]

    def path(self) -> PathPlan:
        a, b, c = self.vertices()
        return PathPlan.polyline([a, b, c, a])

    def contains(self, z: complex) -> bool:
        z = complex(z)
        a, b, c = self.a, self.b, self.c

        def cross(p, q, r):
            u, v = q - p, r - p
            return u.real * v.imag - u.imag * v.real

        return cross(a, b, z) > 0 and cross(b, c, z) > 0 and cross(c, a, z) > 0

    def to_json(self) -> dict:
        return {"kind": "triangle", "vertices": [[p.real, p.imag] for p in (self.a, self.b, self.c)],
                "offset": self.offset}


@dataclass
class CountReport:
    zero_count: int
    var_arg_ledger: list
    deformation_applied: bool
    error_margin: float
    contour: dict = field(default_factory=dict)
    total: float = 0.0
    refinements: int = 0

    @property
    def accepted(self) -> bool:
        return self.error_margin < RESIDUAL_LIMIT

    def to_json(self) -> dict:
        return {
            "zero_count": self.zero_count,
            "var_arg_ledger": [[tag, v] for tag, v in self.var_arg_ledger],
            "deformation_applied": self.deformation_applied,
            "error_margin": self.error_margin,
            "total_variation": self.total,
            "refinements": self.refinements,
            "contour": self.contour,
        }


def _ledger(f, contour):
    pieces = contour.pieces()
    state = f.start(pieces[0][1].start)
    ledger = []
    for tag, p in pieces:
        v, state = f.track(state, p)
        ledger.append((tag, v))
    return ledger


def _winding(ledger):
    w = sum(v for _, v in ledger) / (2 * math.pi)
    return int(round(w)), abs(w - round(w))


def _count_once(f, contour, sign):
    """Ledger on ``contour``, or on a displaced copy when zeros sit on it.

    A zero of even multiplicity on the contour does not show up as a jump of
    the argument, so the count is always repeated on the contour displaced
    by ``1e-9·R``; when the two disagree the displaced one is kept.
    """
    try:
        base = _ledger(f, contour)
    except (ZeroOnPath, ContinuationError):
        base = None
    h = sign * DEFORM_START * contour.R
    for _ in range(DEFORM_DOUBLINGS + 1):
        moved = contour.deformed(h)
        try:
            ledger = _ledger(f, moved)
        except (ZeroOnPath, ContinuationError):
            h *= 2
            continue
        if base is not None and _winding(base)[0] == _winding(ledger)[0]:
            return base, contour, False
        return ledger, moved, True
    raise CountRejected("a zero stays on the contour after the maximal deformation")


def count_zeros(f, contour, boundary: str = "exterior") -> CountReport:
    """Number of zeros inside ``contour`` from the total argument variation.

    ``f`` is a callable (single-valued) or a :class:`QSolution`.  Keyhole
    contours are refined (``eps/2``, ``2R``) when the winding is not within
    0.1 of an integer; a triangle is rejected outright.

    Zeros on the contour are pushed to the exterior by moving the contour
    into the domain (``boundary="exterior"``); ``boundary="interior"`` moves
    it outwards instead, so that such zeros are counted. Zeros closer than
    ``1e-9·R`` to the contour count as lying on it.
    """
    if boundary not in ("exterior", "interior"):
        raise ValueError("boundary must be 'exterior' or 'interior'")
    sign = 1.0 if boundary == "exterior" else -1.0
    if callable(f) and not hasattr(f, "track"):
        f = Holomorphic(f)
    if sign < 0 and isinstance(contour, KeyholeContour) and not isinstance(f, Holomorphic):
        raise ValueError("interior counting on a keyhole needs a single-valued function")
    rounds = REFINE_ROUNDS if isinstance(contour, KeyholeContour) else 0
    last = None
    for r in range(rounds + 1):
        ledger, used, deformed = _count_once(f, contour, sign)
        total = sum(v for _, v in ledger)
        w = total / (2 * math.pi)
        n = int(round(w))
        report = CountReport(n, ledger, deformed, abs(w - n), used.to_json(), total, r)
        if report.accepted:
            return report
        last = report
        if r < rounds:
            contour = contour.refined()
    raise CountRejected(f"winding residual {last.error_margin:.3g} exceeds {RESIDUAL_LIMIT}", last)


# Petrov trick -------------------------------------------------------------------

def sign_changes(values) -> int:
    v = np.asarray(values, dtype=float)
    v = v[v != 0]
    return int(np.count_nonzero(np.signbit(v[1:]) != np.signbit(v[:-1])))


def imag_zero_sampler(samples: int = 2000):
    def counter(F, a, b):
        ts = np.linspace(a, b, samples)
        return sign_changes([complex(F(t)).imag for t in ts])
    return counter


def petrov_segment_bound(F, segment, imag_zero_counter=None, real_tol: float = 1e-14) -> float:
    """``π·(zeros of Im F on the segment + 1)``, or 0 when ``F`` is real there."""
    a, b = (float(x) for x in segment)
    ts = np.linspace(a, b, 257)
    vals = np.array([complex(F(t)) for t in ts])
    if np.max(np.abs(vals.imag)) <= real_tol * max(1.0, float(np.max(np.abs(vals)))):
        return 0.0
    counter = imag_zero_counter or imag_zero_sampler()
    return math.pi * (counter(F, a, b) + 1)


def sampled_variation(values) -> float:
    """Unwound argument change over a dense sequence of values."""
    v = np.asarray(values, dtype=complex)
    if np.any(v == 0):
        raise ZeroOnPath("sampled function vanishes")
    steps = np.angle(v[1:] / v[:-1])
    if np.any(np.abs(steps) >= ARG_STEP):
        raise ZeroOnPath("sampling too coarse for continuous unwinding")
    return float(np.sum(steps))


# counting function ------------------------------------------------------------

@dataclass
class CountingEstimate:
    lower_bound: int
    best_triangle: dict | None
    best_branch: int | None
    triangles_tried: int
    rejected: int

    def to_json(self) -> dict:
        return {"lower_bound": self.lower_bound, "best_triangle": self.best_triangle,
                "best_branch": self.best_branch, "triangles_tried": self.triangles_tried,
                "rejected": self.rejected}


def _random_triangle(rng, center, radius):
    def pt():
        r = radius * math.sqrt(rng.random())
        return center + r * cmath.exp(2j * math.pi * rng.random())

    if rng.random() < 0.3:
        # large triangles near the rim cover most of the disc
        th = 2 * math.pi * rng.random()
        return Triangle(*(center + radius * 0.999 * cmath.exp(1j * (th + 2 * math.pi * k / 3
                                                                     + 0.3 * (rng.random() - 0.5)))
                          for k in range(3)))
    return Triangle(pt(), pt(), pt())


def counting_function_estimate(f, center=0j, radius=1.0, samples: int = 50, branches=None,
                               singular_points=(), seed: int = 0) -> CountingEstimate:
    """Lower bound for the counting function by sampling triangles and branches.

    ``branches`` is a list of functions (for example :meth:`QSolution.with_branch`
    images); triangles containing or touching a singular point are skipped.
    """
    rng = random.Random(seed)
    funcs = list(branches) if branches else [f]
    best, best_tri, best_branch = 0, None, None
    rejected = 0
    for _ in range(samples):
        tri = _random_triangle(rng, complex(center), radius)
        if abs(tri.signed_area()) < 1e-9:
            continue
        if any(tri.contains(p) or tri.path().avoiding([p]).min_clearance < 1e-6
               for p in singular_points):
            continue
        for j, g in enumerate(funcs):
            try:
                rep = count_zeros(g, tri)
            except (CountRejected, ContinuationError):
                rejected += 1
                continue
            if rep.zero_count > best:
                best, best_tri, best_branch = rep.zero_count, tri.to_json(), j
    return CountingEstimate(best, best_tri, best_branch, samples, rejected)


def triangle_preimage_count(tri: Triangle, mu: float = 0.0) -> int:
    """Connected components of the preimage of ``tri`` under ``w = (t + μ)²``.

    The preimage is connected exactly when the triangle winds around the
    critical value ``w = 0``; otherwise it splits into two sheets.
    """
    del mu  # the critical value is w = 0 for every shift
    winding = round(variation_of_argument(lambda w: w, tri.path()) / (2 * math.pi))
    return 1 if winding else 2
