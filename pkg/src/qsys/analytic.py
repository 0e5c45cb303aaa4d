"""Numerical analytic continuation of fundamental solutions.

Paths are chains of straight and circular segments in the complex t-plane;
along each one the matrix ODE ``dX/dt = Ω(t) X`` is integrated in the real
path parameter with scipy's DOP853 on the complex state.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import solve_ivp

RTOL = 1e-12
ATOL = 1e-14
ARG_STEP = math.pi / 4


class ContinuationError(RuntimeError):
    pass


class ZeroOnPath(ContinuationError):
    """The tracked scalar vanished on the path, so its argument is undefined."""


# paths --------------------------------------------------------------------

@dataclass(frozen=True)
class Line:
    a: complex
    b: complex

    def point(self, s):
        return self.a + s * (self.b - self.a)

    def velocity(self, s):
        return self.b - self.a

    @property
    def length(self) -> float:
        return abs(self.b - self.a)

    def reversed(self) -> "Line":
        return Line(self.b, self.a)

    def distance(self, p: complex) -> float:
        d = self.b - self.a
        if d == 0:
            return abs(p - self.a)
        s = ((p - self.a) * d.conjugate()).real / abs(d) ** 2
        return abs(p - self.point(min(1.0, max(0.0, s))))


@dataclass(frozen=True)
class Arc:
    center: complex
    radius: float
    theta0: float
    theta1: float

    def point(self, s):
        return self.center + self.radius * np.exp(1j * (self.theta0 + s * (self.theta1 - self.theta0)))

    def velocity(self, s):
        dth = self.theta1 - self.theta0
        return 1j * self.radius * dth * np.exp(1j * (self.theta0 + s * dth))

    @property
    def length(self) -> float:
        return abs(self.radius * (self.theta1 - self.theta0))

    def reversed(self) -> "Arc":
        return Arc(self.center, self.radius, self.theta1, self.theta0)

    def distance(self, p: complex) -> float:
        z = p - self.center
        lo, hi = sorted((self.theta0, self.theta1))
        if hi - lo >= 2 * math.pi or abs(z) == 0:
            return abs(abs(z) - self.radius)
        phi = cmath.phase(z)
        # bring phi into [lo, lo + 2π)
        phi = lo + (phi - lo) % (2 * math.pi)
        if phi <= hi:
            return abs(abs(z) - self.radius)
        return min(abs(p - self.point(0.0)), abs(p - self.point(1.0)))


@dataclass(frozen=True)
class PathPlan:
    segments: tuple
    min_clearance: float = math.inf

    def __post_init__(self):
        if not self.segments:
            raise ValueError("a path needs at least one segment")
        if not self.min_clearance > 0:
            raise ContinuationError("path passes through a singular point")

    @property
    def start(self) -> complex:
        return complex(self.segments[0].point(0.0))

    @property
    def end(self) -> complex:
        return complex(self.segments[-1].point(1.0))

    @property
    def length(self) -> float:
        return sum(seg.length for seg in self.segments)

    def is_closed(self, tol=1e-12) -> bool:
        return abs(self.start - self.end) <= tol * max(1.0, abs(self.start))

    def reversed(self) -> "PathPlan":
        return PathPlan(tuple(seg.reversed() for seg in reversed(self.segments)), self.min_clearance)

    def __add__(self, other: "PathPlan") -> "PathPlan":
        if abs(self.end - other.start) > 1e-9 * max(1.0, abs(self.end)):
            raise ValueError("paths do not connect")
        return PathPlan(self.segments + other.segments, min(self.min_clearance, other.min_clearance))

    def avoiding(self, points: Sequence[complex]) -> "PathPlan":
        """Same path with ``min_clearance`` measured against ``points``."""
        clearance = min((seg.distance(complex(p)) for seg in self.segments for p in points),
                        default=math.inf)
        return PathPlan(self.segments, clearance)

    @classmethod
    def line(cls, a, b) -> "PathPlan":
        return cls((Line(complex(a), complex(b)),))

    @classmethod
    def polyline(cls, points) -> "PathPlan":
        pts = [complex(p) for p in points]
        return cls(tuple(Line(a, b) for a, b in zip(pts, pts[1:])))

    @classmethod
    def circle(cls, center, radius, start_angle=0.0, turns=1) -> "PathPlan":
        th1 = start_angle + 2 * math.pi * turns
        return cls((Arc(complex(center), float(radius), float(start_angle), float(th1)),))

    @classmethod
    def arc(cls, center, radius, theta0, theta1) -> "PathPlan":
        return cls((Arc(complex(center), float(radius), float(theta0), float(theta1)),))


# continuation ---------------------------------------------------------------

Rhs = Callable[[complex], np.ndarray]


def restricted(Q, params=()) -> Rhs:
    """``t -> Ω_{λ'}(t)`` as a numpy-callable, from a QSystem or a one-form."""
    from .algebra import restrict_line

    form = getattr(Q, "form", Q)
    return restrict_line(form, params)


def _as_rhs(rhs):
    if callable(rhs) and not hasattr(rhs, "form"):
        return rhs
    return restricted(rhs)


@dataclass
class ContinuationResult:
    X: np.ndarray
    error_estimate: float
    steps: int
    var_arg: float | None = None
    samples: list = field(default_factory=list)


def _segment_solve(rhs, seg, Y0: np.ndarray, rtol, atol, dense):
    ell = Y0.shape[0]
    shape = Y0.shape

    def fun(s, y):
        t = seg.point(s)
        return (rhs(t) @ y.reshape(shape)).ravel() * seg.velocity(s)

    sol = solve_ivp(fun, (0.0, 1.0), Y0.ravel().astype(complex), method="DOP853",
                    rtol=rtol, atol=atol, dense_output=dense)
    if sol.status != 0:
        raise ContinuationError(f"integration failed on {seg}: {sol.message}")
    del ell
    return sol


def _unwound_variation(g, s0, s1, f0, f1, depth=0):
    """Argument change of ``g`` on ``[s0, s1]`` with bisection until steps are below π/4."""
    if f0 == 0 or f1 == 0:
        raise ZeroOnPath("tracked function vanishes on the path")
    step = cmath.phase(f1 / f0)
    if abs(step) < ARG_STEP or depth > 40:
        if depth > 40:
            raise ZeroOnPath("argument does not resolve; the function nearly vanishes on the path")
        return step
    sm = 0.5 * (s0 + s1)
    fm = g(sm)
    return (_unwound_variation(g, s0, sm, f0, fm, depth + 1)
            + _unwound_variation(g, sm, s1, fm, f1, depth + 1))


def continue_solution(rhs, path: PathPlan, X0, *, rtol=RTOL, atol=ATOL,
                      scalar: Callable[[np.ndarray], complex] | None = None,
                      sample_points: int = 0) -> ContinuationResult:
    """Solve ``dX/dt = Ω(t) X`` along ``path`` starting from ``X0``.

    With ``scalar`` given (a function of the current matrix, for example
    ``lambda X: c @ X[:, 0]``), its total argument variation along the path
    is tracked continuously and returned as ``var_arg``.
    """
    rhs = _as_rhs(rhs)
    X = np.array(X0, dtype=complex)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    scale0 = np.linalg.norm(X)
    if X.shape[0] == X.shape[1] and abs(np.linalg.det(X)) <= 1e-300:
        raise ContinuationError("initial matrix is singular")
    steps = 0
    err = 0.0
    peak = scale0
    var = 0.0 if scalar is not None else None
    samples = []
    for seg in path.segments:
        need_dense = scalar is not None or sample_points > 0
        sol = _segment_solve(rhs, seg, X, rtol, atol, need_dense)
        steps += len(sol.t) - 1
        Y = sol.y.reshape(X.shape + (-1,))
        peak = max(peak, float(np.max(np.linalg.norm(Y.reshape(-1, Y.shape[-1]), axis=0))))
        if scalar is not None:
            def g(s, sol=sol):
                return complex(scalar(sol.sol(s).reshape(X.shape)))
            vals = [complex(scalar(Y[..., k])) for k in range(Y.shape[-1])]
            for k in range(len(sol.t) - 1):
                var += _unwound_variation(g, sol.t[k], sol.t[k + 1], vals[k], vals[k + 1])
        if sample_points:
            for s in np.linspace(0.0, 1.0, sample_points):
                samples.append((complex(seg.point(s)), sol.sol(s).reshape(X.shape)))
        X = Y[..., -1].copy()
        err += rtol * (len(sol.t) - 1) * peak
    if not np.all(np.isfinite(X)):
        raise ContinuationError("solution blew up along the path")
    if X.shape[0] == X.shape[1]:
        cond = np.linalg.cond(X)
        if not np.isfinite(cond) or cond > 1e15:
            raise ContinuationError(f"fundamental matrix lost invertibility (cond {cond:.3g})")
    return ContinuationResult(X, err, steps, var, samples)


# monodromy ------------------------------------------------------------------

@dataclass
class MonodromyMatrix:
    matrix: np.ndarray
    loop: PathPlan
    base_point: complex
    error_estimate: float

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=complex)
        if abs(np.linalg.det(self.matrix)) <= 1e-12:
            raise ContinuationError("monodromy matrix is not invertible")

    def __matmul__(self, other: "MonodromyMatrix") -> "MonodromyMatrix":
        """Monodromy of ``self.loop`` followed by ``other.loop`` (same base point)."""
        return MonodromyMatrix(self.matrix @ other.matrix, self.loop + other.loop,
                               self.base_point, self.error_estimate + other.error_estimate)

    def to_json(self) -> dict:
        return {
            "base_point": [self.base_point.real, self.base_point.imag],
            "error_estimate": self.error_estimate,
            "matrix": [[f"{z.real:.17g}{z.imag:+.17g}j" for z in row] for row in self.matrix],
        }


def monodromy(rhs, loop: PathPlan, X0=None, **kw) -> MonodromyMatrix:
    """``M`` with ``X_end = X0 · M`` for a closed loop (``ΔX = X·M``)."""
    if not loop.is_closed(1e-9):
        raise ValueError("monodromy needs a closed loop")
    rhs = _as_rhs(rhs)
    ell = rhs(loop.start).shape[0]
    X0 = np.eye(ell, dtype=complex) if X0 is None else np.asarray(X0, dtype=complex)
    res = continue_solution(rhs, loop, X0, **kw)
    M = np.linalg.solve(X0, res.X)
    return MonodromyMatrix(M, loop, loop.start, res.error_estimate)


def small_loop_monodromy(rhs, t0: complex, eps: float, fiber=None, turns: int = 1,
                         **kw) -> MonodromyMatrix:
    """Monodromy along ``|t - t0| = eps`` counterclockwise, based at ``t0 + eps``.

    ``fiber`` (other singular points) is used to reject loops that are not small.
    """
    t0 = complex(t0)
    others = [complex(p) for p in (fiber or []) if abs(complex(p) - t0) > 1e-12 * max(1, abs(t0))]
    if others:
        gap = min(abs(p - t0) for p in others)
        if eps >= gap / 2:
            raise ValueError(f"loop radius {eps} is not below half the distance {gap:.3g} to the next singular point")
    loop = PathPlan.circle(t0, eps, 0.0, turns)
    if others:
        loop = loop.avoiding(others)
    return monodromy(rhs, loop, **kw)


# quasi-unipotence -----------------------------------------------------------

@dataclass(frozen=True)
class QUVerdict:
    kind: str  # "yes", "no" or "inconclusive"
    j: int | None = None
    k: int | None = None
    witness: complex | None = None
    detail: str = ""

    def __bool__(self):
        return self.kind == "yes"


def _eigen_clusters(vals, radius):
    groups = []
    for v in vals:
        for g in groups:
            if abs(v - np.mean(g)) <= radius:
                g.append(v)
                break
        else:
            groups.append([v])
    return [(complex(np.mean(g)), len(g)) for g in groups]


def is_quasi_unipotent(M, j_max: int = 64, tol: float = 1e-7) -> QUVerdict:
    """Test whether every eigenvalue is a root of unity of order at most ``j_max``.

    Numerically split eigenvalues of a Jordan block are merged first (the
    mean of a cluster is well conditioned), then each mean is matched to the
    nearest fraction ``p/q`` with ``q <= j_max`` of its angle.
    """
    A = np.asarray(getattr(M, "matrix", M), dtype=complex)
    ell = A.shape[0]
    vals = np.linalg.eigvals(A)
    scale = max(1.0, float(np.linalg.norm(A, 2)))
    orders = []
    for lam, _ in _eigen_clusters(vals, radius=max(1e-5, 1e3 * tol)):
        if abs(abs(lam) - 1.0) > tol:
            return QUVerdict("no", witness=lam, detail="eigenvalue off the unit circle")
        turn = (cmath.phase(lam) / (2 * math.pi)) % 1.0
        frac = Fraction(turn).limit_denominator(j_max)
        root = cmath.exp(2j * math.pi * frac)
        if abs(lam - root) > tol:
            return QUVerdict("inconclusive", witness=lam,
                             detail=f"no root of unity of order <= {j_max} within {tol}")
        orders.append(frac.denominator)
    j = math.lcm(*orders) if orders else 1
    N = np.linalg.matrix_power(A, j) - np.eye(ell)
    P = np.eye(ell, dtype=complex)
    thresh = max(tol, 1e-9) * scale ** j
    for k in range(1, ell + 1):
        P = P @ N
        if np.linalg.norm(P) <= thresh * max(1.0, np.linalg.norm(N)) ** (k - 1):
            return QUVerdict("yes", j=j, k=k)
    return QUVerdict("inconclusive", j=j, detail="(M^j - I) is not numerically nilpotent")


# order at a singular point --------------------------------------------------

@dataclass
class OrderEstimate:
    mu: float
    radius: float  # half-width of the confidence interval
    method: str  # "eps" or "log"
    log_dominant: bool
    raw: list
    eps: list

    @property
    def interval(self) -> tuple[float, float]:
        return (self.mu - self.radius, self.mu + self.radius)


def _neville(xs, ys):
    """Value at 0 of the interpolating polynomial and the last correction size."""
    n = len(xs)
    P = list(ys)
    last = math.inf
    for k in range(1, n):
        for i in range(n - k):
            new = (xs[i + k] * P[i] - xs[i] * P[i + 1]) / (xs[i + k] - xs[i])
            if i == n - k - 1:
                last = abs(new - P[i])
            P[i] = new
    return P[0], last


def order_at_singularity(rhs, t0, direction, *, column: int = 0, eps0: float | None = None,
                         n_eps: int = 7, half_angle: float = math.pi / 2, phi: float = 0.0,
                         fiber=None, X0=None) -> OrderEstimate:
    """Estimate ``ord_{t0} f`` for ``f = direction · X[:, column]``.

    For radii ``eps_i = eps0/2^i`` the argument variation of ``f`` along the
    arc ``t0 + eps_i·e^{iθ}``, ``|θ - phi| <= half_angle``, divided by the arc
    angle, tends to the order.  The sequence is extrapolated both in ``eps``
    (power corrections) and in ``1/log eps`` (logarithmic corrections); the
    extrapolation with the smaller internal error wins.
    """
    rhs = _as_rhs(rhs)
    t0 = complex(t0)
    others = [complex(p) for p in (fiber or []) if abs(complex(p) - t0) > 1e-12]
    clearance = min((abs(p - t0) for p in others), default=math.inf)
    if eps0 is None:
        eps0 = min(clearance / 2, 1e-3)
    ell = rhs(t0 + eps0).shape[0]
    c = np.asarray(direction, dtype=complex).ravel()
    base = t0 + eps0 * cmath.exp(1j * phi)
    X = np.eye(ell, dtype=complex) if X0 is None else np.asarray(X0, dtype=complex)

    def scalar(Y):
        return c @ Y[:, column]

    raws, epss = [], []
    cur, cur_pt = X, base
    for i in range(n_eps):
        eps = eps0 / 2 ** i
        radial_end = t0 + eps * cmath.exp(1j * phi)
        if i:
            cur = continue_solution(rhs, PathPlan.line(cur_pt, radial_end), cur).X
            cur_pt = radial_end
        # go to one end of the arc and sweep to the other
        to_start = PathPlan.arc(t0, eps, phi, phi - half_angle)
        Xs = continue_solution(rhs, to_start, cur).X
        sweep = PathPlan.arc(t0, eps, phi - half_angle, phi + half_angle)
        res = continue_solution(rhs, sweep, Xs, scalar=scalar)
        raws.append(res.var_arg / (2 * half_angle))
        epss.append(eps)
    mu_e, err_e = _neville(epss, raws)
    xs = [-1.0 / math.log(e) for e in epss]
    mu_l, err_l = _neville(xs, raws)
    spread = max(raws) - min(raws)
    if spread < 1e-12:
        return OrderEstimate(raws[-1], max(spread, 1e-10), "eps", False, raws, epss)
    if err_e <= err_l:
        return OrderEstimate(mu_e, err_e, "eps", False, raws, epss)
    return OrderEstimate(mu_l, err_l, "log", True, raws, epss)


# regularity -----------------------------------------------------------------

@dataclass
class RegularityReport:
    max_exponent: float
    irregular: bool
    slopes: list  # per ray: (angle, outer slope, inner slope)

    def to_json(self) -> dict:
        return {"max_exponent": self.max_exponent, "irregular": self.irregular,
                "rays": [list(s) for s in self.slopes]}


def regularity_probe(rhs, t0, rays: int = 8, r_outer: float = 1.0, r_inner: float = 0.02,
                     samples: int = 12, fiber=None) -> RegularityReport:
    """Fit ``max(|X|, |X^-1|) ~ dist^-k`` along rays into ``t0``.

    Slopes are fitted separately on the outer and inner halves of each ray;
    a slope that keeps growing towards ``t0`` marks super-polynomial growth.
    Advisory only.
    """
    rhs = _as_rhs(rhs)
    t0 = complex(t0)
    others = [complex(p) for p in (fiber or []) if abs(complex(p) - t0) > 1e-12]
    if others:
        r_outer = min(r_outer, 0.5 * min(abs(p - t0) for p in others))
        r_inner = min(r_inner, r_outer / 50)
    ell = rhs(t0 + r_outer).shape[0]
    radii = np.geomspace(r_outer, r_inner, samples)
    out = []
    worst = 0.0
    irregular = False
    for q in range(rays):
        th = 2 * math.pi * (q + 0.5) / rays
        u = cmath.exp(1j * th)
        X = np.eye(ell, dtype=complex)
        logs = []
        pt = t0 + radii[0] * u
        for r in radii:
            nxt = t0 + r * u
            if nxt != pt:
                try:
                    X = continue_solution(rhs, PathPlan.line(pt, nxt), X, rtol=1e-10, atol=1e-300).X
                except ContinuationError:
                    irregular = True
                    break
                pt = nxt
            logs.append(math.log(max(np.linalg.norm(X, 2), np.linalg.norm(np.linalg.inv(X), 2))))
        if len(logs) < 4:
            out.append((th, math.inf, math.inf))
            worst = math.inf
            continue
        lr = -np.log(radii[:len(logs)])
        h = len(logs) // 2
        s_out = float(np.polyfit(lr[:h + 1], logs[:h + 1], 1)[0])
        s_in = float(np.polyfit(lr[h:], logs[h:], 1)[0])
        out.append((th, s_out, s_in))
        worst = max(worst, s_out, s_in)
        if s_in > 1.5 * max(s_out, 0.5) + 0.5:
            irregular = True
    return RegularityReport(worst, irregular, out)
