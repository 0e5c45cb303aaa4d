"""Folding polynomials: real-coefficient q with q(S) ⊂ ℝ and only real critical values."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import least_squares

CERT_TOL = 1e-10
NONREAL_TOL = 1e-12


def _rel_imag(values) -> float:
    v = np.asarray(values, dtype=complex)
    if v.size == 0:
        return 0.0
    return float(np.max(np.abs(v.imag) / np.maximum(1.0, np.abs(v))))


def critical_points(coeffs) -> np.ndarray:
    """Roots of ``q'`` (coefficients low to high) by companion matrix."""
    c = np.trim_zeros(np.asarray(coeffs, dtype=complex), "b")
    if len(c) <= 2:
        return np.zeros(0, dtype=complex)
    d = np.arange(1, len(c)) * c[1:]
    return np.roots(d[::-1])


def evaluate(coeffs, z):
    return np.polynomial.polynomial.polyval(np.asarray(z, dtype=complex), np.asarray(coeffs, dtype=complex))


@dataclass
class FoldingCandidate:
    coeffs: np.ndarray  # low to high
    S: list
    residual_points: float
    residual_critical: float
    stages: list = field(default_factory=list)  # shift values μ_j when built as a composite

    @property
    def degree(self) -> int:
        c = np.trim_zeros(np.asarray(self.coeffs), "b")
        return len(c) - 1

    def certified(self, tol: float = CERT_TOL) -> bool:
        return self.residual_points < tol and self.residual_critical < tol

    def __call__(self, z):
        if self.stages:
            return compose_stages(self.stages, z)
        return evaluate(self.coeffs, z)

    def to_json(self) -> dict:
        c = np.asarray(self.coeffs)
        return {
            "degree": self.degree,
            "coefficients": [repr(float(x.real)) if np.isrealobj(c) or abs(x.imag) == 0
                             else [repr(float(x.real)), repr(float(x.imag))] for x in c],
            "S": [[z.real, z.imag] for z in map(complex, self.S)],
            "residual_points": self.residual_points,
            "residual_critical": self.residual_critical,
            "certified": self.certified(),
            "stages": [float(m) for m in self.stages],
        }


@dataclass
class Verdict:
    ok: bool
    residual_points: float
    residual_critical: float

    def __bool__(self):
        return self.ok


def is_folding_polynomial(q, S: Sequence[complex], tol: float = CERT_TOL) -> Verdict:
    """``q`` given by coefficients (low to high) or as a :class:`FoldingCandidate`."""
    if isinstance(q, FoldingCandidate):
        return Verdict(q.certified(tol), q.residual_points, q.residual_critical)
    c = np.trim_zeros(np.asarray(q, dtype=complex), "b")
    if len(c) < 2:
        raise ValueError("q must be nonconstant")
    rp = _rel_imag(evaluate(c, list(S)))
    rc = _rel_imag(evaluate(c, critical_points(c)))
    return Verdict(rp < tol and rc < tol, rp, rc)


# shift-square construction ------------------------------------------------------

def compose_stages(stages, z):
    z = np.asarray(z, dtype=complex)
    for mu in stages:
        z = (z + mu) ** 2
    return z


def _stage_critical_values(stages) -> list:
    # q = g_r ∘ … ∘ g_1 with g_j = (· + μ_j)²; the critical values are
    # g_r ∘ … ∘ g_{j+1}(0), one per stage
    return [complex(compose_stages(stages[j + 1:], 0.0)) for j in range(len(stages))]


def _pick(points):
    return min(points, key=lambda z: (-round(abs(z.imag), 12), z.real))


def shift_square_fold(S: Sequence[complex]) -> FoldingCandidate:
    """Compose ``(t + μ_j)²`` with ``μ_j = -Re`` of a remaining non-real point."""
    S = [complex(z) for z in S]
    cur = list(S)
    stages = []
    while True:
        bad = [z for z in cur if abs(z.imag) > NONREAL_TOL * max(1.0, abs(z))]
        if not bad:
            break
        if len(stages) >= len(S):
            raise RuntimeError("shift-square rounds exceeded |S| (internal inconsistency)")
        mu = -_pick(bad).real + 0.0  # no negative zero
        stages.append(mu)
        cur = [(z + mu) ** 2 for z in cur]
    poly = np.polynomial.Polynomial([0.0, 1.0])
    for mu in stages:
        poly = (poly + mu) ** 2
    rp = _rel_imag(compose_stages(stages, S)) if stages else _rel_imag(S)
    rc = _rel_imag(_stage_critical_values(stages))
    return FoldingCandidate(poly.coef, S, rp, rc, stages)


# search ---------------------------------------------------------------------------

@dataclass
class DegreeRow:
    degree: int
    best_residual: float
    certified: bool


@dataclass
class SearchReport:
    best: FoldingCandidate | None
    table: list
    S: list
    d_max: int
    restarts: int
    seed: int

    @property
    def found(self) -> bool:
        return self.best is not None

    def to_json(self) -> dict:
        return {
            "found": self.found,
            "candidate": self.best.to_json() if self.best else None,
            "table": [r.__dict__ for r in self.table],
            "d_max": self.d_max,
            "restarts": self.restarts,
            "seed": self.seed,
        }

    def csv(self) -> str:
        lines = ["degree,best_residual,certified"]
        lines += [f"{r.degree},{r.best_residual!r},{int(r.certified)}" for r in self.table]
        return "\n".join(lines) + "\n"


def _unpack(x, d, powers, complex_mode):
    c = np.zeros(d + 1, dtype=complex)
    if complex_mode:
        half = len(powers)
        c[powers] = x[:half] + 1j * x[half:]
    else:
        c[powers] = x
    return c


def _residuals(x, d, powers, S, complex_mode):
    c = _unpack(x, d, powers, complex_mode)
    crit = critical_points(c)
    pts = np.concatenate([np.asarray(S, dtype=complex), crit])
    vals = evaluate(c, pts)
    scale = np.maximum(1.0, np.abs(vals))
    r = vals.imag / scale
    # unit-sphere normalization keeps q away from the zero polynomial
    return np.concatenate([r, [np.dot(x, x) - 1.0]]), pts, scale


def _jacobian(x, d, powers, S, complex_mode):
    _, pts, scale = _residuals(x, d, powers, S, complex_mode)
    # at a critical point z, ∂q(z)/∂c_k = z^k because q'(z) = 0
    Z = pts[:, None] ** np.asarray(powers)[None, :]
    rows = Z.imag / scale[:, None]
    if complex_mode:
        rows = np.concatenate([rows, Z.real / scale[:, None]], axis=1)
    return np.vstack([rows, 2 * x[None, :]])


def _score(c, S):
    return max(_rel_imag(evaluate(c, S)), _rel_imag(evaluate(c, critical_points(c))))


def _fit(x0, d, powers, S, complex_mode):
    fun = lambda x: _residuals(x, d, powers, S, complex_mode)[0]  # noqa: E731
    jac = lambda x: _jacobian(x, d, powers, S, complex_mode)  # noqa: E731
    try:
        sol = least_squares(fun, x0, jac=jac, method="lm", xtol=1e-15, ftol=1e-15, gtol=1e-15,
                            max_nfev=400)
        x = sol.x
    except (ValueError, np.linalg.LinAlgError):
        return None
    # Newton (Gauss-Newton) polishing
    for _ in range(5):
        r = fun(x)
        J = jac(x)
        try:
            dx = np.linalg.lstsq(J, -r, rcond=None)[0]
        except np.linalg.LinAlgError:
            break
        x = x + dx
        if np.linalg.norm(dx) < 1e-16:
            break
    x /= np.linalg.norm(x)
    return x


def search_min_degree(S: Sequence[complex], d_max: int = 8, restarts: int = 64, seed: int = 0,
                      even: bool = False, complex_coefficients: bool = False,
                      tol: float = CERT_TOL) -> SearchReport:
    """Lowest-degree folding polynomial found by multi-start Gauss-Newton.

    Coefficients are real by default (constant term dropped, unit-sphere
    normalized). Each degree is seeded with the best vector of the previous
    degree, so the per-degree residual table is non-increasing. The table
    records the best residual at each degree; success is a value, failure is
    a report with ``best = None``.
    """
    if d_max < 2:
        raise ValueError("d_max must be at least 2")
    S = [complex(z) for z in S]
    rng = np.random.default_rng(seed)
    if all(abs(z.imag) <= NONREAL_TOL * max(1.0, abs(z)) for z in S):
        ident = FoldingCandidate(np.array([0.0, 1.0]), S, _rel_imag(S), 0.0)
        return SearchReport(ident, [DegreeRow(1, ident.residual_points, True)], S, d_max, restarts, seed)
    table = []
    prev_best = None  # (score, coefficient vector of length d+1)
    found = None
    for d in range(2, d_max + 1):
        powers = [k for k in range(1, d + 1) if not even or k % 2 == 0]
        if not powers:
            continue
        nparam = len(powers) * (2 if complex_coefficients else 1)
        starts = []
        if prev_best is not None:
            c = np.zeros(d + 1, dtype=complex)
            c[:len(prev_best[1])] = prev_best[1]
            v = c[powers]
            x = np.concatenate([v.real, v.imag]) if complex_coefficients else v.real
            if np.linalg.norm(x) > 0:
                starts.append(x / np.linalg.norm(x))
        for _ in range(restarts):
            x = rng.normal(size=nparam)
            starts.append(x / np.linalg.norm(x))
        best = prev_best
        for x0 in starts:
            x = _fit(x0, d, powers, S, complex_coefficients)
            if x is None:
                continue
            c = _unpack(x, d, powers, complex_coefficients)
            if np.max(np.abs(c[1:])) == 0:
                continue
            sc = _score(c, S)
            if best is None or sc < best[0]:
                best = (sc, c)
            if sc < tol / 10:
                break
        prev_best = best
        c = best[1]
        cand = FoldingCandidate(c if complex_coefficients else c.real, S,
                                _rel_imag(evaluate(c, S)), _rel_imag(evaluate(c, critical_points(c))))
        ok = cand.certified(tol)
        table.append(DegreeRow(d, best[0], ok))
        if ok:
            found = cand
            break
    return SearchReport(found, table, S, d_max, restarts, seed)
