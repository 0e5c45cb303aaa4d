"""Exact constructions on Q-systems: shift, fold, symmetrize, sums, tensors, envelopes.

All constructions act on the integer representation directly and never
reduce fractions, so sizes reported in the records are those of the formula
actually built.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .algebra import (
    DimensionMismatch,
    LatticePolynomial,
    MatrixOneForm,
    RationalFunction,
    block_matrix,
    mat_zero,
)
from .qsystem import QSystem, singular_fiber

KINDS = ("shift", "fold", "symmetrize", "direct_sum", "tensor", "envelope")


class TransformError(RuntimeError):
    pass


@dataclass
class TransformRecord:
    kind: str
    inputs: list
    output: tuple
    parameter: str | None = None
    notes: list = field(default_factory=list)
    formula_degree: int | None = None  # degree of the unmerged formula, when it differs

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown transformation kind {self.kind!r}")

    def expected(self) -> dict:
        """Profile entries the table fixes for this kind (``None`` means unconstrained)."""
        ins = self.inputs
        if self.kind == "shift":
            _, m, d, ell = ins[0]
            return {"m": m + 1, "d": d, "l": ell}
        if self.kind == "fold":
            _, m, d, ell = ins[0]
            return {"m": m, "d": d + 2, "l": 2 * ell}
        if self.kind == "symmetrize":
            _, m, d, ell = ins[0]
            return {"m": m, "d": d, "l": 2 * ell}
        if self.kind == "direct_sum":
            (s1, m, d1, l1), (s2, _, d2, l2) = ins
            return {"s": s1 + s2, "m": m, "d": max(d1, d2), "l": l1 + l2}
        if self.kind == "tensor":
            (_, m, d1, l1), (_, _, d2, l2) = ins
            return {"m": m, "d": max(d1, d2), "l": l1 * l2}
        return {}

    def law_holds(self) -> bool:
        s, m, d, ell = self.output
        got = {"s": s, "m": m, "d": d if self.formula_degree is None else self.formula_degree, "l": ell}
        return all(got[k] == v for k, v in self.expected().items())

    def to_json(self) -> dict:
        out = {
            "kind": self.kind,
            "inputs": [list(p) for p in self.inputs],
            "output": list(self.output),
        }
        if self.parameter is not None:
            out["parameter"] = self.parameter
        if self.notes:
            out["notes"] = list(self.notes)
        if self.formula_degree is not None:
            out["formula_degree"] = self.formula_degree
        return out


def _finish(form: MatrixOneForm, d: int, kind: str, inputs, name: str, parameter=None, notes=()):
    Q = QSystem(form, d, name=name)
    Q.record = TransformRecord(kind, [q.profile for q in inputs], Q.profile, parameter, list(notes))
    return Q


def _fresh_name(base: str, taken) -> str:
    if base not in taken:
        return base
    k = 1
    while f"{base}{k}" in taken:
        k += 1
    return f"{base}{k}"


def shift(Q: QSystem, name: str | None = None) -> QSystem:
    """Substitute ``t -> t + μ`` with ``μ`` a new trailing base coordinate."""
    form = Q.form
    m = form.base_dim
    n = m + 1
    tmu = LatticePolynomial.variable(0, n) + LatticePolynomial.variable(m, n)
    cache = {}

    def sub(x: RationalFunction) -> RationalFunction:
        if x.is_zero():
            return RationalFunction.zero(n)
        key = id(x)
        if key not in cache:
            y = x.extend(n)
            if x.num.involves(0) or x.den.involves(0):
                y = y.compose(0, tmu)
            cache[key] = y
        return cache[key]

    comps = [tuple(tuple(sub(x) for x in row) for row in mat) for mat in form.components]
    comps.append(comps[0])
    mu = name or _fresh_name("mu", form.names)
    out = MatrixOneForm(comps, list(form.names) + [mu])
    return _finish(out, Q.d, "shift", [Q], f"shift({Q.name})", parameter=mu)


def _split_time(x: RationalFunction):
    """``x = (E + t·O)/N`` with ``N`` even in ``t``; slot 0 of E, O, N holds ``w = t²``."""
    if not x.den.involves(0):
        E, O = x.num.even_odd_split(0)
        return E, O, x.den
    conj = x.den.negate_var(0)
    full = x.den * conj
    N, odd = full.even_odd_split(0)
    if not odd.is_zero():
        raise TransformError("rationalized denominator is not even in t")
    E, O = (x.num * conj).even_odd_split(0)
    return E, O, N


def _w_parts(x: RationalFunction, n: int):
    """Return ``(R0, R1)`` with ``x = R0(w) + t·R1(w)`` for a dλ' coefficient."""
    if x.is_zero():
        z = RationalFunction.zero(n)
        return z, z
    if not x.num.involves(0) and not x.den.involves(0):
        return x, RationalFunction.zero(n)
    E, O, N = _split_time(x)
    zero = RationalFunction.zero(n)
    r0 = RationalFunction(E, N) if not E.is_zero() else zero
    r1 = RationalFunction(O, N) if not O.is_zero() else zero
    return r0, r1


def fold(Q: QSystem, name: str | None = None) -> QSystem:
    """Push the system forward along ``w = t²``.

    The new ``2ℓ``-dimensional system acts on the stacked vector
    ``(X, tX)``.  A coefficient ``R(t) = R0(w) + t R1(w)`` acts as the block
    ``[[R0, R1], [w R1, R0]]``; the ``dw`` component carries the additional
    ``I/(2w)`` in the lower block coming from ``d(tX) = X dt + t dX``.
    """
    form = Q.form
    n = form.base_dim
    ell = form.dims
    w = LatticePolynomial.variable(0, n)
    two = LatticePolynomial.constant(2, n)
    zero = RationalFunction.zero(n)

    # dw coefficient of X: Ω_t/(2t) = O/(2N) + t·E/(2wN)
    A0 = [[zero] * ell for _ in range(ell)]
    A1 = [[zero] * ell for _ in range(ell)]
    wA1 = [[zero] * ell for _ in range(ell)]
    lower = [[zero] * ell for _ in range(ell)]
    for a in range(ell):
        for b in range(ell):
            x = form.components[0][a][b]
            if x.is_zero():
                E = O = LatticePolynomial.zero(n)
                N = LatticePolynomial.constant(1, n)
            else:
                E, O, N = _split_time(x)
            if not O.is_zero():
                A0[a][b] = RationalFunction(O, two * N)
            if not E.is_zero():
                A1[a][b] = RationalFunction(E, two * w * N)
                wA1[a][b] = RationalFunction(E, two * N)
            if a == b:
                lower[a][b] = RationalFunction(w * O + N, two * w * N)
            else:
                lower[a][b] = A0[a][b]
    comps = [block_matrix([[A0, A1], [wA1, lower]], n)]
    for mat in form.components[1:]:
        R0 = [[None] * ell for _ in range(ell)]
        R1 = [[None] * ell for _ in range(ell)]
        wR1 = [[None] * ell for _ in range(ell)]
        for a in range(ell):
            for b in range(ell):
                r0, r1 = _w_parts(mat[a][b], n)
                R0[a][b], R1[a][b] = r0, r1
                wR1[a][b] = zero if r1.is_zero() else RationalFunction(w * r1.num, r1.den)
        comps.append(block_matrix([[R0, R1], [wR1, R0]], n))
    names = list(form.names)
    names[0] = name or _fresh_name("w", names[1:])
    out = MatrixOneForm(comps, names)
    return _finish(out, Q.d + 2, "fold", [Q], f"fold({Q.name})")


def _block_diag(A, B, n):
    za = [[RationalFunction.zero(n)] * len(B) for _ in range(len(A))]
    zb = [[RationalFunction.zero(n)] * len(A) for _ in range(len(B))]
    return block_matrix([[A, za], [zb, B]], n)


def _check_base(Q1: QSystem, Q2: QSystem):
    if Q1.m != Q2.m:
        raise DimensionMismatch(f"base dimensions differ: {Q1.m} vs {Q2.m}")


def symmetrize(Q: QSystem) -> QSystem:
    """``Ω ⊕ Ω†``; with integer coefficients the reflected block equals ``Ω``."""
    n = Q.m
    comps = [_block_diag(mat, mat, n) for mat in Q.form.components]
    out = MatrixOneForm(comps, Q.form.names)
    return _finish(out, Q.d, "symmetrize", [Q], f"sym({Q.name})")


def direct_sum(Q1: QSystem, Q2: QSystem) -> QSystem:
    _check_base(Q1, Q2)
    n = Q1.m
    comps = [_block_diag(A, B, n) for A, B in zip(Q1.form.components, Q2.form.components)]
    out = MatrixOneForm(comps, Q1.form.names)
    return _finish(out, max(Q1.d, Q2.d), "direct_sum", [Q1, Q2], f"({Q1.name}+{Q2.name})")


def tensor(Q1: QSystem, Q2: QSystem) -> QSystem:
    """``Ω1 ⊗ I + I ⊗ Ω2`` on the Kronecker-ordered product basis.

    Diagonal entries add two fractions; when their denominators differ the
    single-fraction representation can exceed ``max(d1, d2)``.  The declared
    degree is then the measured one and the record says so.
    """
    _check_base(Q1, Q2)
    n = Q1.m
    l1, l2 = Q1.ell, Q2.ell
    comps = []
    for A, B in zip(Q1.form.components, Q2.form.components):
        rows = []
        for a in range(l1):
            for c in range(l2):
                row = []
                for b in range(l1):
                    for e in range(l2):
                        x = A[a][b] if c == e else RationalFunction.zero(n)
                        y = B[c][e] if a == b else RationalFunction.zero(n)
                        row.append(x + y)
                rows.append(tuple(row))
        comps.append(tuple(rows))
    out = MatrixOneForm(comps, Q1.form.names)
    d = max(Q1.d, Q2.d)
    notes = []
    formula_d = None
    measured = out.time_degree()
    if measured > d:
        # as a formula (sum of two fractions) the degree is still max(d1, d2)
        notes.append(f"single-fraction diagonal entries have time degree {measured} > max(d1, d2) = {d}")
        formula_d = d
        d = measured
    Q = _finish(out, d, "tensor", [Q1, Q2], f"({Q1.name}*{Q2.name})", notes=notes)
    Q.record.formula_degree = formula_d
    return Q


def envelope_system(k: int, base_dim: int = 1, names=None) -> QSystem:
    """The system whose solutions span polynomials of degree ``≤ k`` in ``t``.

    ``dX = N X dt`` with ``N`` the ``(k+1)``-square subdiagonal shift, so
    ``exp(Nt)`` has entries ``t^j/j!``.  The declared degree is 1.
    """
    if k < 0:
        raise ValueError("envelope degree must be nonnegative")
    n = base_dim
    dim = k + 1
    one = RationalFunction.constant(1, n)
    zero = RationalFunction.zero(n)
    Nmat = tuple(tuple(one if a == b + 1 else zero for b in range(dim)) for a in range(dim))
    comps = [Nmat] + [mat_zero(dim, n) for _ in range(n - 1)]
    out = MatrixOneForm(comps, names)
    Q = QSystem(out, 1, name=f"P^{k}")
    Q.record = TransformRecord("envelope", [], Q.profile, notes=[f"k={k}, dimension {dim}"])
    return Q


def envelope_tensor(Q: QSystem, k: int) -> QSystem:
    """``P^k ⊗ Ω`` over the base of ``Q``."""
    P = envelope_system(k, Q.m, Q.form.names)
    return tensor(P, Q)


# real singularities ---------------------------------------------------------

REAL_TOL = 1e-6
MU_DENOMINATOR = 10 ** 12


@dataclass
class RealizeReport:
    rounds: list = field(default_factory=list)  # per round: chosen point, μ, fiber after
    initial_fiber: object = None
    final_fiber: object = None
    records: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "initial_fiber": self.initial_fiber.to_json() if self.initial_fiber else None,
            "final_fiber": self.final_fiber.to_json() if self.final_fiber else None,
            "rounds": self.rounds,
            "records": [r.to_json() for r in self.records],
        }


def _nonreal(fiber):
    return [z for z in fiber.points if abs(z.imag) > REAL_TOL]


def choose_nonreal(points):
    """Largest ``|Im|`` first, then smallest real part."""
    return min(points, key=lambda z: (-round(abs(z.imag), 12), z.real))


def realize_real_singularities(Q: QSystem, params=(), max_rounds: int | None = None):
    """Shift and fold until the singular fiber over ``params`` is real.

    Returns ``(Q_hat, mus, report)``.  ``mus`` are the shift values to
    append to ``params`` when restricting ``Q_hat``.
    """
    params = tuple(params)
    fiber = singular_fiber(Q, params)
    nu = len(fiber.points)
    limit = nu if max_rounds is None else max_rounds
    report = RealizeReport(initial_fiber=fiber)
    mus = []
    cur = Q
    while _nonreal(fiber):
        if len(mus) >= limit:
            raise TransformError(
                f"fiber still has non-real points after {len(mus)} rounds (internal inconsistency)")
        s = choose_nonreal(_nonreal(fiber))
        # a short rational keeps the restricted coefficients exact, so repeated
        # roots of the folded denominators are split exactly rather than numerically
        # the shift moves s to s - μ, so μ = Re s makes it purely imaginary
        mu = Fraction(s.real).limit_denominator(MU_DENOMINATOR)
        if mu.denominator == 1:
            mu = int(mu)
        shifted = shift(cur)
        cur = fold(shifted)
        report.records += [shifted.record, cur.record]
        mus.append(mu)
        new_fiber = singular_fiber(cur, params + tuple(mus))
        target = (s - mu) ** 2
        if not any(abs(z - target) <= 1e-6 * max(1.0, abs(target)) for z in new_fiber.points):
            raise TransformError(f"folded point {target} missing from the new fiber")
        if abs(target.imag) > REAL_TOL * max(1.0, abs(target)):
            raise TransformError(f"chosen point {s} did not become real")
        report.rounds.append({
            "chosen": [s.real, s.imag],
            "mu": str(mu),
            "fiber": new_fiber.to_json(),
        })
        fiber = new_fiber
    report.final_fiber = fiber
    return cur, mus, report


# fold-envelope embedding ------------------------------------------------------

@dataclass
class EmbedReport:
    k: int
    input_degree: int
    folds: int
    residual: float
    condition: float
    members: int
    grid: int

    def to_json(self) -> dict:
        return dict(self.__dict__)


def fold_envelope_embed_check(Q: QSystem, Q_hat: QSystem, mus, k: int, params=(), *,
                              members: int = 50, grid: int = 80, seed: int = 0,
                              t0: complex | None = None, cond_limit: float = 1e14,
                              input_degree: int | None = None, radius: float = 0.8,
                              rtol: float = 1e-12) -> EmbedReport:
    """Numerically check that ``𝒫^{(k+1)2^d - 1}(t) ⊗ L(Ω)`` lies in ``𝒫^k(w) ⊗ L(Ω̂)``.

    ``Q_hat`` is ``Q`` after ``d = len(mus)`` shift+fold rounds (as returned by
    :func:`realize_real_singularities`), so ``w = φ(t)`` with
    ``φ = (· - μ_d)² ∘ … ∘ (· - μ_1)²``. Solutions of both systems are
    continued from a common base along matched paths (a segment in ``t`` and
    its image under ``φ``); random envelope members are then fitted by least
    squares in the target span. Returns the max relative residual.
    """
    import numpy as np

    from .analytic import PathPlan, continue_solution, restricted

    mus = [complex(m) for m in mus]
    params = tuple(params)
    rng = np.random.default_rng(seed)

    def phi(t):
        for m in mus:
            t = (t - m) ** 2
        return t

    # points to keep away from: the fiber and the critical points of φ
    avoid = [complex(z) for z in singular_fiber(Q, params).points]
    crit = []
    for j, m in enumerate(mus):
        # t_j = μ_j pulled back through the earlier stages
        pre = [complex(m)]
        for mm in reversed(mus[:j]):
            pre = [r + mm for z in pre for r in (np.sqrt(z + 0j), -np.sqrt(z + 0j))]
        crit += pre
    bad = avoid + crit
    if t0 is None:
        cands = [complex(x, y) for x in np.linspace(-2, 2, 9) for y in np.linspace(0.3, 2, 6)]
        t0 = max(cands, key=lambda z: min((abs(z - b) for b in bad), default=1.0))
    clearance = min((abs(t0 - b) for b in bad), default=1.0)
    rho = radius * clearance
    ts = t0 + rho * np.sqrt(rng.uniform(0.05, 1.0, grid)) * np.exp(2j * np.pi * rng.uniform(size=grid))

    rhs = restricted(Q, params)
    rhs_hat = restricted(Q_hat, params + tuple(mus))
    ell = Q.form.dims
    ell_hat = Q_hat.form.dims
    w0 = phi(t0)
    X, Xh = [], []
    for t in ts:
        X.append(continue_solution(rhs, PathPlan.line(t0, t), np.eye(ell), rtol=rtol, atol=rtol * 1e-2).X)
        image = [phi(t0 + s * (t - t0)) for s in np.linspace(0.0, 1.0, 33)]
        Xh.append(continue_solution(rhs_hat, PathPlan.polyline(image), np.eye(ell_hat), rtol=rtol,
                                     atol=rtol * 1e-2).X)
    X = np.array(X).reshape(grid, -1)
    Xh = np.array(Xh).reshape(grid, -1)
    ws = np.array([phi(t) for t in ts])
    d_in = (k + 1) * 2 ** len(mus) - 1 if input_degree is None else input_degree
    u = (ts - t0) / rho
    v = (ws - w0) / max(np.max(np.abs(ws - w0)), 1e-300)
    A = np.concatenate([v[:, None] ** a * Xh for a in range(k + 1)], axis=1)
    scale = np.max(np.abs(A), axis=0)
    scale[scale == 0] = 1.0
    A = A / scale
    U, S, Vh = np.linalg.svd(A, full_matrices=False)
    rank = int(np.sum(S > S[0] * 1e-13))
    cond = float(S[0] / S[rank - 1])
    if cond > cond_limit:
        raise TransformError(f"ill-conditioned embedding fit (condition {cond:.3g})")
    Ur = U[:, :rank]
    worst = 0.0
    for _ in range(members):
        coef = rng.normal(size=(d_in + 1, X.shape[1])) + 1j * rng.normal(size=(d_in + 1, X.shape[1]))
        f = np.sum((u[:, None] ** np.arange(d_in + 1)) @ coef * X, axis=1)
        r = f - Ur @ (Ur.conj().T @ f)
        worst = max(worst, float(np.max(np.abs(r)) / np.max(np.abs(f))))
    return EmbedReport(k, d_in, len(mus), worst, cond, members, grid)
