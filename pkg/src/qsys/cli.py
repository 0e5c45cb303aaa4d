"""``qsys`` command line: validate, transform, bound, monodromy, count, abelian, fold-search.

Exit status: 0 on success, 2 on validation failure (bad input, schema
violation, failed integrability), 3 on numeric failure.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERIC = 0, 2, 3


class ValidationFailure(Exception):
    pass


class NumericFailure(Exception):
    pass


def _apply_thread_cap():
    n = os.environ.get("QSYS_THREADS")
    if n:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ.setdefault(var, n)
    return n


@dataclass
class RunManifest:
    subcommand: str
    argv: list
    parameters: dict
    inputs: list = field(default_factory=list)
    outputs: list = field(default_factory=list)
    version: str = ""
    threads: str | None = None
    wall_clock: float = 0.0
    exit_code: int = 0

    def add_input(self, path):
        p = Path(path)
        digest = hashlib.sha256(p.read_bytes()).hexdigest() if p.is_file() else None
        self.inputs.append({"path": str(path), "sha256": digest})

    def to_json(self) -> dict:
        return dict(self.__dict__)


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, default=_default) + "\n"


def _default(x):
    import numpy as np
    from fractions import Fraction

    if isinstance(x, complex):
        return [x.real, x.imag]
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, np.complexfloating):
        return [float(x.real), float(x.imag)]
    raise TypeError(f"not serializable: {type(x).__name__}")


def _emit(result: dict, out: str | None, manifest: RunManifest):
    text = _dump(result)
    if out:
        Path(out).write_text(text)
        manifest.outputs.append(out)
    else:
        sys.stdout.write(text)


def _parse_params(text: str | None) -> tuple:
    if not text:
        return ()
    from fractions import Fraction

    out = []
    for tok in text.split(","):
        tok = tok.strip()
        try:
            out.append(Fraction(tok))
        except ValueError:
            try:
                out.append(complex(tok.replace("i", "j")))
            except ValueError as exc:
                raise ValidationFailure(f"bad parameter value {tok!r}") from exc
    return tuple(int(v) if getattr(v, "denominator", 0) == 1 else v for v in out)


def _parse_kv(text: str) -> dict:
    out = {}
    for tok in (text or "").split(","):
        if not tok.strip():
            continue
        if "=" not in tok:
            raise ValidationFailure(f"expected key=value, got {tok!r}")
        k, v = tok.split("=", 1)
        try:
            out[k.strip()] = int(v)
        except ValueError as exc:
            raise ValidationFailure(f"parameter {k.strip()} must be an integer, got {v!r}") from exc
    return out


def _parse_points(text: str) -> list:
    pts = []
    for tok in (text or "").split(","):
        tok = tok.strip().replace(" ", "")
        if not tok:
            continue
        try:
            pts.append(complex(tok.replace("i", "j")))
        except ValueError as exc:
            raise ValidationFailure(f"bad complex number {tok!r}") from exc
    return pts


def _load_system(path: str, manifest: RunManifest):
    from .algebra import AlgebraError
    from .qsystem import QSystem

    if path.startswith("fixture:"):
        from .fixtures import seeds

        name = path.split(":", 1)[1]
        table = seeds()
        if name not in table:
            raise ValidationFailure(f"unknown fixture {name!r}; known: {', '.join(table)}")
        manifest.inputs.append({"path": path, "sha256": None})
        return table[name]
    p = Path(path)
    if not p.is_file():
        raise ValidationFailure(f"cannot read {path}")
    manifest.add_input(path)
    try:
        data = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ValidationFailure(f"malformed JSON in {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ValidationFailure(f"schema violation in {path}: top level must be an object")
    try:
        return QSystem.from_json(data)
    except (KeyError, TypeError) as exc:
        raise ValidationFailure(f"schema violation in {path}: missing or malformed field {exc}") from exc
    except AlgebraError as exc:
        raise ValidationFailure(f"schema violation in {path}: {exc}") from exc


# subcommands -----------------------------------------------------------------------

def cmd_validate(args, manifest):
    from .qsystem import check_integrability, singular_fiber

    Q = _load_system(args.system, manifest)
    verdict = check_integrability(Q)
    s, m, d, ell = Q.profile
    report = {"name": Q.name, "profile": {"s": s, "m": m, "d": d, "l": ell},
              "integrable": verdict.integrable,
              "witness": None if verdict.integrable else str(verdict.witness)}
    params = _parse_params(args.params)
    if m == 1 or params:
        report["fiber"] = singular_fiber(Q, params).to_json()
    _emit(report, args.out, manifest)
    if not verdict.integrable:
        raise ValidationFailure("system is not integrable")


def cmd_transform(args, manifest):
    from . import transforms as T

    Q = _load_system(args.input, manifest)
    op = args.op
    extra = {}
    if op == "shift":
        out = T.shift(Q)
    elif op == "fold":
        out = T.fold(Q)
    elif op == "symmetrize":
        out = T.symmetrize(Q)
    elif op in ("sum", "tensor"):
        if not args.in2:
            raise ValidationFailure(f"--op {op} needs --in2")
        Q2 = _load_system(args.in2, manifest)
        out = T.direct_sum(Q, Q2) if op == "sum" else T.tensor(Q, Q2)
    elif op.startswith("envelope:"):
        try:
            k = int(op.split(":", 1)[1])
        except ValueError as exc:
            raise ValidationFailure(f"bad envelope degree in {op!r}") from exc
        out = T.envelope_tensor(Q, k)
    elif op == "realize":
        out, mus, rep = T.realize_real_singularities(Q, _parse_params(args.params))
        extra = {"mu": [str(m) for m in mus], "realize": rep.to_json()}
    else:
        raise ValidationFailure(f"unknown operation {op!r}")
    if args.out:
        out.save(args.out)
        manifest.outputs.append(args.out)
    report = {"record": out.record.to_json() if out.record else None,
              "profile": dict(zip("smdl", out.profile)), **extra}
    if out.m == 1:
        from .qsystem import singular_fiber

        report["fiber"] = singular_fiber(out, ()).to_json()
    _emit(report, args.report, manifest)


FORMULAS = ("qsystem", "order", "main", "real_pk", "abelian", "gm_profile", "envelope_degree")


def cmd_bound(args, manifest):
    from . import bounds as B

    p = _parse_kv(args.params)
    if "l" in p:
        p["ell"] = p.pop("l")

    def need(*keys):
        miss = [k for k in keys if k not in p]
        if miss:
            raise ValidationFailure(f"formula {args.formula} needs parameters {', '.join(miss)}")
        return [p[k] for k in keys]

    try:
        if args.formula == "qsystem":
            e = B.bound_qsystem(*need("s", "m", "d", "ell"))
        elif args.formula == "order":
            e = B.order_bound(*need("s", "m", "d", "ell"), c=p.get("c", 1))
        elif args.formula == "main":
            e = B.bound_main(*need("s", "m", "d", "ell", "nu", "k"))
        elif args.formula == "real_pk":
            e = B.bound_real_pk(*need("s", "m", "d", "ell", "r", "nu", "k"))
        elif args.formula == "abelian":
            e = B.bound_abelian(*need("n", "m"))
        elif args.formula == "gm_profile":
            _emit({"formula": "gm_profile", "profile": B.gauss_manin_profile(*need("n")).to_json()},
                  args.out, manifest)
            return
        else:
            e_, n = need("e", "n")
            _emit({"formula": "envelope_degree", "value": B.envelope_degree(e_, n)}, args.out, manifest)
            return
    except ValueError as exc:
        raise ValidationFailure(str(exc)) from exc
    result = {"formula": args.formula, "params": p, "render": B.render(e), "expr": e.to_json()}
    lp = B.linear_part(e)
    if lp is not None:
        c, k, tail = lp
        def small(x):
            return B.evaluate_exact(x) if B.compare(x, B.lit(2 ** 64)) == "<" else B.render(x)

        result["linear_coefficient"] = small(c)
        result["linear_variable"] = small(k)
        result["inner"] = B.render(tail)
    lg = B.log2_value(e)
    result["log2_value"] = lg if math.isfinite(lg) else None
    _emit(result, args.out, manifest)


def cmd_monodromy(args, manifest):
    from .analytic import ContinuationError, is_quasi_unipotent, restricted, small_loop_monodromy
    from .qsystem import singular_fiber

    Q = _load_system(args.input, manifest)
    params = _parse_params(args.params)
    fiber = singular_fiber(Q, params)
    pts = _parse_points(args.point)
    if len(pts) != 1:
        raise ValidationFailure("--point takes one complex number")
    try:
        M = small_loop_monodromy(restricted(Q, params), pts[0], args.eps, fiber=fiber.points,
                                 turns=args.turns)
    except ContinuationError as exc:
        raise NumericFailure(str(exc)) from exc
    v = is_quasi_unipotent(M.matrix, j_max=args.jmax, tol=args.tol)
    _emit({"monodromy": M.to_json(), "quasi_unipotent": {"kind": v.kind, "j": v.j, "k": v.k,
                                                          "detail": v.detail}},
          args.out, manifest)


def cmd_count(args, manifest):
    import numpy as np

    from .zerocount import CountRejected, Holomorphic, KeyholeContour, Triangle, count_zeros

    try:
        coeffs = [complex(c.replace("i", "j")) for c in args.poly.split(",")]
    except ValueError as exc:
        raise ValidationFailure(f"bad coefficient list {args.poly!r}") from exc
    c_high = coeffs[::-1]
    f = Holomorphic(lambda t: complex(np.polyval(c_high, t)))
    try:
        if args.contour == "keyhole":
            pts = [z.real for z in _parse_points(args.points or "")]
            contour = KeyholeContour.around(pts, eps=args.eps, R=args.R)
        else:
            v = _parse_points(args.vertices or "")
            if len(v) != 3:
                raise ValidationFailure("a triangle needs three --vertices")
            contour = Triangle(*v)
    except ValueError as exc:
        raise ValidationFailure(str(exc)) from exc
    try:
        rep = count_zeros(f, contour, boundary=args.boundary)
    except CountRejected as exc:
        raise NumericFailure(str(exc)) from exc
    _emit(rep.to_json(), args.out, manifest)


def cmd_abelian(args, manifest):
    from .abelian import (Hamiltonian, OneForm, OvalError, OvalFamily, TrivialForm,
                          count_ai_zeros, critical_values, verify_against_bound)

    try:
        H = Hamiltonian.parse(args.H)
        form = OneForm.parse(P=args.P, Q=args.Q)
    except Exception as exc:  # sympy raises a zoo of parse errors
        raise ValidationFailure(f"cannot parse polynomial: {exc}") from exc
    try:
        cv = critical_values(H)
    except ValueError as exc:
        raise ValidationFailure(str(exc)) from exc
    result = {"H": args.H, "n": H.n, "critical_values": [[v.real, v.imag] for v in cv],
              "form": form.label, "form_degree": form.degree}
    try:
        fam = OvalFamily.around_minimum(H)
        interval = tuple(float(x) for x in args.interval.split(",")) if args.interval else None
        if interval is None:
            lo, hi = fam.interval
            pad = 1e-3 * (hi - lo)
            interval = (lo + pad, hi - pad)
        result["oval_interval"] = list(fam.interval)
        try:
            zeros = count_ai_zeros(fam, form, interval, args.samples)
            result["zeros"] = zeros.to_json()
        except TrivialForm:
            zeros = None
            result["zeros"] = "trivial form"
        check = verify_against_bound(fam, form, interval, args.samples, report=zeros)
        result["bound_check"] = check.to_json()
    except OvalError as exc:
        raise NumericFailure(str(exc)) from exc
    _emit(result, args.out, manifest)


def _svg(S, values, path):
    import numpy as np

    pts = [complex(z) for z in S] + [complex(v) for v in values]
    xs = np.array([z.real for z in pts])
    ys = np.array([z.imag for z in pts])
    lo_x, hi_x = xs.min() - 1, xs.max() + 1
    lo_y, hi_y = min(ys.min(), -1) - 1, max(ys.max(), 1) + 1
    W = H = 400

    def sx(x):
        return (x - lo_x) / (hi_x - lo_x) * W

    def sy(y):
        return H - (y - lo_y) / (hi_y - lo_y) * H

    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}">',
             f'<line x1="0" y1="{sy(0):.2f}" x2="{W}" y2="{sy(0):.2f}" stroke="#999"/>']
    for z in S:
        parts.append(f'<circle cx="{sx(z.real):.2f}" cy="{sy(z.imag):.2f}" r="4" fill="#c33"/>')
    for v in values:
        parts.append(f'<rect x="{sx(v.real) - 3:.2f}" y="{sy(v.imag) - 3:.2f}" width="6" height="6" '
                     f'fill="#36c"/>')
    parts.append("</svg>")
    Path(path).write_text("\n".join(parts) + "\n")


def cmd_fold_search(args, manifest):
    from .foldsearch import search_min_degree, shift_square_fold

    S = _parse_points(args.points)
    if not S:
        raise ValidationFailure("--points is empty")
    if args.dmax < 2:
        raise ValidationFailure("--dmax must be at least 2")
    rep = search_min_degree(S, args.dmax, args.restarts, seed=args.seed, even=args.even,
                            complex_coefficients=args.complex)
    ss = shift_square_fold(S)
    result = {"search": rep.to_json(), "shift_square": ss.to_json()}
    _emit(result, args.out, manifest)
    if args.csv:
        Path(args.csv).write_text(rep.csv())
        manifest.outputs.append(args.csv)
    if args.svg:
        cand = rep.best or ss
        _svg(S, list(cand(S)), args.svg)
        manifest.outputs.append(args.svg)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qsys", description=__doc__.splitlines()[0])
    ap.add_argument("--manifest", help="write the run manifest here (default: <out>.manifest.json)")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check schema, integrability, profile and fiber")
    p.add_argument("system", help="system JSON file or fixture:<name>")
    p.add_argument("--params", help="comma-separated parameter values λ'")
    p.add_argument("--out")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("transform", help="apply shift/fold/symmetrize/sum/tensor/envelope:k/realize")
    p.add_argument("--op", required=True)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--in2")
    p.add_argument("--params", help="parameter point for realize")
    p.add_argument("--out", help="output system JSON")
    p.add_argument("--report", help="report JSON (default: stdout)")
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser("bound", help="evaluate a bound formula as a tower expression")
    p.add_argument("--formula", required=True, choices=FORMULAS)
    p.add_argument("--params", default="", help="key=value list, e.g. s=2,m=1,d=1,l=1,nu=1,k=1")
    p.add_argument("--out")
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("monodromy", help="small-loop monodromy and quasi-unipotence")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--params")
    p.add_argument("--point", required=True, help="singular point, e.g. 0 or 1+2i")
    p.add_argument("--eps", type=float, default=0.1)
    p.add_argument("--turns", type=int, default=1)
    p.add_argument("--jmax", type=int, default=64)
    p.add_argument("--tol", type=float, default=1e-7)
    p.add_argument("--out")
    p.set_defaults(func=cmd_monodromy)

    p = sub.add_parser("count", help="argument-principle zero count of a polynomial")
    p.add_argument("--poly", required=True, help="coefficients low to high, e.g. -1,0,1")
    p.add_argument("--contour", choices=("keyhole", "triangle"), default="keyhole")
    p.add_argument("--points", help="real singular points for the keyhole")
    p.add_argument("--eps", type=float)
    p.add_argument("--R", type=float)
    p.add_argument("--vertices", help="three complex vertices for the triangle")
    p.add_argument("--boundary", choices=("exterior", "interior"), default="exterior")
    p.add_argument("--out")
    p.set_defaults(func=cmd_count)

    p = sub.add_parser("abelian", help="critical values, zeros of an Abelian integral, bound check")
    p.add_argument("--H", required=True, help="Hamiltonian in x1, x2")
    p.add_argument("--P", default="0", help="dx1 coefficient of the form")
    p.add_argument("--Q", default="0", help="dx2 coefficient of the form")
    p.add_argument("--interval", help="t-interval a,b (default: the oval interval)")
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--out")
    p.set_defaults(func=cmd_abelian)

    p = sub.add_parser("fold-search", help="search for low-degree folding polynomials")
    p.add_argument("--points", required=True, help='comma-separated complex points, e.g. "1+1i,2i"')
    p.add_argument("--dmax", type=int, default=12)
    p.add_argument("--restarts", type=int, default=64)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--even", action="store_true", help="restrict to even polynomials")
    p.add_argument("--complex", action="store_true", help="experimental complex coefficients")
    p.add_argument("--out")
    p.add_argument("--csv")
    p.add_argument("--svg")
    p.set_defaults(func=cmd_fold_search)
    return ap


def main(argv=None) -> int:
    threads = _apply_thread_cap()
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    from . import __version__

    params = {k: v for k, v in vars(args).items() if k not in ("func", "manifest")}
    manifest = RunManifest(args.command, argv, params, version=__version__, threads=threads)
    start = time.perf_counter()
    code = EXIT_OK
    try:
        args.func(args, manifest)
    except ValidationFailure as exc:
        print(f"qsys: validation failure: {exc}", file=sys.stderr)
        code = EXIT_VALIDATION
    except NumericFailure as exc:
        print(f"qsys: numeric failure: {exc}", file=sys.stderr)
        code = EXIT_NUMERIC
    manifest.wall_clock = time.perf_counter() - start
    manifest.exit_code = code
    target = args.manifest or (f"{args.out}.manifest.json" if getattr(args, "out", None) else None)
    if target:
        Path(target).write_text(_dump(manifest.to_json()))
    return code


if __name__ == "__main__":
    sys.exit(main())
