"""Command-line front end.

Exit codes: 0 success, 1 computation error (or a failed ``verify paper``),
2 usage error.  ``--error-json`` turns error messages into a JSON object on
stderr.  Default tolerance comes from ``--tol``, then the ``--config`` file,
then ``$MODSECRECY_TOL``, then 1e-12.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import json
import os
import re
import sys
from dataclasses import dataclass, field
from fractions import Fraction

from . import __version__, acceptance, mod2, qforms
from .lattice import LatticeError, SpecSyntaxError, parse_matrix, parse_spec, theta_coeffs
from .secrecy import SecrecyCurve, scan_extremum
from .theta import ToleranceError, theta_eval

TOL_ENV = "MODSECRECY_TOL"
DEFAULTS = {"tol": 1e-12, "points": 200, "refine_tol": 1e-8, "format": None, "no_timestamp": False}
TABLE_ROWS = mod2.ODD_ROWS + mod2.EVEN_ROWS


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


@dataclass
class RunConfig:
    command: str
    tol: float
    format: str | None
    out: str | None
    no_timestamp: bool
    error_json: bool
    options: dict = field(default_factory=dict)


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--tol", type=float, default=None, help="absolute tolerance (default 1e-12)")
    p.add_argument("--format", choices=["csv", "json", "text"], default=None)
    p.add_argument("--out", default=None, help="write the artifact here instead of stdout")
    p.add_argument("--config", default=None, help="JSON file with option defaults")
    p.add_argument("--no-timestamp", action="store_true", default=None,
                   help="omit the generated_at field from JSON output")
    p.add_argument("--error-json", action="store_true", help="report errors as JSON on stderr")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="modsecrecy", description="Secrecy functions, theta series and 2-modular certificates.")
    parser.add_argument("--version", action="version", version=f"modsecrecy {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("theta", help="evaluate a Jacobi theta function at i*y")
    p.add_argument("--kind", type=int, choices=[2, 3, 4], required=True)
    p.add_argument("--y", type=float, required=True)
    _add_common(p)

    lat = sub.add_parser("lattice", help="lattice theta series").add_subparsers(
        dest="action", required=True, parser_class=_Parser)
    p = lat.add_parser("theta", help="exact theta coefficients up to a norm bound")
    p.add_argument("--spec", required=True)
    p.add_argument("--max-norm", type=Fraction, required=True)
    p.add_argument("--method", choices=["enumerate", "product"], default="enumerate")
    _add_common(p)

    sec = sub.add_parser("secrecy", help="secrecy function scans").add_subparsers(
        dest="action", required=True, parser_class=_Parser)
    p = sec.add_parser("scan", help="tabulate a secrecy function and locate its extremum")
    p.add_argument("--spec", required=True)
    p.add_argument("--l", type=int, required=True)
    v = p.add_mutually_exclusive_group(required=True)
    v.add_argument("--classic", dest="variant", action="store_const", const="classic")
    v.add_argument("--modular", dest="variant", action="store_const", const="modular")
    p.add_argument("--ymin", type=float, required=True)
    p.add_argument("--ymax", type=float, required=True)
    p.add_argument("--points", type=int, default=None)
    p.add_argument("--refine-tol", type=float, default=None)
    p.add_argument("--report", default=None, help="also write the extremum report JSON here")
    _add_common(p)

    m2 = sub.add_parser("mod2", help="2-modular f2-polynomials").add_subparsers(
        dest="action", required=True, parser_class=_Parser)
    p = m2.add_parser("fit", help="fit the f2-polynomial of a 2-modular lattice")
    p.add_argument("--spec", required=True)
    p.add_argument("--max-norm", type=int, default=None, help="enumeration depth (default k//2 + 8)")
    _add_common(p)
    p = m2.add_parser("verify", help="certify the 2-modular conjecture for a polynomial")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--spec")
    g.add_argument("--table-row", choices=TABLE_ROWS)
    p.add_argument("--max-norm", type=int, default=None)
    _add_common(p)

    qf = sub.add_parser("qform", help="rational quadratic forms").add_subparsers(
        dest="action", required=True, parser_class=_Parser)
    p = qf.add_parser("equiv", help="decide rational equivalence of two forms")
    p.add_argument("--a", required=True, help="matrix literal [a,b;c,d] or a file of rows")
    p.add_argument("--b", required=True)
    _add_common(p)

    ver = sub.add_parser("verify", help="reproduction checks").add_subparsers(
        dest="action", required=True, parser_class=_Parser)
    p = ver.add_parser("paper", help="run every reproduction check")
    p.add_argument("--only", type=int, nargs="+", choices=sorted(acceptance.CHECKS), default=None)
    _add_common(p)
    return parser


def _resolve(args) -> RunConfig:
    conf = {}
    if getattr(args, "config", None):
        try:
            with open(args.config) as fh:
                conf = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(conf, dict):
            raise UsageError("config file must hold a JSON object")
    env = {}
    if os.environ.get(TOL_ENV):
        try:
            env["tol"] = float(os.environ[TOL_ENV])
        except ValueError:
            raise UsageError(f"{TOL_ENV} is not a number") from None

    def pick(name):
        val = getattr(args, name, None)
        if val is not None:
            return val
        if name in conf:
            return conf[name]
        return env.get(name, DEFAULTS.get(name))

    for name in ("points", "refine_tol"):
        if hasattr(args, name):
            setattr(args, name, pick(name))
    tol = float(pick("tol"))
    if not tol > 0:
        raise UsageError("tol must be positive")
    command = " ".join(x for x in (args.command, getattr(args, "action", None)) if x)
    return RunConfig(command, tol, pick("format"), args.out, bool(pick("no_timestamp")),
                     args.error_json, vars(args))


# ---------------------------------------------------------------------------
# output helpers


def _stamp(cfg: RunConfig, payload: dict) -> dict:
    if not cfg.no_timestamp:
        payload["generated_at"] = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    return payload


def _dumps(payload) -> str:
    return json.dumps(payload, indent=2, sort_keys=False) + "\n"


def _emit(cfg: RunConfig, text: str) -> None:
    if cfg.out:
        with open(cfg.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# commands


def cmd_theta(cfg: RunConfig, a) -> int:
    cv = theta_eval(a.kind, a.y, cfg.tol)
    if (cfg.format or "text") == "json":
        _emit(cfg, _dumps(_stamp(cfg, {"kind": a.kind, "y": a.y, "value": cv.value, "err_bound": cv.err_bound})))
    else:
        _emit(cfg, f"{cv.value:.12f} +/- {cv.err_bound:.3e}\n")
    return 0


def cmd_lattice_theta(cfg: RunConfig, a) -> int:
    spec = parse_spec(a.spec)
    tc = theta_coeffs(spec, a.max_norm, method=a.method)
    fmt = cfg.format or "text"
    rows = sorted(tc.counts.items())
    if fmt == "json":
        payload = {"spec": a.spec, "dimension": spec.dimension, "det": str(spec.det),
                   "max_norm": str(tc.max_norm), "coefficients": {str(n): c for n, c in rows}}
        _emit(cfg, _dumps(_stamp(cfg, payload)))
    elif fmt == "csv":
        _emit(cfg, "norm,count\n" + "".join(f"{n},{c}\n" for n, c in rows))
    else:
        _emit(cfg, "".join(f"{str(n):>8}  {c}\n" for n, c in rows))
    return 0


def _scan_rows(report, ys_vals) -> list:
    rows = dict(ys_vals)
    if report.location is not None:
        rows[report.location] = report.value
    out, last = [], None
    for y in sorted(rows):
        ys = f"{y:.12g}"
        if last is not None and float(ys) <= last:
            continue
        out.append((ys, f"{rows[y]:.12g}"))
        last = float(ys)
    return out


def cmd_secrecy_scan(cfg: RunConfig, a) -> int:
    if not 0 < a.ymin < a.ymax:
        raise UsageError("need 0 < --ymin < --ymax")
    if a.points < 16:
        raise UsageError("--points must be at least 16")
    curve = SecrecyCurve(parse_spec(a.spec), a.l, a.variant)
    report = scan_extremum(curve, a.ymin, a.ymax, grid_points=a.points, refine_tol=a.refine_tol)
    rows = _scan_rows(report, report.grid)
    rep = _stamp(cfg, {"spec": a.spec, "l": a.l, "variant": a.variant, **report.to_dict()})
    if (cfg.format or "csv") == "json":
        _emit(cfg, _dumps({"rows": [[float(y), float(v)] for y, v in rows], "report": rep}))
    else:
        _emit(cfg, "y,xi\n" + "".join(f"{y},{v}\n" for y, v in rows))
        sys.stderr.write(_dumps(rep))
    if a.report:
        with open(a.report, "w") as fh:
            fh.write(_dumps(rep))
    return 0


def _fit_spec(text: str, max_norm) -> mod2.TwoModularPoly:
    spec = parse_spec(text)
    n = spec.dimension
    if n % 2:
        raise mod2.NotRepresentableError(f"dimension {n} is odd; 2-modular f2-polynomials need even dimension")
    k = n // 2
    depth = max_norm if max_norm is not None else k // 2 + 8
    return mod2.fit_f2_polynomial(theta_coeffs(spec, depth), k, text)


def cmd_mod2(cfg: RunConfig, a) -> int:
    if a.action == "fit" or a.spec is not None:
        p = _fit_spec(a.spec, a.max_norm)
    else:
        p = mod2.TABLE[a.table_row]
    payload = mod2.verdict_json(p)
    payload["source"] = p.source
    _emit(cfg, _dumps(_stamp(cfg, payload)))
    return 0


_ROW_SPLIT = re.compile(r"[,\s]+")


def _read_form(arg: str) -> list:
    if os.path.isfile(arg):
        with open(arg) as fh:
            lines = [ln.split("#")[0].strip() for ln in fh]
        rows = [[Fraction(x) for x in _ROW_SPLIT.split(ln) if x] for ln in lines if ln]
        if not rows or any(len(r) != len(rows) for r in rows):
            raise UsageError(f"{arg}: expected a square matrix, one row per line")
        return rows
    return parse_matrix(arg)


def cmd_qform_equiv(cfg: RunConfig, a) -> int:
    fa, fb = _read_form(a.a), _read_form(a.b)
    rep = qforms.rationally_equivalent(fa, fb)
    payload = rep.to_dict()
    for key, m in (("a", fa), ("b", fb)):
        d = qforms.diagonalize(m).D
        if payload[key] is not None:
            payload[key]["diagonal"] = [str(x) for x in d]
            payload[key]["det"] = str(qforms.as_form(m).det)
    _emit(cfg, _dumps(_stamp(cfg, payload)))
    return 0


def cmd_verify_paper(cfg: RunConfig, a) -> int:
    results = acceptance.run_all(a.only)
    ok = all(r.passed for r in results)
    if (cfg.format or "text") == "json":
        _emit(cfg, _dumps(_stamp(cfg, {"passed": ok, "checks": [r.to_dict() for r in results]})))
    else:
        lines = [r.line() for r in results]
        lines.append(f"{sum(r.passed for r in results)}/{len(results)} checks passed")
        _emit(cfg, "\n".join(lines) + "\n")
    return 0 if ok else 1


COMMANDS = {
    "theta": cmd_theta,
    "lattice theta": cmd_lattice_theta,
    "secrecy scan": cmd_secrecy_scan,
    "mod2 fit": cmd_mod2,
    "mod2 verify": cmd_mod2,
    "qform equiv": cmd_qform_equiv,
    "verify paper": cmd_verify_paper,
}

COMPUTATION_ERRORS = (ToleranceError, ArithmeticError, qforms.DegenerateFormError, ValueError, OSError)


def _fail(code: int, exc: Exception, as_json: bool) -> int:
    kind = "usage" if code == 2 else "computation"
    if as_json:
        sys.stderr.write(json.dumps({"error": kind, "type": type(exc).__name__, "message": str(exc),
                                     "exit_code": code}) + "\n")
    else:
        sys.stderr.write(f"error: {exc}\n")
    return code


def run(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    as_json = "--error-json" in argv
    try:
        args = build_parser().parse_args(argv)
        cfg = _resolve(args)
    except UsageError as exc:
        return _fail(2, exc, as_json)
    try:
        return COMMANDS[cfg.command](cfg, args)
    except UsageError as exc:
        return _fail(2, exc, as_json)
    except (SpecSyntaxError, LatticeError) as exc:
        return _fail(2, exc, as_json)
    except COMPUTATION_ERRORS as exc:
        return _fail(1, exc, as_json)


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
