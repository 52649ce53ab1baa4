"""Command-line verifier.

Exit codes: 0 when every check passes, 1 on a mathematical failure, 2 on
input errors and usage errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .algebra import LieAlgebraError, derivation_space, nilradical, solvable_radical
from .catalogue import FAMILIES, DEFAULT_VALUES, ParameterDomainError, scan_family, verify_tables
from .documents import SCHEMA_VERSION, InputError, dumps, fmt_scalar, parse_document, parse_text, to_jsonable
from .geometry import InvalidMRD
from .linalg import LinAlgError
from .solitons import (
    MILNOR_DEFAULT_GRID, NOT_SOLITON, check_algebraic_soliton, check_solvsoliton, compact_u_obstruction,
    lemadimn_audit, milnor_sl2_scan, moment_map_if_defined,
)

EXIT_PASS, EXIT_FAIL, EXIT_INPUT = 0, 1, 2
PASS, FAIL = "PASS", "FAIL"


class UsageError(ValueError):
    pass


@dataclass
class Report:
    command: str
    records: list = field(default_factory=list)
    summary: str = ""
    failed: bool = False

    def add(self, check: str, anchor: str, inputs, result, residuals, verdict: str, ok: bool = True):
        self.records.append({"check": check, "anchor": anchor, "inputs": inputs, "result": result,
                             "residuals": residuals, "verdict": verdict})
        if not ok:
            self.failed = True

    @property
    def status(self) -> str:
        return FAIL if self.failed else PASS

    def as_dict(self) -> dict:
        return {"schema": SCHEMA_VERSION, "command": self.command, "status": self.status,
                "summary": self.summary, "records": self.records}

    def render(self, fmt: str) -> str:
        if fmt == "json":
            return dumps(self.as_dict())
        lines = [f"{self.status} {self.command}: {self.summary}".rstrip()]
        for r in self.records:
            lines.append(f"  {r['verdict']:<18} {r['check']}  [{r['anchor']}]  {_brief(r['inputs'])}  {_brief(r['result'])}")
        return "\n".join(lines) + "\n"


def _brief(obj) -> str:
    obj = to_jsonable(obj)
    if isinstance(obj, dict):
        return " ".join(f"{k}={_brief(v)}" for k, v in sorted(obj.items()) if not isinstance(v, (dict, list)) or
                        (isinstance(v, list) and len(str(v)) < 60))
    if isinstance(obj, list):
        return str(obj).replace("'", "")
    return str(obj)


# -- grids -------------------------------------------------------------------------------------------

def parse_grid(spec: str) -> dict[str, list[Fraction]] | None:
    """``"alpha=1/2,1,2;beta=1,3"`` to a value list per parameter; ``"default"`` gives None."""
    spec = spec.strip()
    if spec == "default":
        return None
    grid = {}
    for part in filter(None, (p.strip() for p in spec.split(";"))):
        name, sep, values = part.partition("=")
        name = name.strip()
        if not sep or not name:
            raise UsageError(f"grid entry {part!r} must look like name=v1,v2")
        if name in grid:
            raise UsageError(f"parameter {name!r} given twice in grid")
        try:
            vals = [Fraction(v.strip()) for v in values.split(",") if v.strip()]
        except (ValueError, ZeroDivisionError) as exc:
            raise UsageError(f"grid values for {name!r} must be rationals like 1/2") from exc
        if not vals:
            raise UsageError(f"no values for parameter {name!r}")
        grid[name] = vals
    if not grid:
        raise UsageError("empty grid")
    return grid


def _family_points(name: str, grid) -> list[dict] | None:
    spec = FAMILIES[name]
    if grid is None:
        return None
    unknown = sorted(set(grid) - set(spec.params))
    if unknown:
        raise UsageError(f"family {name} has no parameters {unknown}; parameters are {list(spec.params)}")
    missing = [p for p in spec.params if p not in grid]
    if missing and spec.points is not None:
        raise UsageError(f"family {name} needs values for {missing}")
    values = {p: grid.get(p, spec.grid.get(p, DEFAULT_VALUES)) for p in spec.params}
    pts = [{}]
    for p in spec.params:
        pts = [dict(pt, **{p: Fraction(v)}) for pt in pts for v in values[p]]
    return pts


# -- commands ----------------------------------------------------------------------------------------

def _load(path: str, args) -> tuple:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError([(path, f"cannot read file: {exc.strerror}")]) from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError:
        return parse_text(text)
    if isinstance(doc, dict):
        if args.mode is not None:
            doc["mode"] = args.mode
        if args.tol is not None:
            doc["mode"] = doc.get("mode", "float")
            doc["tolerance"] = args.tol
    return parse_document(doc)


def _cert_result(cert) -> dict:
    return {"c": cert.c, "D": cert.D, "D1": cert.D1, "trivial": cert.trivial, "sign": cert.sign_class,
            "reasons": list(cert.reasons)}


def cmd_check(args, report: Report):
    alg, mrd, _ = _load(args.file, args)
    if mrd is None:
        raise InputError([("k/h/n", "check needs a decomposition; give k, h and n")])
    cert = check_algebraic_soliton(mrd)
    inputs = {"dim": mrd.dim, "dim_k": mrd.nk, "dim_h": mrd.nh, "dim_n": mrd.nn, "basis": mrd.g.names}
    result = _cert_result(cert)
    result["scope"] = "algebraic conditions only; simple connectivity of G/K is not checked"
    report.add("algebraic_soliton", "soliton conditions on g = k + h + n", inputs, result, cert.residuals,
               cert.verdict, cert.is_soliton)
    if cert.is_soliton:
        mm = moment_map_if_defined(mrd)
        if mm is not None:
            zero = mrd.field.all_zero(mm)
            report.add("moment_map", "moment map of theta", {}, {"value": mm}, {},
                       "zero" if zero else "nonzero", zero)
        for item in lemadimn_audit(mrd, cert):
            report.add(f"audit.{item.item}", "border-case audit", {"applicable": item.applicable},
                       {"detail": item.detail}, {}, PASS if item.passed else FAIL, item.passed)
    obs = compact_u_obstruction(mrd)
    report.add("compact_u", "compact u obstruction", {}, {"detail": obs.detail, "cartan_defect": obs.cartan_defect},
               {}, obs.status, not (obs.status == "obstructed" and cert.expanding))
    report.summary = cert.verdict + ("" if cert.c is None else f" c={fmt_scalar(cert.c)}")


def cmd_solvsoliton(args, report: Report):
    alg, mrd, gram = _load(args.file, args)
    if mrd is not None:
        if mrd.nk:
            raise InputError([("k", "a left-invariant check needs k = 0")])
        target = (mrd,)
    else:
        if gram is None:
            raise InputError([("gram", "required")])
        target = (alg, gram)
    try:
        cert = check_solvsoliton(*target)
    except ValueError as exc:
        raise InputError([("brackets", str(exc))]) from exc
    report.add("solvsoliton", "left-invariant soliton on a solvable group", {"dim": alg.dim}, _cert_result(cert),
               cert.residuals, cert.verdict, cert.is_soliton)
    report.summary = cert.verdict + ("" if cert.c is None else f" c={fmt_scalar(cert.c)}")


def cmd_nilradical(args, report: Report):
    alg, _, _ = _load(args.file, args)
    try:
        nil = nilradical(alg)
    except LinAlgError as exc:
        raise InputError([("mode", str(exc))]) from exc
    rad = solvable_radical(alg)
    report.add("nilradical", "largest nilpotent ideal", {"dim": alg.dim, "basis": alg.names},
               {"dim": nil.dim, "basis": nil.basis, "radical_dim": rad.dim, "radical_basis": rad.basis}, {},
               "computed")
    report.summary = f"dim nil = {nil.dim}, dim rad = {rad.dim}"


def cmd_derivations(args, report: Report):
    alg, _, _ = _load(args.file, args)
    der = derivation_space(alg)
    report.add("derivations", "derivation algebra", {"dim": alg.dim, "basis": alg.names},
               {"dim": len(der), "basis": list(der)}, {}, "computed")
    report.summary = f"dim Der = {len(der)}"


def _require_exact(args, what: str):
    if args.mode == "float" or args.tol is not None:
        raise UsageError(f"{what} runs in exact arithmetic only")


def cmd_tables(args, report: Report):
    _require_exact(args, "tables")
    rows = verify_tables(workers=args.workers)
    for row in rows:
        mism = [{"params": m.params, "verdict": m.observed_verdict, "note": m.note} for m in row.mismatches]
        report.add(row.family, row.anchor, {"constraint": row.constraint, "points": row.points},
                   {"passing_points": row.passing_points}, {"mismatches": mism}, PASS if row.ok else FAIL, row.ok)
    bad = sum(not r.ok for r in rows)
    report.summary = f"{len(rows)} families, {bad} failing"


def cmd_scan(args, report: Report):
    _require_exact(args, "scan")
    if args.family not in FAMILIES:
        raise UsageError(f"unknown family {args.family!r}; known: {', '.join(FAMILIES)}")
    grid = parse_grid(args.grid_spec)
    spec = FAMILIES[args.family]
    try:
        results = scan_family(args.family, _family_points(args.family, grid), workers=args.workers)
    except (ParameterDomainError, ZeroDivisionError, InvalidMRD) as exc:
        raise UsageError(f"parameter outside the family's domain: {exc}") from exc
    for r in results:
        c = r.c if r.observed_verdict != NOT_SOLITON else None
        report.add(args.family, spec.anchor, dict(r.params),
                   {"verdict": r.observed_verdict, "c": c, "expected_pass": r.expected_pass}, {"note": r.note},
                   PASS if r.ok else FAIL, r.ok)
    passing = sum(r.observed_verdict != NOT_SOLITON for r in results)
    bad = sum(not r.ok for r in results)
    report.summary = f"{len(results)} points, {passing} solitons, {bad} not matching {spec.constraint}"


def cmd_milnor(args, report: Report):
    _require_exact(args, "milnor-scan")
    grid = parse_grid(args.grid_spec)
    if grid is not None and "lambda" in grid:
        grid["lam"] = grid.pop("lambda")
    try:
        scan = milnor_sl2_scan(grid or MILNOR_DEFAULT_GRID, workers=args.workers)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    for p in scan["points"]:
        ok = p["identity_residual"] == 0 and p["frame_residual"] == 0 and not (p["solves"] and p["c"] < 0)
        report.add("milnor_point", "Milnor-frame soliton equations",
                   {k: p[k] for k in ("a", "b", "d", "lam")}, {"c": p["c"], "solves": p["solves"]},
                   {k: p[k] for k in ("r1", "r2", "identity_residual", "frame_residual")},
                   PASS if ok else FAIL, ok)
    ok = scan["expanding_solutions"] == 0 and scan["identity_holds"] and scan["frame_consistent"]
    report.add("milnor_summary", "no expanding soliton from sl2 over a line",
               {"points": scan["n_points"]},
               {"solutions": scan["solutions"], "expanding_solutions": scan["expanding_solutions"],
                "equal_ab_constants": scan["equal_ab_constants"],
                "equal_ab_all_positive": scan["equal_ab_all_positive"]},
               {"identity_holds": scan["identity_holds"], "frame_consistent": scan["frame_consistent"]},
               PASS if ok else FAIL, ok)
    report.summary = ("no expanding solution" if scan["expanding_solutions"] == 0 else
                      f"{scan['expanding_solutions']} expanding solutions") + f" on {scan['n_points']} points"


# -- argument parsing --------------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _common(p: argparse.ArgumentParser, top: bool):
    d = (lambda v: v) if top else (lambda v: argparse.SUPPRESS)
    p.add_argument("--mode", choices=["exact", "float"], default=d(None), help="arithmetic for input documents")
    p.add_argument("--tol", type=float, default=d(None), help="float-mode tolerance")
    p.add_argument("--format", choices=["human", "json"], default=d("human"), dest="format")
    p.add_argument("--workers", type=int, default=d(1), help="processes for grid scans")
    p.add_argument("--grid", default=d(None), help="grid such as 'alpha=1/2,1;beta=2' or 'default'")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="homsoliton", description="Verify algebraic Ricci solitons on homogeneous spaces.")
    _common(parser, True)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser, required=True)
    for name, fn, help_ in [("check", cmd_check, "certify an algebraic soliton for a decomposition document"),
                            ("solvsoliton", cmd_solvsoliton, "certify a left-invariant metric on a solvable algebra"),
                            ("nilradical", cmd_nilradical, "nilradical and solvable radical of a document"),
                            ("derivations", cmd_derivations, "derivation algebra of a document")]:
        p = sub.add_parser(name, help=help_)
        _common(p, False)
        p.add_argument("file")
        p.set_defaults(func=fn)
    p = sub.add_parser("tables", help="verify every catalogue family on its default grid")
    _common(p, False)
    p.set_defaults(func=cmd_tables)
    p = sub.add_parser("scan", help="sweep one family over a grid")
    _common(p, False)
    p.add_argument("family")
    p.add_argument("grid_spec", nargs="?", default=None)
    p.set_defaults(func=cmd_scan)
    p = sub.add_parser("milnor-scan", help="scan the Milnor-frame equations for sl2 over a line")
    _common(p, False)
    p.add_argument("grid_spec", nargs="?", default=None)
    p.set_defaults(func=cmd_milnor)
    return parser


def run_command(argv, stdout=None, stderr=None) -> tuple[int, Report | None]:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    fmt = "human"
    try:
        args = parser.parse_args(argv)
        fmt = args.format
        if args.workers < 1:
            raise UsageError("--workers must be at least 1")
        if args.tol is not None and not args.tol > 0:
            raise UsageError("--tol must be positive")
        if hasattr(args, "grid_spec"):
            if args.grid_spec is None:
                args.grid_spec = args.grid if args.grid is not None else "default"
            elif args.grid is not None:
                raise UsageError("give the grid either positionally or with --grid, not both")
        report = Report(args.command.replace("_", "-"))
        args.func(args, report)
    except UsageError as exc:
        stderr.write(f"error: {exc}\n")
        if "grid" not in str(exc) and "family" not in str(exc):
            stderr.write(parser.format_usage())
        return EXIT_INPUT, None
    except SystemExit as exc:
        return (exc.code if isinstance(exc.code, int) else EXIT_INPUT), None
    except InputError as exc:
        for path, msg in exc.errors:
            stderr.write(f"input error at {path or '<document>'}: {msg}\n")
        return EXIT_INPUT, None
    except (LinAlgError, LieAlgebraError) as exc:
        stderr.write(f"input error: {exc}\n")
        return EXIT_INPUT, None
    stdout.write(report.render(fmt))
    return (EXIT_FAIL if report.failed else EXIT_PASS), report


def main(argv=None) -> int:
    code, _ = run_command(sys.argv[1:] if argv is None else argv)
    return code


if __name__ == "__main__":
    sys.exit(main())
