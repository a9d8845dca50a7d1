"""Command-line front end: document parsing, dispatch and reports.

Document grammar (one directive per line, '#' starts a comment):

    ring Fp p=5 vars=X,Y weights=1,1
    ring Zp[[T]] p=3 prec=3^12,T^20
    shifts 0,0
    rel X, 0
    rel 0, X^2

Group files start with a header line 'p N n c' followed by one matrix per
line (n*n integers, row-major). An optional line 'valuation' starts a table
of 'index numerator denominator' lines.

Exit status: 0 success, 1 error or failed verification, 2 inconclusive
because of precision.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from . import __version__
from .graded_structure import (
    NotTorsionError,
    delta_vectors,
    dimension_filtration,
    height_one_support,
    is_pseudo_null,
    is_torsion,
    purity_check,
)
from .lambda_series import (
    LambdaModule,
    PrecisionError,
    associated_graded_certified,
    format_series,
    lambda_is_pseudo_null,
    mu_lambda,
    parse_precision,
    parse_series,
    weierstrass_prepare,
)
from .localization import char_ideal, structure_certificate
from .modules import ModulePresentation, ext_grade
from .pgroups import (
    FAIL,
    INCONCLUSIVE,
    GroupElement,
    InconclusiveError,
    SpanError,
    ValuationSpec,
    gr_bracket,
    sample_words,
    verify_p_valuation,
    weight_vector,
)
from .polyring import PolyParseError, RingSpec, parse_poly


class DocumentError(ValueError):
    def __init__(self, msg: str, line: int | None = None, col: int | None = None):
        loc = ""
        if line is not None:
            loc = f"line {line}" + (f", column {col}" if col is not None else "") + ": "
        super().__init__(loc + msg)
        self.line, self.col = line, col


class RouteDisagreement(RuntimeError):
    pass


@dataclass
class InputDocument:
    kind: str  # "graded", "lambda" or "group"
    ring: RingSpec | None = None
    module: ModulePresentation | None = None
    lambda_module: LambdaModule | None = None
    precision: tuple[int, int, int] | None = None
    group: list[GroupElement] = field(default_factory=list)
    group_header: tuple[int, int, int, int] | None = None
    valuation: list[tuple[int, Fraction]] = field(default_factory=list)


def _split_top(text: str) -> list[str]:
    """Split on commas outside parentheses."""
    parts, depth, cur = [], 0, []
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == "," and depth == 0:
            parts.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    parts.append("".join(cur))
    return [s.strip() for s in parts]


def _ints(text: str, what: str, line: int) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise DocumentError(f"bad integer list for {what}: {text!r}", line) from None


def _kv(tokens: Sequence[str], line: int) -> dict[str, str]:
    out = {}
    for t in tokens:
        if "=" not in t:
            raise DocumentError(f"expected key=value, got {t!r}", line)
        k, v = t.split("=", 1)
        out[k] = v
    return out


def parse_document(text: str, precision: tuple[int, int, int] | None = None) -> InputDocument:
    lines = text.splitlines()
    body = [(i + 1, ln.split("#", 1)[0].strip()) for i, ln in enumerate(lines)]
    body = [(n, ln) for n, ln in body if ln]
    if not body:
        raise DocumentError("empty document")
    first_no, first = body[0]
    if not first.startswith("ring"):
        return _parse_group(body)
    toks = first.split()
    if len(toks) < 2:
        raise DocumentError("ring header needs a type", first_no)
    kind = toks[1]
    kv = _kv(toks[2:], first_no)
    try:
        p = int(kv["p"])
    except (KeyError, ValueError):
        raise DocumentError("ring header needs p=<prime>", first_no) from None
    shifts = None
    rows: list[tuple[int, str]] = []
    for n, ln in body[1:]:
        head, _, rest = ln.partition(" ")
        if head == "shifts":
            shifts = _ints(rest, "shifts", n)
        elif head == "rel":
            rows.append((n, rest))
        else:
            raise DocumentError(f"unknown directive {head!r}", n, 1)
    if kind == "Fp":
        names = tuple(x.strip() for x in kv.get("vars", "").split(",") if x.strip())
        if not names:
            raise DocumentError("ring header needs vars=...", first_no)
        weights = tuple(_ints(kv["weights"], "weights", first_no)) if "weights" in kv else ()
        try:
            ring = RingSpec(p, names, weights)
        except ValueError as exc:
            raise DocumentError(str(exc), first_no) from None
        matrix = []
        for n, rest in rows:
            cells = _split_top(rest)
            try:
                matrix.append([parse_poly(ring, c) for c in cells])
            except PolyParseError as exc:
                raise DocumentError(str(exc), n, exc.col) from None
        ngens = len(shifts) if shifts is not None else (len(matrix[0]) if matrix else 0)
        if any(len(r) != ngens for r in matrix):
            raise DocumentError("relation rows must all have one entry per generator")
        M = ModulePresentation.from_rows(ring, matrix, shifts, ngens)
        return InputDocument("graded", ring=ring, module=M)
    if kind == "Zp[[T]]":
        if "prec" not in kv:
            raise DocumentError("Lambda header needs prec=p^a,T^b", first_no)
        try:
            pp, a, b = parse_precision(kv["prec"])
        except PolyParseError as exc:
            raise DocumentError(str(exc), first_no) from None
        if pp != p:
            raise DocumentError(f"precision prime {pp} differs from p={p}", first_no)
        if precision is not None:
            if precision[0] != p:
                raise DocumentError(f"--precision prime {precision[0]} differs from p={p}")
            a, b = precision[1], precision[2]
        matrix = []
        for n, rest in rows:
            try:
                row = [parse_series(c, p, a, b) for c in _split_top(rest)]
            except (PolyParseError, ValueError, ArithmeticError) as exc:
                raise DocumentError(str(exc), n) from None
            matrix.append(tuple(x.truncate(a, b) for x in row))
        ngens = len(shifts) if shifts is not None else (len(matrix[0]) if matrix else 0)
        if any(len(r) != ngens for r in matrix):
            raise DocumentError("relation rows must all have one entry per generator")
        try:
            L = LambdaModule(p, ngens, tuple(matrix), tuple(shifts or ()))
        except ValueError as exc:
            raise DocumentError(str(exc)) from None
        return InputDocument("lambda", lambda_module=L, precision=(p, a, b))
    raise DocumentError(f"unknown ring type {kind!r}", first_no)


def _parse_group(body) -> InputDocument:
    n0, header = body[0]
    try:
        p, N, n, c = (int(x) for x in header.split())
    except ValueError:
        raise DocumentError("group header must be 'p N n c'", n0) from None
    elems = []
    table = []
    in_table = False
    for ln_no, ln in body[1:]:
        if ln == "valuation":
            in_table = True
            continue
        if in_table:
            parts = ln.split()
            if len(parts) != 3:
                raise DocumentError("valuation lines are 'index numerator denominator'", ln_no)
            i, num, den = (int(x) for x in parts)
            table.append((i, Fraction(num, den)))
            continue
        vals = ln.split()
        if len(vals) != n * n:
            raise DocumentError(f"expected {n * n} integers per matrix line", ln_no)
        try:
            m = [[int(vals[i * n + j]) for j in range(n)] for i in range(n)]
            elems.append(GroupElement(p, N, m, c))
        except ValueError as exc:
            raise DocumentError(str(exc), ln_no) from None
    if not elems:
        raise DocumentError("group file lists no generators")
    return InputDocument("group", group=elems, group_header=(p, N, n, c), valuation=table)


def print_document(doc: InputDocument) -> str:
    """Canonical text of a document."""
    out = []
    if doc.kind == "graded":
        R, M = doc.ring, doc.module
        out.append(f"ring Fp p={R.p} vars={','.join(R.names)} weights={','.join(map(str, R.weights))}")
        out.append("shifts " + ",".join(map(str, M.shifts)))
        for row in M.relations:
            out.append("rel " + ", ".join(str(x) for x in row))
    elif doc.kind == "lambda":
        L = doc.lambda_module
        p, a, b = doc.precision
        out.append(f"ring Zp[[T]] p={p} prec={p}^{a},T^{b}")
        out.append("shifts " + ",".join(map(str, L.shifts)))
        for row in L.relations:
            out.append("rel " + ", ".join(format_series(x) for x in row))
    else:
        p, N, n, c = doc.group_header
        out.append(f"{p} {N} {n} {c}")
        for g in doc.group:
            out.append(" ".join(str(x) for r in g.entries for x in r))
        if doc.valuation:
            out.append("valuation")
            for i, v in doc.valuation:
                out.append(f"{i} {v.numerator} {v.denominator}")
    return "\n".join(out) + "\n"


# ----------------------------------------------------------------- reports


@dataclass
class Result:
    name: str
    value: object
    route: str
    precision: str | None = None


@dataclass
class Report:
    command: str
    results: list[Result] = field(default_factory=list)
    status: int = 0

    def add(self, name, value, route, precision=None):
        self.results.append(Result(name, value, route, precision))

    def text(self) -> str:
        lines = [f"command: {self.command}"]
        for r in self.results:
            extra = f", precision {r.precision}" if r.precision else ""
            lines.append(f"{r.name}: {_fmt(r.value)}  [route: {r.route}{extra}]")
        lines.append(f"status: {self.status}")
        return "\n".join(lines) + "\n"

    def machine(self) -> str:
        lines = [f"command={self.command}"]
        for r in self.results:
            parts = [f"result={r.name}", f"value={_quote(_fmt(r.value))}", f"route={_quote(r.route)}"]
            if r.precision:
                parts.append(f"precision={_quote(r.precision)}")
            lines.append(" ".join(parts))
        lines.append(f"status={self.status}")
        return "\n".join(lines) + "\n"


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float) and v == float("inf"):
        return "inf"
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_fmt(x) for x in v) + "]"
    return str(v)


def _quote(s: str) -> str:
    return json.dumps(s) if (not s or any(ch in s for ch in " \"=")) else s


def _support_str(W) -> str:
    s = "{" + ", ".join(str(f) for f in W.primes) + "}"
    return s + (" + residual" if W.residual is not None else "")


def _agree(name: str, a, b):
    if a != b:
        raise RouteDisagreement(f"route disagreement for {name}: {a} vs {b}")


# ---------------------------------------------------------------- commands


def _analyze(doc: InputDocument, report: Report, args):
    if doc.kind == "graded":
        M = doc.module
        j = ext_grade(M)
        report.add("grade", j, "dual of free resolution")
        pn = j >= 2
        report.add("pseudo_null", pn, "grade >= 2")
        torsion = is_torsion(M)
        report.add("torsion", torsion, "annihilator")
        if torsion:
            W = height_one_support(M)
            report.add("W", _support_str(W), "gcd of annihilator generators, factored")
            if W.residual is None:
                _agree("pseudo_null", pn, W.is_empty)
                report.add("pseudo_null", W.is_empty, "height-one support empty")
            d2 = delta_vectors(M, 2)
            report.add("delta2_zero", not d2, "Ext-annihilator torsion")
        if M.ngens and not M.is_zero():
            pure, q = purity_check(M)
            report.add("pure", pure, f"Delta^{q + 1} vanishes")
        rep = dimension_filtration(M)
        report.add("filtration_quotient_grades", list(rep.quotient_grades), "dimension filtration")
        if not rep.verified:
            raise RouteDisagreement("dimension filtration quotient has the wrong grade")
    elif doc.kind == "lambda":
        L = doc.lambda_module
        prec = _prec_str(doc)
        inv = mu_lambda(L)
        report.add("mu", inv.mu, "gcd of maximal minors, Weierstrass preparation", prec)
        report.add("lambda", inv.lam, "gcd of maximal minors, Weierstrass preparation", prec)
        a = lambda_is_pseudo_null(L)
        report.add("pseudo_null", a, "Fitting: gcd of maximal minors is a unit", prec)
        bridge = associated_graded_certified(L)
        b = is_pseudo_null(bridge.module)
        report.add("pseudo_null", b, f"graded: grade of gr M (certified through degree {bridge.degree_bound})", prec)
        _agree("pseudo_null", a, b)
        report.add("W", _support_str(height_one_support(bridge.module)), "graded: height-one support of gr M")
    else:
        raise DocumentError("analyze needs a module document")


def _prec_str(doc: InputDocument) -> str:
    p, a, b = doc.precision
    return f"{p}^{a},T^{b}"


def _char_ideal(doc: InputDocument, report: Report, args):
    if doc.kind == "graded":
        chi = char_ideal(doc.module)
        report.add("chi", chi, "local lengths from Fitting valuations, checked against factored maximal minors")
    elif doc.kind == "lambda":
        inv = mu_lambda(doc.lambda_module)
        prec = _prec_str(doc)
        report.add("mu", inv.mu, "Weierstrass preparation", prec)
        report.add("lambda", inv.lam, "Weierstrass preparation", prec)
        report.add("chi", inv.char, "Newton slope factorization", prec)
        report.add("uncertified_factors", [str(f) for f in inv.uncertified], "Newton polygon criterion")
    else:
        raise DocumentError("char-ideal needs a module document")


def _decompose(doc: InputDocument, report: Report, args):
    if doc.kind != "graded":
        raise DocumentError("decompose needs a graded module document")
    cert = structure_certificate(doc.module, witness_search=args.witness, seed=args.seed)
    report.add("L", [f"({g})" for g in cert.generators], "elementary divisors, aligned by rank")
    report.add("chi", cert.chi, "sum of elementary divisors")
    report.add("fitting_match", cert.verified, "Fitting valuations of the reconstruction at every (P, k)")
    if args.witness:
        report.add("witness", cert.witness_status, f"random search, seed {args.seed}")
        if cert.witnesses is not None:
            report.add("cokernel_grade", cert.witness_cokernel_grade, "dual of free resolution")
    if not cert.verified:
        raise RouteDisagreement("structure certificate failed its Fitting-valuation check")


def _weierstrass(doc, report: Report, args):
    if not args.series:
        raise DocumentError("weierstrass needs --series")
    p = a = b = None
    if args.precision:
        p, a, b = parse_precision(args.precision)
    f = parse_series(args.series, p, a, b)
    w = weierstrass_prepare(f)
    prec = f"{f.p}^{f.a},T^{f.b}"
    report.add("mu", w.mu, "minimal coefficient valuation", prec)
    report.add("lambda", w.lam, "first unit coefficient", prec)
    report.add("F", w.F, "Weierstrass division of T^lambda", f"{w.F.p}^{w.F.a}")
    report.add("u", w.u, "inverse of the division quotient")


def _group_check(doc: InputDocument, report: Report, args):
    if doc.kind != "group":
        raise DocumentError("group-check needs a group file")
    gens = doc.group
    sample = list(gens) + sample_words(gens, args.samples, seed=args.seed)
    if doc.valuation:
        spec = ValuationSpec.table([gens[i] for i, _ in doc.valuation], [v for _, v in doc.valuation])
        sample = [gens[i] for i, _ in doc.valuation]
    else:
        spec = ValuationSpec.congruence()
    rep = verify_p_valuation(sample, spec)
    p, N, n, c = doc.group_header
    for ax in sorted(rep.counts):
        cnt = rep.counts[ax]
        report.add(f"axiom{ax}", f"pass={cnt['pass']} fail={cnt['fail']} inconclusive={cnt['inconclusive']}", "pairwise check", f"{p}^{N}")
    for ax, wit in rep.violations[:10]:
        report.add("violation", f"axiom {ax} at {wit}", "pairwise check")
    report.add("verdict", rep.verdict, "axioms 1-4")
    if spec.kind == "congruence":
        if len(gens) >= 2:
            try:
                br = gr_bracket(gens[0], gens[1])
                report.add("bracket01", "0" if br.is_zero else f"degree {br.degree}: {br.symbol}", "commutator symbol")
            except InconclusiveError as exc:
                report.add("bracket01", f"inconclusive ({exc})", "commutator symbol")
        try:
            wv = weight_vector(gens, spec, seed=args.seed)
        except SpanError as exc:
            report.add("weights", f"not extracted ({exc})", "e * omega of pi and generators")
        else:
            report.add("weights", list(wv.weights), "e * omega of pi and generators")
            report.add("hilbert", [f"nu={nu}: monomials={m} sampled={s}" for nu, m, s in wv.hilbert], "rank accounting")
    if rep.verdict == INCONCLUSIVE:
        report.status = 2
    elif rep.verdict == FAIL:
        report.status = 1


def _gr_bridge(doc: InputDocument, report: Report, args):
    if doc.kind != "lambda":
        raise DocumentError("gr-bridge needs a Lambda document")
    L = doc.lambda_module
    shift_sets = [list(L.shifts)]
    if args.shifts:
        ks = [int(x) for x in args.shifts.split(",")]
        if len(ks) != L.ngens:
            raise DocumentError("--shifts needs one integer per generator")
        if ks != shift_sets[0]:
            shift_sets.append(ks)
    supports = []
    for ks in shift_sets:
        bridge = associated_graded_certified(L, ks)
        W = height_one_support(bridge.module)
        supports.append(W.as_set())
        label = ",".join(map(str, ks))
        report.add(f"gr[{label}]", str(bridge.module), f"initial forms, certified through degree {bridge.degree_bound}", _prec_str(doc))
        report.add(f"W[{label}]", _support_str(W), "height-one support of gr M")
    for S in supports[1:]:
        _agree("W across shift vectors", supports[0], S)


COMMANDS = {
    "analyze": _analyze,
    "char-ideal": _char_ideal,
    "decompose": _decompose,
    "weierstrass": _weierstrass,
    "group-check": _group_check,
    "gr-bridge": _gr_bridge,
}


def run_command(command: str, doc: InputDocument | None, args) -> Report:
    if command not in COMMANDS:
        raise DocumentError(f"unknown command {command!r}")
    report = Report(command)
    COMMANDS[command](doc, report, args)
    return report


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="iwasawa", description="Structure invariants of torsion modules.")
    ap.add_argument("--version", action="version", version=__version__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--precision", help="p^a,T^b")
    common.add_argument("--format", choices=("text", "machine"), default="text")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in ("analyze", "char-ideal"):
        sp = sub.add_parser(name, parents=[common])
        sp.add_argument("file")
    sp = sub.add_parser("decompose", parents=[common])
    sp.add_argument("file")
    sp.add_argument("--witness", action="store_true")
    sp = sub.add_parser("weierstrass", parents=[common])
    sp.add_argument("--series", required=True)
    sp = sub.add_parser("group-check", parents=[common])
    sp.add_argument("file")
    sp.add_argument("--samples", type=int, default=50)
    sp = sub.add_parser("gr-bridge", parents=[common])
    sp.add_argument("file")
    sp.add_argument("--shifts")
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    report = Report(args.command)
    try:
        doc = None
        if getattr(args, "file", None):
            with open(args.file) as fh:
                text = fh.read()
            prec = parse_precision(args.precision) if args.precision else None
            doc = parse_document(text, prec)
        report = run_command(args.command, doc, args)
    except (PrecisionError, InconclusiveError) as exc:
        report.add("inconclusive", str(exc), "precision")
        report.status = 2
    except (RouteDisagreement, DocumentError, NotTorsionError, PolyParseError, ValueError, ArithmeticError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        report.status = 1
    out = report.machine() if args.format == "machine" else report.text()
    sys.stdout.write(out)
    return report.status


if __name__ == "__main__":
    sys.exit(main())
