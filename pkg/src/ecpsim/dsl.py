"""Line-oriented circuit description language.

One statement per line; ``#`` starts a comment; blank lines are ignored.
Statement forms:

    circuit <name>
    param <id>
    mode <id>
    source <mode> pol=<H|V> amp=<expr> [photon=<tag>]
    pbs in=<id> outH=<id> outV=<id>
    pbs inH=<id> inV=<id> out=<id>
    vbs in=<id> reflect=<id> transmit=<id> t=<expr>
    bs in1=<id> in2=<id> out1=<id> out2=<id>
    qnd a=<id> b=<id> select=<0|1>
    flip mode=<id> when=<detector-id>
    detect group=<name> modes=<id,...> require=exactly_one [eta=<float>]
    output <id,...>

The two ``pbs`` field sets select the splitting or merging orientation of
the same element.  ``photon=`` tags group source lines describing components
of one photon (a superposed input spans several spatial modes); untagged
sources each stand alone.  Expressions are whitespace-free arithmetic over
declared parameters: numbers, identifiers, ``+ - * /``, parentheses and
``sqrt(...)``.

Statement order is execution order.  Documents are validated on parse:
modes must be declared before use, each mode is produced by at most one
element output, detector modes cannot be circuit outputs, and exactly one
``output`` statement must be present.  Parsing and serialization are
mutually inverse on canonical form: ``parse(serialize(doc)) == doc`` and
serialization is idempotent.
"""

from __future__ import annotations

import cmath
import re
from dataclasses import dataclass
from typing import Iterator, Mapping, Sequence, Union


class CircuitError(Exception):
    """Any failure to assemble or resolve a circuit document."""


class CircuitParseError(CircuitError):
    """Parse or validation failure with a 1-based source position."""

    def __init__(self, message: str, line: int = 0, col: int = 0):
        self.line = line
        self.col = col
        if line:
            message = f"line {line}, column {col}: {message}"
        super().__init__(message)


class BindingError(CircuitError):
    """An expression referenced a parameter with no bound value."""


# ---------------------------------------------------------------------------
# expressions

_TOKEN_RE = re.compile(r"\d+\.\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?|\d+(?:[eE][+-]?\d+)?|[A-Za-z_][A-Za-z_0-9]*|[()+\-*/]")

Expr = tuple


class _ExprParser:
    """Recursive descent over ``+ - * / ( ) sqrt`` with unary minus."""

    def __init__(self, text: str, line: int, col0: int):
        self.text = text
        self.line = line
        self.col0 = col0
        self.tokens: list[tuple[str, int]] = []
        pos = 0
        for m in _TOKEN_RE.finditer(text):
            if m.start() != pos:
                raise CircuitParseError(
                    f"bad character {text[pos]!r} in expression",
                    line,
                    col0 + pos,
                )
            self.tokens.append((m.group(0), m.start()))
            pos = m.end()
        if pos != len(text):
            raise CircuitParseError(
                f"bad character {text[pos]!r} in expression", line, col0 + pos
            )
        self.i = 0

    def _fail(self, message: str):
        col = self.col0 + (
            self.tokens[self.i][1] if self.i < len(self.tokens) else len(self.text)
        )
        raise CircuitParseError(message, self.line, col)

    def peek(self) -> str | None:
        return self.tokens[self.i][0] if self.i < len(self.tokens) else None

    def take(self) -> str:
        if self.i >= len(self.tokens):
            self._fail("unexpected end of expression")
        tok = self.tokens[self.i][0]
        self.i += 1
        return tok

    def parse(self) -> Expr:
        e = self.expr()
        if self.i != len(self.tokens):
            self._fail(f"unexpected token {self.peek()!r}")
        return e

    def expr(self) -> Expr:
        node = self.term()
        while self.peek() in ("+", "-"):
            op = self.take()
            node = ("add" if op == "+" else "sub", node, self.term())
        return node

    def term(self) -> Expr:
        node = self.factor()
        while self.peek() in ("*", "/"):
            op = self.take()
            node = ("mul" if op == "*" else "div", node, self.factor())
        return node

    def factor(self) -> Expr:
        tok = self.peek()
        if tok is None:
            self._fail("unexpected end of expression")
        if tok == "-":
            self.take()
            return ("neg", self.factor())
        if tok == "(":
            self.take()
            node = self.expr()
            if self.peek() != ")":
                self._fail("expected ')'")
            self.take()
            return node
        self.take()
        if tok[0].isdigit() or tok[0] == ".":
            return ("num", float(tok))
        if not re.fullmatch(r"[A-Za-z_][A-Za-z_0-9]*", tok):
            self._fail(f"unexpected token {tok!r}")
        if self.peek() == "(":
            if tok != "sqrt":
                self._fail(f"unknown function {tok!r}")
            self.take()
            node = self.expr()
            if self.peek() != ")":
                self._fail("expected ')'")
            self.take()
            return ("sqrt", node)
        return ("var", tok)


def parse_expr(text: str, line: int = 0, col: int = 1) -> Expr:
    return _ExprParser(text, line, col).parse()


_PRECEDENCE = {"add": 1, "sub": 1, "mul": 2, "div": 2, "neg": 3}


def unparse_expr(node: Expr) -> str:
    kind = node[0]
    if kind == "num":
        v = node[1]
        return repr(int(v)) if float(v).is_integer() and abs(v) < 1e15 else repr(v)
    if kind == "var":
        return node[1]
    if kind == "sqrt":
        return f"sqrt({unparse_expr(node[1])})"
    if kind == "neg":
        inner = unparse_expr(node[1])
        if node[1][0] in ("add", "sub", "mul", "div", "neg"):
            inner = f"({inner})"
        return f"-{inner}"
    sym = {"add": "+", "sub": "-", "mul": "*", "div": "/"}[kind]
    prec = _PRECEDENCE[kind]
    left, right = node[1], node[2]
    ls = unparse_expr(left)
    rs = unparse_expr(right)
    if left[0] in _PRECEDENCE and _PRECEDENCE[left[0]] < prec:
        ls = f"({ls})"
    # an equal-precedence right child keeps its parens: a-(b-c), a/(b*c)
    if right[0] in _PRECEDENCE and _PRECEDENCE[right[0]] <= prec and right[0] != "neg":
        rs = f"({rs})"
    return f"{ls}{sym}{rs}"


def canonical_expr(text: str, line: int = 0, col: int = 1) -> str:
    return unparse_expr(parse_expr(text, line, col))


def expr_variables(node: Expr) -> set[str]:
    kind = node[0]
    if kind == "var":
        return {node[1]}
    if kind == "num":
        return set()
    vars_: set[str] = set()
    for child in node[1:]:
        vars_ |= expr_variables(child)
    return vars_


def evaluate_expr(text: str, bindings: Mapping[str, complex]) -> complex:
    def ev(node: Expr) -> complex:
        kind = node[0]
        if kind == "num":
            return complex(node[1])
        if kind == "var":
            if node[1] not in bindings:
                raise BindingError(f"parameter {node[1]!r} has no bound value")
            return complex(bindings[node[1]])
        if kind == "neg":
            return -ev(node[1])
        if kind == "sqrt":
            v = ev(node[1])
            if v.imag == 0 and v.real >= 0:
                return complex(v.real**0.5)
            return cmath.sqrt(v)
        left, right = ev(node[1]), ev(node[2])
        if kind == "add":
            return left + right
        if kind == "sub":
            return left - right
        if kind == "mul":
            return left * right
        if kind == "div":
            return left / right
        raise CircuitError(f"unknown expression node {kind!r}")

    return ev(parse_expr(text))


def evaluate_real(text: str, bindings: Mapping[str, complex]) -> float:
    v = evaluate_expr(text, bindings)
    if abs(v.imag) > 1e-12:
        raise BindingError(f"expression {text!r} evaluated to a complex value {v}")
    return v.real


# ---------------------------------------------------------------------------
# statements

@dataclass(frozen=True)
class ModeDecl:
    name: str


@dataclass(frozen=True)
class SourceDecl:
    mode: str
    pol: str
    amp: str = "1"
    photon: str | None = None


@dataclass(frozen=True)
class PbsSplitDecl:
    inp: str
    out_h: str
    out_v: str


@dataclass(frozen=True)
class PbsMergeDecl:
    in_h: str
    in_v: str
    out: str


@dataclass(frozen=True)
class VbsDecl:
    inp: str
    reflect: str
    transmit: str
    t: str


@dataclass(frozen=True)
class BsDecl:
    in1: str
    in2: str
    out1: str
    out2: str


@dataclass(frozen=True)
class QndDecl:
    a: str
    b: str
    select: int


@dataclass(frozen=True)
class FlipDecl:
    mode: str
    when: str


@dataclass(frozen=True)
class DetectDecl:
    group: str
    modes: tuple[str, ...]
    require: str = "exactly_one"
    eta: float | None = None


@dataclass(frozen=True)
class OutputDecl:
    modes: tuple[str, ...]


Statement = Union[
    ModeDecl,
    SourceDecl,
    PbsSplitDecl,
    PbsMergeDecl,
    VbsDecl,
    BsDecl,
    QndDecl,
    FlipDecl,
    DetectDecl,
    OutputDecl,
]


@dataclass(frozen=True)
class CircuitDoc:
    name: str = "unnamed"
    params: tuple[str, ...] = ()
    statements: tuple[Statement, ...] = ()

    def element_outputs(self) -> Iterator[tuple[Statement, str]]:
        for st in self.statements:
            if isinstance(st, PbsSplitDecl):
                yield st, st.out_h
                yield st, st.out_v
            elif isinstance(st, PbsMergeDecl):
                yield st, st.out
            elif isinstance(st, VbsDecl):
                yield st, st.reflect
                yield st, st.transmit
            elif isinstance(st, BsDecl):
                yield st, st.out1
                yield st, st.out2

    def detector_modes(self) -> set[str]:
        out: set[str] = set()
        for st in self.statements:
            if isinstance(st, DetectDecl):
                out.update(st.modes)
        return out

    def output_modes(self) -> tuple[str, ...]:
        for st in self.statements:
            if isinstance(st, OutputDecl):
                return st.modes
        raise CircuitError("missing output statement")


# ---------------------------------------------------------------------------
# parsing

_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z_0-9]*")


def _split_fields(
    tokens: list[tuple[int, str]], line: int
) -> tuple[list[tuple[int, str]], dict[str, tuple[int, str]]]:
    positional: list[tuple[int, str]] = []
    fields: dict[str, tuple[int, str]] = {}
    for col, tok in tokens:
        if "=" in tok:
            key, _, value = tok.partition("=")
            if not key or not value:
                raise CircuitParseError(f"malformed field {tok!r}", line, col)
            if key in fields:
                raise CircuitParseError(f"duplicate field {key!r}", line, col)
            fields[key] = (col + len(key) + 1, value)
        else:
            if fields:
                raise CircuitParseError(
                    f"positional argument {tok!r} after keyword fields", line, col
                )
            positional.append((col, tok))
    return positional, fields


def _need(
    fields: dict[str, tuple[int, str]],
    names: Sequence[str],
    line: int,
    col: int,
    kind: str,
    optional: Sequence[str] = (),
) -> dict[str, tuple[int, str]]:
    for n in names:
        if n not in fields:
            raise CircuitParseError(f"{kind}: missing field {n!r}", line, col)
    for k, (c, _) in fields.items():
        if k not in names and k not in optional:
            raise CircuitParseError(f"{kind}: unknown field {k!r}", line, c)
    return fields


def _ident(value: str, line: int, col: int, what: str) -> str:
    if not _IDENT_RE.fullmatch(value):
        raise CircuitParseError(f"{what} must be an identifier, got {value!r}", line, col)
    return value


def _mode_list(value: str, line: int, col: int) -> tuple[str, ...]:
    names = value.split(",")
    out = []
    for n in names:
        if not _IDENT_RE.fullmatch(n):
            raise CircuitParseError(f"bad mode name {n!r} in list", line, col)
        out.append(n)
    return tuple(out)


def parse(text: str) -> CircuitDoc:
    """Parse a document; raises CircuitParseError with line and column."""
    name = "unnamed"
    saw_circuit = False
    params: list[str] = []
    statements: list[Statement] = []
    declared: set[str] = set()
    produced: set[str] = set()
    source_modes: set[str] = set()
    meaningful = 0

    def claim_output(m: str, lineno: int, col: int) -> None:
        if m in produced:
            raise CircuitParseError(
                f"mode {m!r} produced by more than one element", lineno, col
            )
        if m in source_modes:
            raise CircuitParseError(
                f"mode {m!r} is both a source target and an element output", lineno, col
            )
        produced.add(m)

    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0]
        if not body.strip():
            continue
        meaningful += 1
        tokens = [(m.start() + 1, m.group(0)) for m in re.finditer(r"\S+", body)]
        col0, kw = tokens[0]
        rest = tokens[1:]

        if kw == "circuit":
            if saw_circuit:
                raise CircuitParseError("duplicate circuit statement", lineno, col0)
            if meaningful != 1:
                raise CircuitParseError(
                    "circuit statement must come first", lineno, col0
                )
            if len(rest) != 1:
                raise CircuitParseError("circuit takes exactly one name", lineno, col0)
            name = _ident(rest[0][1], lineno, rest[0][0], "circuit name")
            saw_circuit = True
            continue

        if kw == "param":
            if len(rest) != 1:
                raise CircuitParseError("param takes exactly one name", lineno, col0)
            pcol, pname = rest[0]
            _ident(pname, lineno, pcol, "parameter")
            if pname in params:
                raise CircuitParseError(f"duplicate parameter {pname!r}", lineno, pcol)
            params.append(pname)
            continue

        positional, fields = _split_fields(rest, lineno)

        if kw == "mode":
            if len(positional) != 1 or fields:
                raise CircuitParseError("mode takes exactly one name", lineno, col0)
            mcol, mname = positional[0]
            _ident(mname, lineno, mcol, "mode")
            if mname in declared:
                raise CircuitParseError(f"duplicate mode {mname!r}", lineno, mcol)
            declared.add(mname)
            statements.append(ModeDecl(mname))

        elif kw == "source":
            if len(positional) != 1:
                raise CircuitParseError("source takes one positional mode", lineno, col0)
            _need(fields, ("pol",), lineno, col0, "source", optional=("amp", "photon"))
            mcol, mname = positional[0]
            if mname not in declared:
                raise CircuitParseError(f"undeclared mode {mname!r}", lineno, mcol)
            if mname in produced:
                raise CircuitParseError(
                    f"mode {mname!r} is both a source target and an element output",
                    lineno,
                    mcol,
                )
            source_modes.add(mname)
            pcol, pol = fields["pol"]
            if pol not in ("H", "V"):
                raise CircuitParseError(f"pol must be H or V, got {pol!r}", lineno, pcol)
            if "amp" in fields:
                acol, amp_text = fields["amp"]
                amp = canonical_expr(amp_text, lineno, acol)
                _check_expr_params(amp_text, params, lineno, acol)
            else:
                amp = "1"
            photon = None
            if "photon" in fields:
                tcol, tag = fields["photon"]
                photon = _ident(tag, lineno, tcol, "photon tag")
            statements.append(SourceDecl(mname, pol, amp, photon))

        elif kw == "pbs":
            if positional:
                raise CircuitParseError("pbs takes keyword fields only", lineno, col0)
            if "out" in fields or "inH" in fields or "inV" in fields:
                _need(fields, ("inH", "inV", "out"), lineno, col0, "pbs (merge)")
                vals = {}
                for key in ("inH", "inV", "out"):
                    c, v = fields[key]
                    if v not in declared:
                        raise CircuitParseError(f"undeclared mode {v!r}", lineno, c)
                    vals[key] = v
                claim_output(vals["out"], lineno, fields["out"][0])
                statements.append(PbsMergeDecl(vals["inH"], vals["inV"], vals["out"]))
            else:
                _need(fields, ("in", "outH", "outV"), lineno, col0, "pbs (split)")
                vals = {}
                for key in ("in", "outH", "outV"):
                    c, v = fields[key]
                    if v not in declared:
                        raise CircuitParseError(f"undeclared mode {v!r}", lineno, c)
                    vals[key] = v
                claim_output(vals["outH"], lineno, fields["outH"][0])
                claim_output(vals["outV"], lineno, fields["outV"][0])
                statements.append(PbsSplitDecl(vals["in"], vals["outH"], vals["outV"]))

        elif kw == "vbs":
            if positional:
                raise CircuitParseError("vbs takes keyword fields only", lineno, col0)
            _need(fields, ("in", "reflect", "transmit", "t"), lineno, col0, "vbs")
            vals = {}
            for key in ("in", "reflect", "transmit"):
                c, v = fields[key]
                if v not in declared:
                    raise CircuitParseError(f"undeclared mode {v!r}", lineno, c)
                vals[key] = v
            tcol, t_text = fields["t"]
            t_expr = canonical_expr(t_text, lineno, tcol)
            _check_expr_params(t_text, params, lineno, tcol)
            node = parse_expr(t_text, lineno, tcol)
            if node[0] == "num" and not 0.0 <= node[1] <= 1.0:
                raise CircuitParseError(
                    f"transmittance t={node[1]} outside [0, 1]", lineno, tcol
                )
            claim_output(vals["reflect"], lineno, fields["reflect"][0])
            claim_output(vals["transmit"], lineno, fields["transmit"][0])
            statements.append(
                VbsDecl(vals["in"], vals["reflect"], vals["transmit"], t_expr)
            )

        elif kw == "bs":
            if positional:
                raise CircuitParseError("bs takes keyword fields only", lineno, col0)
            _need(fields, ("in1", "in2", "out1", "out2"), lineno, col0, "bs")
            vals = {}
            for key in ("in1", "in2", "out1", "out2"):
                c, v = fields[key]
                if v not in declared:
                    raise CircuitParseError(f"undeclared mode {v!r}", lineno, c)
                vals[key] = v
            claim_output(vals["out1"], lineno, fields["out1"][0])
            claim_output(vals["out2"], lineno, fields["out2"][0])
            statements.append(BsDecl(vals["in1"], vals["in2"], vals["out1"], vals["out2"]))

        elif kw == "qnd":
            if positional:
                raise CircuitParseError("qnd takes keyword fields only", lineno, col0)
            _need(fields, ("a", "b", "select"), lineno, col0, "qnd")
            vals = {}
            for key in ("a", "b"):
                c, v = fields[key]
                if v not in declared:
                    raise CircuitParseError(f"undeclared mode {v!r}", lineno, c)
                vals[key] = v
            scol, sel = fields["select"]
            if sel not in ("0", "1"):
                raise CircuitParseError(
                    f"select must be 0 or 1, got {sel!r}", lineno, scol
                )
            statements.append(QndDecl(vals["a"], vals["b"], int(sel)))

        elif kw == "flip":
            if positional:
                raise CircuitParseError("flip takes keyword fields only", lineno, col0)
            _need(fields, ("mode", "when"), lineno, col0, "flip")
            vals = {}
            for key in ("mode", "when"):
                c, v = fields[key]
                if v not in declared:
                    raise CircuitParseError(f"undeclared mode {v!r}", lineno, c)
                vals[key] = v
            statements.append(FlipDecl(vals["mode"], vals["when"]))

        elif kw == "detect":
            if positional:
                raise CircuitParseError("detect takes keyword fields only", lineno, col0)
            _need(fields, ("group", "modes"), lineno, col0, "detect", optional=("require", "eta"))
            gcol, gname = fields["group"]
            _ident(gname, lineno, gcol, "group name")
            mcol, modes_text = fields["modes"]
            modes = _mode_list(modes_text, lineno, mcol)
            for m in modes:
                if m not in declared:
                    raise CircuitParseError(f"undeclared mode {m!r}", lineno, mcol)
            require = "exactly_one"
            if "require" in fields:
                rcol, require = fields["require"]
                if require != "exactly_one":
                    raise CircuitParseError(
                        f"unsupported requirement {require!r}", lineno, rcol
                    )
            eta = None
            if "eta" in fields:
                ecol, eta_text = fields["eta"]
                try:
                    eta = float(eta_text)
                except ValueError:
                    raise CircuitParseError(f"bad eta {eta_text!r}", lineno, ecol)
                if not 0.0 <= eta <= 1.0:
                    raise CircuitParseError(
                        f"eta={eta} outside [0, 1]", lineno, ecol
                    )
            statements.append(DetectDecl(gname, modes, require, eta))

        elif kw == "output":
            if len(positional) != 1 or fields:
                raise CircuitParseError(
                    "output takes one comma-separated mode list", lineno, col0
                )
            mcol, modes_text = positional[0]
            modes = _mode_list(modes_text, lineno, mcol)
            for m in modes:
                if m not in declared:
                    raise CircuitParseError(f"undeclared mode {m!r}", lineno, mcol)
            statements.append(OutputDecl(modes))

        else:
            raise CircuitParseError(f"unknown statement kind {kw!r}", lineno, col0)

    doc = CircuitDoc(name, tuple(params), tuple(statements))
    validate(doc)
    return doc


def _check_expr_params(
    text: str, params: Sequence[str], line: int, col: int
) -> None:
    for v in sorted(expr_variables(parse_expr(text, line, col))):
        if v not in params:
            raise CircuitParseError(f"undeclared parameter {v!r} in expression", line, col)


def validate(doc: CircuitDoc) -> None:
    """Document-level consistency; raised errors carry no position."""
    producers: dict[str, Statement] = {}
    for st, out_mode in doc.element_outputs():
        if out_mode in producers:
            raise CircuitError(f"mode {out_mode!r} produced by more than one element")
        producers[out_mode] = st
    for st in doc.statements:
        if isinstance(st, SourceDecl) and st.mode in producers:
            raise CircuitError(
                f"mode {st.mode!r} is both a source target and an element output"
            )
    outputs = [st for st in doc.statements if isinstance(st, OutputDecl)]
    if not outputs:
        raise CircuitError("missing output statement")
    if len(outputs) > 1:
        raise CircuitError("more than one output statement")
    detectors = doc.detector_modes()
    overlap = detectors & set(outputs[0].modes)
    if overlap:
        raise CircuitError(f"output modes {sorted(overlap)} are detector modes")
    groups = [st for st in doc.statements if isinstance(st, DetectDecl)]
    names = [g.group for g in groups]
    if len(set(names)) != len(names):
        raise CircuitError("detector group names must be unique")
    seen_det: set[str] = set()
    for g in groups:
        dup = seen_det & set(g.modes)
        if dup:
            raise CircuitError(f"detector modes {sorted(dup)} appear in two groups")
        seen_det |= set(g.modes)
    for st in doc.statements:
        if isinstance(st, FlipDecl) and st.when not in detectors:
            raise CircuitError(
                f"flip condition {st.when!r} is not a detector mode"
            )


# ---------------------------------------------------------------------------
# serialization

def _serialize_statement(st: Statement) -> str:
    if isinstance(st, ModeDecl):
        return f"mode {st.name}"
    if isinstance(st, SourceDecl):
        parts = [f"source {st.mode}", f"pol={st.pol}", f"amp={st.amp}"]
        if st.photon is not None:
            parts.append(f"photon={st.photon}")
        return " ".join(parts)
    if isinstance(st, PbsSplitDecl):
        return f"pbs in={st.inp} outH={st.out_h} outV={st.out_v}"
    if isinstance(st, PbsMergeDecl):
        return f"pbs inH={st.in_h} inV={st.in_v} out={st.out}"
    if isinstance(st, VbsDecl):
        return f"vbs in={st.inp} reflect={st.reflect} transmit={st.transmit} t={st.t}"
    if isinstance(st, BsDecl):
        return f"bs in1={st.in1} in2={st.in2} out1={st.out1} out2={st.out2}"
    if isinstance(st, QndDecl):
        return f"qnd a={st.a} b={st.b} select={st.select}"
    if isinstance(st, FlipDecl):
        return f"flip mode={st.mode} when={st.when}"
    if isinstance(st, DetectDecl):
        parts = [f"detect group={st.group}", "modes=" + ",".join(st.modes)]
        if st.require != "exactly_one":
            parts.append(f"require={st.require}")
        if st.eta is not None:
            parts.append(f"eta={st.eta!r}")
        return " ".join(parts)
    if isinstance(st, OutputDecl):
        return "output " + ",".join(st.modes)
    raise CircuitError(f"cannot serialize {st!r}")


def serialize(doc: CircuitDoc) -> str:
    """Canonical text form; parse(serialize(doc)) == doc."""
    lines = [f"circuit {doc.name}"]
    lines.extend(f"param {p}" for p in doc.params)
    lines.extend(_serialize_statement(st) for st in doc.statements)
    return "\n".join(lines) + "\n"
