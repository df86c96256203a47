"""DSL front end and batch driver.

A document is a sequence of algebra blocks and directives::

    # the two-way infinite path
    algebra Z { nodes: o; port o; ray at o }
    algebra N { nodes: z; edges: z->z; ray at z }
    analyze Z
    product Z N

Block clauses, separated by ``;``: ``nodes: a b c``, ``edges: a->b b->c``,
``ray at a [xK]`` (K parallel backward rays), ``fan at a``, ``port a b``.
A port may not carry an out-edge.  Comments run from ``#`` to end of line.

Directives: ``analyze NAME``, ``variety NAME``, ``witness NAME X Y``,
``product NAME NAME``, ``unfold NAME DEPTH``, ``oracle NAME DEPTH NMAX``.
The same commands are available on the command line; ``muna FILE run``
executes the directives embedded in the file.

Certificates print in a line-oriented text form::

    certificate point-point x=o y=o.fwd[3]
    codomain size=4 succ=1,2,3,0
    map o=0
    rule fwd(o): (0 + 1*depth) mod 4
    rule ray(o,0): (0 + -1*depth) mod 4

``map`` lists every skeleton node; a ``rule`` line gives the depth-affine
value of one annotation family, either ``(base + slope*depth) mod m`` or
``max(0, base + slope*depth)`` for line-shaped codomains.

Exit status is 0 exactly when everything requested parsed, analysed and
verified cleanly; oracle mismatches, syntax errors and failed certificate
verifications exit nonzero.
"""

from __future__ import annotations

import argparse
import os
import re
import sys
from dataclasses import dataclass
from typing import Sequence

from .core import FiniteAlgebra
from .errors import (
    Mismatch,
    MunaError,
    NotRF,
    ParseError,
    PortHasEdge,
    UndefinedNode,
)
from .presentation import (
    DEFAULT_UNFOLD_CAP,
    Element,
    FanNode,
    ForwardNode,
    Presentation,
    RayNode,
    SkeletonNode,
    unfold,
    validate,
)
from .witness import (
    SeparationCertificate,
    separate_points,
    verify,
)
from . import analysis, oracle

DEFAULT_DEPTH = 8
DEFAULT_ORACLE_DEPTH = 12
DEFAULT_NMAX = 6


# ---------------------------------------------------------------------------
# Documents


@dataclass(frozen=True)
class NamedAlgebra:
    name: str
    labels: tuple[str, ...]
    pres: Presentation

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise UndefinedNode(f"no node {label!r} in algebra {self.name}") from None


@dataclass(frozen=True)
class Directive:
    kind: str
    args: tuple[str, ...]


@dataclass(frozen=True)
class Document:
    algebras: dict[str, NamedAlgebra]
    directives: tuple[Directive, ...]

    def algebra(self, name: str) -> NamedAlgebra:
        try:
            return self.algebras[name]
        except KeyError:
            raise UndefinedNode(f"no algebra named {name!r}") from None


# ---------------------------------------------------------------------------
# Tokenizer / parser

_TOKEN = re.compile(
    r"(?P<ws>[ \t\r\n]+)|(?P<comment>#[^\n]*)|(?P<arrow>->)"
    r"|(?P<punct>[{};:])|(?P<word>[A-Za-z0-9_'.\[\]]+)"
)
_COUNT = re.compile(r"x(\d+)$")

_DIRECTIVES = {
    "analyze": 1,
    "variety": 1,
    "witness": 3,
    "product": 2,
    "unfold": 2,
    "oracle": 3,
}


@dataclass
class _Token:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Token]:
    out: list[_Token] = []
    line, col, pos = 1, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        lexeme = m.group()
        if kind not in ("ws", "comment"):
            out.append(_Token(kind, lexeme, line, col))
        newlines = lexeme.count("\n")
        if newlines:
            line += newlines
            col = len(lexeme) - lexeme.rfind("\n")
        else:
            col += len(lexeme)
        pos = m.end()
    return out


class _Parser:
    def __init__(self, tokens: list[_Token]):
        self.tokens = tokens
        self.pos = 0

    def _here(self) -> tuple[int, int]:
        if self.pos < len(self.tokens):
            t = self.tokens[self.pos]
            return t.line, t.col
        if self.tokens:
            t = self.tokens[-1]
            return t.line, t.col + len(t.text)
        return 1, 1

    def peek(self) -> _Token | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def take(self, kind: str | None = None, text: str | None = None) -> _Token:
        tok = self.peek()
        if tok is None:
            raise ParseError("unexpected end of input", *self._here())
        if kind is not None and tok.kind != kind:
            raise ParseError(f"expected {kind}, found {tok.text!r}", tok.line, tok.col)
        if text is not None and tok.text != text:
            raise ParseError(f"expected {text!r}, found {tok.text!r}", tok.line, tok.col)
        self.pos += 1
        return tok


def parse(text: str) -> Document:
    """Parse a document; names must be unique and every reference defined."""
    parser = _Parser(_tokenize(text))
    algebras: dict[str, NamedAlgebra] = {}
    directives: list[Directive] = []
    while parser.peek() is not None:
        tok = parser.take("word")
        if tok.text == "algebra":
            named = _parse_algebra(parser)
            if named.name in algebras:
                raise ParseError(f"duplicate algebra {named.name!r}", tok.line, tok.col)
            algebras[named.name] = named
        elif tok.text in _DIRECTIVES:
            args = tuple(
                parser.take("word").text for _ in range(_DIRECTIVES[tok.text])
            )
            directives.append(Directive(tok.text, args))
        else:
            raise ParseError(
                f"expected 'algebra' or a directive, found {tok.text!r}",
                tok.line,
                tok.col,
            )
    doc = Document(algebras, tuple(directives))
    _validate_references(doc)
    return doc


def _parse_algebra(parser: _Parser) -> NamedAlgebra:
    name_tok = parser.take("word")
    parser.take("punct", "{")
    labels: list[str] = []
    edges: list[tuple[_Token, _Token]] = []
    rays: list[tuple[_Token, int]] = []
    fans: list[_Token] = []
    ports: list[_Token] = []
    while not (parser.peek() and parser.peek().text == "}"):
        tok = parser.take("word")
        if tok.text == "nodes":
            parser.take("punct", ":")
            while parser.peek() and parser.peek().kind == "word":
                labels.append(parser.take("word").text)
        elif tok.text == "edges":
            parser.take("punct", ":")
            while parser.peek() and parser.peek().kind == "word":
                src = parser.take("word")
                parser.take("arrow")
                dst = parser.take("word")
                edges.append((src, dst))
        elif tok.text == "ray":
            parser.take("word", "at")
            node = parser.take("word")
            count = 1
            nxt = parser.peek()
            if nxt is not None and nxt.kind == "word" and _COUNT.match(nxt.text):
                count = int(_COUNT.match(parser.take("word").text).group(1))
            rays.append((node, count))
        elif tok.text == "fan":
            parser.take("word", "at")
            fans.append(parser.take("word"))
        elif tok.text == "port":
            while parser.peek() and parser.peek().kind == "word":
                ports.append(parser.take("word"))
        else:
            raise ParseError(f"unknown clause {tok.text!r}", tok.line, tok.col)
        if parser.peek() and parser.peek().text == ";":
            parser.take("punct", ";")
    parser.take("punct", "}")

    seen: set[str] = set()
    for label in labels:
        if label in seen:
            raise ParseError(f"duplicate node {label!r}", name_tok.line, name_tok.col)
        seen.add(label)
    index = {label: i for i, label in enumerate(labels)}

    def resolve(tok: _Token) -> int:
        if tok.text not in index:
            raise UndefinedNode(
                f"{tok.line}:{tok.col}: node {tok.text!r} is not declared"
            )
        return index[tok.text]

    succ: dict[int, int] = {}
    for src, dst in edges:
        s, d = resolve(src), resolve(dst)
        if s in succ:
            raise ParseError(
                f"node {src.text!r} has two out-edges", src.line, src.col
            )
        succ[s] = d
    port_ids = []
    for tok in ports:
        p = resolve(tok)
        if p in succ:
            raise PortHasEdge(
                f"{tok.line}:{tok.col}: port {tok.text!r} has an out-edge"
            )
        port_ids.append(p)
    for i, label in enumerate(labels):
        if i not in succ and i not in port_ids:
            raise ParseError(
                f"node {label!r} needs an out-edge or a port mark",
                name_tok.line,
                name_tok.col,
            )
    ray_counts = [0] * len(labels)
    for tok, count in rays:
        ray_counts[resolve(tok)] += count
    fan_ids = frozenset(resolve(tok) for tok in fans)
    pres = Presentation(
        tuple(succ.get(i) for i in range(len(labels))),
        tuple(ray_counts),
        fan_ids,
    )
    return NamedAlgebra(name_tok.text, tuple(labels), validate(pres))


def _validate_references(doc: Document) -> None:
    for d in doc.directives:
        names = d.args[:2] if d.kind == "product" else d.args[:1]
        for name in names:
            doc.algebra(name)
        if d.kind == "witness":
            named = doc.algebra(d.args[0])
            parse_element(named, d.args[1])
            parse_element(named, d.args[2])


def print_document(doc: Document) -> str:
    """Canonical text form; reparsing yields an identical document."""
    chunks = []
    for named in doc.algebras.values():
        clauses = ["nodes: " + " ".join(named.labels)]
        edges = [
            f"{named.labels[i]}->{named.labels[j]}"
            for i, j in enumerate(named.pres.succ)
            if j is not None
        ]
        if edges:
            clauses.append("edges: " + " ".join(edges))
        for i, count in enumerate(named.pres.rays):
            if count == 1:
                clauses.append(f"ray at {named.labels[i]}")
            elif count > 1:
                clauses.append(f"ray at {named.labels[i]} x{count}")
        for i in sorted(named.pres.fans):
            clauses.append(f"fan at {named.labels[i]}")
        if named.pres.ports:
            clauses.append(
                "port " + " ".join(named.labels[i] for i in named.pres.ports)
            )
        chunks.append(f"algebra {named.name} {{ " + "; ".join(clauses) + " }")
    for d in doc.directives:
        chunks.append(d.kind + " " + " ".join(d.args))
    return "\n".join(chunks) + "\n"


# ---------------------------------------------------------------------------
# Rendering helpers


def element_str(el: Element, labels: Sequence[str]) -> str:
    if isinstance(el, SkeletonNode):
        return labels[el.node]
    if isinstance(el, RayNode):
        return f"{labels[el.node]}.ray{el.family}[{el.depth}]"
    if isinstance(el, FanNode):
        return f"{labels[el.node]}.fan{el.length}[{el.depth}]"
    return f"{labels[el.port]}.fwd[{el.depth}]"


def parse_element(named: NamedAlgebra, text: str) -> Element:
    """Inverse of element_str for CLI arguments; a bare label names a
    skeleton node."""
    m = re.fullmatch(r"(.+?)\.(ray(\d+)|fan(\d+)|fwd)\[(\d+)\]", text)
    if m is None:
        return SkeletonNode(named.index(text))
    node = named.index(m.group(1))
    depth = int(m.group(5))
    if m.group(3) is not None:
        return RayNode(node, int(m.group(3)), depth)
    if m.group(4) is not None:
        return FanNode(node, int(m.group(4)), depth)
    return ForwardNode(node, depth)


def variety_str(v: analysis.Variety) -> str:
    if isinstance(v, analysis.V0):
        return "V0"
    if isinstance(v, analysis.Vk):
        return f"V{v.k}"
    if isinstance(v, analysis.Vkd):
        return f"V{{{v.k},{v.d}}}"
    return "ALL"


def class_str(c: analysis.ComponentClass) -> str:
    if isinstance(c, analysis.HasCycle):
        return f"HasCycle({c.length})"
    return type(c).__name__


def _verdict_line(verdict: analysis.Verdict, labels: Sequence[str]) -> str:
    if verdict.holds:
        return f"{verdict.prop}: holds"
    w = verdict.witness
    if isinstance(w, tuple):
        text = ",".join(element_str(e, labels) for e in w)
    else:
        text = element_str(w, labels)
    return f"{verdict.prop}: fails [witness={text}]"


def format_certificate(cert: SeparationCertificate, labels: Sequence[str]) -> str:
    lines = [f"certificate {cert.kind} x={element_str(cert.x, labels)}"]
    if cert.y is not None:
        lines[0] += f" y={element_str(cert.y, labels)}"
    cod = cert.hom.codomain
    lines.append(
        f"codomain size={cod.size} succ=" + ",".join(map(str, cod.succ))
    )
    lines.append(
        "map "
        + " ".join(
            f"{labels[i]}={v}" for i, v in enumerate(cert.hom.skeleton_map)
        )
    )
    for key in sorted(cert.hom.family_rules, key=str):
        rule = cert.hom.family_rules[key]
        if key[0] == "ray":
            family = f"ray({labels[key[1]]},{key[2]})"
        elif key[0] == "fwd":
            family = f"fwd({labels[key[1]]})"
        elif len(key) == 2:
            family = f"fan({labels[key[1]]})"
        else:
            family = f"fan({labels[key[1]]},len={key[2]})"
        body = f"{rule.base} + {rule.slope}*depth"
        if rule.modulus is not None:
            lines.append(f"rule {family}: ({body}) mod {rule.modulus}")
        else:
            lines.append(f"rule {family}: max(0, {body})")
    return "\n".join(lines)


def to_dot(obj: Presentation | FiniteAlgebra, labels: Sequence[str] | None = None) -> str:
    """DOT text: one out-edge per node; annotations appear as dashed
    pseudo-nodes marked with an ellipsis."""
    if isinstance(obj, FiniteAlgebra):
        names = list(labels) if labels else [str(i) for i in range(obj.size)]
        body = [f'  "{names[i]}";' for i in sorted(range(obj.size), key=lambda i: names[i])]
        body += sorted(
            f'  "{names[i]}" -> "{names[j]}";' for i, j in enumerate(obj.succ)
        )
        return "digraph {\n" + "\n".join(body) + "\n}\n"
    pres = obj
    names = list(labels) if labels else [str(i) for i in range(pres.size)]
    body = [f'  "{names[i]}";' for i in sorted(range(pres.size), key=lambda i: names[i])]
    extra: list[str] = []
    for v in sorted(range(pres.size), key=lambda i: names[i]):
        for fam in range(pres.rays[v]):
            pseudo = f"ray{fam}@{names[v]}"
            extra.append(f'  "{pseudo}" [label="... ray", style=dashed, shape=none];')
            extra.append(f'  "{pseudo}" -> "{names[v]}" [style=dashed];')
        if v in pres.fans:
            pseudo = f"fan@{names[v]}"
            extra.append(f'  "{pseudo}" [label="... fan", style=dashed, shape=none];')
            extra.append(f'  "{pseudo}" -> "{names[v]}" [style=dashed];')
        if pres.succ[v] is None:
            pseudo = f"fwd@{names[v]}"
            extra.append(f'  "{pseudo}" [label="ray ...", style=dashed, shape=none];')
            extra.append(f'  "{names[v]}" -> "{pseudo}" [style=dashed];')
    edges = sorted(
        f'  "{names[i]}" -> "{names[j]}";'
        for i, j in enumerate(pres.succ)
        if j is not None
    )
    return "digraph {\n" + "\n".join(body + edges + extra) + "\n}\n"


# ---------------------------------------------------------------------------
# Commands


def _cmd_analyze(named: NamedAlgebra, dot: str | None = None) -> tuple[int, str]:
    pres = named.pres
    lines = [
        _verdict_line(analysis.is_rf(pres), named.labels),
        _verdict_line(analysis.is_ss(pres), named.labels),
        _verdict_line(analysis.is_cs(pres), named.labels),
    ]
    comps = pres.components
    if len(comps) == 1:
        lines.append(f"class: {class_str(analysis.classify(pres, comps[0]))}")
    else:
        for i, comp in enumerate(comps):
            lines.append(f"class[{i}]: {class_str(analysis.classify(pres, comp))}")
    lines.append(f"variety: {variety_str(analysis.classify_variety(pres))}")
    if dot:
        with open(dot, "w", encoding="utf-8") as fh:
            fh.write(to_dot(pres, named.labels))
        lines.append(f"dot: {dot}")
    return 0, "\n".join(lines)


def _cmd_variety(named: NamedAlgebra) -> tuple[int, str]:
    return 0, f"variety: {variety_str(analysis.classify_variety(named.pres))}"


def _cmd_witness(
    named: NamedAlgebra,
    x: str,
    y: str,
    depth: int = DEFAULT_DEPTH,
    cap: int = DEFAULT_UNFOLD_CAP,
) -> tuple[int, str]:
    try:
        cert = separate_points(named.pres, parse_element(named, x), parse_element(named, y))
    except NotRF as exc:
        return 0, f"REFUSED: not residually finite ({exc})"
    verify(cert, named.pres, depth, cap)
    text = format_certificate(cert, named.labels)
    return 0, text + f"\nverified depth={depth}"


def _cmd_product(a: NamedAlgebra, b: NamedAlgebra) -> tuple[int, str]:
    lines = [
        f"RF: {'holds' if analysis.rf_product(a.pres, b.pres) else 'fails'}",
        f"SS: {'holds' if analysis.ss_product(a.pres, b.pres) else 'fails'}",
        f"CS: {'holds' if analysis.cs_product(a.pres, b.pres) else 'fails'}",
    ]
    return 0, "\n".join(lines)


def _cmd_unfold(
    named: NamedAlgebra,
    depth: int,
    dot: str | None = None,
    cap: int = DEFAULT_UNFOLD_CAP,
) -> tuple[int, str]:
    unfolded = unfold(named.pres, depth, cap)
    kinds = {"skeleton": 0, "ray": 0, "fan": 0, "fwd": 0}
    for el in unfolded.origin:
        if isinstance(el, SkeletonNode):
            kinds["skeleton"] += 1
        elif isinstance(el, RayNode):
            kinds["ray"] += 1
        elif isinstance(el, FanNode):
            kinds["fan"] += 1
        else:
            kinds["fwd"] += 1
    summary = (
        f"unfolded {named.name} depth={depth}: {unfolded.truncated.size} nodes "
        f"(skeleton={kinds['skeleton']} ray={kinds['ray']} "
        f"fan={kinds['fan']} fwd={kinds['fwd']})"
    )
    if dot:
        names = [element_str(el, named.labels) for el in unfolded.origin]
        with open(dot, "w", encoding="utf-8") as fh:
            fh.write(to_dot(unfolded.truncated, names))
        summary += f"\ndot: {dot}"
    return 0, summary


def _cmd_oracle(
    named: NamedAlgebra, depth: int, n_max: int, cap: int = DEFAULT_UNFOLD_CAP
) -> tuple[int, str]:
    report = oracle.cross_validate(named.pres, depth, n_max, strict=False, cap=cap)
    status = "clean" if report.ok else "MISMATCH"
    return (0 if report.ok else 1), report.text() + f"\noracle {named.name}: {status}"


def run(doc: Document, command: Sequence[str]) -> tuple[int, str]:
    """Execute one command against a parsed document."""
    kind, *args = command
    if kind == "analyze":
        return _cmd_analyze(doc.algebra(args[0]))
    if kind == "variety":
        return _cmd_variety(doc.algebra(args[0]))
    if kind == "witness":
        depth = int(args[3]) if len(args) > 3 else DEFAULT_DEPTH
        return _cmd_witness(doc.algebra(args[0]), args[1], args[2], depth)
    if kind == "product":
        return _cmd_product(doc.algebra(args[0]), doc.algebra(args[1]))
    if kind == "unfold":
        return _cmd_unfold(doc.algebra(args[0]), int(args[1]))
    if kind == "oracle":
        return _cmd_oracle(doc.algebra(args[0]), int(args[1]), int(args[2]))
    if kind == "run":
        code, chunks = 0, []
        for d in doc.directives:
            sub_code, text = run(doc, (d.kind,) + d.args)
            chunks.append(f"== {d.kind} {' '.join(d.args)} ==\n{text}")
            code = max(code, sub_code)
        return code, "\n".join(chunks)
    raise UndefinedNode(f"unknown command {kind!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="muna",
        description="Separability analysis of finitely presented monounary algebras.",
    )
    parser.add_argument("file", help="DSL document, or - for stdin")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="decide RF/SS/CS, classes and variety")
    p.add_argument("name")
    p.add_argument("--dot", help="write the presentation as DOT")

    p = sub.add_parser("variety", help="print only the variety classification")
    p.add_argument("name")

    p = sub.add_parser("witness", help="construct and verify a separating map")
    p.add_argument("name")
    p.add_argument("x")
    p.add_argument("y")
    p.add_argument("--depth", type=int, default=DEFAULT_DEPTH)

    p = sub.add_parser("product", help="decide the three properties of a product")
    p.add_argument("a")
    p.add_argument("b")

    p = sub.add_parser("unfold", help="materialise a finite truncation")
    p.add_argument("name")
    p.add_argument("--depth", type=int, required=True)
    p.add_argument("--dot", help="write the truncation as DOT")
    p.add_argument("--cap", type=int, default=None, help="node-count cap")

    p = sub.add_parser("oracle", help="cross-validate symbolic rules")
    p.add_argument("name")
    p.add_argument("--depth", type=int, default=DEFAULT_ORACLE_DEPTH)
    p.add_argument("--nmax", type=int, default=None)
    p.add_argument("--cap", type=int, default=None, help="node-count cap")

    sub.add_parser("run", help="execute the directives embedded in the file")
    return parser


def _cap_from(ns: argparse.Namespace) -> int:
    """--cap wins, then MUNA_CAP, then the built-in unfolding cap."""
    explicit = getattr(ns, "cap", None)
    if explicit is not None:
        return explicit
    return int(os.environ.get("MUNA_CAP", DEFAULT_UNFOLD_CAP))


def main(argv: Sequence[str] | None = None) -> int:
    ns = build_parser().parse_args(argv)
    try:
        text = sys.stdin.read() if ns.file == "-" else open(ns.file, encoding="utf-8").read()
        doc = parse(text)
        if ns.command == "analyze":
            code, out = _cmd_analyze(doc.algebra(ns.name), ns.dot)
        elif ns.command == "variety":
            code, out = _cmd_variety(doc.algebra(ns.name))
        elif ns.command == "witness":
            code, out = _cmd_witness(doc.algebra(ns.name), ns.x, ns.y, ns.depth)
        elif ns.command == "product":
            code, out = _cmd_product(doc.algebra(ns.a), doc.algebra(ns.b))
        elif ns.command == "unfold":
            code, out = _cmd_unfold(doc.algebra(ns.name), ns.depth, ns.dot, _cap_from(ns))
        elif ns.command == "oracle":
            n_max = ns.nmax if ns.nmax is not None else min(DEFAULT_NMAX, ns.depth // 2)
            code, out = _cmd_oracle(doc.algebra(ns.name), ns.depth, n_max, _cap_from(ns))
        else:
            code, out = run(doc, ("run",))
    except Mismatch as exc:
        print(f"mismatch: {exc}", file=sys.stderr)
        return 1
    except MunaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(out)
    return code


if __name__ == "__main__":
    sys.exit(main())
