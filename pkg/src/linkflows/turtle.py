"""Minimal Turtle reader/writer used for the RDF exchange format.

Covers the subset this package emits plus the common forms needed to read
hand-written documents: prefix declarations (@prefix / PREFIX), `a`,
predicate-object lists with `;` and `,`, IRIs, prefixed names, and string /
integer / dateTime literals (short and long string quoting, language tags).
Blank nodes and collections are out of scope and rejected with a position.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional, Union

from .errors import ParseError

XSD = "http://www.w3.org/2001/XMLSchema#"
RDF_TYPE = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type"


@dataclass(frozen=True)
class Literal:
    value: str
    datatype: Optional[str] = None
    lang: Optional[str] = None


Term = Union[str, Literal]  # str means IRI
Triple = tuple[str, str, Term]


# -- writing -----------------------------------------------------------------

_STRING_ESCAPES = {"\\": "\\\\", '"': '\\"', "\n": "\\n", "\r": "\\r", "\t": "\\t"}


def _escape_string(value: str) -> str:
    return "".join(_STRING_ESCAPES.get(ch, ch) for ch in value)


def _shrink(iri: str, prefixes: dict[str, str]) -> str:
    for prefix, ns in prefixes.items():
        if iri.startswith(ns):
            local = iri[len(ns):]
            if re.fullmatch(r"[A-Za-z0-9_.-]*", local) and not local.startswith((".", "-")) and not local.endswith("."):
                return f"{prefix}:{local}"
    return f"<{iri}>"


def _render_term(term: Term, prefixes: dict[str, str]) -> str:
    if isinstance(term, Literal):
        body = f'"{_escape_string(term.value)}"'
        if term.lang:
            return f"{body}@{term.lang}"
        if term.datatype == XSD + "integer":
            return term.value
        if term.datatype:
            return f"{body}^^{_shrink(term.datatype, prefixes)}"
        return body
    return _shrink(term, prefixes)


def _object_sort_key(term: Term):
    if isinstance(term, Literal):
        return (1, term.value, term.datatype or "", term.lang or "")
    return (0, term, "", "")


def serialize(triples: list[Triple], prefixes: dict[str, str]) -> str:
    """Deterministic Turtle: sorted prefixes, subjects, predicates, objects.

    rdf:type is rendered as `a` and always listed first within a subject
    block, matching the usual hand-written style.
    """
    lines = [f"@prefix {p}: <{ns}> ." for p, ns in sorted(prefixes.items())]
    by_subject: dict[str, dict[str, list[Term]]] = {}
    for s, p, o in triples:
        by_subject.setdefault(s, {}).setdefault(p, []).append(o)

    for subject in sorted(by_subject):
        lines.append("")
        preds = by_subject[subject]
        ordered = sorted(preds, key=lambda p: (p != RDF_TYPE, p))
        chunks = []
        for pred in ordered:
            objs = sorted(set(preds[pred]), key=_object_sort_key)
            rendered = ", ".join(_render_term(o, prefixes) for o in objs)
            verb = "a" if pred == RDF_TYPE else _shrink(pred, prefixes)
            chunks.append(f"{verb} {rendered}")
        subject_str = _shrink(subject, prefixes)
        body = (" ;\n" + " " * 4).join(chunks)
        lines.append(f"{subject_str} {body} .")
    return "\n".join(lines) + "\n"


# -- reading -----------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
      (?P<ws>[ \t\r\n]+)
    | (?P<comment>\#[^\n]*)
    | (?P<prefix_kw>@prefix|PREFIX)
    | (?P<base_kw>@base|BASE)
    | (?P<iriref><[^<>"{}|^`\\\x00-\x20]*>)
    | (?P<long_string>\"\"\"(?:[^"\\]|\\.|"(?!""))*\"\"\")
    | (?P<string>"(?:[^"\\\n]|\\.)*")
    | (?P<dtype>\^\^)
    | (?P<langtag>@[a-zA-Z]+(?:-[a-zA-Z0-9]+)*)
    | (?P<number>[+-]?(?:\d+\.\d+|\.\d+|\d+)(?:[eE][+-]?\d+)?)
    | (?P<pname>[A-Za-z_][A-Za-z0-9_.-]*?:[A-Za-z0-9_](?:[A-Za-z0-9_.-]*[A-Za-z0-9_-])?|[A-Za-z_][A-Za-z0-9_.-]*?:|:[A-Za-z0-9_](?:[A-Za-z0-9_.-]*[A-Za-z0-9_-])?)
    | (?P<a_kw>a(?![A-Za-z0-9_:-]))
    | (?P<punct>[.;,\[\]()])
    """,
    re.VERBOSE,
)

_UNESCAPES = {"t": "\t", "b": "\b", "n": "\n", "r": "\r", "f": "\f", '"': '"', "'": "'", "\\": "\\"}


@dataclass
class _Token:
    kind: str
    text: str
    line: int
    column: int


class _Scanner:
    def __init__(self, text: str):
        self.text = text
        self.tokens: list[_Token] = []
        self.pos = 0
        line, col = 1, 1
        i = 0
        while i < len(text):
            match = _TOKEN_RE.match(text, i)
            if match is None:
                raise ParseError(f"unexpected character {text[i]!r}", line, col)
            kind = match.lastgroup or ""
            chunk = match.group(0)
            if kind not in ("ws", "comment"):
                self.tokens.append(_Token(kind, chunk, line, col))
            newlines = chunk.count("\n")
            if newlines:
                line += newlines
                col = len(chunk) - chunk.rfind("\n")
            else:
                col += len(chunk)
            i = match.end()
        self.eof_line, self.eof_col = line, col

    def peek(self) -> Optional[_Token]:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def next(self, expect: Optional[str] = None) -> _Token:
        tok = self.peek()
        if tok is None:
            raise ParseError("unexpected end of document", self.eof_line, self.eof_col)
        if expect is not None and tok.kind != expect:
            raise ParseError(f"expected {expect}, found {tok.text!r}", tok.line, tok.column)
        self.pos += 1
        return tok


def _unescape(body: str, line: int, col: int) -> str:
    out = []
    i = 0
    while i < len(body):
        ch = body[i]
        if ch != "\\":
            out.append(ch)
            i += 1
            continue
        if i + 1 >= len(body):
            raise ParseError("dangling backslash in string", line, col)
        esc = body[i + 1]
        if esc in _UNESCAPES:
            out.append(_UNESCAPES[esc])
            i += 2
        elif esc == "u":
            out.append(chr(int(body[i + 2 : i + 6], 16)))
            i += 6
        elif esc == "U":
            out.append(chr(int(body[i + 2 : i + 10], 16)))
            i += 10
        else:
            raise ParseError(f"unknown string escape \\{esc}", line, col)
    return "".join(out)


class Parser:
    def __init__(self, text: str):
        self._scan = _Scanner(text)
        self.prefixes: dict[str, str] = {}
        self.triples: list[Triple] = []

    def parse(self) -> tuple[dict[str, str], list[Triple]]:
        while self._scan.peek() is not None:
            tok = self._scan.peek()
            if tok.kind == "prefix_kw":
                self._prefix_decl()
            elif tok.kind == "base_kw":
                raise ParseError("@base is not supported by this reader", tok.line, tok.column)
            else:
                self._triples_block()
        return self.prefixes, self.triples

    def _prefix_decl(self) -> None:
        kw = self._scan.next("prefix_kw")
        name = self._scan.next("pname")
        if not name.text.endswith(":"):
            raise ParseError("prefix declaration needs a name ending in ':'", name.line, name.column)
        iri = self._scan.next("iriref")
        self.prefixes[name.text[:-1]] = iri.text[1:-1]
        if kw.text == "@prefix":
            self._scan.next("punct")  # trailing '.'

    def _triples_block(self) -> None:
        subject = self._resource()
        while True:
            predicate = self._verb()
            while True:
                obj = self._object()
                self.triples.append((subject, predicate, obj))
                tok = self._scan.peek()
                if tok and tok.kind == "punct" and tok.text == ",":
                    self._scan.next()
                    continue
                break
            tok = self._scan.next("punct")
            if tok.text == ";":
                # allow trailing ';' before '.'
                nxt = self._scan.peek()
                if nxt and nxt.kind == "punct" and nxt.text == ".":
                    self._scan.next()
                    return
                continue
            if tok.text == ".":
                return
            raise ParseError(f"expected ';' or '.', found {tok.text!r}", tok.line, tok.column)

    def _verb(self) -> str:
        tok = self._scan.peek()
        if tok and tok.kind == "a_kw":
            self._scan.next()
            return RDF_TYPE
        return self._resource()

    def _resource(self) -> str:
        tok = self._scan.next()
        if tok.kind == "iriref":
            return tok.text[1:-1]
        if tok.kind == "pname":
            return self._expand_pname(tok)
        if tok.kind == "punct" and tok.text == "[":
            raise ParseError("blank nodes are not supported by this reader", tok.line, tok.column)
        raise ParseError(f"expected an IRI, found {tok.text!r}", tok.line, tok.column)

    def _expand_pname(self, tok: _Token) -> str:
        prefix, _, local = tok.text.partition(":")
        if prefix not in self.prefixes:
            raise ParseError(f"undeclared prefix {prefix!r}", tok.line, tok.column)
        return self.prefixes[prefix] + local

    def _object(self) -> Term:
        tok = self._scan.peek()
        if tok is None:
            raise ParseError("unexpected end of document", self._scan.eof_line, self._scan.eof_col)
        if tok.kind in ("string", "long_string"):
            self._scan.next()
            body = tok.text[3:-3] if tok.kind == "long_string" else tok.text[1:-1]
            value = _unescape(body, tok.line, tok.column)
            nxt = self._scan.peek()
            if nxt and nxt.kind == "dtype":
                self._scan.next()
                datatype = self._resource()
                return Literal(value, datatype=datatype)
            if nxt and nxt.kind == "langtag":
                self._scan.next()
                return Literal(value, lang=nxt.text[1:])
            return Literal(value)
        if tok.kind == "number":
            self._scan.next()
            if re.fullmatch(r"[+-]?\d+", tok.text):
                return Literal(str(int(tok.text)), datatype=XSD + "integer")
            return Literal(tok.text, datatype=XSD + "decimal")
        return self._resource()


def parse(text: str) -> tuple[dict[str, str], list[Triple]]:
    """Parse Turtle text into (prefix map, triple list); raises ParseError."""
    return Parser(text).parse()
