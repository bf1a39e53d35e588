"""Turtle subset reader and writer.

Supported: ``@prefix``/``PREFIX`` directives, prefixed names (including the
empty prefix), IRIREFs with ``\\u``/``\\U`` escapes, ``a``, predicate and
object lists, comments, short and long string literals, language tags,
``^^`` datatypes, numeric and boolean shorthand, blank node labels and
``[ ... ]`` property lists. Collections and ``@base`` are rejected.
"""

from __future__ import annotations

import enum
import re
from collections.abc import Mapping
from dataclasses import dataclass, field
from typing import Optional
from urllib.parse import urljoin

from ..graph import (
    RDF_TYPE_IRI,
    BlankNode,
    Graph,
    GraphError,
    Iri,
    Literal,
    Term,
    Triple,
    XSD_STRING_IRI,
    escape_string,
)
from ..vocab import XSD, compact_iri

XSD_INTEGER = XSD.integer
XSD_DECIMAL = XSD.decimal
XSD_DOUBLE = XSD.double
XSD_BOOLEAN = XSD.boolean


class ParseErrorKind(enum.Enum):
    UnterminatedIri = "UnterminatedIri"
    UnterminatedString = "UnterminatedString"
    UnknownPrefix = "UnknownPrefix"
    BadEscape = "BadEscape"
    UnexpectedToken = "UnexpectedToken"
    BadLanguageTag = "BadLanguageTag"
    BadNumber = "BadNumber"


class ParseError(ValueError):
    def __init__(self, kind: ParseErrorKind, line: int, column: int, message: str) -> None:
        super().__init__(f"{line}:{column}: {kind.value}: {message}")
        self.kind = kind
        self.line = line
        self.column = column
        self.message = message


@dataclass(frozen=True)
class SourceDocument:
    """Text to parse.

    ``prefixes`` are bindings in force before the first directive; the
    document's own ``@prefix`` lines override them.
    """

    text: str
    base: Optional[str] = None
    prefixes: Mapping[str, str] = field(default_factory=dict)


_LOCAL_ESCAPABLE = set("_~.-!$&'()*+,;=/?#@%")
_STRING_ESCAPES = {"t": "\t", "b": "\b", "n": "\n", "r": "\r", "f": "\f", '"': '"', "'": "'", "\\": "\\"}
_IRI_FORBIDDEN = set('<"{}|^`')


def _is_name_start(ch: str) -> bool:
    return ch.isalpha() or ch == "_" or ord(ch) > 0x7F


def _is_name_char(ch: str) -> bool:
    return ch.isalnum() or ch in "_-" or ord(ch) > 0x7F


class _Parser:
    def __init__(self, doc: SourceDocument) -> None:
        self.s = doc.text
        self.n = len(doc.text)
        self.i = 0
        self.base = doc.base
        self.prefixes: dict[str, str] = dict(doc.prefixes)
        self.triples: set[Triple] = set()
        self.labels: dict[str, BlankNode] = {}
        self.counter = 0

    # -- positions and errors -------------------------------------------------

    def position(self, i: int) -> tuple[int, int]:
        line = self.s.count("\n", 0, i) + 1
        start = self.s.rfind("\n", 0, i) + 1
        return line, i - start + 1

    def error(self, kind: ParseErrorKind, message: str, at: Optional[int] = None) -> ParseError:
        line, col = self.position(self.i if at is None else at)
        return ParseError(kind, line, col, message)

    def peek(self, k: int = 0) -> str:
        j = self.i + k
        return self.s[j] if j < self.n else ""

    def skip_ws(self) -> None:
        while self.i < self.n:
            ch = self.s[self.i]
            if ch in " \t\r\n":
                self.i += 1
            elif ch == "#":
                end = self.s.find("\n", self.i)
                self.i = self.n if end < 0 else end + 1
            else:
                break

    def expect(self, ch: str, what: str) -> None:
        self.skip_ws()
        if self.peek() != ch:
            found = self.peek() or "end of input"
            raise self.error(ParseErrorKind.UnexpectedToken, f"expected {what}, found {found!r}")
        self.i += 1

    def fresh(self) -> BlankNode:
        node = BlankNode(f"b{self.counter}")
        self.counter += 1
        return node

    def emit(self, s, p, o) -> None:
        self.triples.add(Triple(s, p, o))

    # -- document ------------------------------------------------------------

    def parse(self) -> Graph:
        while True:
            self.skip_ws()
            if self.i >= self.n:
                break
            if self.peek() == "@" or self.s[self.i:self.i + 6].upper().startswith(("PREFIX", "BASE")):
                if self.directive():
                    continue
            self.statement()
        return Graph(self.triples, self.prefixes)

    def directive(self) -> bool:
        start = self.i
        if self.peek() == "@":
            word = self.read_word(start + 1)
            if word == "base":
                raise self.error(ParseErrorKind.UnexpectedToken, "base directives are not supported", at=start)
            if word != "prefix":
                raise self.error(ParseErrorKind.UnexpectedToken, f"unknown directive '@{word}'", at=start)
            sparql = False
            self.i = start + 1 + len(word)
        else:
            word = self.read_word(start)
            after = self.s[start + len(word):start + len(word) + 1]
            # "prefix:x" is a prefixed name, not a directive
            if word.upper() not in ("PREFIX", "BASE") or after not in (" ", "\t", "\r", "\n"):
                return False
            if word.upper() == "BASE":
                raise self.error(ParseErrorKind.UnexpectedToken, "base directives are not supported", at=start)
            sparql = True
            self.i = start + len(word)
        self.skip_ws()
        label_start = self.i
        label = self.read_prefix_label()
        if self.peek() != ":":
            raise self.error(ParseErrorKind.UnexpectedToken, "expected prefix label ending in ':'", at=label_start)
        self.i += 1
        self.skip_ws()
        if self.peek() != "<":
            raise self.error(ParseErrorKind.UnexpectedToken, "expected namespace IRI")
        ns = self.iriref()
        self.prefixes[label] = ns.value
        if not sparql:
            self.expect(".", "'.' after prefix directive")
        return True

    def read_word(self, j: int) -> str:
        k = j
        while k < self.n and self.s[k].isalpha():
            k += 1
        return self.s[j:k]

    def read_prefix_label(self) -> str:
        j = self.i
        if j < self.n and _is_name_start(self.s[j]) and self.s[j] != "_":
            j += 1
            while j < self.n and (_is_name_char(self.s[j]) or (self.s[j] == "." and j + 1 < self.n and _is_name_char(self.s[j + 1]))):
                j += 1
        label = self.s[self.i:j]
        self.i = j
        return label

    def statement(self) -> None:
        self.skip_ws()
        if self.peek() == "[":
            subject = self.blank_property_list()
            self.skip_ws()
            if self.peek() != ".":
                self.predicate_object_list(subject)
        else:
            subject = self.subject()
            self.predicate_object_list(subject)
        self.expect(".", "'.' at end of statement")

    def subject(self):
        self.skip_ws()
        ch = self.peek()
        if ch == "<":
            return self.iriref()
        if ch == "_" and self.peek(1) == ":":
            return self.blank_label()
        if ch == "(":
            raise self.error(ParseErrorKind.UnexpectedToken, "collections are not supported")
        if ch and ch not in '"\'.;,]' and not ch.isdigit() and ch not in "+-":
            return self.prefixed_name()
        found = ch or "end of input"
        raise self.error(ParseErrorKind.UnexpectedToken, f"expected subject, found {found!r}")

    def predicate_object_list(self, subject) -> None:
        while True:
            self.skip_ws()
            predicate = self.verb()
            self.object_list(subject, predicate)
            self.skip_ws()
            if self.peek() != ";":
                return
            while self.peek() == ";":
                self.i += 1
                self.skip_ws()
            if self.peek() in (".", "]", ""):
                return

    def verb(self) -> Iri:
        ch = self.peek()
        if ch == "a" and not (_is_name_char(self.peek(1)) or self.peek(1) in ":."):
            self.i += 1
            return Iri(RDF_TYPE_IRI)
        if ch == "<":
            return self.iriref()
        if ch and (_is_name_start(ch) or ch == ":") and ch != "_":
            return self.prefixed_name()
        found = ch or "end of input"
        raise self.error(ParseErrorKind.UnexpectedToken, f"expected predicate, found {found!r}")

    def object_list(self, subject, predicate) -> None:
        while True:
            obj = self.object()
            self.emit(subject, predicate, obj)
            self.skip_ws()
            if self.peek() != ",":
                return
            self.i += 1

    def object(self) -> Term:
        self.skip_ws()
        ch = self.peek()
        if ch == "<":
            return self.iriref()
        if ch == "_" and self.peek(1) == ":":
            return self.blank_label()
        if ch == "[":
            return self.blank_property_list()
        if ch in ("'", '"'):
            return self.literal()
        if ch.isdigit() or ch in "+-" or (ch == "." and self.peek(1).isdigit()):
            return self.number()
        if ch == "(":
            raise self.error(ParseErrorKind.UnexpectedToken, "collections are not supported")
        if ch and (_is_name_start(ch) or ch == ":"):
            for word, value in (("true", "true"), ("false", "false")):
                end = self.i + len(word)
                if self.s.startswith(word, self.i) and not (
                    end < self.n and (_is_name_char(self.s[end]) or self.s[end] == ":")
                ):
                    self.i = end
                    return Literal(value, XSD_BOOLEAN)
            return self.prefixed_name()
        found = ch or "end of input"
        raise self.error(ParseErrorKind.UnexpectedToken, f"expected object, found {found!r}")

    # -- terms ---------------------------------------------------------------

    def make_iri(self, value: str, at: int) -> Iri:
        try:
            return Iri(value)
        except GraphError:
            if self.base is not None:
                try:
                    return Iri(urljoin(self.base, value))
                except GraphError:
                    pass
            raise self.error(ParseErrorKind.UnexpectedToken, f"relative or invalid IRI {value!r}", at=at)

    def iriref(self) -> Iri:
        start = self.i
        self.i += 1
        out = []
        while True:
            if self.i >= self.n:
                raise self.error(ParseErrorKind.UnterminatedIri, "IRI is not closed with '>'", at=start)
            ch = self.s[self.i]
            if ch == ">":
                self.i += 1
                break
            if ch in " \t\r\n":
                raise self.error(ParseErrorKind.UnterminatedIri, "whitespace inside IRI", at=start)
            if ch == "\\":
                out.append(self.unicode_escape())
                continue
            if ch in _IRI_FORBIDDEN or ord(ch) < 0x20:
                raise self.error(ParseErrorKind.UnexpectedToken, f"character {ch!r} not allowed in IRI")
            out.append(ch)
            self.i += 1
        return self.make_iri("".join(out), start)

    def unicode_escape(self) -> str:
        at = self.i
        kind = self.peek(1)
        width = {"u": 4, "U": 8}.get(kind)
        if width is None:
            raise self.error(ParseErrorKind.BadEscape, f"invalid escape '\\{kind}'", at=at)
        digits = self.s[self.i + 2:self.i + 2 + width]
        if len(digits) != width or any(c not in "0123456789abcdefABCDEF" for c in digits):
            raise self.error(ParseErrorKind.BadEscape, "malformed unicode escape", at=at)
        code = int(digits, 16)
        if code > 0x10FFFF or 0xD800 <= code <= 0xDFFF:
            raise self.error(ParseErrorKind.BadEscape, "escape is not a unicode scalar value", at=at)
        self.i += 2 + width
        return chr(code)

    def blank_label(self) -> BlankNode:
        start = self.i
        self.i += 2
        j = self.i
        if j >= self.n or not (_is_name_char(self.s[j])):
            raise self.error(ParseErrorKind.UnexpectedToken, "empty blank node label", at=start)
        while j < self.n and (_is_name_char(self.s[j]) or (self.s[j] == "." and j + 1 < self.n and _is_name_char(self.s[j + 1]))):
            j += 1
        label = self.s[self.i:j]
        self.i = j
        if label not in self.labels:
            self.labels[label] = self.fresh()
        return self.labels[label]

    def blank_property_list(self) -> BlankNode:
        self.i += 1
        node = self.fresh()
        self.skip_ws()
        if self.peek() == "]":
            self.i += 1
            return node
        self.predicate_object_list(node)
        self.expect("]", "']' closing blank node property list")
        return node

    def prefixed_name(self) -> Iri:
        start = self.i
        label = self.read_prefix_label()
        if self.peek() != ":":
            found = self.s[start:self.i] or self.peek() or "end of input"
            raise self.error(ParseErrorKind.UnexpectedToken, f"unexpected {found!r}", at=start)
        self.i += 1
        local = self.read_local()
        if label not in self.prefixes:
            raise self.error(ParseErrorKind.UnknownPrefix, f"prefix {label + ':'!r} is not declared", at=start)
        return self.make_iri(self.prefixes[label] + local, start)

    def read_local(self) -> str:
        out = []
        while self.i < self.n:
            ch = self.s[self.i]
            if _is_name_char(ch) or ch == ":":
                out.append(ch)
                self.i += 1
            elif ch == "." and self.i + 1 < self.n and (
                _is_name_char(self.s[self.i + 1]) or self.s[self.i + 1] in ":%\\"
            ) and out:
                out.append(ch)
                self.i += 1
            elif ch == "%":
                hexpart = self.s[self.i + 1:self.i + 3]
                if len(hexpart) != 2 or any(c not in "0123456789abcdefABCDEF" for c in hexpart):
                    raise self.error(ParseErrorKind.BadEscape, "malformed percent escape in local name")
                out.append("%" + hexpart)
                self.i += 3
            elif ch == "\\":
                nxt = self.peek(1)
                if nxt not in _LOCAL_ESCAPABLE:
                    raise self.error(ParseErrorKind.BadEscape, f"invalid local name escape '\\{nxt}'")
                out.append(nxt)
                self.i += 2
            else:
                break
        return "".join(out)

    def literal(self) -> Literal:
        start = self.i
        quote = self.s[self.i]
        long_form = self.s.startswith(quote * 3, self.i)
        self.i += 3 if long_form else 1
        out = []
        while True:
            if self.i >= self.n:
                raise self.error(ParseErrorKind.UnterminatedString, "string is not closed", at=start)
            ch = self.s[self.i]
            if long_form and self.s.startswith(quote * 3, self.i):
                # a run of more than three quotes ends with the last three
                while self.s.startswith(quote * 4, self.i):
                    out.append(quote)
                    self.i += 1
                self.i += 3
                break
            if not long_form and ch == quote:
                self.i += 1
                break
            if not long_form and ch in "\r\n":
                raise self.error(ParseErrorKind.UnterminatedString, "line break inside string", at=start)
            if ch == "\\":
                nxt = self.peek(1)
                if nxt in _STRING_ESCAPES:
                    out.append(_STRING_ESCAPES[nxt])
                    self.i += 2
                elif nxt in "uU":
                    out.append(self.unicode_escape())
                else:
                    raise self.error(ParseErrorKind.BadEscape, f"invalid escape '\\{nxt}'")
                continue
            out.append(ch)
            self.i += 1
        lexical = "".join(out)
        if self.peek() == "@":
            tag_start = self.i
            j = self.i + 1
            while j < self.n and (self.s[j].isascii() and (self.s[j].isalnum() or self.s[j] == "-")):
                j += 1
            tag = self.s[self.i + 1:j]
            trailing = self.s[j] if j < self.n else ""
            parts = tag.split("-")
            if (
                not tag
                or not parts[0].isalpha()
                or any(not p for p in parts)
                or (trailing and (_is_name_char(trailing) or trailing == ":"))
            ):
                raise self.error(ParseErrorKind.BadLanguageTag, f"invalid language tag {tag!r}", at=tag_start)
            self.i = j
            return Literal(lexical, language=tag)
        if self.s.startswith("^^", self.i):
            self.i += 2
            dt_start = self.i
            if self.peek() == "<":
                datatype = self.iriref()
            elif self.peek() and (_is_name_start(self.peek()) or self.peek() == ":") and self.peek() != "_":
                datatype = self.prefixed_name()
            else:
                raise self.error(ParseErrorKind.UnexpectedToken, "expected datatype IRI after '^^'")
            try:
                return Literal(lexical, datatype)
            except GraphError as exc:
                raise self.error(ParseErrorKind.UnexpectedToken, str(exc), at=dt_start) from None
        return Literal(lexical)

    def number(self) -> Literal:
        start = self.i
        j = self.i
        if self.s[j] in "+-":
            j += 1
        int_digits = j
        while j < self.n and self.s[j].isdigit():
            j += 1
        has_int = j > int_digits
        datatype = XSD_INTEGER
        if j < self.n and self.s[j] == "." and j + 1 < self.n and self.s[j + 1].isdigit():
            j += 1
            while j < self.n and self.s[j].isdigit():
                j += 1
            datatype = XSD_DECIMAL
        elif not has_int:
            raise self.error(ParseErrorKind.BadNumber, "sign without digits", at=start)
        if j < self.n and self.s[j] in "eE":
            k = j + 1
            if k < self.n and self.s[k] in "+-":
                k += 1
            if k >= self.n or not self.s[k].isdigit():
                raise self.error(ParseErrorKind.BadNumber, "exponent without digits", at=start)
            while k < self.n and self.s[k].isdigit():
                k += 1
            j = k
            datatype = XSD_DOUBLE
        if j < self.n and (_is_name_char(self.s[j]) or self.s[j] == ":"):
            raise self.error(ParseErrorKind.BadNumber, f"malformed number {self.s[start:j + 1]!r}", at=start)
        self.i = j
        return Literal(self.s[start:j], datatype)


def parse_turtle(doc: SourceDocument | str, *, base: Optional[str] = None,
                 prefixes: Optional[Mapping[str, str]] = None) -> Graph:
    """Parse Turtle text into a Graph; the first error raises ParseError."""
    if isinstance(doc, str):
        doc = SourceDocument(doc, base=base, prefixes=dict(prefixes or {}))
    return _Parser(doc).parse()


# -- writer ----------------------------------------------------------------------


_INTEGER_LEXICAL = re.compile(r"^[+-]?\d+$")


def _term_text(term: Term, prefixes: Mapping[str, str], labels: Mapping[BlankNode, str]) -> str:
    if isinstance(term, Iri):
        curie = compact_iri(prefixes, term)
        return curie if curie is not None else term.n3()
    if isinstance(term, BlankNode):
        return f"_:{labels.get(term, term.label)}"
    text = f'"{escape_string(term.lexical)}"'
    if term.language is not None:
        return f"{text}@{term.language}"
    if term.datatype.value == XSD_STRING_IRI:
        return text
    if term.datatype == XSD_INTEGER and _INTEGER_LEXICAL.match(term.lexical):
        return term.lexical
    return f"{text}^^{_term_text(term.datatype, prefixes, labels)}"


def value_sort_key(term: Term) -> tuple:
    """Objects order: IRIs, blank nodes, then literals (language-tagged first)."""
    if isinstance(term, Iri):
        return (0, 0, term.n3())
    if isinstance(term, BlankNode):
        return (1, 0, term.n3())
    return (2, 0 if term.language is not None else 1, term.n3())


def serialize_turtle(graph: Graph, labels: Optional[Mapping[BlankNode, str]] = None) -> str:
    """Deterministic Turtle for ``graph``.

    Blank nodes used exactly once as an object (and not part of a cycle)
    are written inline as ``[ ... ]``; the rest get ``_:`` labels.
    """
    from .canonical import canonical_labels

    if labels is None:
        labels = canonical_labels(graph, strict=False)
    prefixes = graph.prefixes
    lines = [f"@prefix {label}: <{ns}> ." for label, ns in sorted(prefixes.items())]

    by_subject: dict = {}
    refs: dict[BlankNode, int] = {}
    for t in graph.triples:
        by_subject.setdefault(t.subject, []).append(t)
        if isinstance(t.object, BlankNode):
            refs[t.object] = refs.get(t.object, 0) + 1

    def subject_key(s):
        return (1, labels.get(s, s.label)) if isinstance(s, BlankNode) else (0, s.value)

    inline = {b for b, count in refs.items() if count == 1 and b in by_subject}
    # Break cycles: an inline node must be reachable from a written root.
    while True:
        roots = [s for s in by_subject if s not in inline]
        reached: set = set()
        stack = list(roots)
        while stack:
            node = stack.pop()
            for t in by_subject.get(node, ()):
                o = t.object
                if o in inline and o not in reached:
                    reached.add(o)
                    stack.append(o)
        stranded = inline - reached
        if not stranded:
            break
        inline.discard(min(stranded, key=subject_key))

    def obj_text(o: Term, depth: int) -> str:
        if isinstance(o, BlankNode) and o in inline:
            return block(o, depth + 1)
        return _term_text(o, prefixes, labels)

    def pred_lists(s, depth: int) -> list[str]:
        grouped: dict[Iri, list[Term]] = {}
        for t in by_subject.get(s, ()):
            grouped.setdefault(t.predicate, []).append(t.object)
        order = sorted(grouped, key=lambda p: (p.value != RDF_TYPE_IRI, p.value))
        out = []
        for p in order:
            verb = "a" if p.value == RDF_TYPE_IRI else _term_text(p, prefixes, labels)
            objs = sorted(grouped[p], key=value_sort_key)
            out.append(f"{verb} " + ", ".join(obj_text(o, depth) for o in objs))
        return out

    def block(node: BlankNode, depth: int) -> str:
        indent = "    " * (depth + 1)
        inner = pred_lists(node, depth)
        return "[\n" + " ;\n".join(indent + part for part in inner) + "\n" + "    " * depth + "]"

    if lines:
        lines.append("")
    for s in sorted((s for s in by_subject if s not in inline), key=subject_key):
        head = _term_text(s, prefixes, labels)
        parts = pred_lists(s, 0)
        lines.append(head + " " + (" ;\n    ".join(parts)) + " .")
        lines.append("")
    text = "\n".join(lines)
    return text.rstrip("\n") + "\n" if text else ""
