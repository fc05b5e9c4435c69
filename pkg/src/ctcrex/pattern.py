"""Tagged regular-expression dialect: AST and parser.

Grammar (precedence: closure > concatenation > alternation):

    expr  = alt ;  alt = cat { "|" cat } ;  cat = { rep } ;
    rep   = atom [ "*" | "+" | "?" ] ;
    atom  = literal | "\\" escaped | "." | "\\s" | "[" class "]" | "(" expr ")"
          | "(?<" tag ">" expr ")" | "${" name "}" | "${oov}" ;
    tag   = category [ ":" person ] ;
    escaped in { ( ) [ ] | * + ? \\ $ . s }

`\\s` matches one or more whitespace characters (space or linebreak).
`${name}` references a lexicon; `${oov}` the out-of-vocabulary escape.
`(?<category:person>...)` tags the characters matched inside the group.
Character classes support plain characters, the escapes above, `\\s`
(adds space and linebreak) and ranges like `a-z`.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import GrammarError

ESCAPABLE = set("()[]|*+?\\$.s")
_METACHARS = set("()[]|*+?\\$")


@dataclass(frozen=True)
class Node:
    pos: int


@dataclass(frozen=True)
class Literal(Node):
    char: str


@dataclass(frozen=True)
class Concat(Node):
    parts: tuple


@dataclass(frozen=True)
class Alternation(Node):
    parts: tuple


@dataclass(frozen=True)
class Star(Node):
    child: Node


@dataclass(frozen=True)
class Plus(Node):
    child: Node


@dataclass(frozen=True)
class Optional(Node):
    child: Node


@dataclass(frozen=True)
class CharClass(Node):
    chars: frozenset


@dataclass(frozen=True)
class AnyChar(Node):
    pass


@dataclass(frozen=True)
class Whitespace(Node):
    pass


@dataclass(frozen=True)
class DictRef(Node):
    name: str


@dataclass(frozen=True)
class OovRef(Node):
    pass


@dataclass(frozen=True)
class TagGroup(Node):
    category: str
    person: str | None
    child: Node


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.i = 0

    def error(self, message: str, at: int | None = None):
        pos = self.i if at is None else at
        offset = len(self.text[:pos].encode("utf-8"))
        raise GrammarError(message, offset=offset)

    def peek(self) -> str:
        return self.text[self.i] if self.i < len(self.text) else ""

    def take(self) -> str:
        ch = self.peek()
        self.i += 1
        return ch

    # expr = alt
    def parse(self) -> Node:
        node = self.alt()
        if self.peek() == ")":
            self.error("unbalanced group: stray ')'")
        if self.i != len(self.text):
            self.error(f"unexpected character {self.peek()!r}")
        return node

    def alt(self) -> Node:
        start = self.i
        parts = [self.cat()]
        while self.peek() == "|":
            self.take()
            parts.append(self.cat())
        if len(parts) == 1:
            return parts[0]
        return Alternation(start, tuple(parts))

    def cat(self) -> Node:
        start = self.i
        parts = []
        while True:
            ch = self.peek()
            if ch in ("", "|", ")"):
                break
            parts.append(self.rep())
        if len(parts) == 1:
            return parts[0]
        return Concat(start, tuple(parts))

    def rep(self) -> Node:
        node = self.atom()
        ch = self.peek()
        if ch == "*":
            return self._closure(Star, node)
        if ch == "+":
            return self._closure(Plus, node)
        if ch == "?":
            return self._closure(Optional, node)
        return node

    def _closure(self, ctor, node: Node) -> Node:
        pos = self.i
        self.take()
        return ctor(pos, node)

    def atom(self) -> Node:
        start = self.i
        ch = self.peek()
        if ch in ("*", "+", "?"):
            self.error(f"nothing to repeat before {ch!r}")
        if ch == "(":
            return self.group()
        if ch == "[":
            return self.char_class()
        if ch == "$":
            return self.reference()
        if ch == "\\":
            self.take()
            esc = self.peek()
            if esc == "":
                self.error("dangling escape at end of pattern", at=start)
            if esc not in ESCAPABLE:
                self.error(f"unknown escape \\{esc}", at=start)
            self.take()
            if esc == "s":
                return Whitespace(start)
            return Literal(start, esc)
        if ch == ".":
            self.take()
            return AnyChar(start)
        self.take()
        return Literal(start, ch)

    def group(self) -> Node:
        start = self.i
        self.take()  # "("
        tag = None
        if self.text.startswith("?<", self.i):
            self.i += 2
            end = self.text.find(">", self.i)
            if end < 0:
                self.error("unterminated tag: missing '>'", at=start)
            raw = self.text[self.i:end]
            if not raw:
                self.error("empty tag", at=start)
            if ":" in raw:
                category, person = raw.split(":", 1)
            else:
                category, person = raw, None
            if not category or person == "":
                self.error(f"malformed tag {raw!r}", at=start)
            tag = (category, person)
            self.i = end + 1
        node = self.alt()
        if self.peek() != ")":
            self.error("unbalanced group: missing ')'", at=start)
        self.take()
        if tag is not None:
            return TagGroup(start, tag[0], tag[1], node)
        return node

    def reference(self) -> Node:
        start = self.i
        self.take()  # "$"
        if self.peek() != "{":
            self.error("expected '{' after '$'", at=start)
        self.take()
        end = self.text.find("}", self.i)
        if end < 0:
            self.error("unterminated reference: missing '}'", at=start)
        name = self.text[self.i:end]
        if not name:
            self.error("empty reference name", at=start)
        self.i = end + 1
        if name == "oov":
            return OovRef(start)
        return DictRef(start, name)

    def char_class(self) -> Node:
        start = self.i
        self.take()  # "["
        chars: set[str] = set()
        pending: str | None = None

        def flush():
            nonlocal pending
            if pending is not None:
                chars.add(pending)
                pending = None

        while True:
            ch = self.peek()
            if ch == "":
                self.error("unterminated character class: missing ']'", at=start)
            if ch == "]":
                flush()
                self.take()
                return CharClass(start, frozenset(chars))
            if ch == "\\":
                at = self.i
                self.take()
                esc = self.peek()
                if esc == "":
                    self.error("dangling escape in character class", at=at)
                if esc not in ESCAPABLE:
                    self.error(f"unknown escape \\{esc}", at=at)
                self.take()
                flush()
                if esc == "s":
                    chars.update((" ", "\n"))
                else:
                    pending = esc
                continue
            if ch == "-" and pending is not None:
                self.take()
                hi = self.peek()
                if hi in ("", "]"):
                    # trailing '-' is a literal
                    chars.add(pending)
                    chars.add("-")
                    pending = None
                    continue
                if hi == "\\":
                    self.take()
                    hi = self.peek()
                    if hi not in ESCAPABLE or hi == "s":
                        self.error("bad range end")
                self.take()
                if ord(hi) < ord(pending):
                    self.error(f"reversed range {pending}-{hi}")
                chars.update(chr(c) for c in range(ord(pending), ord(hi) + 1))
                pending = None
                continue
            self.take()
            flush()
            pending = ch


def parse_regex(text: str) -> Node:
    """Parse the dialect, raising GrammarError with a byte offset on failure."""
    return _Parser(text).parse()


def referenced_lexicons(node: Node) -> set[str]:
    """Names of all ${...} dictionary references in the tree."""
    names: set[str] = set()
    _walk(node, lambda n: names.add(n.name) if isinstance(n, DictRef) else None)
    return names


def declared_tags(node: Node) -> list[tuple[str, str | None]]:
    """All (category, person) tags in the tree, in source order."""
    tags: list[tuple[str, str | None]] = []
    _walk(node, lambda n: tags.append((n.category, n.person))
          if isinstance(n, TagGroup) else None)
    return tags


def _walk(node: Node, visit) -> None:
    visit(node)
    if isinstance(node, (Concat, Alternation)):
        for p in node.parts:
            _walk(p, visit)
    elif isinstance(node, (Star, Plus, Optional, TagGroup)):
        _walk(node.child, visit)
