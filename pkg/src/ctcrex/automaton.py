"""Weighted, tagged, epsilon-free automata and the regex compiler.

Construction is Thompson-style over the dialect AST, with lexicon references
expanded to tries and the OOV escape to a penalized loop, followed by epsilon
elimination and trimming. Arc weights are non-positive natural logs; the
accepting-path weight of a lexicon word equals prior_scale * log(frequency),
carried by its final character arc.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import Mapping, NamedTuple, Sequence

import numpy as np

from . import pattern as P
from .confmat import Alphabet
from .errors import GrammarError, InputError
from .lexicon import Lexicon

DEFAULT_OOV_CHAR_LOGPENALTY = math.log(1e-4)

Tag = tuple  # (category, person-or-None)


@dataclass(frozen=True)
class Arc:
    src: int
    char: str
    weight: float
    tag: Tag | None
    dst: int


@dataclass(frozen=True)
class PriorModel:
    """How lexicon frequencies and the OOV escape enter arc weights.

    mode "competition" multiplies the recognizer score by the lexicon prior
    (the recognizer's own prior is treated as uniform); "off" disables the
    lexicon prior, leaving only the language constraint. The OOV penalty is
    a per-character log cost, clamped at compile time so that it never beats
    the log frequency of any supplied vocabulary word.
    """

    mode: str = "competition"
    oov_char_logpenalty: float = DEFAULT_OOV_CHAR_LOGPENALTY
    prior_scale: float = 1.0

    def __post_init__(self):
        if self.mode not in ("competition", "off"):
            raise InputError(f"unknown prior mode {self.mode!r}")
        if not (math.isfinite(self.oov_char_logpenalty)
                and self.oov_char_logpenalty <= 0.0):
            raise InputError("oov_char_logpenalty must be finite and <= 0")
        if not (math.isfinite(self.prior_scale) and self.prior_scale >= 0.0):
            raise InputError("prior_scale must be finite and >= 0")

    def effective_scale(self) -> float:
        return 0.0 if self.mode == "off" else self.prior_scale

    def effective_oov_penalty(self, lexicons: Mapping[str, Lexicon]) -> float:
        penalty = self.oov_char_logpenalty
        for lex in lexicons.values():
            penalty = min(penalty, lex.min_log_frequency())
        return penalty


class AcceptResult(NamedTuple):
    accepted: bool
    weight: float
    char_tags: tuple | None


class Automaton:
    """Epsilon-free weighted tagged automaton.

    Arcs are sorted by (src, char, dst) and immutable; `alphabet` is set when
    compiled from a pattern and may be None for hand-built machines.
    """

    __slots__ = ("n_states", "start", "accepting", "arcs", "alphabet",
                 "_row_index", "_tables")

    def __init__(self, n_states: int, start: int, accepting, arcs,
                 alphabet: Alphabet | None = None):
        arcs = tuple(arcs)
        for a in arcs:
            if not (math.isfinite(a.weight) and a.weight <= 0.0):
                raise InputError(f"arc weight must be finite and <= 0, got {a.weight}")
            if not (0 <= a.src < n_states and 0 <= a.dst < n_states):
                raise InputError("arc endpoint outside state range")
            if len(a.char) != 1:
                raise InputError(f"arc label must be a single character, got {a.char!r}")
        if not 0 <= start < max(n_states, 1):
            raise InputError("start state outside state range")
        object.__setattr__(self, "n_states", n_states)
        object.__setattr__(self, "start", start)
        object.__setattr__(self, "accepting", frozenset(accepting))
        object.__setattr__(self, "arcs", arcs)
        object.__setattr__(self, "alphabet", alphabet)
        row: list[list[int]] = [[] for _ in range(n_states)]
        for i, a in enumerate(arcs):
            row[a.src].append(i)
        object.__setattr__(self, "_row_index", tuple(tuple(r) for r in row))
        object.__setattr__(self, "_tables", {})

    def __setattr__(self, name, value):
        raise AttributeError("Automaton is immutable")

    def arcs_from(self, state: int) -> tuple[Arc, ...]:
        return tuple(self.arcs[i] for i in self._row_index[state])

    @property
    def num_arcs(self) -> int:
        return len(self.arcs)

    def arc_tags(self) -> set:
        return {a.tag for a in self.arcs if a.tag is not None}

    def __repr__(self):
        return (f"Automaton({self.n_states} states, {len(self.arcs)} arcs, "
                f"{len(self.accepting)} accepting)")

    def tables(self, alphabet: Alphabet) -> "DecodeTables":
        """Flat numpy views of the machine against a concrete alphabet,
        cached per alphabet. Raises if an arc label is not in it."""
        cached = self._tables.get(alphabet)
        if cached is not None:
            return cached
        n_arcs = len(self.arcs)
        row_ptr = np.zeros(self.n_states + 1, dtype=np.int32)
        arc_dst = np.zeros(n_arcs, dtype=np.int32)
        arc_label = np.zeros(n_arcs, dtype=np.int32)
        arc_weight = np.zeros(n_arcs, dtype=np.float64)
        arc_tag = np.full(n_arcs, -1, dtype=np.int32)
        tags: list[Tag] = []
        tag_index: dict[Tag, int] = {}
        for i, a in enumerate(self.arcs):
            row_ptr[a.src + 1] += 1
            arc_dst[i] = a.dst
            arc_label[i] = alphabet.label_of(a.char)
            arc_weight[i] = a.weight
            if a.tag is not None:
                if a.tag not in tag_index:
                    tag_index[a.tag] = len(tags)
                    tags.append(a.tag)
                arc_tag[i] = tag_index[a.tag]
        np.cumsum(row_ptr, out=row_ptr)
        accepting = np.zeros(self.n_states, dtype=np.uint8)
        for q in self.accepting:
            accepting[q] = 1
        char_key = np.full(alphabet.num_labels, -1, dtype=np.int64)
        for label in range(alphabet.num_labels):
            if not alphabet.is_nac(label):
                char_key[label] = ord(alphabet.char_of(label))
        for arr in (row_ptr, arc_dst, arc_label, arc_weight, arc_tag,
                    accepting, char_key):
            arr.setflags(write=False)
        tables = DecodeTables(row_ptr, arc_dst, arc_label, arc_weight, arc_tag,
                              tuple(tags), accepting, char_key)
        self._tables[alphabet] = tables
        return tables


@dataclass(frozen=True)
class DecodeTables:
    row_ptr: np.ndarray
    arc_dst: np.ndarray
    arc_label: np.ndarray
    arc_weight: np.ndarray
    arc_tag: np.ndarray
    tags: tuple
    accepting: np.ndarray
    char_key: np.ndarray


# ---------------------------------------------------------------------------
# NFA scaffolding
# ---------------------------------------------------------------------------

class _Nfa:
    def __init__(self):
        self.n = 0
        self.eps: list[tuple[int, int]] = []
        self.arcs: list[tuple[int, int, str, float, Tag | None]] = []

    def state(self) -> int:
        self.n += 1
        return self.n - 1

    def add_eps(self, src: int, dst: int) -> None:
        self.eps.append((src, dst))

    def add_arc(self, src: int, dst: int, char: str, weight: float,
                tag: Tag | None) -> None:
        self.arcs.append((src, dst, char, weight, tag))


class _Compiler:
    def __init__(self, alphabet: Alphabet, lexicons: Mapping[str, Lexicon],
                 prior: PriorModel):
        self.alphabet = alphabet
        self.lexicons = lexicons
        self.scale = prior.effective_scale()
        self.oov_penalty = prior.effective_oov_penalty(lexicons)
        self.nfa = _Nfa()

    def check_char(self, ch: str, pos: int) -> None:
        if ch not in self.alphabet:
            raise GrammarError(f"literal {ch!r} outside alphabet", offset=pos)

    def build(self, node: P.Node, enter: int, exit_: int, tag: Tag | None) -> None:
        nfa = self.nfa
        if isinstance(node, P.Literal):
            self.check_char(node.char, node.pos)
            nfa.add_arc(enter, exit_, node.char, 0.0, tag)
        elif isinstance(node, P.CharClass):
            # \s-injected whitespace outside the alphabet is dropped silently;
            # explicit characters outside it are an error.
            for ch in sorted(node.chars):
                if ch in (" ", "\n") and ch not in self.alphabet:
                    continue
                self.check_char(ch, node.pos)
                nfa.add_arc(enter, exit_, ch, 0.0, tag)
        elif isinstance(node, P.AnyChar):
            for ch in self.alphabet.characters:
                nfa.add_arc(enter, exit_, ch, 0.0, tag)
        elif isinstance(node, P.Whitespace):
            ws = [c for c in (" ", "\n") if c in self.alphabet]
            mid = nfa.state()
            for ch in ws:
                nfa.add_arc(enter, mid, ch, 0.0, tag)
                nfa.add_arc(mid, mid, ch, 0.0, tag)
            nfa.add_eps(mid, exit_)
        elif isinstance(node, P.DictRef):
            self._build_trie(self.lexicons[node.name], enter, exit_, tag, node.pos)
        elif isinstance(node, P.OovRef):
            chars = [c for c in self.alphabet.characters if c not in (" ", "\n")]
            mid = nfa.state()
            for ch in chars:
                nfa.add_arc(enter, mid, ch, self.oov_penalty, tag)
                nfa.add_arc(mid, mid, ch, self.oov_penalty, tag)
            nfa.add_eps(mid, exit_)
        elif isinstance(node, P.Concat):
            if not node.parts:
                nfa.add_eps(enter, exit_)
                return
            cur = enter
            for part in node.parts[:-1]:
                nxt = nfa.state()
                self.build(part, cur, nxt, tag)
                cur = nxt
            self.build(node.parts[-1], cur, exit_, tag)
        elif isinstance(node, P.Alternation):
            for part in node.parts:
                ci, co = nfa.state(), nfa.state()
                nfa.add_eps(enter, ci)
                self.build(part, ci, co, tag)
                nfa.add_eps(co, exit_)
        elif isinstance(node, P.Star):
            ci, co = nfa.state(), nfa.state()
            nfa.add_eps(enter, exit_)
            nfa.add_eps(enter, ci)
            self.build(node.child, ci, co, tag)
            nfa.add_eps(co, ci)
            nfa.add_eps(co, exit_)
        elif isinstance(node, P.Plus):
            ci, co = nfa.state(), nfa.state()
            nfa.add_eps(enter, ci)
            self.build(node.child, ci, co, tag)
            nfa.add_eps(co, ci)
            nfa.add_eps(co, exit_)
        elif isinstance(node, P.Optional):
            ci, co = nfa.state(), nfa.state()
            nfa.add_eps(enter, exit_)
            nfa.add_eps(enter, ci)
            self.build(node.child, ci, co, tag)
            nfa.add_eps(co, exit_)
        elif isinstance(node, P.TagGroup):
            ci, co = nfa.state(), nfa.state()
            nfa.add_eps(enter, ci)
            # innermost group wins: the child tag overrides the enclosing one
            self.build(node.child, ci, co, (node.category, node.person))
            nfa.add_eps(co, exit_)
        else:
            raise GrammarError(f"unknown AST node {type(node).__name__}")

    def _build_trie(self, lex: Lexicon, enter: int, exit_: int,
                    tag: Tag | None, pos: int) -> None:
        """Trie over the lexicon; each word's final character arc goes straight
        to the fragment exit carrying scale * log(frequency)."""
        nfa = self.nfa
        trie: dict[tuple[int, str], int] = {}
        for word, freq in lex.entries:
            for ch in word:
                if ch not in self.alphabet:
                    raise GrammarError(
                        f"lexicon {lex.name!r} word {word!r} uses {ch!r} "
                        f"outside the alphabet", offset=pos)
            cur = enter
            for ch in word[:-1]:
                nxt = trie.get((cur, ch))
                if nxt is None:
                    nxt = nfa.state()
                    trie[(cur, ch)] = nxt
                    nfa.add_arc(cur, nxt, ch, 0.0, tag)
                cur = nxt
            nfa.add_arc(cur, exit_, word[-1], self.scale * math.log(freq), tag)


def _eps_closure(n: int, eps: Sequence[tuple[int, int]]) -> list[set[int] | None]:
    adj: list[list[int]] = [[] for _ in range(n)]
    for s, d in eps:
        adj[s].append(d)

    closures: list[set[int] | None] = [None] * n

    def closure_of(q: int) -> set[int]:
        if closures[q] is not None:
            return closures[q]
        seen = {q}
        stack = [q]
        while stack:
            u = stack.pop()
            for v in adj[u]:
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        closures[q] = seen
        return seen

    for q in range(n):
        closure_of(q)
    return closures


def _finalize(n: int, start: int, accepting: set[int],
              raw_arcs: list[tuple[int, int, str, float, Tag | None]],
              alphabet: Alphabet | None) -> Automaton:
    """Dedupe parallel arcs (keep max weight), trim, renumber by BFS order."""
    best: dict[tuple[int, str, int, Tag | None], float] = {}
    for src, dst, ch, w, tag in raw_arcs:
        key = (src, ch, dst, tag)
        if key not in best or w > best[key]:
            best[key] = w

    fwd: dict[int, list[tuple[int, str, int, Tag | None]]] = {}
    rev: dict[int, list[int]] = {}
    for (src, ch, dst, tag), w in best.items():
        fwd.setdefault(src, []).append((src, ch, dst, tag))
        rev.setdefault(dst, []).append(src)

    reach = {start}
    stack = [start]
    while stack:
        u = stack.pop()
        for _, _, dst, _ in fwd.get(u, ()):
            if dst not in reach:
                reach.add(dst)
                stack.append(dst)
    coreach = set(accepting)
    stack = list(accepting)
    while stack:
        u = stack.pop()
        for src in rev.get(u, ()):
            if src not in coreach:
                coreach.add(src)
                stack.append(src)
    core = reach & coreach
    keep = core | {start}

    def tag_key(tag):
        return ("", "") if tag is None else (tag[0], tag[1] or "")

    # BFS renumbering with sorted expansion keeps state ids deterministic
    order = {start: 0}
    queue = deque([start])
    while queue:
        u = queue.popleft()
        outs = sorted((ch, dst, tag_key(tag)) for (_, ch, dst, tag) in fwd.get(u, ())
                      if dst in core)
        for _, dst, _ in outs:
            if dst not in order:
                order[dst] = len(order)
                queue.append(dst)

    arcs = []
    for (src, ch, dst, tag), w in best.items():
        if src in order and dst in order and dst in core:
            arcs.append(Arc(order[src], ch, w, tag, order[dst]))
    arcs.sort(key=lambda a: (a.src, a.char, a.dst, tag_key(a.tag)))
    new_accepting = {order[q] for q in accepting if q in order}
    return Automaton(len(order), 0, new_accepting, arcs, alphabet)


def compile_pattern(pattern, alphabet: Alphabet,
                    lexicons: Mapping[str, Lexicon] | None = None,
                    prior: PriorModel | None = None) -> Automaton:
    """Compile a dialect pattern (text or parsed AST) into an Automaton."""
    ast = P.parse_regex(pattern) if isinstance(pattern, str) else pattern
    lexicons = dict(lexicons or {})
    prior = prior or PriorModel()
    for name in sorted(P.referenced_lexicons(ast)):
        if name not in lexicons:
            raise GrammarError(f"unresolved dictionary reference ${{{name}}}")

    comp = _Compiler(alphabet, lexicons, prior)
    enter, exit_ = comp.nfa.state(), comp.nfa.state()
    comp.build(ast, enter, exit_, None)

    closures = _eps_closure(comp.nfa.n, comp.nfa.eps)
    by_src: dict[int, list[tuple[int, int, str, float, Tag | None]]] = {}
    for arc in comp.nfa.arcs:
        by_src.setdefault(arc[0], []).append(arc)

    sources = {enter} | {a[1] for a in comp.nfa.arcs}
    flat: list[tuple[int, int, str, float, Tag | None]] = []
    accepting: set[int] = set()
    for q in sources:
        cl = closures[q]
        if exit_ in cl:
            accepting.add(q)
        for r in cl:
            for (_, dst, ch, w, tag) in by_src.get(r, ()):
                flat.append((q, dst, ch, w, tag))
    return _finalize(comp.nfa.n, enter, accepting, flat, alphabet)


def build_lexicon_automaton(lex: Lexicon, scale: float = 1.0,
                            alphabet: Alphabet | None = None) -> Automaton:
    """Trie automaton accepting exactly the lexicon words; the accepting path
    of word w sums to scale * log(frequency(w)), placed on its final arc."""
    if len(lex) == 0:
        raise InputError("empty lexicon")
    nfa = _Nfa()
    root, final = nfa.state(), nfa.state()
    trie: dict[tuple[int, str], int] = {}
    for word, freq in lex.entries:
        if alphabet is not None:
            for ch in word:
                if ch not in alphabet:
                    raise InputError(
                        f"lexicon word {word!r} uses {ch!r} outside the alphabet")
        cur = root
        for ch in word[:-1]:
            nxt = trie.get((cur, ch))
            if nxt is None:
                nxt = nfa.state()
                trie[(cur, ch)] = nxt
                nfa.add_arc(cur, nxt, ch, 0.0, None)
            cur = nxt
        nfa.add_arc(cur, final, word[-1], scale * math.log(freq), None)
    return _finalize(nfa.n, root, {final}, nfa.arcs, alphabet)


def build_oov_automaton(alphabet: Alphabet,
                        prior: PriorModel | None = None) -> Automaton:
    """Accepts any non-empty string over the alphabet minus whitespace; each
    character costs the model's per-character OOV penalty."""
    prior = prior or PriorModel()
    penalty = prior.oov_char_logpenalty
    chars = [c for c in alphabet.characters if c not in (" ", "\n")]
    nfa = _Nfa()
    start, loop = nfa.state(), nfa.state()
    for ch in chars:
        nfa.add_arc(start, loop, ch, penalty, None)
        nfa.add_arc(loop, loop, ch, penalty, None)
    return _finalize(nfa.n, start, {loop}, nfa.arcs, alphabet)


def accepts(a: Automaton, s: str) -> AcceptResult:
    """Weighted membership: max-weight accepting path for `s`.

    Ties resolve deterministically: relaxation scans states in ascending id
    and arcs in stored order, keeping the first best; among accepting states
    the smallest id wins.
    """
    dp: dict[int, float] = {a.start: 0.0}
    back: list[dict[int, tuple[int, int]]] = []
    for ch in s:
        ndp: dict[int, float] = {}
        nback: dict[int, tuple[int, int]] = {}
        for q in sorted(dp):
            w0 = dp[q]
            for i in a._row_index[q]:
                arc = a.arcs[i]
                if arc.char != ch:
                    continue
                w = w0 + arc.weight
                if arc.dst not in ndp or w > ndp[arc.dst]:
                    ndp[arc.dst] = w
                    nback[arc.dst] = (q, i)
        dp = ndp
        back.append(nback)
        if not dp:
            return AcceptResult(False, float("-inf"), None)
    finals = [q for q in sorted(dp) if q in a.accepting]
    if not finals:
        return AcceptResult(False, float("-inf"), None)
    best = finals[0]
    for q in finals[1:]:
        if dp[q] > dp[best]:
            best = q
    tags = []
    q = best
    for pos in range(len(s) - 1, -1, -1):
        prev, arc_i = back[pos][q]
        tags.append(a.arcs[arc_i].tag)
        q = prev
    tags.reverse()
    return AcceptResult(True, dp[best], tuple(tags))
