"""Shared generators and independent oracles for the test suite."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from ctcrex import Alphabet, ConfMat, Lexicon, PriorModel, compile_pattern
from ctcrex import pattern as P
from ctcrex.errors import GrammarError

SAMPLE_DIR = Path(__file__).resolve().parent.parent / "sample"


def read_grammar(path):
    text = Path(path).read_text(encoding="utf-8")
    return text[:-1] if text.endswith("\n") else text


# ---------------------------------------------------------------------------
# random small instances
# ---------------------------------------------------------------------------

def random_ast(rng, chars, lexnames, depth):
    choices = ["lit", "lit", "class", "any", "ws", "dict", "oov"]
    if depth > 0:
        choices += ["concat", "concat", "alt", "star", "plus", "opt", "tag"]
    kind = choices[int(rng.integers(len(choices)))]
    if kind == "lit":
        return P.Literal(0, chars[int(rng.integers(len(chars)))])
    if kind == "class":
        k = 1 + int(rng.integers(len(chars)))
        sel = rng.choice(len(chars), size=k, replace=False)
        return P.CharClass(0, frozenset(chars[int(i)] for i in sel))
    if kind == "any":
        return P.AnyChar(0)
    if kind == "ws":
        return P.Whitespace(0)
    if kind == "dict":
        return P.DictRef(0, lexnames[int(rng.integers(len(lexnames)))])
    if kind == "oov":
        return P.OovRef(0)
    if kind == "concat":
        n = int(rng.integers(0, 3))
        return P.Concat(0, tuple(random_ast(rng, chars, lexnames, depth - 1)
                                 for _ in range(n)))
    if kind == "alt":
        return P.Alternation(0, tuple(random_ast(rng, chars, lexnames, depth - 1)
                                      for _ in range(2)))
    if kind == "star":
        return P.Star(0, random_ast(rng, chars, lexnames, depth - 1))
    if kind == "plus":
        return P.Plus(0, random_ast(rng, chars, lexnames, depth - 1))
    if kind == "opt":
        return P.Optional(0, random_ast(rng, chars, lexnames, depth - 1))
    return P.TagGroup(0, "cat", "per", random_ast(rng, chars, lexnames, depth - 1))


def random_lexicon(rng, chars, name="lx"):
    wchars = [c for c in chars if c not in (" ", "\n")] or ["a"]
    words = set()
    while len(words) < 1 + int(rng.integers(3)):
        k = 1 + int(rng.integers(3))
        words.add("".join(wchars[int(rng.integers(len(wchars)))] for _ in range(k)))
    freqs = rng.random(len(words)) + 0.05
    freqs = freqs / freqs.sum()
    return Lexicon(name, list(zip(sorted(words), map(float, freqs))))


def random_small_instance(rng, max_t=6, depth=3):
    """(ConfMat, Automaton, ast, lexicons) with |chars| <= 3 and T <= max_t."""
    nchars = 2 + int(rng.integers(2))
    chars = ["a", "b", " "][:nchars]
    alphabet = Alphabet(chars, nac_index=int(rng.integers(nchars + 1)))
    lexicons = {"lx": random_lexicon(rng, chars)}
    while True:
        ast = random_ast(rng, chars, ["lx"], depth)
        try:
            a = compile_pattern(ast, alphabet, lexicons, PriorModel())
            break
        except GrammarError:
            continue
    T = int(rng.integers(0, max_t + 1))
    if T:
        rows = rng.dirichlet(np.ones(alphabet.num_labels) * 0.7, size=T)
    else:
        rows = np.zeros((0, alphabet.num_labels))
    return ConfMat(rows, alphabet), a, ast, lexicons


def random_string(rng, chars, max_len=6):
    k = int(rng.integers(0, max_len + 1))
    return "".join(chars[int(rng.integers(len(chars)))] for _ in range(k))


# ---------------------------------------------------------------------------
# AST-interpreter matcher: acceptance oracle independent of the automaton path
# ---------------------------------------------------------------------------

def ast_match_positions(node, s, i, lexicons):
    """End positions reachable by matching `node` against s starting at i."""
    if isinstance(node, P.Literal):
        return {i + 1} if i < len(s) and s[i] == node.char else set()
    if isinstance(node, P.CharClass):
        return {i + 1} if i < len(s) and s[i] in node.chars else set()
    if isinstance(node, P.AnyChar):
        return {i + 1} if i < len(s) else set()
    if isinstance(node, P.Whitespace):
        out = set()
        j = i
        while j < len(s) and s[j] in (" ", "\n"):
            j += 1
            out.add(j)
        return out
    if isinstance(node, P.DictRef):
        lex = lexicons[node.name]
        return {i + len(w) for w, _ in lex.entries if s.startswith(w, i)}
    if isinstance(node, P.OovRef):
        out = set()
        j = i
        while j < len(s) and s[j] not in (" ", "\n"):
            j += 1
            out.add(j)
        return out
    if isinstance(node, P.Concat):
        fronts = {i}
        for part in node.parts:
            fronts = {k for j in fronts
                      for k in ast_match_positions(part, s, j, lexicons)}
            if not fronts:
                return set()
        return fronts
    if isinstance(node, P.Alternation):
        out = set()
        for part in node.parts:
            out |= ast_match_positions(part, s, i, lexicons)
        return out
    if isinstance(node, P.Star):
        seen = {i}
        frontier = {i}
        while frontier:
            nxt = {k for j in frontier
                   for k in ast_match_positions(node.child, s, j, lexicons)}
            frontier = nxt - seen
            seen |= nxt
        return seen
    if isinstance(node, P.Plus):
        first = ast_match_positions(node.child, s, i, lexicons)
        out = set()
        for j in first:
            out |= ast_match_positions(P.Star(0, node.child), s, j, lexicons)
        return out
    if isinstance(node, P.Optional):
        return {i} | ast_match_positions(node.child, s, i, lexicons)
    if isinstance(node, P.TagGroup):
        return ast_match_positions(node.child, s, i, lexicons)
    raise AssertionError(f"unhandled node {node}")


def ast_accepts(ast, s, lexicons):
    return len(s) in ast_match_positions(ast, s, 0, lexicons)


# ---------------------------------------------------------------------------
# preimage reconstruction for the score decomposition audit
# ---------------------------------------------------------------------------

def reconstruct_label_seq(decoding, cm):
    """An optimal label sequence consistent with the decoding's text and
    emission frames: NaCs before the first emission, and after each emission
    the best split of repeats followed by NaCs."""
    alphabet = cm.alphabet
    nac = alphabet.nac_index
    logp = cm.log_rows()
    text, align = decoding.text, list(decoding.alignment)
    labels = [nac] * (align[0] if align else cm.T)
    for idx, ch in enumerate(text):
        label = alphabet.label_of(ch)
        labels.append(label)
        seg_start = align[idx] + 1
        seg_end = align[idx + 1] if idx + 1 < len(text) else cm.T
        seg = range(seg_start, seg_end)
        max_repeats = len(seg)
        if idx + 1 < len(text) and text[idx + 1] == ch and max_repeats > 0:
            max_repeats -= 1  # a doubled character needs an intervening NaC
        best_r, best_v = 0, None
        for r in range(max_repeats + 1):
            v = 0.0
            for k, f in enumerate(seg):
                v += logp[f, label] if k < r else logp[f, nac]
            if best_v is None or v > best_v:
                best_v, best_r = v, r
        for k in range(len(seg)):
            labels.append(label if k < best_r else nac)
    return labels
