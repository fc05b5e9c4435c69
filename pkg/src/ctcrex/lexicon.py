"""Weighted word lists backing the ${name} dictionary references."""

from __future__ import annotations

import math
from pathlib import Path
from typing import Iterable, Mapping

from .errors import FormatError, InputError

FREQ_SUM_TOL = 1e-6


class Lexicon:
    """Words with relative frequencies summing to 1."""

    __slots__ = ("name", "entries", "_freq_by_word")

    def __init__(self, name: str, entries: Iterable[tuple[str, float]]):
        items = tuple((w, float(f)) for w, f in entries)
        if not items:
            raise InputError(f"lexicon {name!r} is empty")
        words = [w for w, _ in items]
        if len(set(words)) != len(words):
            raise InputError(f"lexicon {name!r} has duplicate words")
        for w, f in items:
            if not w:
                raise InputError(f"lexicon {name!r} contains an empty word")
            if f <= 0.0:
                raise InputError(f"lexicon {name!r}: frequency of {w!r} must be > 0")
        total = math.fsum(f for _, f in items)
        if abs(total - 1.0) > FREQ_SUM_TOL:
            raise InputError(
                f"lexicon {name!r}: frequencies sum to {total:.9g}, expected 1")
        object.__setattr__(self, "name", name)
        object.__setattr__(self, "entries", items)
        object.__setattr__(self, "_freq_by_word", dict(items))

    def __setattr__(self, name, value):
        raise AttributeError("Lexicon is immutable")

    @classmethod
    def from_counts(cls, name: str, counts: Iterable[tuple[str, float]]) -> "Lexicon":
        items = list(counts)
        total = math.fsum(c for _, c in items)
        if total <= 0.0:
            raise InputError(f"lexicon {name!r}: counts must sum to a positive value")
        return cls(name, [(w, c / total) for w, c in items])

    def frequency(self, word: str) -> float:
        try:
            return self._freq_by_word[word]
        except KeyError:
            raise InputError(f"word {word!r} not in lexicon {self.name!r}") from None

    def __contains__(self, word: str) -> bool:
        return word in self._freq_by_word

    def __len__(self) -> int:
        return len(self.entries)

    def min_log_frequency(self) -> float:
        return min(math.log(f) for _, f in self.entries)

    def __repr__(self):
        return f"Lexicon({self.name!r}, {len(self.entries)} words)"


def load_lexicon(path, name: str | None = None) -> Lexicon:
    """One entry per line: `<count-or-frequency><TAB><word>`.

    Raw values are normalized to relative frequencies.
    """
    path = Path(path)
    counts: list[tuple[str, float]] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip():
                continue
            if "\t" not in line:
                raise FormatError("expected '<count><TAB><word>'", lineno)
            value, word = line.split("\t", 1)
            try:
                c = float(value)
            except ValueError:
                raise FormatError(f"bad count {value!r}", lineno) from None
            if c <= 0.0:
                raise FormatError(f"count must be positive, got {value}", lineno)
            counts.append((word, c))
    if not counts:
        raise FormatError(f"lexicon file {path} has no entries", 1)
    return Lexicon.from_counts(name or path.stem, counts)


def load_lexicon_dir(directory) -> Mapping[str, Lexicon]:
    """Load every regular file in `directory`; lexicon name = file stem."""
    directory = Path(directory)
    if not directory.is_dir():
        raise InputError(f"not a lexicon directory: {directory}")
    lexicons = {}
    for path in sorted(directory.iterdir()):
        if path.is_file():
            lex = load_lexicon(path)
            if lex.name in lexicons:
                raise InputError(f"duplicate lexicon name {lex.name!r}")
            lexicons[lex.name] = lex
    return lexicons
