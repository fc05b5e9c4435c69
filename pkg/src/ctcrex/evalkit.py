"""Scoring against gold annotations and synthetic test-data generation.

The score of an extracted item is the character accuracy of its word when the
(person, category) slot is correct and 0 otherwise; slot multiplicity is
resolved by greedy in-order one-to-one matching. Cell scores are means over
gold items, scaled to [0, 100].
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .confmat import Alphabet, ConfMat
from .errors import FormatError, InputError
from .lexicon import Lexicon

PERSONS = ("husband", "husband's father", "husband's mother", "other person",
           "wife", "wife's father", "wife's mother")
CATEGORIES = ("name", "surname", "state", "location", "occupation")

Item = tuple  # (person, category, word)


@dataclass(frozen=True)
class GoldRecord:
    record_id: str
    items: tuple  # (person, category, word) in reading order


def levenshtein(a: str, b: str) -> int:
    """Edit distance with unit costs; two-row iterative DP."""
    if a == b:
        return 0
    if not a:
        return len(b)
    if not b:
        return len(a)
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        cur = [i] + [0] * len(b)
        for j, cb in enumerate(b, start=1):
            cur[j] = min(prev[j] + 1,
                         cur[j - 1] + 1,
                         prev[j - 1] + (ca != cb))
        prev = cur
    return prev[-1]


def character_accuracy(predicted: str, gold: str) -> float:
    if not gold:
        raise InputError("empty gold word")
    return max(0.0, 1.0 - levenshtein(predicted, gold) / len(gold))


def item_score(predicted: Item | None, gold: Item) -> float:
    """Character accuracy when person and category match, else 0."""
    g_person, g_category, g_word = gold
    if not g_word:
        raise InputError("empty gold word")
    if predicted is None:
        return 0.0
    p_person, p_category, p_word = predicted
    if (p_person, p_category) != (g_person, g_category):
        return 0.0
    return character_accuracy(p_word, g_word)


@dataclass(frozen=True)
class ScoreTable:
    """Mean scores (0..100) per populated (person, category) cell."""

    cells: dict
    counts: dict
    overall: float

    def cell(self, person: str, category: str) -> float | None:
        return self.cells.get((person, category))

    def format(self) -> str:
        name_w = max(len(p) for p in PERSONS)
        lines = [" " * name_w + "".join(f"{c:>12}" for c in CATEGORIES)]
        for person in PERSONS:
            row = f"{person:<{name_w}}"
            for category in CATEGORIES:
                v = self.cells.get((person, category))
                row += f"{'-':>12}" if v is None else f"{v:>12.2f}"
            lines.append(row)
        lines.append(f"{'overall':<{name_w}}{self.overall:>12.2f}")
        return "\n".join(lines)


def _items_of(prediction) -> tuple[str, list[Item]]:
    if hasattr(prediction, "record_id") and hasattr(prediction, "items"):
        items = prediction.items() if callable(prediction.items) else prediction.items
        return prediction.record_id, list(items)
    record_id, items = prediction
    return record_id, list(items)


def score_corpus(predictions: Iterable, gold: Sequence[GoldRecord]) -> ScoreTable:
    """Aggregate item scores per (person, category) cell and overall.

    `predictions` holds RecordResults or (record_id, items) pairs; every
    prediction's record id must exist in the gold list.
    """
    gold_by_id: dict[str, GoldRecord] = {}
    for g in gold:
        if g.record_id in gold_by_id:
            raise InputError(f"duplicate gold record id {g.record_id!r}")
        gold_by_id[g.record_id] = g

    pred_by_id: dict[str, list[Item]] = {}
    for prediction in predictions:
        record_id, items = _items_of(prediction)
        if record_id not in gold_by_id:
            raise InputError(f"unknown record id {record_id!r}")
        pred_by_id.setdefault(record_id, []).extend(items)

    total = {}
    count = {}
    for g in gold:
        pred_slots: dict[tuple[str, str], list[Item]] = {}
        for item in pred_by_id.get(g.record_id, []):
            person, category, _ = item
            pred_slots.setdefault((person, category), []).append(item)
        used: dict[tuple[str, str], int] = {}
        for gold_item in g.items:
            person, category, _ = gold_item
            slot = (person, category)
            i = used.get(slot, 0)
            used[slot] = i + 1
            candidates = pred_slots.get(slot, [])
            predicted = candidates[i] if i < len(candidates) else None
            s = item_score(predicted, gold_item)
            total[slot] = total.get(slot, 0.0) + s
            count[slot] = count.get(slot, 0) + 1

    cells = {slot: 100.0 * total[slot] / count[slot] for slot in count}
    n = sum(count.values())
    overall = 100.0 * sum(total.values()) / n if n else 0.0
    return ScoreTable(cells, count, overall)


def load_gold(path) -> list[GoldRecord]:
    """Gold file: `record_id<TAB>person<TAB>category<TAB>word` per line."""
    by_id: dict[str, list[Item]] = {}
    order: list[str] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip():
                continue
            fields = line.split("\t")
            if len(fields) != 4:
                raise FormatError("expected 4 tab-separated fields", lineno)
            record_id, person, category, word = fields
            if person not in PERSONS:
                raise FormatError(f"unknown person {person!r}", lineno)
            if category not in CATEGORIES:
                raise FormatError(f"unknown category {category!r}", lineno)
            if not word:
                raise FormatError("empty gold word", lineno)
            if record_id not in by_id:
                by_id[record_id] = []
                order.append(record_id)
            by_id[record_id].append((person, category, word))
    return [GoldRecord(rid, tuple(by_id[rid])) for rid in order]


def save_gold(gold: Sequence[GoldRecord], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for g in gold:
            for person, category, word in g.items:
                fh.write(f"{g.record_id}\t{person}\t{category}\t{word}\n")


# ---------------------------------------------------------------------------
# synthetic data
# ---------------------------------------------------------------------------

_NAC_BOUNDARY_P = 0.25


def synth_confmat(text: str, alphabet: Alphabet, noise: float = 0.0,
                  seed: int = 0, frames_per_char: int = 1) -> ConfMat:
    """Frame matrix whose greedy collapse at noise 0 is exactly `text`.

    Each character gets `frames_per_char` frames with probability 1 - noise on
    it and the rest spread uniformly; NaC frames are forced between equal
    neighbours and inserted at other boundaries with a seed-driven coin flip.
    """
    if not 0.0 <= noise < 1.0:
        raise InputError("noise must lie in [0, 1)")
    if frames_per_char < 1:
        raise InputError("frames_per_char must be >= 1")
    rng = np.random.default_rng(seed)
    nac = alphabet.nac_index
    labels: list[int] = []
    prev = None
    for ch in text:
        label = alphabet.label_of(ch)
        if prev is not None and label == prev:
            labels.append(nac)
        elif rng.random() < _NAC_BOUNDARY_P:
            labels.append(nac)
        labels.extend([label] * frames_per_char)
        prev = label
    if text and rng.random() < _NAC_BOUNDARY_P:
        labels.append(nac)
    if not text:
        labels = [nac]

    L = alphabet.num_labels
    rows = np.full((len(labels), L), noise / (L - 1))
    rows[np.arange(len(labels)), labels] = 1.0 - noise
    rows /= rows.sum(axis=1, keepdims=True)
    return ConfMat(rows, alphabet)


def _pick(rng, lex: Lexicon) -> str:
    r = rng.random()
    acc = 0.0
    for word, freq in lex.entries:
        acc += freq
        if r < acc:
            return word
    return lex.entries[-1][0]


def synth_record(rng, lexicons: Mapping[str, Lexicon],
                 opener: str = "rebere de", splitter: str = "ab"):
    """One two-person record: gold items plus its full text.

    Shape: `<opener> <husband words> <splitter> <wife words>`, each person
    being first name(s), a surname, then optional occupation and location.
    """
    def person_part(person: str):
        items = []
        words = []
        for _ in range(1 + (rng.random() < 0.3)):
            w = _pick(rng, lexicons["firstname"])
            items.append((person, "name", w))
            words.append(w)
        w = _pick(rng, lexicons["surname"])
        items.append((person, "surname", w))
        words.append(w)
        if rng.random() < 0.7:
            w = _pick(rng, lexicons["occupation"])
            items.append((person, "occupation", w))
            words.append(w)
        if rng.random() < 0.6:
            w = _pick(rng, lexicons["location"])
            items.append((person, "location", w))
            words.append(w)
        return items, words

    h_items, h_words = person_part("husband")
    w_items, w_words = person_part("wife")
    text = f"{opener} {' '.join(h_words)} {splitter} {' '.join(w_words)}"
    return h_items + w_items, text


def split_into_lines(rng, text: str, max_lines: int = 3) -> list[str]:
    """Split at word gaps; the joining spaces are dropped so that concat with
    the insert-space policy reconstructs the original text."""
    words = text.split(" ")
    n_lines = 1 + int(rng.integers(0, max_lines))
    n_lines = min(n_lines, len(words))
    if n_lines <= 1:
        return [text]
    gaps = sorted(rng.choice(np.arange(1, len(words)), size=n_lines - 1,
                             replace=False).tolist())
    lines = []
    start = 0
    for gap in gaps + [len(words)]:
        lines.append(" ".join(words[start:gap]))
        start = gap
    return lines


def synth_corpus(n_records: int, alphabet: Alphabet,
                 lexicons: Mapping[str, Lexicon], noise: float = 0.0,
                 seed: int = 0, frames_per_char: int = 1):
    """Gold records plus per-line ConfMats for end-to-end tests."""
    rng = np.random.default_rng(seed)
    gold = []
    records = []
    for r in range(n_records):
        items, text = synth_record(rng, lexicons)
        lines = split_into_lines(rng, text)
        cms = [synth_confmat(line, alphabet, noise,
                             seed=int(rng.integers(2 ** 31)),
                             frames_per_char=frames_per_char)
               for line in lines]
        gold.append(GoldRecord(str(r), tuple(items)))
        records.append(cms)
    return gold, records
