"""Regex-constrained decoding of confidence matrices.

decode() maximizes, over character strings accepted by the automaton, the
max-approximation CTC path probability times the automaton path weight. The
search is a frame-synchronous DP over (automaton state, last emitted label)
keys with optional beam pruning; per frame a state may emit NaC (stay), re-emit
its last character (collapsed repeat, no automaton move), or take an arc for a
character that differs from the last one (a doubled character needs an
intervening NaC).

The per-frame inner loop runs in the compiled kernel when the extension built,
else in the pure-Python twin. Set CTCREX_KERNEL=python to force the fallback.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, replace

import numpy as np

from .automaton import Automaton
from .confmat import ConfMat, concat
from .errors import InputError

if os.environ.get("CTCREX_KERNEL", "").lower() == "python":
    from . import _kernel_py as _default_kernel
else:
    try:
        from . import _kernel as _default_kernel  # type: ignore[attr-defined]
    except ImportError:
        from . import _kernel_py as _default_kernel

DEFAULT_BEAM_WIDTH = 256


def active_kernel_name() -> str:
    return _default_kernel.KERNEL_NAME


@dataclass(frozen=True)
class Span:
    category: str
    person: str | None
    char_start: int
    char_end: int
    frame_start: int
    frame_end: int
    text: str


@dataclass(frozen=True)
class Decoding:
    text: str
    log_score: float
    alignment: tuple[int, ...]  # emission frame of each character
    path_weight: float          # sum of arc weights on the winning path
    char_tags: tuple            # (category, person) or None per character
    spans: tuple[Span, ...]


@dataclass(frozen=True)
class NoParse:
    """First-class no-result: the automaton accepts nothing the matrix allows."""
    reason: str


@dataclass(frozen=True)
class Region:
    person: str
    frame_start: int
    frame_end: int
    decoding: Decoding | None
    spans: tuple[Span, ...]
    diagnostic: str = ""


@dataclass(frozen=True)
class RecordResult:
    record_id: str
    ok: bool
    diagnostic: str
    regions: tuple[Region, ...]

    def items(self) -> list[tuple[str | None, str, str]]:
        """(person, category, word) triples in reading order."""
        out = []
        for region in self.regions:
            for span in region.spans:
                out.append((span.person, span.category, span.text))
        return out


def _chain_of(bp, bp_prev, bp_frame, bp_arc):
    emissions = []
    j = int(bp)
    while j >= 0:
        emissions.append((int(bp_frame[j]), int(bp_arc[j])))
        j = int(bp_prev[j])
    emissions.reverse()
    return emissions


def extract_spans(decoding: Decoding) -> tuple[Span, ...]:
    """Group consecutive characters sharing one (category, person) tag.

    Untagged characters (keywords, whitespace) belong to no span. Frame ranges
    are half-open over emission frames.
    """
    spans = []
    tags = decoding.char_tags
    n = len(tags)
    i = 0
    while i < n:
        tag = tags[i]
        if tag is None:
            i += 1
            continue
        j = i
        while j < n and tags[j] == tag:
            j += 1
        spans.append(Span(tag[0], tag[1], i, j,
                          decoding.alignment[i], decoding.alignment[j - 1] + 1,
                          decoding.text[i:j]))
        i = j
    return tuple(spans)


def decode(cm: ConfMat, a: Automaton,
           beam_width: int | None = DEFAULT_BEAM_WIDTH,
           kernel=None) -> Decoding | NoParse:
    """Best accepted character sequence for `cm` under automaton `a`.

    `beam_width=None` disables pruning (exact search). Returns NoParse when no
    accepted sequence with nonzero probability exists. Ties on the final score
    prefer the lexicographically smaller text.
    """
    if a.alphabet is not None and a.alphabet != cm.alphabet:
        raise InputError("alphabet mismatch between ConfMat and automaton")
    if beam_width is None:
        width = 0
    else:
        width = int(beam_width)
        if width < 1:
            raise InputError("beam_width must be positive or None")
    kern = kernel or _default_kernel
    tables = a.tables(cm.alphabet)
    L = cm.num_labels
    logp = np.ascontiguousarray(cm.log_rows())
    keys, scores, bps, bp_prev, bp_frame, bp_arc = kern.run_beam(
        logp, cm.alphabet.nac_index, a.n_states, a.start,
        tables.row_ptr, tables.arc_dst, tables.arc_label, tables.arc_weight,
        tables.char_key, width)

    final = [i for i, k in enumerate(keys) if tables.accepting[int(k) // L]]
    if not final:
        return NoParse("no accepted character sequence for this matrix")

    best_score = max(scores[i] for i in final)
    contenders = [i for i in final if scores[i] == best_score]
    best = contenders[0]
    if len(contenders) > 1:
        def sort_key(i):
            emissions = _chain_of(bps[i], bp_prev, bp_frame, bp_arc)
            cps = tuple(int(tables.char_key[tables.arc_label[arc]])
                        for _, arc in emissions)
            frames = tuple(f for f, _ in emissions)
            arcs = tuple(arc for _, arc in emissions)
            return (cps, frames, arcs)
        best = min(contenders, key=sort_key)

    emissions = _chain_of(bps[best], bp_prev, bp_frame, bp_arc)
    alphabet = cm.alphabet
    text = "".join(alphabet.char_of(int(tables.arc_label[arc]))
                   for _, arc in emissions)
    alignment = tuple(f for f, _ in emissions)
    path_weight = 0.0
    for _, arc in emissions:
        path_weight += float(tables.arc_weight[arc])
    char_tags = tuple(
        tables.tags[tables.arc_tag[arc]] if tables.arc_tag[arc] >= 0 else None
        for _, arc in emissions)
    d = Decoding(text, float(scores[best]), alignment, path_weight, char_tags, ())
    return replace(d, spans=extract_spans(d))


def decode_record(lines, coarse: Automaton, fine,
                  beam_width: int | None = DEFAULT_BEAM_WIDTH,
                  record_id: str = "", separator: str = "insert-space",
                  kernel=None) -> RecordResult:
    """Two-step decoding of one record.

    Step 1 decodes the concatenated line matrices with the coarse automaton,
    whose person-tagged spans split the record into regions. Step 2 decodes
    each region's frame slice with that person's fine automaton; span persons
    come from step 1 and categories from step 2. Frames outside every region
    are dropped.
    """
    lines = list(lines)
    if not lines:
        return RecordResult(record_id, True, "", ())
    record = concat(lines, policy=separator)
    step1 = decode(record, coarse, beam_width, kernel)
    if isinstance(step1, NoParse):
        return RecordResult(record_id, False, f"coarse: {step1.reason}", ())

    tags = step1.char_tags
    text = step1.text
    align = step1.alignment
    n = len(text)

    def person_at(i: int) -> str | None:
        t = tags[i]
        return t[1] if t is not None else None

    def free_whitespace(i: int) -> bool:
        return person_at(i) is None and text[i] in (" ", "\n")

    regions = []
    i = 0
    while i < n:
        person = person_at(i)
        if person is None:
            i += 1
            continue
        j = i
        while j < n and person_at(j) == person:
            j += 1
        # extend over adjacent untagged whitespace on both sides
        lo = i
        while lo > 0 and free_whitespace(lo - 1):
            lo -= 1
        hi = j
        while hi < n and free_whitespace(hi):
            hi += 1
        frame_start = align[lo]
        frame_end = align[hi] if hi < n else record.T
        regions.append((person, frame_start, frame_end))
        i = j

    out_regions = []
    for person, fs, fe in regions:
        if person not in fine:
            raise InputError(f"no fine automaton for person {person!r}")
        piece = ConfMat(record.rows[fs:fe], record.alphabet)
        step2 = decode(piece, fine[person], beam_width, kernel)
        if isinstance(step2, NoParse):
            out_regions.append(Region(person, fs, fe, None, (),
                                      f"region {person!r}: {step2.reason}"))
            continue
        spans = tuple(replace(s, person=person,
                              frame_start=s.frame_start + fs,
                              frame_end=s.frame_end + fs)
                      for s in step2.spans)
        out_regions.append(Region(person, fs, fe, step2, spans))
    return RecordResult(record_id, True, "", tuple(out_regions))


def decode_record_single(lines, grammar: Automaton,
                         beam_width: int | None = DEFAULT_BEAM_WIDTH,
                         record_id: str = "", separator: str = "insert-space",
                         kernel=None) -> RecordResult:
    """Single-pass variant: one automaton whose tags carry category and person."""
    lines = list(lines)
    if not lines:
        return RecordResult(record_id, True, "", ())
    record = concat(lines, policy=separator)
    d = decode(record, grammar, beam_width, kernel)
    if isinstance(d, NoParse):
        return RecordResult(record_id, False, d.reason, ())
    region = Region("", 0, record.T, d, d.spans)
    return RecordResult(record_id, True, "", (region,))
