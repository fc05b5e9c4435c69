"""Line-oriented serialization of decoding results.

One block of `key<TAB>value` lines per record, region and span, separated by
blank lines. Values escape backslash, tab and newline so the format stays one
line per key. The span blocks are what the scorer consumes.
"""

from __future__ import annotations

from pathlib import Path
from typing import Iterable

from .decoder import RecordResult
from .errors import FormatError


def _esc(s: str) -> str:
    return s.replace("\\", "\\\\").replace("\t", "\\t").replace("\n", "\\n")


def _unesc(s: str) -> str:
    out = []
    i = 0
    while i < len(s):
        ch = s[i]
        if ch == "\\" and i + 1 < len(s):
            nxt = s[i + 1]
            out.append({"\\": "\\", "t": "\t", "n": "\n"}.get(nxt, nxt))
            i += 2
        else:
            out.append(ch)
            i += 1
    return "".join(out)


def format_results(results: Iterable[RecordResult]) -> str:
    blocks = []
    for rr in results:
        lines = [f"record\t{rr.record_id}"]
        if not rr.ok:
            lines.append("status\tnoparse")
            lines.append(f"reason\t{_esc(rr.diagnostic)}")
            blocks.append("\n".join(lines))
            continue
        lines.append("status\tok")
        blocks.append("\n".join(lines))
        for region in rr.regions:
            lines = [f"region\t{_esc(region.person)}",
                     f"frames\t{region.frame_start} {region.frame_end}"]
            if region.decoding is None:
                lines.append(f"noparse\t{_esc(region.diagnostic)}")
                blocks.append("\n".join(lines))
                continue
            lines.append(f"text\t{_esc(region.decoding.text)}")
            lines.append(f"score\t{region.decoding.log_score:.9g}")
            blocks.append("\n".join(lines))
            for span in region.spans:
                blocks.append("\n".join([
                    f"span\t{_esc(span.category)}",
                    f"person\t{_esc(span.person or '')}",
                    f"text\t{_esc(span.text)}",
                    f"chars\t{span.char_start} {span.char_end}",
                    f"frames\t{span.frame_start} {span.frame_end}",
                    f"score\t{region.decoding.log_score:.9g}",
                ]))
    return "\n\n".join(blocks) + ("\n" if blocks else "")


def write_results(results: Iterable[RecordResult], dest) -> None:
    own = isinstance(dest, (str, Path))
    fh = open(dest, "w", encoding="utf-8") if own else dest
    try:
        fh.write(format_results(results))
    finally:
        if own:
            fh.close()


def parse_predictions(src) -> dict[str, list[tuple]]:
    """Extract (person, category, word) items per record id, in file order."""
    own = isinstance(src, (str, Path))
    fh = open(src, "r", encoding="utf-8") if own else src
    try:
        text = fh.read()
    finally:
        if own:
            fh.close()

    records: dict[str, list[tuple]] = {}
    record_id = None
    span: dict[str, str] | None = None

    def finish_span():
        nonlocal span
        if span is None:
            return
        if record_id is None:
            raise FormatError("span block before any record block")
        records[record_id].append(
            (span.get("person") or None, span.get("span", ""),
             span.get("text", "")))
        span = None

    for lineno, raw in enumerate(text.split("\n"), start=1):
        if not raw.strip():
            finish_span()
            continue
        if "\t" not in raw:
            raise FormatError("expected 'key<TAB>value'", lineno)
        key, value = raw.split("\t", 1)
        if key == "record":
            finish_span()
            record_id = value
            records.setdefault(record_id, [])
        elif key == "span":
            finish_span()
            span = {"span": _unesc(value)}
        elif span is not None:
            span[key] = _unesc(value)
        # region/status lines carry no items
    finish_span()
    return records
