"""Confidence matrices and the label-collapse map.

A ConfMat is a T x L row-stochastic matrix: one row per frame, one column per
label. Labels are the alphabet characters plus one NaC ("not a character")
garbage label. The collapse map first merges runs of identical labels and then
deletes NaCs, turning a label sequence into a character string.
"""

from __future__ import annotations

import io
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import FormatError, InputError

ROW_SUM_TOL = 1e-6

NAC_TOKEN = "<nac>"
SPACE_TOKEN = "<sp>"
NEWLINE_TOKEN = "<nl>"

_CHAR_TO_TOKEN = {" ": SPACE_TOKEN, "\n": NEWLINE_TOKEN}
_TOKEN_TO_CHAR = {SPACE_TOKEN: " ", NEWLINE_TOKEN: "\n"}


def char_to_token(ch: str) -> str:
    return _CHAR_TO_TOKEN.get(ch, ch)


def token_to_char(token: str) -> str:
    return _TOKEN_TO_CHAR.get(token, token)


class Alphabet:
    """Ordered character set plus the index of the NaC label.

    Label indices run over the characters with the NaC label spliced in at
    `nac_index`, so the label set has size len(characters) + 1.
    """

    __slots__ = ("characters", "nac_index", "_label_by_char")

    def __init__(self, characters: Iterable[str], nac_index: int = 0):
        chars = tuple(characters)
        for ch in chars:
            if len(ch) != 1:
                raise InputError(f"alphabet entries must be single characters, got {ch!r}")
            if ch.isspace() and ch not in (" ", "\n"):
                raise InputError(f"unsupported whitespace character in alphabet: {ch!r}")
        if len(set(chars)) != len(chars):
            raise InputError("alphabet characters must be pairwise distinct")
        if not 0 <= nac_index <= len(chars):
            raise InputError(f"nac_index {nac_index} outside label range 0..{len(chars)}")
        object.__setattr__(self, "characters", chars)
        object.__setattr__(self, "nac_index", nac_index)
        lookup = {}
        for label, ch in enumerate(chars):
            lookup[ch] = label if label < nac_index else label + 1
        object.__setattr__(self, "_label_by_char", lookup)

    def __setattr__(self, name, value):
        raise AttributeError("Alphabet is immutable")

    @property
    def num_labels(self) -> int:
        return len(self.characters) + 1

    def label_of(self, ch: str) -> int:
        try:
            return self._label_by_char[ch]
        except KeyError:
            raise InputError(f"character {ch!r} not in alphabet") from None

    def char_of(self, label: int) -> str:
        if label == self.nac_index:
            raise InputError("the NaC label has no character")
        if not 0 <= label < self.num_labels:
            raise InputError(f"label {label} out of range")
        return self.characters[label if label < self.nac_index else label - 1]

    def is_nac(self, label: int) -> bool:
        return label == self.nac_index

    def __contains__(self, ch: str) -> bool:
        return ch in self._label_by_char

    def labels(self) -> tuple[str, ...]:
        """Label tokens in label order, NaC rendered as its file token."""
        toks = [char_to_token(c) for c in self.characters]
        toks.insert(self.nac_index, NAC_TOKEN)
        return tuple(toks)

    def __eq__(self, other):
        return (isinstance(other, Alphabet)
                and self.characters == other.characters
                and self.nac_index == other.nac_index)

    def __hash__(self):
        return hash((self.characters, self.nac_index))

    def __repr__(self):
        return f"Alphabet({len(self.characters)} chars, nac_index={self.nac_index})"


class ConfMat:
    """Per-frame label probabilities. Immutable after construction.

    `validate=False` skips the row-stochasticity check; decoding never assumes
    normalized rows, but files and generators always produce stochastic ones.
    """

    __slots__ = ("rows", "alphabet")

    def __init__(self, rows, alphabet: Alphabet, validate: bool = True):
        mat = np.array(rows, dtype=np.float64, order="C")
        if mat.size == 0:
            mat = mat.reshape(0, alphabet.num_labels)
        if mat.ndim != 2 or mat.shape[1] != alphabet.num_labels:
            raise InputError(
                f"expected a T x {alphabet.num_labels} matrix, got shape {mat.shape}")
        if validate and mat.shape[0] > 0:
            if mat.min() < 0.0 or mat.max() > 1.0:
                raise InputError("probabilities must lie in [0, 1]")
            sums = mat.sum(axis=1)
            bad = np.nonzero(np.abs(sums - 1.0) > ROW_SUM_TOL)[0]
            if bad.size:
                t = int(bad[0])
                raise InputError(f"row {t} not stochastic (sum {sums[t]:.9g})")
        mat.setflags(write=False)
        object.__setattr__(self, "rows", mat)
        object.__setattr__(self, "alphabet", alphabet)

    def __setattr__(self, name, value):
        raise AttributeError("ConfMat is immutable")

    @property
    def T(self) -> int:
        return self.rows.shape[0]

    @property
    def num_labels(self) -> int:
        return self.rows.shape[1]

    def log_rows(self) -> np.ndarray:
        """Natural-log probabilities; zero entries map to -inf."""
        with np.errstate(divide="ignore"):
            return np.log(self.rows)

    def __repr__(self):
        return f"ConfMat(T={self.T}, L={self.num_labels})"


def _check_labels(labels: Sequence[int], num_labels: int) -> None:
    for l in labels:
        if not 0 <= l < num_labels:
            raise InputError(f"label {l} out of range 0..{num_labels - 1}")


def collapse(labels: Sequence[int], alphabet: Alphabet) -> str:
    """Merge runs of identical labels, then delete NaCs."""
    _check_labels(labels, alphabet.num_labels)
    out = []
    prev = None
    for l in labels:
        if l != prev and not alphabet.is_nac(l):
            out.append(alphabet.char_of(l))
        prev = l
    return "".join(out)


def seq_probability(labels: Sequence[int], cm: ConfMat) -> float:
    """Product of per-frame label probabilities; 0 when lengths mismatch."""
    _check_labels(labels, cm.num_labels)
    if len(labels) != cm.T:
        return 0.0
    p = 1.0
    for t, l in enumerate(labels):
        p *= cm.rows[t, l]
    return p


def log_seq_probability(labels: Sequence[int], cm: ConfMat) -> float:
    """Log-domain variant of seq_probability; the mismatch case is -inf."""
    _check_labels(labels, cm.num_labels)
    if len(labels) != cm.T:
        return float("-inf")
    logp = cm.log_rows()
    s = 0.0
    for t, l in enumerate(labels):
        s += logp[t, l]
    return s


def greedy_best_path(cm: ConfMat) -> tuple[str, float]:
    """Collapse of the per-frame argmax labels and its log score.

    Argmax ties resolve to the lowest label index. The summation order matches
    the decoder's frame-sequential accumulation.
    """
    if cm.T == 0:
        return "", 0.0
    best = np.argmax(cm.rows, axis=1)
    logp = cm.log_rows()
    score = 0.0
    for t in range(cm.T):
        score += logp[t, best[t]]
    return collapse([int(l) for l in best], cm.alphabet), score


def concat(parts: Sequence[ConfMat], policy: str = "insert-space",
           alphabet: Alphabet | None = None) -> ConfMat:
    """Row-wise concatenation of ConfMats sharing one alphabet.

    With policy "insert-space" one synthetic frame with probability 1 on the
    space character is inserted between consecutive parts; "none" concatenates
    plainly. An empty parts list needs an explicit alphabet.
    """
    if policy not in ("insert-space", "none"):
        raise InputError(f"unknown separator policy {policy!r}")
    if not parts:
        if alphabet is None:
            raise InputError("concat of zero parts needs an explicit alphabet")
        return ConfMat(np.zeros((0, alphabet.num_labels)), alphabet)
    ab = parts[0].alphabet
    for p in parts[1:]:
        if p.alphabet != ab:
            raise InputError("all parts must share one alphabet")
    if alphabet is not None and alphabet != ab:
        raise InputError("explicit alphabet disagrees with the parts")
    blocks = []
    sep = None
    if policy == "insert-space" and len(parts) > 1:
        sep = np.zeros((1, ab.num_labels))
        sep[0, ab.label_of(" ")] = 1.0
    for i, p in enumerate(parts):
        if i and sep is not None:
            blocks.append(sep)
        blocks.append(p.rows)
    return ConfMat(np.vstack(blocks), ab)


# ---------------------------------------------------------------------------
# text format
#
#   CONFMAT 1
#   <T> <L>
#   <L label tokens; NaC is <nac>, space <sp>, linebreak <nl>>
#   T rows of L floats
# ---------------------------------------------------------------------------

def save_confmat(cm: ConfMat, dest) -> None:
    """Write the text format; floats carry 17 significant digits so a
    save/load round trip is exact."""
    own = isinstance(dest, (str, Path))
    fh = open(dest, "w", encoding="utf-8") if own else dest
    try:
        fh.write("CONFMAT 1\n")
        fh.write(f"{cm.T} {cm.num_labels}\n")
        fh.write(" ".join(cm.alphabet.labels()) + "\n")
        for row in cm.rows:
            fh.write(" ".join(f"{v:.17g}" for v in row) + "\n")
    finally:
        if own:
            fh.close()


def parse_alphabet_tokens(tokens: Sequence[str], line: int | None = None) -> Alphabet:
    if tokens.count(NAC_TOKEN) != 1:
        raise FormatError(f"expected exactly one {NAC_TOKEN} token", line)
    nac_index = tokens.index(NAC_TOKEN)
    chars = []
    for tok in tokens:
        if tok == NAC_TOKEN:
            continue
        ch = token_to_char(tok)
        if len(ch) != 1:
            raise FormatError(f"label token {tok!r} is not a single character", line)
        chars.append(ch)
    try:
        return Alphabet(chars, nac_index)
    except InputError as exc:
        raise FormatError(str(exc), line) from None


def load_confmat(src) -> ConfMat:
    own = isinstance(src, (str, Path))
    fh = open(src, "r", encoding="utf-8") if own else src
    try:
        lines = fh.read().split("\n")
    finally:
        if own:
            fh.close()
    if not lines or lines[0].strip() != "CONFMAT 1":
        raise FormatError("expected header 'CONFMAT 1'", 1)
    if len(lines) < 3:
        raise FormatError("truncated file: missing size or label lines", 2)
    dims = lines[1].split()
    if len(dims) != 2:
        raise FormatError("expected '<T> <L>'", 2)
    try:
        t_decl, l_decl = int(dims[0]), int(dims[1])
    except ValueError:
        raise FormatError("expected '<T> <L>'", 2) from None
    if t_decl < 0 or l_decl < 2:
        raise FormatError(f"bad dimensions T={t_decl} L={l_decl}", 2)
    tokens = lines[2].split()
    if len(tokens) != l_decl:
        raise FormatError(f"expected {l_decl} label tokens, got {len(tokens)}", 3)
    alphabet = parse_alphabet_tokens(tokens, line=3)

    body = lines[3:]
    rows = np.zeros((t_decl, l_decl))
    t = 0
    for i, raw in enumerate(body):
        if not raw.strip():
            continue
        lineno = 4 + i
        if t >= t_decl:
            raise FormatError(f"header declared {t_decl} rows but more follow", lineno)
        vals = raw.split()
        if len(vals) != l_decl:
            raise FormatError(f"expected {l_decl} values, got {len(vals)}", lineno)
        try:
            row = np.array([float(v) for v in vals])
        except ValueError:
            raise FormatError("non-numeric probability value", lineno) from None
        if row.min() < 0.0 or row.max() > 1.0:
            raise FormatError("probability outside [0, 1]", lineno)
        if abs(row.sum() - 1.0) > ROW_SUM_TOL:
            raise FormatError(f"row not stochastic (sum {row.sum():.9g})", lineno)
        rows[t] = row
        t += 1
    if t != t_decl:
        raise FormatError(f"header declared {t_decl} rows but {t} present",
                          3 + len(body))
    return ConfMat(rows, alphabet)


def loads_confmat(text: str) -> ConfMat:
    return load_confmat(io.StringIO(text))


def load_alphabet(path) -> Alphabet:
    """Alphabet file: one label token per line, <nac> included once."""
    with open(path, "r", encoding="utf-8") as fh:
        raw = fh.read().split("\n")
    tokens = [ln for ln in raw if ln != ""]
    if not tokens:
        raise FormatError("empty alphabet file", 1)
    return parse_alphabet_tokens(tokens)


def load_manifest(path) -> list[list[Path]]:
    """Manifest: ConfMat paths one per line, blank lines separate records.

    Relative paths resolve against the manifest's directory.
    """
    base = Path(path).parent
    records: list[list[Path]] = []
    current: list[Path] = []
    with open(path, "r", encoding="utf-8") as fh:
        for raw in fh:
            name = raw.strip()
            if not name:
                if current:
                    records.append(current)
                    current = []
                continue
            p = Path(name)
            current.append(p if p.is_absolute() else base / p)
    if current:
        records.append(current)
    return records
