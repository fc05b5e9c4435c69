"""Exponential-time reference decoder used by the test suite.

Enumerates every label sequence of the matrix's length, collapses each one,
filters by automaton acceptance and maximizes the same objective as decode():
best label-sequence log probability plus best accepting-path weight. Ties
resolve to the lexicographically smaller string, matching decode().
"""

from __future__ import annotations

from dataclasses import replace

import numpy as np

from .automaton import Automaton, accepts
from .confmat import ConfMat, collapse
from .decoder import Decoding, NoParse, extract_spans
from .errors import EnumerationCapError, InputError

ENUMERATION_CAP = 10_000_000

# collapsed strings for every label sequence, keyed by (alphabet, T)
_collapse_cache: dict = {}


def _all_collapsed(alphabet, T: int) -> list[str]:
    key = (alphabet, T)
    cached = _collapse_cache.get(key)
    if cached is None:
        L = alphabet.num_labels
        cached = [collapse(seq, alphabet) for seq in _all_seqs(L, T)]
        _collapse_cache[key] = cached
    return cached


def _all_seqs(L: int, T: int) -> np.ndarray:
    if T == 0:
        return np.zeros((1, 0), dtype=np.int64)
    grids = np.meshgrid(*([np.arange(L)] * T), indexing="ij")
    return np.stack(grids, axis=-1).reshape(-1, T)


def brute_force_decode(cm: ConfMat, a: Automaton,
                       cap: int = ENUMERATION_CAP) -> Decoding | NoParse:
    """Literal argmax over all label sequences; refuses when L**T exceeds cap."""
    if a.alphabet is not None and a.alphabet != cm.alphabet:
        raise InputError("alphabet mismatch between ConfMat and automaton")
    L, T = cm.num_labels, cm.T
    if L ** T > cap:
        raise EnumerationCapError(
            f"{L}**{T} label sequences exceed the cap of {cap}")

    seqs = _all_seqs(L, T)
    logp = cm.log_rows()
    if T:
        scores = logp[np.arange(T), seqs].sum(axis=1)
    else:
        scores = np.zeros(1)
    strings = _all_collapsed(cm.alphabet, T)

    best_ctc: dict[str, float] = {}
    best_seq: dict[str, int] = {}
    for i, z in enumerate(strings):
        sc = scores[i]
        if z not in best_ctc or sc > best_ctc[z]:
            best_ctc[z] = sc
            best_seq[z] = i

    best_z = None
    best_obj = None
    best_acc = None
    for z in best_ctc:
        if best_ctc[z] == float("-inf"):
            continue  # zero-probability candidates are not decodings
        acc = accepts(a, z)
        if not acc.accepted:
            continue
        obj = best_ctc[z] + acc.weight
        if (best_obj is None or obj > best_obj
                or (obj == best_obj and z < best_z)):
            best_z, best_obj, best_acc = z, obj, acc
    if best_z is None:
        return NoParse("no accepted character sequence for this matrix")

    seq = seqs[best_seq[best_z]]
    nac = cm.alphabet.nac_index
    alignment = []
    prev = None
    for t, l in enumerate(seq):
        if l != prev and l != nac:
            alignment.append(t)
        prev = l
    d = Decoding(best_z, float(best_obj), tuple(alignment),
                 float(best_acc.weight), best_acc.char_tags or (), ())
    return replace(d, spans=extract_spans(d))
