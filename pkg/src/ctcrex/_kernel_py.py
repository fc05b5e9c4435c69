"""Pure-Python beam-search kernel.

Fallback implementation of the per-frame DP used by the decoder; the compiled
twin lives in `_kernel.pyx`. Both must produce identical output: search states
are keyed by (automaton state, last emitted label), merged by max score, and
exact score ties are resolved by comparing the reconstructed emission chains
(character codepoints, then emission frames, then arc ids), a total order that
makes the result independent of expansion order. Tying chains share their
older emissions in the backpointer DAG, so only the suffixes after the deepest
common ancestor are compared.
"""

from __future__ import annotations

import numpy as np

KERNEL_NAME = "python"

NEG_INF = float("-inf")


def run_beam(logp, nac, n_states, start, row_ptr, arc_dst, arc_label,
             arc_weight, char_key, beam_width):
    """Run the frame loop; beam_width 0 means unbounded.

    Returns (keys, scores, bps, bp_prev, bp_frame, bp_arc): the surviving
    search states after the last frame (keys = state * L + last, ascending)
    and the emission backpointer table they index into.
    """
    T, L = logp.shape
    row_ptr = row_ptr.tolist()
    arc_dst = arc_dst.tolist()
    arc_label = arc_label.tolist()
    arc_weight = arc_weight.tolist()
    char_key = char_key.tolist()

    bp_prev: list[int] = []
    bp_frame: list[int] = []
    bp_arc: list[int] = []
    bp_depth: list[int] = []

    def candidate_wins_tie(prev_bp, frame, arc, incumbent_bp):
        """True iff the candidate chain orders strictly before the incumbent.

        Chains are compared as (codepoints, frames, arc ids); the walk skips
        the shared prefix up to the deepest common backpointer node.
        """
        a_tail = []  # candidate elements, newest first
        b_tail = []
        ja, jb = prev_bp, incumbent_bp
        ext = arc >= 0
        da = (bp_depth[ja] if ja >= 0 else 0) + (1 if ext else 0)
        db = bp_depth[jb] if jb >= 0 else 0

        def pop_a():
            nonlocal ja, ext
            if ext:
                a_tail.append((char_key[arc_label[arc]], frame, arc))
                ext = False
            else:
                e = bp_arc[ja]
                a_tail.append((char_key[arc_label[e]], bp_frame[ja], e))
                ja = bp_prev[ja]

        def pop_b():
            nonlocal jb
            e = bp_arc[jb]
            b_tail.append((char_key[arc_label[e]], bp_frame[jb], e))
            jb = bp_prev[jb]

        while da > db:
            pop_a()
            da -= 1
        while db > da:
            pop_b()
            db -= 1
        while da > 0 and (ext or ja != jb):
            pop_a()
            pop_b()
            da -= 1
            db -= 1
        a_tail.reverse()
        b_tail.reverse()
        return ([e[0] for e in a_tail], [e[1] for e in a_tail],
                [e[2] for e in a_tail]) < \
               ([e[0] for e in b_tail], [e[1] for e in b_tail],
                [e[2] for e in b_tail])

    cur = {start * L + nac: (0.0, -1)}
    for t in range(T):
        row = logp[t].tolist()
        nxt: dict[int, tuple[float, int]] = {}

        def relax(key, cand, prev_bp, frame, arc):
            if cand == NEG_INF:
                return  # zero-probability paths can never recover
            ent = nxt.get(key)
            if ent is not None:
                if cand < ent[0]:
                    return
                if cand == ent[0] and not candidate_wins_tie(
                        prev_bp, frame, arc, ent[1]):
                    return
            if arc >= 0:
                bp_prev.append(prev_bp)
                bp_frame.append(frame)
                bp_arc.append(arc)
                bp_depth.append((bp_depth[prev_bp] if prev_bp >= 0 else 0) + 1)
                nxt[key] = (cand, len(bp_prev) - 1)
            else:
                nxt[key] = (cand, prev_bp)

        for key, (score, bp) in cur.items():
            q, last = divmod(key, L)
            relax(q * L + nac, score + row[nac], bp, -1, -1)
            if last != nac:
                relax(key, score + row[last], bp, -1, -1)
            for i in range(row_ptr[q], row_ptr[q + 1]):
                lbl = arc_label[i]
                if last == nac or lbl != last:
                    relax(arc_dst[i] * L + lbl,
                          score + row[lbl] + arc_weight[i], bp, t, i)

        if beam_width > 0 and len(nxt) > beam_width:
            ranked = sorted(nxt.items(), key=lambda kv: (-kv[1][0], kv[0]))
            nxt = dict(ranked[:beam_width])
        cur = nxt
        if not cur:
            break

    keys = sorted(cur)
    return (np.array(keys, dtype=np.int64),
            np.array([cur[k][0] for k in keys], dtype=np.float64),
            np.array([cur[k][1] for k in keys], dtype=np.int64),
            np.array(bp_prev, dtype=np.int64),
            np.array(bp_frame, dtype=np.int32),
            np.array(bp_arc, dtype=np.int32))
