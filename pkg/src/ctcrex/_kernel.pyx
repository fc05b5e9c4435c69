# cython: boundscheck=False, wraparound=False, cdivision=True
# cython: language_level=3
"""Compiled beam-search kernel; the contract and the tie-break rules are
documented on the pure-Python twin in _kernel_py.py. Both implementations
must return identical results."""

import numpy as np

cimport numpy as cnp
from libc.math cimport INFINITY

cnp.import_array()

KERNEL_NAME = "cython"


cdef class _Beam:
    cdef cnp.int64_t[::1] stamp
    cdef double[::1] dscore
    cdef cnp.int64_t[::1] dbp
    cdef object bp_prev_np, bp_frame_np, bp_arc_np, bp_depth_np
    cdef cnp.int64_t[::1] bp_prev
    cdef cnp.int32_t[::1] bp_frame
    cdef cnp.int32_t[::1] bp_arc
    cdef cnp.int32_t[::1] bp_depth
    cdef Py_ssize_t bp_n, bp_cap
    cdef object nxt_keys_np
    cdef cnp.int64_t[::1] nxt_keys
    cdef Py_ssize_t nxt_n
    cdef cnp.int64_t t_stamp
    cdef const cnp.int32_t[::1] arc_label
    cdef const cnp.int64_t[::1] char_key

    def __cinit__(self, Py_ssize_t n_keys, const cnp.int32_t[::1] arc_label,
                  const cnp.int64_t[::1] char_key):
        self.stamp = np.full(n_keys, -1, dtype=np.int64)
        self.dscore = np.zeros(n_keys, dtype=np.float64)
        self.dbp = np.zeros(n_keys, dtype=np.int64)
        self.bp_cap = 1024
        self.bp_prev_np = np.empty(self.bp_cap, dtype=np.int64)
        self.bp_frame_np = np.empty(self.bp_cap, dtype=np.int32)
        self.bp_arc_np = np.empty(self.bp_cap, dtype=np.int32)
        self.bp_depth_np = np.empty(self.bp_cap, dtype=np.int32)
        self.bp_prev = self.bp_prev_np
        self.bp_frame = self.bp_frame_np
        self.bp_arc = self.bp_arc_np
        self.bp_depth = self.bp_depth_np
        self.bp_n = 0
        self.nxt_keys_np = np.empty(n_keys, dtype=np.int64)
        self.nxt_keys = self.nxt_keys_np
        self.nxt_n = 0
        self.t_stamp = -1
        self.arc_label = arc_label
        self.char_key = char_key

    cdef void begin_frame(self, cnp.int64_t t):
        self.t_stamp = t
        self.nxt_n = 0

    cdef cnp.int64_t _make_bp(self, cnp.int64_t prev_bp, int frame, int arc):
        if arc < 0:
            return prev_bp
        if self.bp_n == self.bp_cap:
            self.bp_cap *= 2
            grown_prev = np.empty(self.bp_cap, dtype=np.int64)
            grown_frame = np.empty(self.bp_cap, dtype=np.int32)
            grown_arc = np.empty(self.bp_cap, dtype=np.int32)
            grown_depth = np.empty(self.bp_cap, dtype=np.int32)
            grown_prev[:self.bp_n] = self.bp_prev_np[:self.bp_n]
            grown_frame[:self.bp_n] = self.bp_frame_np[:self.bp_n]
            grown_arc[:self.bp_n] = self.bp_arc_np[:self.bp_n]
            grown_depth[:self.bp_n] = self.bp_depth_np[:self.bp_n]
            self.bp_prev_np, self.bp_frame_np = grown_prev, grown_frame
            self.bp_arc_np, self.bp_depth_np = grown_arc, grown_depth
            self.bp_prev = grown_prev
            self.bp_frame = grown_frame
            self.bp_arc = grown_arc
            self.bp_depth = grown_depth
        self.bp_prev[self.bp_n] = prev_bp
        self.bp_frame[self.bp_n] = frame
        self.bp_arc[self.bp_n] = arc
        self.bp_depth[self.bp_n] = \
            (self.bp_depth[prev_bp] if prev_bp >= 0 else 0) + 1
        self.bp_n += 1
        return self.bp_n - 1

    cdef bint _candidate_wins_tie(self, cnp.int64_t prev_bp, int frame,
                                  int arc, cnp.int64_t incumbent_bp):
        """True iff the candidate chain orders strictly before the incumbent,
        comparing (codepoints, frames, arc ids) on the suffixes after the
        deepest common backpointer node."""
        cdef list a_tail = []
        cdef list b_tail = []
        cdef cnp.int64_t ja = prev_bp
        cdef cnp.int64_t jb = incumbent_bp
        cdef bint ext = arc >= 0
        cdef cnp.int64_t da = (self.bp_depth[ja] if ja >= 0 else 0) + (1 if ext else 0)
        cdef cnp.int64_t db = self.bp_depth[jb] if jb >= 0 else 0
        cdef int e

        while da > db:
            if ext:
                a_tail.append((self.char_key[self.arc_label[arc]], frame, arc))
                ext = False
            else:
                e = self.bp_arc[ja]
                a_tail.append((self.char_key[self.arc_label[e]],
                               self.bp_frame[ja], e))
                ja = self.bp_prev[ja]
            da -= 1
        while db > da:
            e = self.bp_arc[jb]
            b_tail.append((self.char_key[self.arc_label[e]],
                           self.bp_frame[jb], e))
            jb = self.bp_prev[jb]
            db -= 1
        while da > 0 and (ext or ja != jb):
            if ext:
                a_tail.append((self.char_key[self.arc_label[arc]], frame, arc))
                ext = False
            else:
                e = self.bp_arc[ja]
                a_tail.append((self.char_key[self.arc_label[e]],
                               self.bp_frame[ja], e))
                ja = self.bp_prev[ja]
            e = self.bp_arc[jb]
            b_tail.append((self.char_key[self.arc_label[e]],
                           self.bp_frame[jb], e))
            jb = self.bp_prev[jb]
            da -= 1
            db -= 1
        a_tail.reverse()
        b_tail.reverse()
        return ([x[0] for x in a_tail], [x[1] for x in a_tail],
                [x[2] for x in a_tail]) < \
               ([x[0] for x in b_tail], [x[1] for x in b_tail],
                [x[2] for x in b_tail])

    cdef void relax(self, cnp.int64_t key, double cand, cnp.int64_t prev_bp,
                    int frame, int arc):
        if cand == -INFINITY:
            return  # zero-probability paths can never recover
        if self.stamp[key] != self.t_stamp:
            self.stamp[key] = self.t_stamp
            self.dscore[key] = cand
            self.dbp[key] = self._make_bp(prev_bp, frame, arc)
            self.nxt_keys[self.nxt_n] = key
            self.nxt_n += 1
            return
        if cand > self.dscore[key]:
            self.dscore[key] = cand
            self.dbp[key] = self._make_bp(prev_bp, frame, arc)
        elif cand == self.dscore[key]:
            if self._candidate_wins_tie(prev_bp, frame, arc, self.dbp[key]):
                self.dbp[key] = self._make_bp(prev_bp, frame, arc)


def run_beam(const double[:, ::1] logp, int nac, int n_states, int start,
             const cnp.int32_t[::1] row_ptr, const cnp.int32_t[::1] arc_dst,
             const cnp.int32_t[::1] arc_label, const double[::1] arc_weight,
             const cnp.int64_t[::1] char_key, int beam_width):
    cdef Py_ssize_t T = logp.shape[0]
    cdef Py_ssize_t L = logp.shape[1]
    cdef Py_ssize_t n_keys = (<Py_ssize_t> n_states) * L

    cdef _Beam beam = _Beam(n_keys, arc_label, char_key)

    cur_keys_np = np.empty(n_keys, dtype=np.int64)
    cur_scores_np = np.empty(n_keys, dtype=np.float64)
    cur_bps_np = np.empty(n_keys, dtype=np.int64)
    cdef cnp.int64_t[::1] cur_keys = cur_keys_np
    cdef double[::1] cur_scores = cur_scores_np
    cdef cnp.int64_t[::1] cur_bps = cur_bps_np
    cur_keys[0] = (<cnp.int64_t> start) * L + nac
    cur_scores[0] = 0.0
    cur_bps[0] = -1
    cdef Py_ssize_t m = 1

    cdef Py_ssize_t t, e, i, keep
    cdef cnp.int64_t key, bp, q, last
    cdef double score, w_nac
    cdef int lbl

    for t in range(T):
        beam.begin_frame(t)
        w_nac = logp[t, nac]
        for e in range(m):
            key = cur_keys[e]
            score = cur_scores[e]
            bp = cur_bps[e]
            q = key // L
            last = key - q * L
            beam.relax(q * L + nac, score + w_nac, bp, -1, -1)
            if last != nac:
                beam.relax(key, score + logp[t, last], bp, -1, -1)
            for i in range(row_ptr[q], row_ptr[q + 1]):
                lbl = arc_label[i]
                if last == nac or lbl != last:
                    beam.relax((<cnp.int64_t> arc_dst[i]) * L + lbl,
                               score + logp[t, lbl] + arc_weight[i], bp, t, i)
        keys_arr = np.asarray(beam.nxt_keys_np[:beam.nxt_n]).copy()
        scores_arr = np.asarray(beam.dscore)[keys_arr]
        bps_arr = np.asarray(beam.dbp)[keys_arr]
        if beam_width > 0 and keys_arr.shape[0] > beam_width:
            order = np.lexsort((keys_arr, -scores_arr))[:beam_width]
            keys_arr = keys_arr[order]
            scores_arr = scores_arr[order]
            bps_arr = bps_arr[order]
        keep = keys_arr.shape[0]
        for e in range(keep):
            cur_keys[e] = keys_arr[e]
            cur_scores[e] = scores_arr[e]
            cur_bps[e] = bps_arr[e]
        m = keep
        if m == 0:
            break

    final_keys = np.asarray(cur_keys_np[:m]).copy()
    final_scores = np.asarray(cur_scores_np[:m]).copy()
    final_bps = np.asarray(cur_bps_np[:m]).copy()
    order = np.argsort(final_keys)
    return (final_keys[order], final_scores[order], final_bps[order],
            np.asarray(beam.bp_prev_np[:beam.bp_n]).copy(),
            np.asarray(beam.bp_frame_np[:beam.bp_n]).copy(),
            np.asarray(beam.bp_arc_np[:beam.bp_n]).copy())
