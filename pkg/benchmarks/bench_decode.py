"""Benchmark the compiled beam-search kernel against the pure-Python fallback.

Builds a lexicon of ~1200 synthetic names (the size that makes beam search
necessary in the first place), compiles a tagged grammar over it, synthesizes
a long noisy frame matrix and times decode() under both kernels, checking that
they return identical results.

Run:  python benchmarks/bench_decode.py [--beam 256] [--words 40] [--repeat 3]
"""

import argparse
import string
import time

import numpy as np

from ctcrex import (Alphabet, Lexicon, NoParse, PriorModel, compile_pattern,
                    decode, synth_confmat)
from ctcrex import _kernel_py

try:
    from ctcrex import _kernel
except ImportError:
    _kernel = None

SYLLABLES = ["an", "bel", "ca", "dor", "el", "fi", "gu", "ho", "ir", "jo",
             "ka", "lu", "mar", "na", "or", "pe", "qui", "ra", "sa", "tor",
             "u", "ver", "xi", "ya", "zo"]


def make_lexicon(rng, n_words=1200):
    words = set()
    while len(words) < n_words:
        k = 2 + int(rng.integers(3))
        words.add("".join(SYLLABLES[int(rng.integers(len(SYLLABLES)))]
                          for _ in range(k)))
    freqs = rng.random(len(words)) + 0.01
    freqs /= freqs.sum()
    return Lexicon("names", list(zip(sorted(words), map(float, freqs))))


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--beam", type=int, default=256)
    parser.add_argument("--words", type=int, default=40)
    parser.add_argument("--noise", type=float, default=0.25)
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument("--seed", type=int, default=1)
    args = parser.parse_args()

    rng = np.random.default_rng(args.seed)
    alphabet = Alphabet(list(string.ascii_lowercase) + [" ", "\n"], nac_index=0)
    lexicon = make_lexicon(rng)
    grammar = compile_pattern(
        r"(?<name>${names})(\s(?<name>${names}))*",
        alphabet, {"names": lexicon}, PriorModel())
    words = [w for w, _ in lexicon.entries]
    text = " ".join(words[int(rng.integers(len(words)))]
                    for _ in range(args.words))
    cm = synth_confmat(text, alphabet, noise=args.noise,
                       seed=int(rng.integers(2 ** 31)), frames_per_char=3)
    print(f"lexicon: {len(lexicon)} words | automaton: {grammar.n_states} "
          f"states, {grammar.num_arcs} arcs | frames: {cm.T} | "
          f"beam: {args.beam}")

    kernels = [k for k in (_kernel, _kernel_py) if k is not None]
    if _kernel is None:
        print("compiled kernel not built; timing the pure fallback only")

    results = {}
    timings = {}
    for kernel in kernels:
        best = None
        for _ in range(args.repeat):
            t0 = time.perf_counter()
            d = decode(cm, grammar, beam_width=args.beam, kernel=kernel)
            dt = time.perf_counter() - t0
            best = dt if best is None else min(best, dt)
        results[kernel.KERNEL_NAME] = d
        timings[kernel.KERNEL_NAME] = best
        status = "no parse" if isinstance(d, NoParse) else \
            f"score {d.log_score:.3f}, {len(d.text)} chars"
        print(f"{kernel.KERNEL_NAME:>8}: {best * 1000:8.1f} ms  ({status})")

    if len(results) == 2:
        assert results["cython"] == results["python"], \
            "kernel results diverge"
        speedup = timings["python"] / timings["cython"]
        print(f"identical results; compiled speedup {speedup:.1f}x")


if __name__ == "__main__":
    main()
