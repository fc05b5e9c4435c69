"""Regex-constrained CTC decoding and tagged-span extraction.

Decodes per-frame character probability matrices (ConfMats) under a tagged
regular expression whose dictionary references embed weighted lexicons,
returning the best accepted character sequence, its frame alignment and the
tagged information spans, plus competition-style scoring utilities.
"""

from .automaton import (Arc, Automaton, PriorModel, accepts,
                        build_lexicon_automaton, build_oov_automaton,
                        compile_pattern)
from .confmat import (Alphabet, ConfMat, collapse, concat, greedy_best_path,
                      load_alphabet, load_confmat, load_manifest,
                      log_seq_probability, save_confmat, seq_probability)
from .decoder import (DEFAULT_BEAM_WIDTH, Decoding, NoParse, RecordResult,
                      Region, Span, active_kernel_name, decode, decode_record,
                      decode_record_single, extract_spans)
from .errors import (CtcRexError, EnumerationCapError, FormatError,
                     GrammarError, InputError)
from .evalkit import (GoldRecord, ScoreTable, character_accuracy, item_score,
                      levenshtein, load_gold, save_gold, score_corpus,
                      synth_confmat, synth_corpus)
from .lexicon import Lexicon, load_lexicon, load_lexicon_dir
from .oracle import brute_force_decode
from .pattern import parse_regex

__version__ = "0.1.0"

__all__ = [
    "Alphabet", "Arc", "Automaton", "ConfMat", "CtcRexError",
    "DEFAULT_BEAM_WIDTH", "Decoding", "EnumerationCapError", "FormatError",
    "GoldRecord", "GrammarError", "InputError", "Lexicon", "NoParse",
    "PriorModel", "RecordResult", "Region", "ScoreTable", "Span",
    "accepts", "active_kernel_name", "brute_force_decode",
    "build_lexicon_automaton", "build_oov_automaton", "character_accuracy",
    "collapse", "compile_pattern", "concat", "decode", "decode_record",
    "decode_record_single", "extract_spans", "greedy_best_path", "item_score",
    "levenshtein", "load_alphabet", "load_confmat", "load_gold",
    "load_lexicon", "load_lexicon_dir", "load_manifest",
    "log_seq_probability", "parse_regex", "save_confmat", "save_gold",
    "score_corpus", "seq_probability", "synth_confmat", "synth_corpus",
]
