"""Command-line surface: decode, score and check subcommands.

Exit codes: 0 ok, 1 usage, 2 I/O, 3 grammar, 4 data. A record that fails to
parse is reported in-band in the output, never via the exit status.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

from . import report
from .automaton import PriorModel, compile_pattern
from .confmat import load_alphabet, load_confmat, load_manifest
from .decoder import DEFAULT_BEAM_WIDTH, decode_record, decode_record_single
from .errors import FormatError, GrammarError, InputError
from .evalkit import load_gold, score_corpus
from .lexicon import load_lexicon_dir
from .pattern import declared_tags, parse_regex, referenced_lexicons

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_IO = 2
EXIT_GRAMMAR = 3
EXIT_DATA = 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def read_grammar(path) -> str:
    text = Path(path).read_text(encoding="utf-8")
    if text.endswith("\n"):
        text = text[:-1]
    return text


def _load_fine_grammars(directory, alphabet, lexicons, prior):
    directory = Path(directory)
    if not directory.is_dir():
        raise FileNotFoundError(f"fine grammar directory not found: {directory}")
    fine = {}
    for path in sorted(directory.iterdir()):
        if path.is_file():
            fine[path.stem] = compile_pattern(read_grammar(path), alphabet,
                                              lexicons, prior)
    if not fine:
        raise InputError(f"no fine grammars in {directory}")
    return fine


def cmd_decode(args) -> int:
    alphabet = load_alphabet(args.alphabet)
    lexicons = load_lexicon_dir(args.lexicons) if args.lexicons else {}
    prior = PriorModel(oov_char_logpenalty=args.oov_penalty,
                       prior_scale=args.prior_scale)
    if args.grammar:
        grammar = compile_pattern(read_grammar(args.grammar), alphabet,
                                  lexicons, prior)
        coarse = fine = None
    else:
        coarse = compile_pattern(read_grammar(args.coarse_grammar), alphabet,
                                 lexicons, prior)
        fine = _load_fine_grammars(args.fine_grammar_dir, alphabet,
                                   lexicons, prior)
        grammar = None

    results = []
    for index, paths in enumerate(load_manifest(args.manifest)):
        lines = [load_confmat(p) for p in paths]
        for cm in lines:
            if cm.alphabet != alphabet:
                raise InputError(
                    f"record {index}: ConfMat alphabet differs from --alphabet")
        if grammar is not None:
            rr = decode_record_single(lines, grammar, beam_width=args.beam,
                                      record_id=str(index),
                                      separator=args.separator)
        else:
            rr = decode_record(lines, coarse, fine, beam_width=args.beam,
                               record_id=str(index), separator=args.separator)
        results.append(rr)

    if args.out:
        report.write_results(results, args.out)
    else:
        sys.stdout.write(report.format_results(results))
    return EXIT_OK


def cmd_score(args) -> int:
    gold = load_gold(args.gold)
    predictions = report.parse_predictions(args.predictions)
    table = score_corpus(list(predictions.items()), gold)
    print(table.format())
    return EXIT_OK


def cmd_check(args) -> int:
    """Diagnose a grammar: parse, compile, report size and dead parts."""
    issues = []
    try:
        text = read_grammar(args.grammar)
    except OSError as exc:
        print(f"error: {exc}")
        return EXIT_IO
    alphabet = load_alphabet(args.alphabet)
    lexicons = load_lexicon_dir(args.lexicons) if args.lexicons else {}
    try:
        ast = parse_regex(text)
    except GrammarError as exc:
        print(f"error: {exc}")
        return EXIT_GRAMMAR
    missing = sorted(referenced_lexicons(ast) - set(lexicons))
    for name in missing:
        issues.append(f"unresolved dictionary reference ${{{name}}}")
    if not missing:
        try:
            a = compile_pattern(ast, alphabet, lexicons,
                                PriorModel(oov_char_logpenalty=args.oov_penalty,
                                           prior_scale=args.prior_scale))
        except GrammarError as exc:
            print(f"error: {exc}")
            return EXIT_GRAMMAR
        print(f"automaton: {a.n_states} states, {a.num_arcs} arcs, "
              f"{len(a.accepting)} accepting")
        if not a.accepting:
            issues.append("automaton accepts nothing")
        reachable = a.arc_tags()
        for tag in dict.fromkeys(declared_tags(ast)):
            if tag not in reachable:
                category, person = tag
                shown = category if person is None else f"{category}:{person}"
                issues.append(f"unreachable tag ({shown})")
    for issue in issues:
        print(f"warning: {issue}")
    if issues:
        return EXIT_GRAMMAR
    print("clean")
    return EXIT_OK


def build_parser() -> _Parser:
    parser = _Parser(prog="ctcrex",
                     description="Regex-constrained decoding of confidence "
                                 "matrices and competition-style scoring.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("decode", help="decode manifest records to tagged spans")
    p.add_argument("--manifest", required=True, help="record manifest file")
    p.add_argument("--alphabet", required=True, help="alphabet file")
    p.add_argument("--grammar", help="single-pass grammar file")
    p.add_argument("--coarse-grammar", help="step-1 grammar file")
    p.add_argument("--fine-grammar-dir",
                   help="directory of per-person step-2 grammars")
    p.add_argument("--lexicons", help="directory of lexicon files")
    p.add_argument("--beam", type=int, default=DEFAULT_BEAM_WIDTH,
                   help="beam width (default %(default)s)")
    p.add_argument("--separator", choices=("insert-space", "none"),
                   default="insert-space", help="line-join policy")
    p.add_argument("--prior-scale", type=float, default=1.0,
                   help="multiplier on lexicon log frequencies")
    p.add_argument("--oov-penalty", type=float, default=math.log(1e-4),
                   help="log penalty per out-of-vocabulary character")
    p.add_argument("--out", help="output file (default stdout)")
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("score", help="score predictions against gold items")
    p.add_argument("predictions", help="prediction file (decode output)")
    p.add_argument("gold", help="gold item file")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("check", help="diagnose a grammar")
    p.add_argument("--grammar", required=True)
    p.add_argument("--alphabet", required=True)
    p.add_argument("--lexicons")
    p.add_argument("--prior-scale", type=float, default=1.0)
    p.add_argument("--oov-penalty", type=float, default=math.log(1e-4))
    p.set_defaults(func=cmd_check)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "decode":
        two_step = args.coarse_grammar or args.fine_grammar_dir
        if bool(args.grammar) == bool(two_step):
            parser.error("need either --grammar or both --coarse-grammar "
                         "and --fine-grammar-dir")
        if two_step and not (args.coarse_grammar and args.fine_grammar_dir):
            parser.error("--coarse-grammar and --fine-grammar-dir go together")
        if args.beam < 1:
            parser.error("--beam must be positive")
    if args.command in ("decode", "check"):
        if args.oov_penalty > 0:
            parser.error("--oov-penalty is a log value and must be <= 0")
        if args.prior_scale < 0:
            parser.error("--prior-scale must be >= 0")
    try:
        return args.func(args)
    except GrammarError as exc:
        print(f"grammar error: {exc}", file=sys.stderr)
        return EXIT_GRAMMAR
    except FormatError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except InputError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
