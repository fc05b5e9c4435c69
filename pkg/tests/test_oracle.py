import itertools
import math

import numpy as np
import pytest

from ctcrex import (Alphabet, ConfMat, NoParse, accepts, brute_force_decode,
                    collapse, compile_pattern, seq_probability)
from ctcrex.errors import EnumerationCapError
from util import random_small_instance

AB = Alphabet(["a", "b"], nac_index=0)


def one_hot(labels, alphabet=AB):
    rows = np.zeros((len(labels), alphabet.num_labels))
    rows[np.arange(len(labels)), labels] = 1.0
    return ConfMat(rows, alphabet)


def test_single_nac_frame_with_optional():
    # acceptance of the empty string decides the outcome
    d = brute_force_decode(one_hot([0]), compile_pattern("a?", AB))
    assert (d.text, d.log_score) == ("", 0.0)
    r = brute_force_decode(one_hot([0]), compile_pattern("a", AB))
    assert isinstance(r, NoParse)


def test_rejecting_automaton_yields_no_parse():
    assert isinstance(
        brute_force_decode(one_hot([1]), compile_pattern("[]", AB)), NoParse)


def test_cap_refusal():
    rng = np.random.default_rng(0)
    cm = ConfMat(rng.dirichlet(np.ones(3), size=5), AB)
    with pytest.raises(EnumerationCapError):
        brute_force_decode(cm, compile_pattern("a", AB), cap=100)


def test_empty_matrix():
    cm = ConfMat(np.zeros((0, 3)), AB)
    d = brute_force_decode(cm, compile_pattern("a*", AB))
    assert (d.text, d.log_score) == ("", 0.0)


def test_objective_recomputation():
    # the returned objective equals the linear-domain max over preimages of
    # the string, times the accepting path weight, recomputed independently
    rng = np.random.default_rng(71)
    audited = 0
    for _ in range(40):
        cm, a, _, _ = random_small_instance(rng, max_t=4)
        d = brute_force_decode(cm, a)
        if isinstance(d, NoParse):
            continue
        best_p = max(
            (seq_probability(list(seq), cm)
             for seq in itertools.product(range(cm.num_labels), repeat=cm.T)
             if collapse(list(seq), cm.alphabet) == d.text),
            default=0.0)
        weight = accepts(a, d.text).weight
        assert math.log(best_p) + weight == pytest.approx(d.log_score, abs=1e-9)
        audited += 1
    assert audited > 20


def test_tie_breaks_to_smaller_string():
    # both single-character strings have identical probability; "a" < "b"
    ab = AB
    rows = np.array([[0.0, 0.5, 0.5]])
    cm = ConfMat(rows, ab, validate=False)
    d = brute_force_decode(cm, compile_pattern("a|b", ab))
    assert d.text == "a"
