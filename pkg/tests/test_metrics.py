import math
import random

import pytest

from textmag import (
    Alphabet,
    BOS,
    build_category,
    diversity,
    make_distribution,
    make_text,
    perplexity,
    shannon_entropy,
    table_model,
    terminating_pmf,
    zeta_matrix,
)
from textmag.errors import BadPMF, TooShort, ZeroProbabilityStep

from conftest import random_positive_text, random_table_model


def test_perplexity_uniform_two_steps(uniform_ab3):
    y = make_text([BOS, "a", "b"])
    assert perplexity(uniform_ab3, y) == pytest.approx(3.0, abs=1e-12)
    cat = build_category(uniform_ab3)
    assert zeta_matrix(cat, 0.5).entry(make_text([BOS]), y) == \
        pytest.approx(1 / 3, abs=1e-15)


def test_perplexity_deterministic_is_one():
    alphabet = Alphabet(["a", "b"])
    dist = make_distribution(alphabet, {"a": 1.0})
    model = table_model(alphabet, 4, {}, default=dist)
    assert perplexity(model, make_text([BOS, "a", "a", "a"])) == 1.0


def test_perplexity_zero_step(uniform_ab3):
    alphabet = Alphabet(["a", "b"])
    dist = make_distribution(alphabet, {"a": 1.0})
    model = table_model(alphabet, 4, {}, default=dist)
    with pytest.raises(ZeroProbabilityStep):
        perplexity(model, make_text([BOS, "b"]))


def test_perplexity_too_short(uniform_ab3):
    with pytest.raises(TooShort):
        perplexity(uniform_ab3, make_text([BOS]))


def test_perplexity_zeta_identity_on_random_pairs():
    rng = random.Random(123)
    pairs = 0
    while pairs < 50:
        size = rng.choice([1, 2, 3])
        cutoff = rng.choice([2, 3, 4])
        alphabet = Alphabet([f"t{i}" for i in range(size)])
        model = random_table_model(rng, alphabet, cutoff,
                                   zero_fraction=0.2 if pairs % 2 else 0.0)
        cat = build_category(model)
        text = random_positive_text(rng, model)
        n = len(text) - 1
        ppl = perplexity(model, text)
        entry = zeta_matrix(cat, 1.0 / n).entry(cat.root, text)
        assert abs(ppl * entry - 1.0) < 1e-10
        pairs += 1


def test_diversity_collapses_to_entropy_on_terminating_pmf(uniform_ab3):
    cat = build_category(uniform_ab3)
    pmf = terminating_pmf(cat)
    expected = shannon_entropy(list(pmf.values()))
    assert diversity(cat, pmf, 1.0) == pytest.approx(expected, abs=1e-9)
    # hand check: four outputs of mass 1/9, the bare stop of mass 1/3,
    # and two one-token stops of mass 1/9
    direct = -(6 * (1 / 9) * math.log(1 / 9) + (1 / 3) * math.log(1 / 3))
    assert expected == pytest.approx(direct, abs=1e-12)


def test_diversity_collapse_on_random_models():
    rng = random.Random(321)
    for trial in range(6):
        alphabet = Alphabet(["a", "b"])
        model = random_table_model(rng, alphabet, 4,
                                   zero_fraction=0.25 if trial % 2 else 0.0)
        cat = build_category(model)
        for x in [None, make_text([BOS, "a"])]:
            pmf = terminating_pmf(cat, cat.root if x is None else x)
            positive = [v for v in pmf.values() if v > 0.0]
            assert diversity(cat, pmf, 1.0) == pytest.approx(
                shannon_entropy(positive), abs=1e-9)


def test_diversity_point_mass_is_zero(uniform_ab3):
    cat = build_category(uniform_ab3)
    y = make_text([BOS, "a", "b"])
    for t in (0.5, 1.0, 2.0):
        assert diversity(cat, {y: 1.0}, t) == 0.0


def test_diversity_uniform_on_incomparable_pair(uniform_ab3):
    cat = build_category(uniform_ab3)
    p = {make_text([BOS, "a"]): 0.5, make_text([BOS, "b"]): 0.5}
    assert diversity(cat, p, 1.0) == pytest.approx(math.log(2), abs=1e-12)


def test_diversity_weighs_comparable_support(uniform_ab3):
    # on a chain the inner sum really mixes masses; oracle computed directly
    cat = build_category(uniform_ab3)
    root = make_text([BOS])
    a = make_text([BOS, "a"])
    p = {root: 0.5, a: 0.5}
    t = 2.0
    inner_root = 0.5  # only pi(root|root) contributes
    inner_a = cat.pi(root, a) ** t * 0.5 + 0.5
    expected = -(0.5 * math.log(inner_root) + 0.5 * math.log(inner_a))
    assert diversity(cat, p, t) == pytest.approx(expected, abs=1e-12)


def test_diversity_bad_pmf(uniform_ab3):
    cat = build_category(uniform_ab3)
    y = make_text([BOS, "a"])
    with pytest.raises(BadPMF):
        diversity(cat, {y: 0.5}, 1.0)
    with pytest.raises(BadPMF):
        diversity(cat, {y: 1.2, make_text([BOS, "b"]): -0.2}, 1.0)
    with pytest.raises(BadPMF):
        diversity(cat, {make_text([BOS, "a", "b", "a"]): 1.0}, 1.0)
