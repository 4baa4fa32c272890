"""Shared fixtures and independent oracles for the test suite.

The brute-force helpers here deliberately avoid the package's own
enumeration code paths so they can serve as oracles: the object universe
comes from raw itertools products, and chain probabilities are recomputed
straight from the model.
"""

from __future__ import annotations

import itertools
import math
import random

import pytest

from textmag import (
    Alphabet,
    BOS,
    EOS,
    ModelSpec,
    Text,
    make_distribution,
    make_text,
    table_model,
    uniform_model,
)


def brute_force_object_tuples(tokens, cutoff):
    """Every legal token tuple at the cutoff, by raw product enumeration."""
    objs = set()
    for length in range(0, cutoff):
        for combo in itertools.product(tokens, repeat=length):
            objs.add((BOS,) + combo)
    for length in range(0, max(0, cutoff - 1)):
        for combo in itertools.product(tokens, repeat=length):
            objs.add((BOS,) + combo + (EOS,))
    return objs


def brute_force_objects(alphabet: Alphabet, cutoff: int):
    return {make_text(toks)
            for toks in brute_force_object_tuples(alphabet.tokens, cutoff)}


def chain_probability(model: ModelSpec, x: Text, y: Text) -> float:
    """Chain product recomputed directly from the model, token by token."""
    if x == y:
        return 1.0
    if y.tokens[: len(x.tokens)] != x.tokens:
        return 0.0
    prob = 1.0
    prefix = x
    for token in y.tokens[len(x.tokens):]:
        prob *= model.next_token_distribution(prefix).prob(token)
        prefix = prefix.extend(token)
    return prob


def random_table_model(
    rng: random.Random,
    alphabet: Alphabet,
    cutoff: int,
    zero_fraction: float = 0.0,
) -> ModelSpec:
    """A table model with an entry for every unfinished node below the cutoff.

    ``zero_fraction`` knocks out roughly that share of masses per node
    (always leaving at least one), to exercise infinite-distance paths.
    """
    nodes = {}
    emission_size = len(alphabet) + 1
    for toks in sorted(brute_force_object_tuples(alphabet.tokens, cutoff),
                       key=lambda ts: (len(ts), tuple(map(str, ts)))):
        if toks[-1] is EOS or len(toks) > cutoff - 1:
            continue
        node = make_text(toks)
        while True:
            masses = [rng.expovariate(1.0) for _ in range(emission_size)]
            if zero_fraction:
                masses = [0.0 if rng.random() < zero_fraction else m
                          for m in masses]
            if sum(1 for m in masses if m > 0.0) >= 1:
                break
        total = math.fsum(masses)
        probs = dict(zip(alphabet.emission_tokens(),
                         (m / total for m in masses)))
        nodes[node] = make_distribution(alphabet, probs)
    return table_model(alphabet, cutoff, nodes)


def random_positive_text(rng: random.Random, model: ModelSpec,
                         min_steps: int = 1) -> Text:
    """Walk the model along positive-probability steps to a random text."""
    while True:
        node = make_text([BOS])
        while not node.finished and len(node) < model.cutoff:
            dist = model.next_token_distribution(node)
            choices = [(t, p) for t, p in dist.items() if p > 0.0]
            token = rng.choices([t for t, _ in choices],
                                weights=[p for _, p in choices])[0]
            node = node.extend(token)
            if len(node) - 1 >= min_steps and rng.random() < 0.35:
                break
        if len(node) - 1 >= min_steps:
            return node


@pytest.fixture
def ab_alphabet():
    return Alphabet(["a", "b"])


@pytest.fixture
def uniform_ab3(ab_alphabet):
    return uniform_model(ab_alphabet, 3)


@pytest.fixture
def uniform_a2():
    return uniform_model(Alphabet(["a"]), 2)


UNIFORM_AB3_JSON = """\
{
  "alphabet": ["a", "b"],
  "cutoff": 3,
  "model": {"kind": "uniform"}
}
"""


@pytest.fixture
def uniform_ab3_path(tmp_path):
    path = tmp_path / "uniform_ab_n3.json"
    path.write_text(UNIFORM_AB3_JSON, encoding="utf-8")
    return path
