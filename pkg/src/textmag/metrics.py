"""Perplexity of a text under a model, and diversity of a pmf on texts.

All logarithms are natural, matching the distance convention used by the
rest of the package; perplexity is therefore reported in nats-based form,
which callers comparing against other tooling should keep in mind.
"""

from __future__ import annotations

import math

from .category import TextCategory
from .config import DEFAULT_TOLERANCES
from .errors import BadPMF, TooShort, ZeroProbabilityStep
from .models import ModelSpec
from .texts import Text, make_text


def perplexity(model: ModelSpec, y: Text) -> float:
    """Exponential of the mean negative log step probability along ``y``.

    Equals the reciprocal of the similarity-matrix entry from the bare
    prompt to ``y`` at scale ``1/n``, where ``n`` is the number of
    generated tokens.
    """
    n = len(y) - 1
    if n < 1:
        raise TooShort("perplexity needs at least one generated token")
    log_sum = 0.0
    prefix = make_text(y.tokens[:1])
    for token in y.tokens[1:]:
        dist = model.next_token_distribution(prefix)
        p = dist.prob(token)
        if p <= 0.0:
            raise ZeroProbabilityStep(
                f"step {prefix} -> {token!r} has probability {p}"
            )
        log_sum += math.log(p)
        prefix = prefix.extend(token)
    return math.exp(-log_sum / n)


def terminating_pmf(cat: TextCategory, x: Text | None = None) -> dict:
    """Chain products restricted to the terminating states of ``x``."""
    x = cat.root if x is None else x
    return {y: cat.pi(x, y) for y in cat.terminating_states(x)}


def diversity(
    cat: TextCategory,
    p: dict,
    t: float,
    *,
    pmf_tol: float = DEFAULT_TOLERANCES.pmf,
) -> float:
    """Similarity-weighted entropy of a pmf on objects.

    ``- sum_y p(y) ln sum_x pi(y|x)**t p(x)``.  On a pmf supported on an
    antichain at t = 1 the inner sum collapses to ``p(y)``, recovering the
    Shannon entropy of ``p``.
    """
    if not t > 0:
        raise ValueError(f"scale t must be positive, got {t!r}")
    for y in p:
        if y not in cat:
            raise BadPMF(f"support point {y} is not an object")
        if p[y] < 0:
            raise BadPMF(f"negative mass {p[y]!r} at {y}")
    total = math.fsum(p.values())
    if abs(total - 1.0) > pmf_tol:
        raise BadPMF(f"masses sum to {total!r}, not 1")

    support = [y for y, mass in p.items() if mass > 0.0]
    acc = 0.0
    for y in support:
        # pi(x, y) is the mass that generation from x sends through y
        inner = math.fsum(cat.pi(x, y) ** t * p[x] for x in support)
        acc += p[y] * math.log(inner)
    return -acc
