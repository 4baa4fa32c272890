"""Next-token probability sources and their interchange file format.

Three model kinds supply the per-node distributions:

* ``uniform`` -- equal mass on every alphabet token and the end marker;
* ``table``   -- explicit per-node distributions with an optional default;
* ``ngram``   -- additively smoothed relative frequencies conditioned on
  the last ``order - 1`` tokens.

The JSON interchange format looks like::

    {
      "alphabet": ["a", "b"],
      "cutoff": 3,
      "model": {
        "kind": "table",
        "default": {"a": 0.4, "b": 0.4, "<eos>": 0.2},
        "nodes": {"<bos> a": {"a": 0.1, "b": 0.1, "<eos>": 0.8}}
      }
    }

Node keys are space-separated token sequences beginning with ``<bos>``.
Distributions whose mass deviates from 1 by at most ``LOAD_SUM_TOL`` are
renormalized on load; larger deviations are rejected, because a silently
corrected file usually means a buggy producer.
"""

from __future__ import annotations

import json
import math
import threading
from dataclasses import dataclass, field

from .config import DEFAULT_TOLERANCES
from .errors import (
    BadDistribution,
    FinishedText,
    MissingEntry,
    OverCutoff,
    ParseError,
    TextmagError,
)
from .texts import (
    BOS,
    EOS,
    Alphabet,
    Text,
    in_object_set,
    parse_text_key,
    spell,
    validate_cutoff,
)

LOAD_SUM_TOL = 1e-6

MODEL_KINDS = ("uniform", "table", "ngram")


@dataclass(frozen=True)
class NextTokenDistribution:
    """A pmf over the alphabet tokens plus the end marker.

    Zero masses stay explicit: a zero step means the corresponding edge is
    absent, which downstream turns into an infinite distance.
    """

    tokens: tuple
    values: tuple

    def __post_init__(self):
        object.__setattr__(
            self, "_index", {t: i for i, t in enumerate(self.tokens)}
        )

    def prob(self, token) -> float:
        return self.values[self._index[token]]

    def items(self):
        return zip(self.tokens, self.values)

    def support(self):
        return tuple(t for t, v in self.items() if v > 0.0)

    def total(self) -> float:
        return math.fsum(self.values)


def make_distribution(
    alphabet: Alphabet,
    probs,
    *,
    renormalize_within: float = 0.0,
) -> NextTokenDistribution:
    """Build a validated distribution over ``alphabet`` tokens plus ``EOS``.

    ``probs`` maps tokens to masses; missing tokens get mass zero.  If the
    total deviates from 1 by more than ``renormalize_within`` the input is
    rejected, otherwise it is divided through by its exact total.
    """
    emission = alphabet.emission_tokens()
    known = set(emission)
    values = []
    for tok in emission:
        v = float(probs.get(tok, 0.0))
        if v < 0.0 or math.isnan(v):
            raise BadDistribution(f"negative or NaN mass {v!r} for {spell(tok)}")
        values.append(v)
    for tok in probs:
        if tok not in known:
            raise BadDistribution(f"unknown token {tok!r} in distribution")
    total = math.fsum(values)
    if abs(total - 1.0) > max(renormalize_within, DEFAULT_TOLERANCES.pmf):
        raise BadDistribution(f"masses sum to {total!r}, not 1")
    if total != 1.0:
        values = [v / total for v in values]
    return NextTokenDistribution(tokens=emission, values=tuple(values))


@dataclass
class ModelSpec:
    """A fully specified next-token model over a fixed alphabet and cutoff.

    Instances are immutable after construction apart from the internal memo
    of per-node distributions.  Memo writes are idempotent (the computed
    distribution for a node never changes), so concurrent queries are safe;
    a lock serializes writes anyway to keep the contract obvious.
    """

    kind: str
    alphabet: Alphabet
    cutoff: int
    table: dict = field(default_factory=dict)
    default: NextTokenDistribution | None = None
    ngram_order: int = 1
    ngram_counts: dict = field(default_factory=dict)
    ngram_alpha: float = 0.0
    meta: dict = field(default_factory=dict)
    source_report: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise ParseError(f"unknown model kind {self.kind!r}")
        validate_cutoff(self.cutoff)
        if self.kind == "ngram":
            if self.ngram_order < 1:
                raise ParseError("ngram order must be >= 1")
            if self.ngram_alpha < 0:
                raise ParseError("ngram smoothing constant must be >= 0")
        for node in self.table:
            if node.finished or len(node) > self.cutoff - 1:
                raise ParseError(f"table node {node} is not an unfinished "
                                 f"text below the cutoff")
        self._memo = {}
        self._memo_lock = threading.Lock()

    # -- queries -----------------------------------------------------------

    def next_token_distribution(self, x: Text) -> NextTokenDistribution:
        """The pmf the model emits when prompted with ``x``."""
        if x.finished:
            raise FinishedText(f"no next token after finished text {x}")
        if len(x) > self.cutoff - 1:
            raise OverCutoff(f"{x} has length {len(x)} > {self.cutoff - 1}")
        memo = self._memo
        hit = memo.get(x)
        if hit is not None:
            return hit
        dist = self._compute(x)
        with self._memo_lock:
            memo.setdefault(x, dist)
        return memo[x]

    def _compute(self, x: Text) -> NextTokenDistribution:
        if self.kind == "uniform":
            m = len(self.alphabet) + 1
            return NextTokenDistribution(
                tokens=self.alphabet.emission_tokens(),
                values=tuple([1.0 / m] * m),
            )
        if self.kind == "table":
            dist = self.table.get(x, self.default)
            if dist is None:
                raise MissingEntry(f"no table entry and no default for {x}")
            return dist
        return self._ngram(x)

    def _ngram(self, x: Text) -> NextTokenDistribution:
        context = x.tokens[max(0, len(x.tokens) - (self.ngram_order - 1)):] \
            if self.ngram_order > 1 else ()
        counts = self.ngram_counts.get(tuple(context), {})
        emission = self.alphabet.emission_tokens()
        alpha = self.ngram_alpha
        raw = [counts.get(t, 0.0) + alpha for t in emission]
        total = math.fsum(raw)
        if total <= 0.0:
            raise MissingEntry(
                f"ngram context {' '.join(spell(t) for t in context) or '(empty)'} "
                f"has no counts and smoothing is 0"
            )
        return NextTokenDistribution(
            tokens=emission, values=tuple(v / total for v in raw)
        )


def uniform_model(alphabet: Alphabet, cutoff: int) -> ModelSpec:
    return ModelSpec(kind="uniform", alphabet=alphabet, cutoff=cutoff)


def table_model(
    alphabet: Alphabet,
    cutoff: int,
    nodes: dict,
    default: NextTokenDistribution | None = None,
) -> ModelSpec:
    return ModelSpec(kind="table", alphabet=alphabet, cutoff=cutoff,
                     table=dict(nodes), default=default)


def ngram_model(
    alphabet: Alphabet,
    cutoff: int,
    order: int,
    counts: dict,
    alpha: float = 0.0,
) -> ModelSpec:
    return ModelSpec(kind="ngram", alphabet=alphabet, cutoff=cutoff,
                     ngram_order=order, ngram_counts=dict(counts),
                     ngram_alpha=alpha)


# -- interchange files ------------------------------------------------------

def _parse_distribution(alphabet: Alphabet, raw, where: str,
                        report: dict) -> NextTokenDistribution:
    if not isinstance(raw, dict):
        raise ParseError(f"{where}: distribution must be an object")
    probs = {}
    for key, value in raw.items():
        if key == spell(BOS):
            raise BadDistribution(f"{where}: {key} cannot receive mass")
        token = EOS if key == spell(EOS) else key
        if token is not EOS and token not in alphabet:
            raise BadDistribution(f"{where}: token {key!r} not in alphabet")
        try:
            probs[token] = float(value)
        except (TypeError, ValueError):
            raise ParseError(f"{where}: bad probability literal {value!r}")
    total = math.fsum(probs.values())
    deviation = abs(total - 1.0)
    report["max_sum_deviation"] = max(report.get("max_sum_deviation", 0.0),
                                      deviation)
    try:
        return make_distribution(alphabet, probs,
                                 renormalize_within=LOAD_SUM_TOL)
    except BadDistribution as exc:
        raise BadDistribution(f"{where}: {exc}") from None


def _parse_ngram_counts(alphabet: Alphabet, raw, order: int) -> dict:
    if not isinstance(raw, dict):
        raise ParseError("ngram counts must be an object")
    # Order-1 models may give a flat token->count map.
    flat = order == 1 and all(not isinstance(v, dict) for v in raw.values())
    contexts = {"": raw} if flat else raw
    parsed = {}
    for ctx_key, token_counts in contexts.items():
        if not isinstance(token_counts, dict):
            raise ParseError(f"ngram context {ctx_key!r}: counts must be an object")
        ctx = ()
        if ctx_key:
            try:
                ctx_text = parse_text_key(ctx_key)
            except TextmagError as exc:
                raise ParseError(f"ngram context {ctx_key!r}: {exc}") from None
            ctx = ctx_text.tokens if ctx_key.startswith(spell(BOS)) \
                else ctx_text.tokens[1:]
        if len(ctx) > order - 1:
            raise ParseError(f"ngram context {ctx_key!r} longer than order-1")
        counts = {}
        for key, value in token_counts.items():
            token = EOS if key == spell(EOS) else key
            if token is not EOS and token not in alphabet:
                raise ParseError(f"ngram context {ctx_key!r}: unknown token {key!r}")
            count = float(value)
            if count < 0:
                raise ParseError(f"ngram count {value!r} is negative")
            counts[token] = count
        parsed[tuple(ctx)] = counts
    return parsed


def loads_model_spec(text: str) -> ModelSpec:
    """Parse an interchange document from a string."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise ParseError("top level must be an object")
    try:
        alphabet = Alphabet(doc["alphabet"])
        cutoff = doc["cutoff"]
        model = doc["model"]
        kind = model["kind"]
    except (KeyError, TypeError) as exc:
        raise ParseError(f"missing or malformed field: {exc}") from None
    if not isinstance(cutoff, int) or cutoff < 1:
        raise ParseError(f"cutoff must be a positive integer, got {cutoff!r}")
    if kind not in MODEL_KINDS:
        raise ParseError(f"unknown model kind {kind!r}")

    report: dict = {"max_sum_deviation": 0.0}
    meta = doc.get("meta", {})

    if kind == "uniform":
        spec = ModelSpec(kind="uniform", alphabet=alphabet, cutoff=cutoff,
                         meta=meta)
    elif kind == "table":
        default = None
        if "default" in model:
            default = _parse_distribution(alphabet, model["default"],
                                          "default", report)
        nodes = {}
        for key, raw in model.get("nodes", {}).items():
            if not key.split() or key.split()[0] != spell(BOS):
                raise ParseError(f"node key {key!r} must begin with {spell(BOS)}")
            try:
                node = parse_text_key(key)
            except TextmagError as exc:
                raise ParseError(f"node key {key!r}: {exc}") from None
            if node.finished:
                raise ParseError(f"node key {key!r} is a finished text")
            if len(node) > cutoff - 1:
                raise ParseError(f"node key {key!r} exceeds the cutoff")
            if not in_object_set(node, alphabet, cutoff):
                raise ParseError(f"node key {key!r} uses tokens outside the alphabet")
            nodes[node] = _parse_distribution(alphabet, raw,
                                              f"node {key!r}", report)
        spec = ModelSpec(kind="table", alphabet=alphabet, cutoff=cutoff,
                         table=nodes, default=default, meta=meta)
    else:
        order = model.get("order", 1)
        if not isinstance(order, int) or order < 1:
            raise ParseError(f"ngram order must be a positive integer, got {order!r}")
        alpha = float(model.get("alpha", 0.0))
        if alpha < 0:
            raise ParseError("ngram alpha must be >= 0")
        counts = _parse_ngram_counts(alphabet, model.get("counts", {}), order)
        spec = ModelSpec(kind="ngram", alphabet=alphabet, cutoff=cutoff,
                         ngram_order=order, ngram_counts=counts,
                         ngram_alpha=alpha, meta=meta)
    spec.source_report.update(report)
    return spec


def load_model_spec(path) -> ModelSpec:
    """Load and validate an interchange file."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from None
    return loads_model_spec(text)


def dumps_model_spec(spec: ModelSpec) -> str:
    """Serialize back to the interchange format (keys in canonical order)."""

    def dist_obj(dist: NextTokenDistribution) -> dict:
        return {spell(t): v for t, v in dist.items()}

    model: dict = {"kind": spec.kind}
    if spec.kind == "table":
        if spec.default is not None:
            model["default"] = dist_obj(spec.default)
        model["nodes"] = {
            str(node): dist_obj(dist)
            for node, dist in sorted(
                spec.table.items(),
                key=lambda kv: spec.alphabet.sort_key(kv[0]),
            )
        }
    elif spec.kind == "ngram":
        model["order"] = spec.ngram_order
        model["alpha"] = spec.ngram_alpha
        model["counts"] = {
            " ".join(spell(t) for t in ctx): {
                spell(t): c for t, c in sorted(
                    counts.items(),
                    key=lambda kv: spec.alphabet.token_index(kv[0]),
                )
            }
            for ctx, counts in sorted(spec.ngram_counts.items(),
                                      key=lambda kv: tuple(map(spell, kv[0])))
        }
    doc = {"alphabet": list(spec.alphabet.tokens), "cutoff": spec.cutoff,
           "model": model}
    if spec.meta:
        doc["meta"] = spec.meta
    return json.dumps(doc, indent=2)


def dump_model_spec(spec: ModelSpec, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_model_spec(spec))
        fh.write("\n")
