"""Alphabets, texts, and the prefix order.

A text is a finite token sequence that starts with the beginning-of-sentence
marker and may end with the end-of-sentence marker; nothing else is a valid
position for either marker.  Texts ordered by "is a prefix of" form the
finite poset that every other module works over.

The two markers are identity-compared sentinel objects, so they can never
collide with user-supplied alphabet tokens (which are plain strings).  In
files and CLI arguments they are spelled ``<bos>`` and ``<eos>``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import (
    EmptyText,
    InteriorSpecial,
    MissingBOS,
    ReservedTokenInAlphabet,
)

BOS_SPELLING = "<bos>"
EOS_SPELLING = "<eos>"


class SpecialToken:
    """Reserved marker outside every alphabet; compared by identity."""

    __slots__ = ("label",)

    def __init__(self, label: str):
        self.label = label

    def __repr__(self):
        return self.label

    def __reduce__(self):
        # Unpickling must return the canonical instance, not a copy.
        return (_special_by_label, (self.label,))

    def __copy__(self):
        return self

    def __deepcopy__(self, memo):
        return self


BOS = SpecialToken(BOS_SPELLING)
EOS = SpecialToken(EOS_SPELLING)


def _special_by_label(label: str) -> SpecialToken:
    return {BOS_SPELLING: BOS, EOS_SPELLING: EOS}[label]


Token = "SpecialToken | str"


def spell(token) -> str:
    """File/CLI spelling of a token."""
    return token.label if isinstance(token, SpecialToken) else token


@dataclass(frozen=True)
class Text:
    """An immutable token sequence ``(BOS, a_1, ..., a_j[, EOS])``."""

    tokens: tuple

    @property
    def finished(self) -> bool:
        return self.tokens[-1] is EOS

    def __len__(self):
        return len(self.tokens)

    @property
    def last(self):
        return self.tokens[-1]

    def extend(self, token) -> "Text":
        """Append one token; no validation beyond the marker rules."""
        if self.finished:
            raise InteriorSpecial(f"cannot extend finished text {self}")
        if token is BOS:
            raise InteriorSpecial("beginning marker only opens a text")
        return Text(self.tokens + (token,))

    def __str__(self):
        return " ".join(spell(t) for t in self.tokens)


def make_text(raw: Sequence) -> Text:
    """Validate a raw token sequence into a Text.

    Raises EmptyText, MissingBOS, or InteriorSpecial when the sequence
    breaks the marker placement rules.
    """
    toks = tuple(raw)
    if not toks:
        raise EmptyText("a text has at least the beginning marker")
    if toks[0] is not BOS:
        raise MissingBOS(f"first token must be {BOS_SPELLING}, got {toks[0]!r}")
    for i, t in enumerate(toks):
        if t is BOS and i > 0:
            raise InteriorSpecial(f"{BOS_SPELLING} repeated at position {i}")
        if t is EOS and i < len(toks) - 1:
            raise InteriorSpecial(f"{EOS_SPELLING} before the end (position {i})")
    return Text(toks)


def parse_text_key(key: str) -> Text:
    """Parse a space-separated token string, e.g. ``"<bos> a b"``.

    A missing leading ``<bos>`` is supplied; ``<eos>`` may close the text.
    This is the node-key syntax of the model interchange format.
    """
    parts = key.split()
    toks: list = []
    for p in parts:
        if p == BOS_SPELLING:
            toks.append(BOS)
        elif p == EOS_SPELLING:
            toks.append(EOS)
        else:
            toks.append(p)
    if not toks or toks[0] is not BOS:
        toks.insert(0, BOS)
    return make_text(toks)


class Alphabet:
    """Ordered set of distinct string tokens, excluding the reserved markers."""

    __slots__ = ("tokens", "_index")

    def __init__(self, tokens: Iterable[str]):
        toks = tuple(tokens)
        if not toks:
            raise ReservedTokenInAlphabet("alphabet must be nonempty")
        seen = set()
        for t in toks:
            if isinstance(t, SpecialToken) or t in (BOS_SPELLING, EOS_SPELLING):
                raise ReservedTokenInAlphabet(f"reserved token {t!r} in alphabet")
            if not isinstance(t, str):
                raise ReservedTokenInAlphabet(f"tokens are strings, got {t!r}")
            if t in seen:
                raise ReservedTokenInAlphabet(f"duplicate token {t!r}")
            seen.add(t)
        self.tokens = toks
        self._index = {t: i for i, t in enumerate(toks)}

    def __len__(self):
        return len(self.tokens)

    def __contains__(self, token):
        return isinstance(token, str) and token in self._index

    def __eq__(self, other):
        return isinstance(other, Alphabet) and self.tokens == other.tokens

    def __hash__(self):
        return hash(self.tokens)

    def __repr__(self):
        return f"Alphabet({list(self.tokens)!r})"

    def token_index(self, token) -> int:
        """Sort rank of a token: BOS first, alphabet order, EOS last."""
        if token is BOS:
            return -1
        if token is EOS:
            return len(self.tokens)
        try:
            return self._index[token]
        except KeyError:
            raise KeyError(f"token {token!r} not in alphabet") from None

    def sort_key(self, text: Text):
        """Total order on texts: by length, then lexicographic by token rank.

        This single key fixes matrix row/column order everywhere downstream.
        """
        return (len(text), tuple(self.token_index(t) for t in text.tokens))

    def emission_tokens(self) -> tuple:
        """Tokens a model may emit: the alphabet followed by the end marker."""
        return self.tokens + (EOS,)


def validate_cutoff(cutoff: int) -> int:
    if not isinstance(cutoff, int) or cutoff < 1:
        raise ValueError(f"cutoff must be a positive integer, got {cutoff!r}")
    return cutoff


def is_prefix(x: Text, y: Text) -> bool:
    """True iff the token sequence of ``x`` starts the sequence of ``y``."""
    return len(x.tokens) <= len(y.tokens) and y.tokens[: len(x.tokens)] == x.tokens


def in_object_set(text: Text, alphabet: Alphabet, cutoff: int) -> bool:
    """Membership in the object set at the given cutoff.

    Unfinished texts may use the full length budget; finished ones must
    keep their alphabet part strictly below ``cutoff - 1``.
    """
    validate_cutoff(cutoff)
    if len(text) > cutoff:
        return False
    for t in text.tokens[1:-1]:
        if t not in alphabet:
            return False
    last = text.last
    if last is EOS:
        # alphabet part has len(text) - 2 tokens
        return len(text) - 2 < cutoff - 1
    return len(text) == 1 or last in alphabet


def one_token_extensions(x: Text, alphabet: Alphabet, cutoff: int) -> tuple:
    """All single-token extensions of ``x`` inside the object set.

    Empty for finished texts and for texts already at the cutoff; otherwise
    one extension per alphabet token plus the end marker, in canonical order.
    """
    validate_cutoff(cutoff)
    if x.finished or len(x) >= cutoff:
        return ()
    return tuple(x.extend(t) for t in alphabet.emission_tokens())
