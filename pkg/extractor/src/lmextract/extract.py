"""Walk a causal LM over a small prompt tree and dump its next-token pmfs.

For every unfinished prompt below the cutoff, the model's next-token
logits are restricted to a user-chosen alphabet plus the end-of-sequence
token, softmaxed, and renormalized in double precision.  Restriction
throws away the model's mass on every other vocabulary item - that is a
deliberate modeling choice, recorded in the output metadata.

The output is the JSON interchange format of the analysis package: node
keys are space-separated token strings rooted at ``<bos>``, and the LM's
own BOS/EOS tokens are spelled ``<bos>``/``<eos>``.
"""

from __future__ import annotations

import json
import os
import tempfile
import time

import torch

BOS_SPELLING = "<bos>"
EOS_SPELLING = "<eos>"
RESERVED_SPELLINGS = (BOS_SPELLING, EOS_SPELLING)

DEFAULT_CALL_BUDGET = 4096


class UnknownToken(Exception):
    """An alphabet entry is not a single token of the LM vocabulary."""


class BudgetExceeded(Exception):
    """The prompt tree needs more forward passes than the budget allows."""


def prompt_count(alphabet_size: int, cutoff: int) -> int:
    """Number of forward passes: one per unfinished text below the cutoff."""
    return sum(alphabet_size ** depth for depth in range(max(0, cutoff - 1)))


def _resolve_ids(tokenizer, alphabet):
    vocab = tokenizer.get_vocab()
    ids = []
    for token in alphabet:
        if token in RESERVED_SPELLINGS:
            raise UnknownToken(f"{token!r} is a reserved spelling")
        token_id = vocab.get(token)
        if token_id is None:
            raise UnknownToken(f"{token!r} is not in the LM vocabulary")
        ids.append(token_id)
    if len(set(ids)) != len(ids):
        raise UnknownToken("alphabet tokens map to duplicate vocabulary ids")
    eos_id = tokenizer.eos_token_id
    if eos_id is None:
        raise UnknownToken("tokenizer has no end-of-sequence token")
    if eos_id in ids:
        raise UnknownToken("alphabet contains the end-of-sequence token")
    bos_id = tokenizer.bos_token_id
    if bos_id is None:
        bos_id = eos_id  # GPT-2 style: one token opens and closes documents
    return ids, bos_id, eos_id


def extract(
    model,
    tokenizer,
    alphabet,
    cutoff: int,
    out_path,
    *,
    budget: int = DEFAULT_CALL_BUDGET,
    device: str = "cpu",
    model_name: str = "unnamed-model",
) -> dict:
    """Write the interchange file; returns the document as a dict.

    Prompts are visited breadth first, one batch per tree level (all
    prompts of a level share a length, so no padding is needed).  The file
    is written atomically.
    """
    alphabet = list(alphabet)
    if not alphabet or len(set(alphabet)) != len(alphabet):
        raise UnknownToken("alphabet must be nonempty and duplicate-free")
    if cutoff < 1:
        raise ValueError(f"cutoff must be >= 1, got {cutoff!r}")
    calls = prompt_count(len(alphabet), cutoff)
    if calls > budget:
        raise BudgetExceeded(f"{calls} forward passes exceed the budget {budget}")

    ids, bos_id, eos_id = _resolve_ids(tokenizer, alphabet)
    id_of = dict(zip(alphabet, ids))
    column_ids = torch.tensor(ids + [eos_id], dtype=torch.long)
    emission = alphabet + [EOS_SPELLING]

    model.eval()
    nodes = {}
    level = [()]
    for _ in range(max(0, cutoff - 1)):
        batch = torch.tensor(
            [[bos_id] + [id_of[t] for t in prefix] for prefix in level],
            dtype=torch.long,
        ).to(device)
        with torch.no_grad():
            logits = model(batch).logits[:, -1, :]
        restricted = logits.index_select(1, column_ids.to(logits.device)).double()
        probs = torch.softmax(restricted, dim=-1)
        probs = probs / probs.sum(dim=-1, keepdim=True)
        for prefix, row in zip(level, probs.cpu()):
            key = " ".join((BOS_SPELLING,) + prefix)
            nodes[key] = {t: float(p) for t, p in zip(emission, row)}
        level = [prefix + (token,) for prefix in level for token in alphabet]

    doc = {
        "alphabet": alphabet,
        "cutoff": cutoff,
        "model": {"kind": "table", "nodes": nodes},
        "meta": {
            "source_model": model_name,
            "extracted_at": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
            "restriction": "softmax restricted to the listed alphabet plus "
                           "the end-of-sequence token and renormalized; "
                           "mass on all other vocabulary items is discarded",
            "forward_passes": calls,
        },
    }
    _atomic_write_json(doc, out_path)
    return doc


def extract_from_pretrained(
    model_id: str,
    alphabet,
    cutoff: int,
    out_path,
    *,
    budget: int = DEFAULT_CALL_BUDGET,
    device: str = "cpu",
) -> dict:
    """Load a causal LM by id or local path, then extract."""
    from transformers import AutoModelForCausalLM, AutoTokenizer

    tokenizer = AutoTokenizer.from_pretrained(model_id)
    model = AutoModelForCausalLM.from_pretrained(model_id).to(device)
    return extract(model, tokenizer, alphabet, cutoff, out_path,
                   budget=budget, device=device, model_name=str(model_id))


def _atomic_write_json(doc: dict, out_path) -> None:
    out_path = os.fspath(out_path)
    directory = os.path.dirname(out_path) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2)
            fh.write("\n")
        os.replace(tmp, out_path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
