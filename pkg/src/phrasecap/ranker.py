"""Rerank generated sentences by dot product between the encoded image and
the averaged phrase vectors of each candidate."""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .multimodal import encode


@dataclass
class RankedOutput:
    image_id: str
    best: Optional[object]  # SentenceCandidate, None when nothing was generated
    all: list  # candidates in descending rerank_score


def sentence_vector(candidate, model):
    """Mean of the fine-tuned V columns of the candidate's phrases (PERIOD
    included)."""
    ids = list(candidate.phrase_ids)
    if not ids:
        raise ValueError("empty candidate")
    return model.v[:, ids].mean(axis=1)


def rerank(candidates, feature, model):
    """Score candidates against the image and sort them.

    Ties fall back to lm_logprob then to the lexicographic phrase-id sequence.
    An empty candidate list yields a RankedOutput with best=None.
    """
    if not candidates:
        return RankedOutput(image_id=feature.image_id, best=None, all=[])
    g = encode(feature.x, model)
    for cand in candidates:
        cand.rerank_score = float(g @ sentence_vector(cand, model))
    ordered = sorted(
        candidates,
        key=lambda c: (-c.rerank_score, -c.lm_logprob, c.phrase_ids),
    )
    return RankedOutput(image_id=feature.image_id, best=ordered[0], all=ordered)


def sentence_text(candidate, table):
    """Render a candidate as caption text: phrase words joined by spaces,
    the terminal " ." collapsed into "."."""
    words = []
    for pid in candidate.phrase_ids:
        words.extend(table.phrases[pid].words)
    text = " ".join(words)
    if text.endswith(" ."):
        text = text[:-2] + "."
    return text


def write_outputs(outputs, table, path):
    """``image_id<TAB>sentence<TAB>rerank_score`` per image (empty sentence
    and score when no candidate survived)."""
    with open(path, "w", encoding="utf-8") as fh:
        for out in outputs:
            if out.best is None:
                fh.write(f"{out.image_id}\t\t\n")
            else:
                fh.write(
                    f"{out.image_id}\t{sentence_text(out.best, table)}"
                    f"\t{out.best.rerank_score!r}\n"
                )
