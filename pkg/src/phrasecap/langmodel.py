"""Trigram language model over phrase-id sequences and the constrained
sentence generator: a noun phrase is followed by a verb or prepositional
phrase, which is followed by another noun phrase, until the period.

Sequences are padded with two synthetic START symbols. Smoothing is stupid
backoff with factor 0.4: MLE trigram if seen, else 0.4 * MLE bigram, else
0.4^2 * unigram.

File formats
------------
Trigram model: ``1-gram`` / ``2-gram`` / ``3-gram`` section headers, then
``id [id [id]]<TAB>count`` lines (START written as ``<s>``).

Candidate dump: ``image_id<TAB>lm_logprob<TAB>id,id,...`` per line.
"""

import math
from collections import Counter
from dataclasses import dataclass, field

from .chunker import PhraseType

START = -1
BACKOFF = 0.4


@dataclass(frozen=True)
class TrigramModel:
    unigrams: dict
    bigrams: dict
    trigrams: dict
    total: int  # unigram token total, START included

    def prob(self, c, a, b):
        """Backed-off p(c | a, b)."""
        tri = self.trigrams.get((a, b, c), 0)
        if tri > 0:
            return tri / self.bigrams[(a, b)]
        bi = self.bigrams.get((b, c), 0)
        if bi > 0:
            return BACKOFF * bi / self.unigrams[b]
        return BACKOFF * BACKOFF * self.unigrams.get(c, 0) / self.total

    def logprob(self, c, a, b):
        p = self.prob(c, a, b)
        return math.log(p) if p > 0 else float("-inf")

    def sentence_logprob(self, phrase_ids):
        """Sum of transition log probabilities with START padding."""
        padded = (START, START) + tuple(phrase_ids)
        return sum(
            self.logprob(padded[i], padded[i - 2], padded[i - 1])
            for i in range(2, len(padded))
        )


def fit_trigram(sentences):
    """Count 1/2/3-grams over START-padded phrase-id sequences.

    ``sentences`` yields phrase-id sequences (each ending in the PERIOD id).
    """
    unigrams, bigrams, trigrams = Counter(), Counter(), Counter()
    total = 0
    empty = True
    for ids in sentences:
        empty = False
        padded = (START, START) + tuple(ids)
        for tok in padded:
            unigrams[tok] += 1
            total += 1
        for i in range(len(padded) - 1):
            bigrams[(padded[i], padded[i + 1])] += 1
        for i in range(len(padded) - 2):
            trigrams[(padded[i], padded[i + 1], padded[i + 2])] += 1
    if empty:
        raise ValueError("empty corpus")
    return TrigramModel(dict(unigrams), dict(bigrams), dict(trigrams), total)


@dataclass(frozen=True)
class GenerationConfig:
    np_count_options: frozenset = frozenset({2, 3, 4})
    top_np: int = 20
    top_vp: int = 10
    top_pp: int = 5
    transition_threshold: float = 0.01
    max_candidates: int = 1000

    def __post_init__(self):
        if not 0.0 <= self.transition_threshold <= 1.0:
            raise ValueError("transition_threshold must be in [0, 1]")
        if min(self.top_np, self.top_vp, self.top_pp, self.max_candidates) < 1:
            raise ValueError("counts must be >= 1")
        if not self.np_count_options or min(self.np_count_options) < 1:
            raise ValueError("np_count_options must be non-empty positive counts")


@dataclass
class SentenceCandidate:
    phrase_ids: tuple  # ends in the PERIOD phrase
    lm_logprob: float
    rerank_score: float = 0.0


def accepts(type_sequence, np_count_options=frozenset({2, 3, 4})):
    """True iff the sequence matches NP ((VP|PP) NP)* PERIOD with an allowed
    number of noun phrases."""
    seq = list(type_sequence)
    if not seq or seq[-1] is not PhraseType.PERIOD:
        return False
    body = seq[:-1]
    if not body or body[0] is not PhraseType.NP:
        return False
    np_count = 0
    expect_np = True
    for t in body:
        if expect_np:
            if t is not PhraseType.NP:
                return False
            np_count += 1
        else:
            if t not in (PhraseType.VP, PhraseType.PP):
                return False
        expect_np = not expect_np
    if expect_np:  # ended on a connector
        return False
    return np_count in np_count_options


def generate(candidates, period_id, lm, config):
    """Enumerate automaton-valid sentences from per-type candidate sets.

    ``candidates`` maps PhraseType.NP/VP/PP to phrase-id lists. Partial paths
    are pruned as soon as a transition probability (START-padded trigram)
    falls below the threshold. Output is sorted by descending lm_logprob,
    ties by lexicographic phrase-id sequence, truncated to max_candidates.
    """
    nps = list(candidates.get(PhraseType.NP, []))
    connectors = list(candidates.get(PhraseType.VP, [])) + list(
        candidates.get(PhraseType.PP, [])
    )
    max_np = max(config.np_count_options)
    threshold = config.transition_threshold
    out = []

    def extend(path, np_count, logprob, want_np):
        a = path[-2] if len(path) >= 2 else START
        b = path[-1] if len(path) >= 1 else START
        if want_np:
            nxt = nps
        else:
            # after an NP: close the sentence if allowed, or add a connector
            if np_count in config.np_count_options:
                p = lm.prob(period_id, a, b)
                if p >= threshold and p > 0:
                    out.append(
                        SentenceCandidate(
                            phrase_ids=tuple(path) + (period_id,),
                            lm_logprob=logprob + math.log(p),
                        )
                    )
            if np_count >= max_np:
                return
            nxt = connectors
        for pid in nxt:
            p = lm.prob(pid, a, b)
            if p < threshold or p <= 0:
                continue
            extend(path + [pid], np_count + (1 if want_np else 0),
                   logprob + math.log(p), not want_np)

    extend([], 0, 0.0, True)
    out.sort(key=lambda c: (-c.lm_logprob, c.phrase_ids))
    if config.max_candidates != math.inf:
        out = out[: config.max_candidates]
    return out


def _gram_key(ids):
    return " ".join("<s>" if i == START else str(i) for i in ids)


def _parse_gram(text):
    return tuple(START if t == "<s>" else int(t) for t in text.split())


def write_trigram_model(lm, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("1-gram\n")
        for key in sorted(lm.unigrams):
            fh.write(f"{_gram_key((key,))}\t{lm.unigrams[key]}\n")
        fh.write("2-gram\n")
        for key in sorted(lm.bigrams):
            fh.write(f"{_gram_key(key)}\t{lm.bigrams[key]}\n")
        fh.write("3-gram\n")
        for key in sorted(lm.trigrams):
            fh.write(f"{_gram_key(key)}\t{lm.trigrams[key]}\n")


def read_trigram_model(path):
    sections = {"1-gram": {}, "2-gram": {}, "3-gram": {}}
    current = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line:
                continue
            if line in sections:
                current = line
                continue
            if current is None or "\t" not in line:
                raise ValueError(f"{path}:{lineno}: bad trigram-model line")
            gram, count = line.split("\t")
            key = _parse_gram(gram)
            sections[current][key if current != "1-gram" else key[0]] = int(count)
    unigrams = sections["1-gram"]
    return TrigramModel(
        unigrams, sections["2-gram"], sections["3-gram"], sum(unigrams.values())
    )
