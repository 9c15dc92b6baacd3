"""Corpus-level BLEU with multiple references, and the human-agreement
protocol (first reference held out as the candidate).

Report file format: ``B-1 <v>`` .. ``B-4 <v>`` then ``BP <v>``, one per line.
"""

import math
from collections import Counter
from dataclasses import dataclass


@dataclass(frozen=True)
class BleuReport:
    scores: tuple  # B-1..B-max_n
    precisions: tuple  # modified n-gram precisions per order
    brevity_penalty: float
    candidate_length: int
    reference_length: int

    def score(self, n):
        return self.scores[n - 1]


def _ngrams(tokens, n):
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def corpus_bleu(candidates, references, max_n=4):
    """Standard corpus BLEU: clipped n-gram precision summed over the corpus,
    closest-reference brevity penalty, geometric mean with uniform weights.

    ``references[i]`` is the list of reference token sequences for
    ``candidates[i]``.
    """
    if len(candidates) != len(references):
        raise ValueError("candidate / reference-group count mismatch")
    if not 1 <= max_n <= 4:
        raise ValueError("max_n must be in [1, 4]")

    matched = [0] * max_n
    possible = [0] * max_n
    cand_len = 0
    ref_len = 0
    for cand, refs in zip(candidates, references):
        if not refs:
            raise ValueError("empty reference group")
        cand = list(cand)
        cand_len += len(cand)
        # closest reference length; ties go to the shorter reference
        ref_len += min((abs(len(r) - len(cand)), len(r)) for r in refs)[1]
        for n in range(1, max_n + 1):
            cand_counts = _ngrams(cand, n)
            if not cand_counts:
                continue
            max_ref = Counter()
            for ref in refs:
                for gram, count in _ngrams(list(ref), n).items():
                    if count > max_ref[gram]:
                        max_ref[gram] = count
            possible[n - 1] += sum(cand_counts.values())
            matched[n - 1] += sum(
                min(count, max_ref[gram]) for gram, count in cand_counts.items()
            )

    precisions = tuple(
        matched[i] / possible[i] if possible[i] > 0 else 0.0 for i in range(max_n)
    )
    if cand_len == 0:
        bp = 0.0
    elif cand_len < ref_len:
        bp = math.exp(1.0 - ref_len / cand_len)
    else:
        bp = 1.0

    scores = []
    for n in range(1, max_n + 1):
        if any(p == 0.0 for p in precisions[:n]):
            scores.append(0.0)
        else:
            log_mean = sum(math.log(p) for p in precisions[:n]) / n
            scores.append(bp * math.exp(log_mean))
    return BleuReport(
        scores=tuple(scores),
        precisions=precisions,
        brevity_penalty=bp,
        candidate_length=cand_len,
        reference_length=ref_len,
    )


def human_agreement(reference_groups, max_n=4):
    """BLEU of the first reference of each group against the remaining ones."""
    candidates, references = [], []
    for group in reference_groups:
        if len(group) < 2:
            raise ValueError("human agreement needs >= 2 references per image")
        candidates.append(group[0])
        references.append(group[1:])
    return corpus_bleu(candidates, references, max_n)


def write_report(report, path):
    with open(path, "w", encoding="utf-8") as fh:
        for n, score in enumerate(report.scores, 1):
            fh.write(f"B-{n} {score!r}\n")
        fh.write(f"BP {report.brevity_penalty!r}\n")
