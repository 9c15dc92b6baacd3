"""Tokenization, vocabulary construction, caption ingestion and sentence
structure statistics.

File formats
------------
Caption dataset: one record per line, ``image_id<TAB>sentence`` (UTF-8,
multiple lines per image allowed).

Vocabulary file: one line per word, ``word<TAB>count``, line number = id.
"""

import re
from collections import Counter
from dataclasses import dataclass, field

# Terminal punctuation and commas become standalone tokens; any other
# punctuation is stripped.
_KEPT_PUNCT = ".,!?"
_TOKEN_RE = re.compile(r"[.,!?]|[^\s.,!?]+")
_STRIP_RE = re.compile(r"[^\w]", re.UNICODE)


def tokenize(raw):
    """Split text into lowercased tokens.

    Whitespace separates tokens; ``. , ! ?`` are split off as standalone
    tokens; all other punctuation is stripped.
    """
    tokens = []
    for piece in _TOKEN_RE.findall(raw.lower()):
        if piece in _KEPT_PUNCT:
            tokens.append(piece)
        else:
            cleaned = _STRIP_RE.sub("", piece)
            if cleaned:
                tokens.append(cleaned)
    return tokens


@dataclass(frozen=True)
class Vocabulary:
    """Dense bidirectional word <-> id table with occurrence counts.

    Ids run 0..size-1 in descending frequency, ties broken lexicographically.
    """

    word_of: tuple
    count_of: tuple
    id_of: dict = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(
            self, "id_of", {w: i for i, w in enumerate(self.word_of)}
        )

    def __len__(self):
        return len(self.word_of)

    def __contains__(self, word):
        return word in self.id_of

    def count(self, word):
        return self.count_of[self.id_of[word]]


def build_vocabulary(corpus, max_words):
    """Return the ``max_words`` most frequent words of a token-sequence corpus.

    Ids are assigned in descending frequency then lexicographic order.
    """
    if max_words < 1:
        raise ValueError("max_words must be >= 1")
    counts = Counter()
    for sentence in corpus:
        counts.update(sentence)
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))[:max_words]
    return Vocabulary(
        word_of=tuple(w for w, _ in ranked),
        count_of=tuple(c for _, c in ranked),
    )


@dataclass(frozen=True)
class CaptionRecord:
    image_id: str
    sentences: tuple  # token sequences, >= 1 per image


def read_captions(path):
    """Read a caption dataset file into CaptionRecords (file order preserved)."""
    by_image = {}
    order = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line:
                continue
            if "\t" not in line:
                raise ValueError(f"{path}:{lineno}: expected image_id<TAB>sentence")
            image_id, sentence = line.split("\t", 1)
            tokens = tuple(tokenize(sentence))
            if not tokens:
                raise ValueError(f"{path}:{lineno}: empty sentence")
            if image_id not in by_image:
                by_image[image_id] = []
                order.append(image_id)
            by_image[image_id].append(tokens)
    return [CaptionRecord(i, tuple(by_image[i])) for i in order]


def write_vocabulary(vocab, path):
    with open(path, "w", encoding="utf-8") as fh:
        for word, count in zip(vocab.word_of, vocab.count_of):
            fh.write(f"{word}\t{count}\n")


def read_vocabulary(path):
    words, counts = [], []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line:
                continue
            try:
                word, count = line.split("\t")
                counts.append(int(count))
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: bad vocabulary line") from exc
            words.append(word)
    return Vocabulary(word_of=tuple(words), count_of=tuple(counts))


def structure_statistics(chunked):
    """Histogram of NP-count per sentence plus frequency-ranked type patterns.

    ``chunked`` is a sequence of phrase-type name sequences (NP/VP/PP/PERIOD).
    Returns ``(np_histogram, pattern_list)`` where pattern_list entries are
    ``("NP VP NP .", count)`` in descending frequency, ties lexicographic.
    """
    np_hist = Counter()
    patterns = Counter()
    for types in chunked:
        np_hist[sum(1 for t in types if t == "NP")] += 1
        patterns[" ".join("." if t == "PERIOD" else t for t in types)] += 1
    ranked = sorted(patterns.items(), key=lambda kv: (-kv[1], kv[0]))
    return dict(np_hist), ranked
