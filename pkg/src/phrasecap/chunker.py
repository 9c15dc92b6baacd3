"""Shallow chunking of token sequences into NP/VP/PP phrases, the phrase
inventory with a frequency cutoff, and sentence -> phrase-id conversion.

Chunking operates on coarse POS tags supplied with the tokens (tag set
DET, ADJ, NOUN, VERB, ADV, PREP, OTHER, PUNCT); there is no tagger here.
Externally chunked data can be ingested via a bracketed text format.

File formats
------------
Chunked captions: ``image_id<TAB>[NP w1 w2] [VP w] ... [.]`` one sentence
per line; ``[.]`` is the sentence terminator.

Phrase table: ``phrase_id<TAB>TYPE<TAB>count<TAB>w1 w2 ...`` one per line.

Tagged captions (input to the rule chunker):
``image_id<TAB>word/TAG word/TAG ...`` one sentence per line.
"""

import re
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum


class PhraseType(Enum):
    NP = "NP"
    VP = "VP"
    PP = "PP"
    PERIOD = "PERIOD"


TAG_SET = {"DET", "ADJ", "NOUN", "VERB", "ADV", "PREP", "OTHER", "PUNCT"}


class ChunkError(ValueError):
    pass


def chunk_tagged(tagged):
    """Segment a ``(word, tag)`` sequence into typed phrases.

    Greedy left-to-right maximal matching:
      DET? ADJ* NOUN+        -> NP
      ADV* VERB+ ADV*        -> VP   (adverbs merged into the verb phrase)
      PREP+                  -> PP
      terminal "."           -> PERIOD
    Unmatched tokens are dropped. Returns ``(PhraseType, words tuple)`` pairs.
    """
    for word, tag in tagged:
        if tag not in TAG_SET:
            raise ChunkError(f"unknown POS tag {tag!r} on word {word!r}")

    chunks = []
    i = 0
    n = len(tagged)
    while i < n:
        word, tag = tagged[i]
        if tag == "PUNCT":
            if word == ".":
                chunks.append((PhraseType.PERIOD, (".",)))
            i += 1
            continue
        if tag in ("DET", "ADJ", "NOUN"):
            j = i
            if tagged[j][1] == "DET":
                j += 1
            while j < n and tagged[j][1] == "ADJ":
                j += 1
            k = j
            while k < n and tagged[k][1] == "NOUN":
                k += 1
            if k > j:  # at least one noun
                chunks.append((PhraseType.NP, tuple(w for w, _ in tagged[i:k])))
                i = k
                continue
            i += 1
            continue
        if tag in ("ADV", "VERB"):
            j = i
            while j < n and tagged[j][1] == "ADV":
                j += 1
            k = j
            while k < n and tagged[k][1] == "VERB":
                k += 1
            if k > j:  # at least one verb
                while k < n and tagged[k][1] == "ADV":
                    k += 1
                chunks.append((PhraseType.VP, tuple(w for w, _ in tagged[i:k])))
                i = k
                continue
            i += 1
            continue
        if tag == "PREP":
            k = i
            while k < n and tagged[k][1] == "PREP":
                k += 1
            chunks.append((PhraseType.PP, tuple(w for w, _ in tagged[i:k])))
            i = k
            continue
        i += 1  # OTHER
    return chunks


_BRACKET_RE = re.compile(r"\[([^\[\]]*)\]")


def ingest_chunked(line):
    """Parse one chunked-caption line into ``(image_id, chunks)``.

    ``chunks`` mirrors chunk_tagged output: ``(PhraseType, words)`` pairs.
    Raises ChunkError with a byte offset on malformed input.
    """
    if "\t" not in line:
        raise ChunkError("offset 0: missing image_id<TAB> prefix")
    image_id, rest = line.split("\t", 1)
    base = len(image_id) + 1

    chunks = []
    pos = 0
    for match in _BRACKET_RE.finditer(rest):
        between = rest[pos : match.start()]
        if between.strip():
            raise ChunkError(f"offset {base + pos}: stray text {between.strip()!r}")
        pos = match.end()
        body = match.group(1).strip()
        if body == ".":
            chunks.append((PhraseType.PERIOD, (".",)))
            continue
        parts = body.split()
        if len(parts) < 2 or parts[0] not in ("NP", "VP", "PP"):
            raise ChunkError(
                f"offset {base + match.start()}: bad phrase {match.group(0)!r}"
            )
        chunks.append((PhraseType(parts[0]), tuple(parts[1:])))
    tail = rest[pos:]
    if tail.strip() or "[" in tail or "]" in tail:
        raise ChunkError(f"offset {base + pos}: malformed brackets in {tail!r}")
    if not chunks:
        raise ChunkError(f"offset {base}: no phrases")
    return image_id, chunks


def format_chunked(image_id, chunks):
    """Inverse of ingest_chunked for well-formed chunk sequences."""
    parts = []
    for ptype, words in chunks:
        if ptype is PhraseType.PERIOD:
            parts.append("[.]")
        else:
            parts.append(f"[{ptype.value} {' '.join(words)}]")
    return f"{image_id}\t{' '.join(parts)}"


@dataclass(frozen=True)
class Phrase:
    ptype: PhraseType
    words: tuple
    phrase_id: int


_TYPE_ORDER = {PhraseType.NP: 0, PhraseType.VP: 1, PhraseType.PP: 2, PhraseType.PERIOD: 3}


@dataclass(frozen=True)
class PhraseTable:
    """Immutable phrase inventory: id-ordered phrases with corpus counts."""

    phrases: tuple
    counts: tuple
    index: dict = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(
            self,
            "index",
            {(p.ptype, p.words): p.phrase_id for p in self.phrases},
        )

    def __len__(self):
        return len(self.phrases)

    @property
    def period_id(self):
        return self.index[(PhraseType.PERIOD, (".",))]

    def ids_of_type(self, ptype):
        return [p.phrase_id for p in self.phrases if p.ptype is ptype]


def build_phrase_table(chunked_corpus, min_count):
    """Build the phrase inventory from ``(image_id, chunks)`` pairs.

    Keeps distinct (type, words) pairs with frequency >= min_count; PERIOD is
    always present. Ids are grouped by type (NP, VP, PP, PERIOD), within a
    group by descending frequency then lexicographic word order.
    """
    if min_count < 1:
        raise ValueError("min_count must be >= 1")
    counts = Counter()
    for _, chunks in chunked_corpus:
        for ptype, words in chunks:
            counts[(ptype, words)] += 1

    period_key = (PhraseType.PERIOD, (".",))
    kept = {
        key: c
        for key, c in counts.items()
        if c >= min_count or key == period_key
    }
    kept.setdefault(period_key, counts.get(period_key, 0))

    keys = sorted(
        kept, key=lambda key: (_TYPE_ORDER[key[0]], -kept[key], key[1])
    )
    phrases = tuple(
        Phrase(ptype=k[0], words=k[1], phrase_id=i) for i, k in enumerate(keys)
    )
    return PhraseTable(phrases=phrases, counts=tuple(kept[k] for k in keys))


@dataclass(frozen=True)
class ChunkedSentence:
    image_id: str
    phrases: tuple  # phrase ids, last one is the PERIOD phrase


def sentence_to_phrase_ids(image_id, chunks, table):
    """Map chunks to phrase ids, skipping chunks absent from the table.

    Appends the PERIOD phrase if the sentence does not already end with it.
    """
    ids = []
    for ptype, words in chunks:
        pid = table.index.get((ptype, words))
        if pid is not None:
            ids.append(pid)
    if not ids or ids[-1] != table.period_id:
        ids.append(table.period_id)
    return ChunkedSentence(image_id=image_id, phrases=tuple(ids))


def read_chunked_file(path):
    """Read a chunked-caption file into ``(image_id, chunks)`` pairs."""
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line:
                continue
            try:
                out.append(ingest_chunked(line))
            except ChunkError as exc:
                raise ChunkError(f"{path}:{lineno}: {exc}") from exc
    return out


def read_tagged_file(path):
    """Read a tagged-caption file into ``(image_id, [(word, tag), ...])`` pairs."""
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line:
                continue
            if "\t" not in line:
                raise ValueError(f"{path}:{lineno}: expected image_id<TAB>tokens")
            image_id, rest = line.split("\t", 1)
            tagged = []
            for item in rest.split():
                if "/" not in item:
                    raise ValueError(f"{path}:{lineno}: expected word/TAG, got {item!r}")
                word, tag = item.rsplit("/", 1)
                tagged.append((word.lower(), tag))
            out.append((image_id, tagged))
    return out


def write_phrase_table(table, path):
    with open(path, "w", encoding="utf-8") as fh:
        for phrase, count in zip(table.phrases, table.counts):
            fh.write(
                f"{phrase.phrase_id}\t{phrase.ptype.value if phrase.ptype is not PhraseType.PERIOD else 'PERIOD'}"
                f"\t{count}\t{' '.join(phrase.words)}\n"
            )


def read_phrase_table(path):
    phrases, counts = [], []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line:
                continue
            try:
                pid, tname, count, words = line.split("\t")
                phrases.append(
                    Phrase(PhraseType[tname] if tname == "PERIOD" else PhraseType(tname),
                           tuple(words.split()), int(pid))
                )
                counts.append(int(count))
            except (ValueError, KeyError) as exc:
                raise ValueError(f"{path}:{lineno}: bad phrase-table line") from exc
    return PhraseTable(phrases=tuple(phrases), counts=tuple(counts))
