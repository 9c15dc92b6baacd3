"""Word vectors from Hellinger PCA of a co-occurrence matrix, and phrase
vectors by word-vector averaging.

File formats
------------
Co-occurrence: header ``rows cols window``, then sparse triplets
``row<TAB>col<TAB>count``.

Embeddings: header ``vocab_size dim``, then ``word v1 ... vm`` per line with
round-trip decimal floats.
"""

from collections import Counter
from dataclasses import dataclass

import numpy as np
from scipy import sparse


@dataclass(frozen=True)
class CoocMatrix:
    counts: sparse.csr_matrix  # rows: target words, cols: context words
    window: int

    @property
    def shape(self):
        return self.counts.shape


def build_cooc(corpus, target_size, context_vocab_ids, window):
    """Count context words within +/- ``window`` of each target word.

    ``corpus`` holds token-id sequences (ids into the target vocabulary);
    ``context_vocab_ids`` maps target ids to context-column indices (only the
    retained context words appear). Windows never cross sentence boundaries
    and exclude the target position itself.
    """
    if window < 1:
        raise ValueError("window must be >= 1")
    rows, cols, vals = [], [], []
    acc = Counter()
    for sentence in corpus:
        length = len(sentence)
        for pos, target in enumerate(sentence):
            lo = max(0, pos - window)
            hi = min(length, pos + window + 1)
            for ctx_pos in range(lo, hi):
                if ctx_pos == pos:
                    continue
                col = context_vocab_ids.get(sentence[ctx_pos])
                if col is not None:
                    acc[(target, col)] += 1
    for (r, c), v in acc.items():
        rows.append(r)
        cols.append(c)
        vals.append(v)
    n_cols = (max(context_vocab_ids.values()) + 1) if context_vocab_ids else 0
    counts = sparse.csr_matrix(
        (vals, (rows, cols)), shape=(target_size, n_cols), dtype=np.float64
    )
    return CoocMatrix(counts=counts, window=window)


@dataclass(frozen=True)
class WordEmbeddings:
    vectors: np.ndarray  # (vocab size, dim)

    @property
    def dim(self):
        return self.vectors.shape[1]


def hellinger_map(counts):
    """Row-normalize counts to probabilities and take element-wise sqrt."""
    dense = np.asarray(
        counts.todense() if sparse.issparse(counts) else counts, dtype=np.float64
    )
    row_sums = dense.sum(axis=1)
    if np.any(row_sums <= 0):
        bad = int(np.argmin(row_sums))
        raise ValueError(f"target row {bad} has zero co-occurrence count")
    return np.sqrt(dense / row_sums[:, None])


def hellinger_pca(cooc, dim):
    """Embed words by PCA of the Hellinger-mapped co-occurrence rows.

    Pipeline: row-normalize, sqrt, center columns, SVD, project onto the top
    ``dim`` components. Each component's sign is fixed so its largest-magnitude
    entry is positive. Returns (WordEmbeddings, components, centered_matrix);
    ``projections @ components.T`` reconstructs the centered matrix at full rank.
    """
    counts = cooc.counts if isinstance(cooc, CoocMatrix) else cooc
    n_rows, n_cols = counts.shape
    if not 1 <= dim <= min(n_rows, n_cols):
        raise ValueError(f"dim {dim} out of range for {n_rows}x{n_cols} matrix")

    mapped = hellinger_map(counts)
    centered = mapped - mapped.mean(axis=0)

    u, s, vt = np.linalg.svd(centered, full_matrices=False)
    components = vt[:dim].T  # (n_cols, dim)
    # sign convention: largest-|entry| of each component made positive
    flip = np.sign(components[np.argmax(np.abs(components), axis=0),
                              np.arange(dim)])
    flip[flip == 0] = 1.0
    components = components * flip
    projections = centered @ components
    return WordEmbeddings(vectors=projections), components, centered


def phrase_vector(words, vocab, emb):
    """Average the word vectors of a phrase.

    Out-of-vocabulary words contribute a zero vector but still count toward
    the denominator.
    """
    acc = np.zeros(emb.dim)
    for word in words:
        idx = vocab.id_of.get(word)
        if idx is not None:
            acc += emb.vectors[idx]
    return acc / len(words)


def build_phrase_matrix(table, vocab, emb):
    """Stack phrase vectors column-wise in phrase-id order: (dim, |table|)."""
    cols = np.zeros((emb.dim, len(table)))
    for phrase in table.phrases:
        cols[:, phrase.phrase_id] = phrase_vector(phrase.words, vocab, emb)
    return cols


def write_cooc(cooc, path):
    coo = cooc.counts.tocoo()
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{cooc.counts.shape[0]} {cooc.counts.shape[1]} {cooc.window}\n")
        order = np.lexsort((coo.col, coo.row))
        for i in order:
            fh.write(f"{coo.row[i]}\t{coo.col[i]}\t{int(coo.data[i])}\n")


def read_cooc(path):
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 3:
            raise ValueError(f"{path}:1: expected header 'rows cols window'")
        n_rows, n_cols, window = map(int, header)
        rows, cols, vals = [], [], []
        for lineno, line in enumerate(fh, 2):
            line = line.rstrip("\n")
            if not line:
                continue
            try:
                r, c, v = line.split("\t")
                rows.append(int(r))
                cols.append(int(c))
                vals.append(float(v))
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: bad triplet line") from exc
    counts = sparse.csr_matrix(
        (vals, (rows, cols)), shape=(n_rows, n_cols), dtype=np.float64
    )
    return CoocMatrix(counts=counts, window=window)


def write_embeddings(vocab, emb, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{len(vocab)} {emb.dim}\n")
        for i, word in enumerate(vocab.word_of):
            vals = " ".join(repr(float(v)) for v in emb.vectors[i])
            fh.write(f"{word} {vals}\n")


def read_embeddings(path):
    """Returns (word list, WordEmbeddings) in file order."""
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise ValueError(f"{path}:1: expected header 'vocab_size dim'")
        size, dim = map(int, header)
        words = []
        vectors = np.zeros((size, dim))
        for i, line in enumerate(fh):
            parts = line.split()
            if len(parts) != dim + 1:
                raise ValueError(f"{path}:{i + 2}: expected word + {dim} values")
            words.append(parts[0])
            vectors[i] = [float(v) for v in parts[1:]]
    if len(words) != size:
        raise ValueError(f"{path}: header promised {size} words, found {len(words)}")
    return words, WordEmbeddings(vectors=vectors)
