"""Bilinear image-phrase model: encoding, scoring, logistic loss with
negative sampling, SGD training, and top-phrase inference.

The per-sample SGD update is the hot loop; a compiled kernel is used when
available, with a pure-numpy twin as fallback (see KERNEL_BACKEND).

File formats
------------
Image features: header ``count n``, then ``image_id v1 ... vn`` per line.

Model: header ``n m |C|``, a ``phrase_table <path>`` line, then the rows of
U followed by the rows of V, round-trip decimal floats.
"""

from dataclasses import dataclass

import numpy as np

from .chunker import PhraseType

try:
    from ._sgd_cy import sgd_epoch as _sgd_epoch

    KERNEL_BACKEND = "cython"
except ImportError:  # pragma: no cover - depends on build environment
    from ._sgd_py import sgd_epoch as _sgd_epoch

    KERNEL_BACKEND = "python"


@dataclass(frozen=True)
class ImageFeature:
    image_id: str
    x: np.ndarray


@dataclass
class BilinearModel:
    u: np.ndarray  # (n, m): image encoder
    v: np.ndarray  # (m, |C|): phrase matrix, fine-tuned during training
    phrase_table: object = None
    phrase_table_path: str = ""

    @property
    def image_dim(self):
        return self.u.shape[0]

    @property
    def embed_dim(self):
        return self.u.shape[1]

    @property
    def phrase_count(self):
        return self.v.shape[1]


@dataclass(frozen=True)
class TrainConfig:
    """SGD hyperparameters.

    The learning-rate default is a desk-scale value; the pipeline config
    (phrasecap.config) defaults to the production-scale 0.00025 instead,
    which is far too small for corpora of a few hundred SGD steps.
    """

    negatives_per_positive: int = 15
    learning_rate: float = 0.01
    epochs: int = 10
    rng_seed: int = 42
    noise_distribution: str = "uniform"  # or "unigram"

    def __post_init__(self):
        if self.negatives_per_positive < 1:
            raise ValueError("negatives_per_positive must be >= 1")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be > 0")
        if self.noise_distribution not in ("uniform", "unigram"):
            raise ValueError(f"unknown noise distribution {self.noise_distribution!r}")


def encode(x, model):
    """Map an image feature vector into the phrase space: x @ U."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (model.image_dim,):
        raise ValueError(f"feature dim {x.shape} != ({model.image_dim},)")
    return x @ model.u


def score_all(x, model):
    """Similarity of the image to every phrase: encode(x) @ V."""
    return encode(x, model) @ model.v


def softmax_probs(scores):
    """Softmax over phrase scores, computed with max-subtraction."""
    scores = np.asarray(scores, dtype=np.float64)
    if not np.all(np.isfinite(scores)):
        raise ValueError("scores must be finite")
    shifted = scores - scores.max()
    e = np.exp(shifted)
    return e / e.sum()


def _softplus(z):
    return np.logaddexp(0.0, z)


def nce_loss(x, positive_ids, negative_ids, model):
    """Logistic loss: positives rewarded for high scores, negatives penalized.

    ``negative_ids`` holds one id sequence per positive. Returns
    sum_j [ log(1+e^{-f_j}) + sum_k log(1+e^{+f_k}) ].
    """
    positive_ids = list(positive_ids)
    if not positive_ids:
        raise ValueError("empty positive set")
    if len(negative_ids) != len(positive_ids):
        raise ValueError("need one negative sample set per positive")
    scores = score_all(x, model)
    total = 0.0
    for pos, negs in zip(positive_ids, negative_ids):
        total += _softplus(-scores[pos])
        total += _softplus(scores[list(negs)]).sum()
    return float(total)


def nce_gradients(x, positive_ids, negative_ids, model):
    """Analytic gradients of nce_loss w.r.t. U and the sampled V columns.

    Returns ``(grad_u, grad_v_cols)`` where grad_v_cols maps phrase_id to the
    gradient of that V column; untouched columns have zero gradient and are
    omitted.
    """
    positive_ids = list(positive_ids)
    if not positive_ids:
        raise ValueError("empty positive set")
    if len(negative_ids) != len(positive_ids):
        raise ValueError("need one negative sample set per positive")
    x = np.asarray(x, dtype=np.float64)
    g = encode(x, model)

    dg = np.zeros(model.embed_dim)
    grad_v = {}
    for pos, negs in zip(positive_ids, negative_ids):
        f_pos = g @ model.v[:, pos]
        r_pos = -1.0 / (1.0 + np.exp(f_pos))  # -sigmoid(-f)
        dg += r_pos * model.v[:, pos]
        grad_v[pos] = grad_v.get(pos, 0.0) + r_pos * g
        for k in negs:
            f_k = g @ model.v[:, k]
            r_k = 1.0 / (1.0 + np.exp(-f_k))  # sigmoid(f)
            dg += r_k * model.v[:, k]
            grad_v[k] = grad_v.get(k, 0.0) + r_k * g
    grad_u = np.outer(x, dg)
    return grad_u, grad_v


def init_encoder(n, m, rng):
    """Seeded uniform(-a, a) init with a = 1/sqrt(n), keeping scores O(1)."""
    a = 1.0 / np.sqrt(n)
    return rng.uniform(-a, a, size=(n, m))


def _sample_negatives(rng, n_draws, exclude, n_phrases, probs):
    """Draw ``n_draws`` noise phrases (with replacement) avoiding ``exclude``."""
    out = np.empty(n_draws, dtype=np.int64)
    filled = 0
    while filled < n_draws:
        draws = rng.choice(n_phrases, size=n_draws - filled, p=probs)
        for d in np.atleast_1d(draws):
            if d not in exclude:
                out[filled] = d
                filled += 1
    return out


def train(dataset, init_v, config, phrase_table=None, phrase_counts=None):
    """SGD training over (ImageFeature, positive phrase-id sequence) pairs.

    One update per (image, sentence, phrase) triple, epoch order shuffled with
    the seeded generator. V starts from ``init_v`` (copied, then fine-tuned);
    U starts from the seeded uniform init. Returns (model, per-epoch mean loss).
    """
    if not dataset:
        raise ValueError("empty dataset")
    v = np.ascontiguousarray(np.asarray(init_v, dtype=np.float64).copy())
    m, n_phrases = v.shape
    n = len(dataset[0][0].x)
    rng = np.random.default_rng(config.rng_seed)
    u = np.ascontiguousarray(init_encoder(n, m, rng))

    x_rows = np.ascontiguousarray(
        np.stack([np.asarray(feat.x, dtype=np.float64) for feat, _ in dataset])
    )
    if x_rows.shape[1] != n:
        raise ValueError("inconsistent image feature dimensions")

    if config.noise_distribution == "unigram":
        if phrase_counts is None:
            raise ValueError("unigram noise needs phrase counts")
        probs = np.asarray(phrase_counts, dtype=np.float64)
        probs = probs / probs.sum()
    else:
        probs = None

    # flatten Eq-style triple sum: one (image, positive) step per phrase token
    triples = []
    positives_of = []
    for img_i, (_, sentence_ids) in enumerate(dataset):
        pos_set = frozenset(sentence_ids)
        if len(pos_set) >= n_phrases:
            raise ValueError("a sentence covers every phrase; nothing to sample")
        for pid in sentence_ids:
            if pid < 0 or pid >= n_phrases:
                raise ValueError(f"phrase id {pid} outside V")
            triples.append((img_i, pid, pos_set))
    if not triples:
        raise ValueError("dataset contains no positive phrases")

    n_neg = config.negatives_per_positive
    losses = []
    for _ in range(config.epochs):
        order = rng.permutation(len(triples))
        img_idx = np.empty(len(triples), dtype=np.int64)
        pos_ids = np.empty(len(triples), dtype=np.int64)
        neg_ids = np.empty((len(triples), n_neg), dtype=np.int64)
        for row, t in enumerate(order):
            img_i, pid, pos_set = triples[t]
            img_idx[row] = img_i
            pos_ids[row] = pid
            neg_ids[row] = _sample_negatives(rng, n_neg, pos_set, n_phrases, probs)
        total = _sgd_epoch(x_rows, u, v, img_idx, pos_ids, neg_ids,
                           config.learning_rate)
        losses.append(total / (len(triples) * (1 + n_neg)))

    model = BilinearModel(u=u, v=v, phrase_table=phrase_table)
    return model, losses


def top_phrases(x, model, ptype, k):
    """The k highest-scoring phrases of one type; ties broken by phrase_id."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if model.phrase_table is None:
        raise ValueError("model has no phrase table attached")
    scores = score_all(x, model)
    ids = model.phrase_table.ids_of_type(ptype)
    ranked = sorted(ids, key=lambda pid: (-scores[pid], pid))
    return [(pid, float(scores[pid])) for pid in ranked[:k]]


def predict_candidate_sets(x, model, top_np, top_vp, top_pp):
    """Per-type candidate phrase ids for the sentence generator."""
    return {
        PhraseType.NP: [pid for pid, _ in top_phrases(x, model, PhraseType.NP, top_np)],
        PhraseType.VP: [pid for pid, _ in top_phrases(x, model, PhraseType.VP, top_vp)]
        if model.phrase_table.ids_of_type(PhraseType.VP) else [],
        PhraseType.PP: [pid for pid, _ in top_phrases(x, model, PhraseType.PP, top_pp)]
        if model.phrase_table.ids_of_type(PhraseType.PP) else [],
    }


def read_image_features(path):
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise ValueError(f"{path}:1: expected header 'count n'")
        count, n = map(int, header)
        feats = []
        for lineno, line in enumerate(fh, 2):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != n + 1:
                raise ValueError(f"{path}:{lineno}: expected image_id + {n} values")
            feats.append(
                ImageFeature(parts[0], np.array([float(v) for v in parts[1:]]))
            )
    if len(feats) != count:
        raise ValueError(f"{path}: header promised {count} features, found {len(feats)}")
    return feats


def write_image_features(feats, path):
    with open(path, "w", encoding="utf-8") as fh:
        n = len(feats[0].x) if feats else 0
        fh.write(f"{len(feats)} {n}\n")
        for feat in feats:
            vals = " ".join(repr(float(v)) for v in feat.x)
            fh.write(f"{feat.image_id} {vals}\n")


def write_model(model, path):
    with open(path, "w", encoding="utf-8") as fh:
        n, m = model.u.shape
        fh.write(f"{n} {m} {model.phrase_count}\n")
        fh.write(f"phrase_table {model.phrase_table_path}\n")
        for row in model.u:
            fh.write(" ".join(repr(float(v)) for v in row) + "\n")
        for row in model.v:
            fh.write(" ".join(repr(float(v)) for v in row) + "\n")


def read_model(path, phrase_table=None):
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 3:
            raise ValueError(f"{path}:1: expected header 'n m C'")
        n, m, c = map(int, header)
        pt_line = fh.readline().split(maxsplit=1)
        if not pt_line or pt_line[0] != "phrase_table":
            raise ValueError(f"{path}:2: expected 'phrase_table <path>' line")
        pt_path = pt_line[1].strip() if len(pt_line) > 1 else ""
        u = np.empty((n, m))
        for i in range(n):
            u[i] = [float(v) for v in fh.readline().split()]
        v = np.empty((m, c))
        for i in range(m):
            v[i] = [float(x) for x in fh.readline().split()]
    if phrase_table is not None and len(phrase_table) != c:
        raise ValueError(
            f"{path}: model has {c} phrases, table has {len(phrase_table)}"
        )
    return BilinearModel(u=u, v=v, phrase_table=phrase_table,
                         phrase_table_path=pt_path)
