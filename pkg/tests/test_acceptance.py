"""Acceptance suite: one test per criterion, each printing a PASS line with
its stated tolerance once its assertions hold."""

import importlib.resources
import itertools
import math
import shutil
import time
from collections import Counter

import numpy as np
import pytest

from phrasecap import bleu, embeddings, langmodel, multimodal, ranker
from phrasecap.chunker import Phrase, PhraseTable, PhraseType
from phrasecap.cli import main
from phrasecap.langmodel import START, GenerationConfig, fit_trigram, generate, accepts
from phrasecap.multimodal import (
    BilinearModel,
    ImageFeature,
    TrainConfig,
    nce_gradients,
    nce_loss,
    top_phrases,
    train,
)

NP, VP, PP, PERIOD = PhraseType.NP, PhraseType.VP, PhraseType.PP, PhraseType.PERIOD


def _report(n, text):
    print(f"[criterion {n}] PASS: {text}")


def _np_table(n):
    return PhraseTable(
        phrases=tuple(Phrase(NP, (f"p{i}",), i) for i in range(n)),
        counts=tuple(1 for _ in range(n)),
    )


# --- 1: gradient correctness ------------------------------------------------

def _finite_difference(x, pos, negs, model, h=1e-5):
    grad_u = np.zeros_like(model.u)
    grad_v = np.zeros_like(model.v)

    def loss_at(u, v):
        return nce_loss(x, pos, negs, BilinearModel(u=u, v=v))

    for idx in np.ndindex(model.u.shape):
        up, dn = model.u.copy(), model.u.copy()
        up[idx] += h
        dn[idx] -= h
        grad_u[idx] = (loss_at(up, model.v) - loss_at(dn, model.v)) / (2 * h)
    for idx in np.ndindex(model.v.shape):
        up, dn = model.v.copy(), model.v.copy()
        up[idx] += h
        dn[idx] -= h
        grad_v[idx] = (loss_at(model.u, up) - loss_at(model.u, dn)) / (2 * h)
    return grad_u, grad_v


def test_criterion_1_gradient_correctness():
    start = time.monotonic()
    n, m, c = 8, 5, 12
    for seed in range(20):
        rng = np.random.default_rng(1000 + seed)
        model = BilinearModel(
            u=rng.standard_normal((n, m)), v=rng.standard_normal((m, c))
        )
        x = rng.standard_normal(n)
        n_pos = int(rng.integers(1, 4))
        pos = [int(p) for p in rng.choice(c, size=n_pos, replace=False)]
        pool = [j for j in range(c) if j not in pos]
        negs = [[int(k) for k in rng.choice(pool, size=15)] for _ in pos]

        gu, gv_cols = nce_gradients(x, pos, negs, model)
        fu, fv = _finite_difference(x, pos, negs, model)
        gv = np.zeros_like(model.v)
        for pid, col in gv_cols.items():
            gv[:, pid] = col

        analytic = np.concatenate([gu.ravel(), gv.ravel()])
        numeric = np.concatenate([fu.ravel(), fv.ravel()])
        rel = np.linalg.norm(analytic - numeric) / np.linalg.norm(numeric)
        assert rel <= 1e-5, f"instance {seed}: relative error {rel}"
    elapsed = time.monotonic() - start
    assert elapsed < 5.0
    _report(1, f"20 instances match finite differences (rel err <= 1e-5, {elapsed:.2f}s)")


# --- 2: closed-form loss ----------------------------------------------------

def test_criterion_2_closed_form_loss():
    model = BilinearModel(u=np.zeros((4, 3)), v=np.zeros((3, 20)))
    x = np.ones(4)
    for n_neg in (1, 15):
        loss = nce_loss(x, [0], [list(range(1, n_neg + 1))], model)
        assert abs(loss - (n_neg + 1) * math.log(2.0)) <= 1e-12
    _report(2, "all-zero scores give (N+1)ln2 within 1e-12 for N in {1, 15}")


# --- 3: Hellinger PCA -------------------------------------------------------

def test_criterion_3_hellinger_pca():
    rng = np.random.default_rng(33)
    counts = rng.integers(1, 50, size=(10, 10)).astype(float)
    mapped = embeddings.hellinger_map(counts)
    norms = np.linalg.norm(mapped, axis=1)
    assert np.all(np.abs(norms - 1.0) <= 1e-12)

    from scipy import sparse

    cooc = embeddings.CoocMatrix(counts=sparse.csr_matrix(counts), window=10)
    emb, comps, centered = embeddings.hellinger_pca(cooc, dim=10)
    err = np.linalg.norm(emb.vectors @ comps.T - centered) / np.linalg.norm(centered)
    assert err <= 1e-8
    _report(3, f"10x10 full-rank reconstruction rel Frobenius err {err:.2e} <= 1e-8; "
               "Hellinger rows unit norm within 1e-12")


# --- 4: synthetic retrieval end-to-end --------------------------------------

def test_criterion_4_synthetic_retrieval():
    start = time.monotonic()
    rng = np.random.default_rng(123)
    m, n, c, n_img = 8, 16, 40, 50
    z = rng.standard_normal((m, c))
    a = rng.standard_normal((n, m))
    # ground truth: disjoint phrase triples shared across images
    perm = rng.permutation(c)
    pool = [tuple(int(v) for v in perm[3 * i : 3 * i + 3]) for i in range(13)]
    dataset = []
    for i in range(n_img):
        truth = pool[i % len(pool)]
        x = a @ z[:, list(truth)].mean(axis=1) + 0.01 * rng.standard_normal(n)
        dataset.append((ImageFeature(f"im{i}", x), truth))

    table = _np_table(c)
    model, losses = train(dataset, z, TrainConfig(), phrase_table=table)

    assert all(losses[i] > losses[i + 1] for i in range(4)), (
        f"epoch-mean loss not strictly decreasing over first 5 epochs: {losses[:5]}"
    )
    precision = np.mean(
        [
            len({pid for pid, _ in top_phrases(feat.x, model, NP, 3)} & set(truth)) / 3
            for feat, truth in dataset
        ]
    )
    baseline = 3 / 40
    assert precision >= 5 * baseline, f"precision@3 {precision} < {5 * baseline}"
    elapsed = time.monotonic() - start
    assert elapsed < 30.0
    _report(4, f"loss decreasing 5 epochs; precision@3 {precision:.3f} >= "
               f"{5 * baseline} (5x baseline), {elapsed:.2f}s")


# --- 5: trigram oracle on the toy corpus ------------------------------------

class _TrigramOracle:
    """Independent MLE + stupid-backoff recount with plain loops."""

    def __init__(self, sentences, backoff=0.4):
        self.backoff = backoff
        self.uni = Counter()
        self.bi = Counter()
        self.tri = Counter()
        for ids in sentences:
            seq = [START, START] + list(ids)
            for tok in seq:
                self.uni[tok] += 1
            for first, second in zip(seq, seq[1:]):
                self.bi[(first, second)] += 1
            for first, second, third in zip(seq, seq[1:], seq[2:]):
                self.tri[(first, second, third)] += 1
        self.total = sum(self.uni.values())

    def prob(self, c, a, b):
        if self.tri[(a, b, c)] > 0:
            return self.tri[(a, b, c)] / self.bi[(a, b)]
        if self.bi[(b, c)] > 0:
            return self.backoff * self.bi[(b, c)] / self.uni[b]
        return self.backoff**2 * self.uni[c] / self.total


def _toy_phrase_sentences():
    from phrasecap import chunker

    base = importlib.resources.files("phrasecap") / "data" / "toy"
    tagged = chunker.read_tagged_file(str(base / "tagged.tsv"))
    chunked = [(i, chunker.chunk_tagged(t)) for i, t in tagged]
    table = chunker.build_phrase_table(chunked, min_count=2)
    return [
        chunker.sentence_to_phrase_ids(i, ch, table).phrases for i, ch in chunked
    ], table


def test_criterion_5_trigram_oracle():
    sentences, _ = _toy_phrase_sentences()
    lm = fit_trigram(sentences)
    oracle = _TrigramOracle(sentences)
    ids = sorted(lm.unigrams)
    checked = 0
    for a, b, c in itertools.product(ids, repeat=3):
        expected = oracle.prob(c, a, b)
        if (a, b) not in lm.bigrams and lm.trigrams.get((a, b, c), 0) > 0:
            pytest.fail("trigram without its bigram prefix")
        got = lm.prob(c, a, b)
        assert abs(got - expected) <= 1e-12, f"p({c}|{a},{b}): {got} vs {expected}"
        checked += 1
    _report(5, f"{checked} conditional probabilities match the oracle within 1e-12")


# --- 6: generation equivalence ----------------------------------------------

def _brute_force(nps, connectors, period_id, lm, np_counts, threshold):
    results = {}
    for n_np in sorted(np_counts):
        for np_pick in itertools.product(nps, repeat=n_np):
            for conn_pick in itertools.product(connectors, repeat=n_np - 1):
                seq = []
                for i, pid in enumerate(np_pick):
                    seq.append(pid)
                    if i < len(conn_pick):
                        seq.append(conn_pick[i])
                seq.append(period_id)
                padded = (START, START) + tuple(seq)
                probs = [
                    lm.prob(padded[i], padded[i - 2], padded[i - 1])
                    for i in range(2, len(padded))
                ]
                if all(p > 0 and p >= threshold for p in probs):
                    results[tuple(seq)] = sum(math.log(p) for p in probs)
    return results


def test_criterion_6_generation_equivalence():
    corpus = [
        (0, 2, 1, 4),
        (1, 2, 0, 4),
        (0, 3, 1, 4),
        (0, 2, 1, 3, 0, 4),
        (1, 3, 0, 2, 1, 4),
    ]
    lm = fit_trigram(corpus)
    sets = {NP: [0, 1], VP: [2], PP: [3]}

    # threshold 0, unlimited: exact set equality with the brute-force oracle
    out = generate(sets, 4, lm, GenerationConfig(transition_threshold=0.0,
                                                 max_candidates=math.inf))
    oracle = _brute_force([0, 1], [2, 3], 4, lm, {2, 3, 4}, 0.0)
    assert {c.phrase_ids for c in out} == set(oracle)

    # threshold 1 with an imperfect LM: nothing survives
    assert generate(sets, 4, lm, GenerationConfig(transition_threshold=1.0,
                                                  max_candidates=math.inf)) == []

    # default threshold: every candidate revalidates independently
    type_of = {0: NP, 1: NP, 2: VP, 3: PP, 4: PERIOD}
    emitted = generate(sets, 4, lm, GenerationConfig(max_candidates=math.inf))
    assert emitted
    for cand in emitted:
        assert accepts([type_of[i] for i in cand.phrase_ids])
        padded = (START, START) + cand.phrase_ids
        for i in range(2, len(padded)):
            assert lm.prob(padded[i], padded[i - 2], padded[i - 1]) >= 0.01
    _report(6, f"set equality with brute force ({len(out)} sentences); "
               "threshold 1.0 empty; default threshold revalidates")


# --- 7: BLEU golden values ---------------------------------------------------

def test_criterion_7_bleu_golden_values():
    cand = "two dogs play in the snow .".split()
    perfect = bleu.corpus_bleu([cand], [[list(cand)]])
    assert perfect.scores == (1.0, 1.0, 1.0, 1.0)

    clipped = bleu.corpus_bleu([["the", "the", "the"]], [[["the", "cat"]]], max_n=1)
    assert abs(clipped.precisions[0] - 1 / 3) <= 1e-12

    bp = bleu.corpus_bleu([["a", "b", "c"]], [[["a", "b", "c", "d"]]], max_n=1)
    assert abs(bp.brevity_penalty - math.exp(-1 / 3)) <= 1e-12

    cands = [["a", "b"], ["c", "d", "e"], ["f", "f"]]
    refs = [[["a", "x"]], [["c", "d"]], [["f", "g", "f"]]]
    assert bleu.corpus_bleu(cands, refs) == bleu.corpus_bleu(cands[::-1], refs[::-1])
    _report(7, "perfect-match 1.0; clipped precision 1/3; BP e^(-1/3) within 1e-12; "
               "corpus order permutation invariant")


# --- 8: pipeline determinism -------------------------------------------------

def _run_pipeline(toy, workdir):
    workdir.mkdir(parents=True, exist_ok=True)
    paths = {
        name: str(workdir / name)
        for name in ["vocab.tsv", "cooc.tsv", "emb.txt", "chunked.tsv",
                     "phrases.tsv", "model.txt", "lm.txt", "out.tsv", "report.txt"]
    }
    cfg = ["--config", str(toy / "config.txt")]
    captions = str(toy / "captions.tsv")
    steps = [
        ["build-vocab", captions, "-o", paths["vocab.tsv"]],
        ["build-cooc", captions, "--vocab", paths["vocab.tsv"], "-o", paths["cooc.tsv"]],
        ["train-embeddings", paths["cooc.tsv"], "--vocab", paths["vocab.tsv"],
         "-o", paths["emb.txt"]],
        ["chunk", str(toy / "tagged.tsv"), "-o", paths["chunked.tsv"]],
        ["build-phrases", paths["chunked.tsv"], "-o", paths["phrases.tsv"]],
        ["train-model", paths["chunked.tsv"], "--phrases", paths["phrases.tsv"],
         "--embeddings", paths["emb.txt"], "--vocab", paths["vocab.tsv"],
         "--features", str(toy / "features.tsv"), "-o", paths["model.txt"]],
        ["fit-lm", paths["chunked.tsv"], "--phrases", paths["phrases.tsv"],
         "-o", paths["lm.txt"]],
        ["generate", str(toy / "features.tsv"), "--model", paths["model.txt"],
         "--phrases", paths["phrases.tsv"], "--lm", paths["lm.txt"],
         "-o", paths["out.tsv"]],
        ["evaluate", paths["out.tsv"], "--captions", captions, "-o", paths["report.txt"]],
    ]
    for step in steps:
        assert main(step + cfg) == 0, f"stage failed: {step[0]}"
    return paths


def test_criterion_8_pipeline_determinism(tmp_path):
    toy = tmp_path / "toy"
    toy.mkdir()
    base = importlib.resources.files("phrasecap") / "data" / "toy"
    for name in ["captions.tsv", "tagged.tsv", "features.tsv", "config.txt"]:
        shutil.copy(str(base / name), toy / name)

    run = tmp_path / "run"
    _run_pipeline(toy, run)
    names = ["model.txt", "out.tsv", "report.txt"]
    first = {name: (run / name).read_bytes() for name in names}
    _run_pipeline(toy, run)
    for name in names:
        assert (run / name).read_bytes() == first[name], f"{name} differs between runs"
    _report(8, "two identically configured runs produce byte-identical model "
               "and output files")


# --- 9: rerank invariance ----------------------------------------------------

def test_criterion_9_rerank_scale_invariance():
    for seed in range(10):
        rng = np.random.default_rng(900 + seed)
        n, m, c = 6, 4, 12
        model = BilinearModel(u=rng.standard_normal((n, m)),
                              v=rng.standard_normal((m, c)))
        x = rng.standard_normal(n)
        cands = [
            langmodel.SentenceCandidate(
                phrase_ids=tuple(int(v) for v in rng.choice(c, size=3)),
                lm_logprob=float(rng.standard_normal()),
            )
            for _ in range(8)
        ]

        def order(feature_vec):
            fresh = [
                langmodel.SentenceCandidate(phrase_ids=cd.phrase_ids,
                                            lm_logprob=cd.lm_logprob)
                for cd in cands
            ]
            out = ranker.rerank(fresh, ImageFeature("im", feature_vec), model)
            return [cd.phrase_ids for cd in out.all]

        assert order(x) == order(7.0 * x), f"instance {seed}: order changed"
    _report(9, "rerank order unchanged under 7x feature scaling on 10 instances")
