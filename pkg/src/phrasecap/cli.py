"""Command-line pipeline: each subcommand wires one stage, reads its input
files, writes one output file and prints a one-line summary.

Exit codes: 0 success, 1 parse/dimension failure (diagnostic names the file
and line), 2 invalid configuration.
"""

import argparse
import sys

from . import bleu, chunker, corpus, embeddings, langmodel, multimodal, ranker
from .chunker import PhraseType
from .config import ConfigError, load_config


def _add_common(sub):
    sub.add_argument("--config", help="key=value config file (default: $PHRASECAP_CONFIG)")
    sub.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="override one config key (repeatable)",
    )


def _config(args):
    overrides = {}
    for item in args.overrides:
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        key, value = item.split("=", 1)
        overrides[key.strip()] = value.strip()
    return load_config(args.config, overrides)


def cmd_build_vocab(args):
    _config(args)
    records = corpus.read_captions(args.captions)
    sentences = [s for rec in records for s in rec.sentences]
    vocab = corpus.build_vocabulary(sentences, max_words=args.max_words or 10**9)
    corpus.write_vocabulary(vocab, args.out)
    print(f"build-vocab: {len(vocab)} words from {len(sentences)} sentences -> {args.out}")


def cmd_build_cooc(args):
    cfg = _config(args)
    vocab = corpus.read_vocabulary(args.vocab)
    records = corpus.read_captions(args.captions)
    id_sentences = [
        [vocab.id_of[w] for w in sent if w in vocab.id_of]
        for rec in records
        for sent in rec.sentences
    ]
    n_ctx = min(cfg.context_vocab, len(vocab))
    context_ids = {i: i for i in range(n_ctx)}  # ids are frequency-ordered
    cooc = embeddings.build_cooc(id_sentences, len(vocab), context_ids, cfg.window)
    embeddings.write_cooc(cooc, args.out)
    print(
        f"build-cooc: {cooc.counts.nnz} nonzeros, shape {cooc.shape}, "
        f"window {cfg.window} -> {args.out}"
    )


def cmd_train_embeddings(args):
    cfg = _config(args)
    vocab = corpus.read_vocabulary(args.vocab)
    cooc = embeddings.read_cooc(args.cooc)
    dim = min(cfg.embed_dim, min(cooc.shape))
    emb, _, _ = embeddings.hellinger_pca(cooc, dim)
    embeddings.write_embeddings(vocab, emb, args.out)
    print(f"train-embeddings: {len(vocab)} words, dim {dim} -> {args.out}")


def cmd_chunk(args):
    _config(args)
    tagged = chunker.read_tagged_file(args.tagged)
    with open(args.out, "w", encoding="utf-8") as fh:
        n_chunks = 0
        for image_id, pairs in tagged:
            chunks = chunker.chunk_tagged(pairs)
            n_chunks += len(chunks)
            fh.write(chunker.format_chunked(image_id, chunks) + "\n")
    print(f"chunk: {len(tagged)} sentences, {n_chunks} phrases -> {args.out}")


def cmd_build_phrases(args):
    cfg = _config(args)
    chunked = chunker.read_chunked_file(args.chunked)
    table = chunker.build_phrase_table(chunked, cfg.phrase_min_count)
    chunker.write_phrase_table(table, args.out)
    by_type = {
        t.value: len(table.ids_of_type(t))
        for t in (PhraseType.NP, PhraseType.VP, PhraseType.PP)
    }
    print(f"build-phrases: {len(table)} phrases {by_type} -> {args.out}")


def _load_dataset(chunked_path, table, features_path):
    chunked = chunker.read_chunked_file(chunked_path)
    feats = multimodal.read_image_features(features_path)
    by_id = {f.image_id: f for f in feats}
    dataset = []
    for image_id, chunks in chunked:
        feat = by_id.get(image_id)
        if feat is None:
            continue
        sent = chunker.sentence_to_phrase_ids(image_id, chunks, table)
        dataset.append((feat, sent.phrases))
    return dataset, feats


def cmd_train_model(args):
    cfg = _config(args)
    vocab = corpus.read_vocabulary(args.vocab)
    _, emb = embeddings.read_embeddings(args.embeddings)
    table = chunker.read_phrase_table(args.phrases)
    init_v = embeddings.build_phrase_matrix(table, vocab, emb)
    dataset, _ = _load_dataset(args.chunked, table, args.features)
    if not dataset:
        raise ValueError("no (image, sentence) pairs: ids do not match")
    tc = multimodal.TrainConfig(
        negatives_per_positive=cfg.negatives,
        learning_rate=cfg.learning_rate,
        epochs=cfg.epochs,
        rng_seed=cfg.rng_seed,
        noise_distribution=cfg.noise_distribution,
    )
    model, losses = multimodal.train(
        dataset, init_v, tc, phrase_table=table, phrase_counts=table.counts
    )
    model.phrase_table_path = args.phrases
    multimodal.write_model(model, args.out)
    print(
        f"train-model: {len(dataset)} pairs, {cfg.epochs} epochs, "
        f"loss {losses[0]:.4f} -> {losses[-1]:.4f}, kernel {multimodal.KERNEL_BACKEND} "
        f"-> {args.out}"
    )


def cmd_fit_lm(args):
    _config(args)
    table = chunker.read_phrase_table(args.phrases)
    chunked = chunker.read_chunked_file(args.chunked)
    sentences = [
        chunker.sentence_to_phrase_ids(i, c, table).phrases for i, c in chunked
    ]
    lm = langmodel.fit_trigram(sentences)
    langmodel.write_trigram_model(lm, args.out)
    print(
        f"fit-lm: {len(sentences)} sentences, {len(lm.trigrams)} trigrams -> {args.out}"
    )


def cmd_generate(args):
    cfg = _config(args)
    table = chunker.read_phrase_table(args.phrases)
    model = multimodal.read_model(args.model, phrase_table=table)
    lm = langmodel.read_trigram_model(args.lm)
    feats = multimodal.read_image_features(args.features)
    gen_cfg = langmodel.GenerationConfig(
        np_count_options=cfg.np_counts,
        top_np=cfg.top_np,
        top_vp=cfg.top_vp,
        top_pp=cfg.top_pp,
        transition_threshold=cfg.transition_threshold,
        max_candidates=cfg.max_candidates,
    )
    outputs = []
    skipped = 0
    dump = open(args.dump_candidates, "w", encoding="utf-8") if args.dump_candidates else None
    try:
        for feat in feats:
            sets = multimodal.predict_candidate_sets(
                feat.x, model, cfg.top_np, cfg.top_vp, cfg.top_pp
            )
            cands = langmodel.generate(sets, table.period_id, lm, gen_cfg)
            if dump is not None:
                for cand in cands:
                    ids = ",".join(str(i) for i in cand.phrase_ids)
                    dump.write(f"{feat.image_id}\t{cand.lm_logprob!r}\t{ids}\n")
            ranked = ranker.rerank(cands, feat, model)
            if ranked.best is None:
                skipped += 1
            outputs.append(ranked)
    finally:
        if dump is not None:
            dump.close()
    ranker.write_outputs(outputs, table, args.out)
    print(
        f"generate: {len(feats)} images, {skipped} without candidates -> {args.out}"
    )


def cmd_evaluate(args):
    _config(args)
    records = corpus.read_captions(args.captions)
    refs_by_id = {rec.image_id: [list(s) for s in rec.sentences] for rec in records}
    if args.human_agreement:
        report = bleu.human_agreement(
            [refs_by_id[rec.image_id] for rec in records]
        )
    else:
        candidates, references = [], []
        with open(args.outputs, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.rstrip("\n")
                if not line:
                    continue
                parts = line.split("\t")
                if len(parts) != 3:
                    raise ValueError(
                        f"{args.outputs}:{lineno}: expected 3 tab fields"
                    )
                image_id, sentence, _ = parts
                if image_id not in refs_by_id:
                    raise ValueError(
                        f"{args.outputs}:{lineno}: unknown image {image_id!r}"
                    )
                candidates.append(corpus.tokenize(sentence))
                references.append(refs_by_id[image_id])
        report = bleu.corpus_bleu(candidates, references, max_n=4)
    bleu.write_report(report, args.out)
    summary = " ".join(f"B-{n} {s:.4f}" for n, s in enumerate(report.scores, 1))
    print(f"evaluate: {summary} BP {report.brevity_penalty:.4f} -> {args.out}")


def cmd_stats(args):
    _config(args)
    chunked = chunker.read_chunked_file(args.chunked)
    type_seqs = [
        [ptype.name for ptype, _ in chunks] for _, chunks in chunked
    ]
    np_hist, patterns = corpus.structure_statistics(type_seqs)
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write("np-count histogram\n")
        for count in sorted(np_hist):
            fh.write(f"{count}\t{np_hist[count]}\n")
        fh.write("patterns\n")
        for pattern, freq in patterns:
            fh.write(f"{pattern}\t{freq}\n")
    print(
        f"stats: {len(type_seqs)} sentences, {len(patterns)} distinct patterns -> {args.out}"
    )


def build_parser():
    parser = argparse.ArgumentParser(
        prog="phrasecap",
        description="Phrase-based image caption generation pipeline.",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    sub = subs.add_parser("build-vocab", help="build a word vocabulary from captions")
    sub.add_argument("captions")
    sub.add_argument("--max-words", type=int, default=None)
    sub.add_argument("-o", "--out", required=True)
    _add_common(sub)
    sub.set_defaults(func=cmd_build_vocab)

    sub = subs.add_parser("build-cooc", help="count word co-occurrences")
    sub.add_argument("captions")
    sub.add_argument("--vocab", required=True)
    sub.add_argument("-o", "--out", required=True)
    _add_common(sub)
    sub.set_defaults(func=cmd_build_cooc)

    sub = subs.add_parser("train-embeddings", help="Hellinger-PCA word vectors")
    sub.add_argument("cooc")
    sub.add_argument("--vocab", required=True)
    sub.add_argument("-o", "--out", required=True)
    _add_common(sub)
    sub.set_defaults(func=cmd_train_embeddings)

    sub = subs.add_parser("chunk", help="chunk tagged captions into phrases")
    sub.add_argument("tagged")
    sub.add_argument("-o", "--out", required=True)
    _add_common(sub)
    sub.set_defaults(func=cmd_chunk)

    sub = subs.add_parser("build-phrases", help="build the phrase inventory")
    sub.add_argument("chunked")
    sub.add_argument("-o", "--out", required=True)
    _add_common(sub)
    sub.set_defaults(func=cmd_build_phrases)

    sub = subs.add_parser("train-model", help="train the bilinear image-phrase model")
    sub.add_argument("chunked")
    sub.add_argument("--phrases", required=True)
    sub.add_argument("--embeddings", required=True)
    sub.add_argument("--vocab", required=True)
    sub.add_argument("--features", required=True)
    sub.add_argument("-o", "--out", required=True)
    _add_common(sub)
    sub.set_defaults(func=cmd_train_model)

    sub = subs.add_parser("fit-lm", help="fit the phrase trigram language model")
    sub.add_argument("chunked")
    sub.add_argument("--phrases", required=True)
    sub.add_argument("-o", "--out", required=True)
    _add_common(sub)
    sub.set_defaults(func=cmd_fit_lm)

    sub = subs.add_parser("generate", help="generate and rerank captions")
    sub.add_argument("features")
    sub.add_argument("--model", required=True)
    sub.add_argument("--phrases", required=True)
    sub.add_argument("--lm", required=True)
    sub.add_argument("--dump-candidates", default=None)
    sub.add_argument("-o", "--out", required=True)
    _add_common(sub)
    sub.set_defaults(func=cmd_generate)

    sub = subs.add_parser("evaluate", help="BLEU-score generated captions")
    sub.add_argument("outputs", nargs="?", default=None)
    sub.add_argument("--captions", required=True)
    sub.add_argument("--human-agreement", action="store_true")
    sub.add_argument("-o", "--out", required=True)
    _add_common(sub)
    sub.set_defaults(func=cmd_evaluate)

    sub = subs.add_parser("stats", help="sentence structure statistics")
    sub.add_argument("chunked")
    sub.add_argument("-o", "--out", required=True)
    _add_common(sub)
    sub.set_defaults(func=cmd_stats)

    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.command == "evaluate" and not args.human_agreement and not args.outputs:
        print("evaluate: outputs file required unless --human-agreement", file=sys.stderr)
        return 2
    try:
        args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
