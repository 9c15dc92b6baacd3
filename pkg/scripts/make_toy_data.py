"""Regenerate the bundled toy dataset (captions, gold POS tags, synthetic
image features). Deterministic; run from the repo root."""

import pathlib

import numpy as np

LEXICON = {
    "a": "DET", "the": "DET", "two": "DET",
    "man": "NOUN", "woman": "NOUN", "boy": "NOUN", "girl": "NOUN",
    "dog": "NOUN", "dogs": "NOUN", "cat": "NOUN", "ball": "NOUN",
    "park": "NOUN", "grass": "NOUN", "table": "NOUN", "frisbee": "NOUN",
    "bench": "NOUN", "holds": "VERB", "chases": "VERB", "chase": "VERB",
    "catches": "VERB", "watches": "VERB", "runs": "VERB", "sits": "VERB",
    "eats": "VERB", "throws": "VERB", "carries": "VERB",
    "on": "PREP", "in": "PREP", "near": "PREP", "with": "PREP",
    "red": "ADJ", "big": "ADJ", "small": "ADJ", "young": "ADJ",
    "quickly": "ADV", "happily": "ADV", ".": "PUNCT",
}

CAPTIONS = [
    ("img01", "a man holds a ball ."),
    ("img01", "a young man holds a small ball ."),
    ("img01", "the man catches a red ball ."),
    ("img02", "a dog chases a cat ."),
    ("img02", "the dog chases the cat ."),
    ("img02", "a big dog quickly chases a small cat ."),
    ("img03", "two dogs chase a ball in the park ."),
    ("img03", "the dogs chase a red ball ."),
    ("img04", "a woman throws a frisbee ."),
    ("img04", "the woman throws a red frisbee in the park ."),
    ("img04", "a young woman throws a frisbee ."),
    ("img05", "a boy catches a frisbee ."),
    ("img05", "the boy catches a frisbee on the grass ."),
    ("img06", "a girl sits on a bench ."),
    ("img06", "the girl sits on a bench in the park ."),
    ("img06", "a young girl sits on a small bench ."),
    ("img07", "a cat sits on the table ."),
    ("img07", "the cat sits on a red table ."),
    ("img08", "a dog eats on the grass ."),
    ("img08", "the dog happily eats near the bench ."),
    ("img09", "a man watches two dogs ."),
    ("img09", "the man watches the dogs in the park ."),
    ("img09", "a young man watches two big dogs ."),
    ("img10", "a woman carries a small dog ."),
    ("img10", "the woman carries the dog near the bench ."),
    ("img11", "a boy runs on the grass ."),
    ("img11", "the boy quickly runs in the park ."),
    ("img12", "a girl holds a cat ."),
    ("img12", "the girl happily holds a small cat ."),
    ("img12", "a young girl holds the cat ."),
]


def main():
    out = pathlib.Path(__file__).resolve().parents[1] / "src/phrasecap/data/toy"
    out.mkdir(parents=True, exist_ok=True)

    with open(out / "captions.tsv", "w", encoding="utf-8") as fh:
        for image_id, sentence in CAPTIONS:
            fh.write(f"{image_id}\t{sentence}\n")

    with open(out / "tagged.tsv", "w", encoding="utf-8") as fh:
        for image_id, sentence in CAPTIONS:
            tagged = " ".join(f"{w}/{LEXICON[w]}" for w in sentence.split())
            fh.write(f"{image_id}\t{tagged}\n")

    rng = np.random.default_rng(7)
    image_ids = sorted({i for i, _ in CAPTIONS})
    n = 16
    with open(out / "features.tsv", "w", encoding="utf-8") as fh:
        fh.write(f"{len(image_ids)} {n}\n")
        for image_id in image_ids:
            vals = " ".join(repr(float(v)) for v in rng.standard_normal(n))
            fh.write(f"{image_id} {vals}\n")

    with open(out / "config.txt", "w", encoding="utf-8") as fh:
        fh.write(
            "# desk-scale settings for the bundled toy corpus\n"
            "embed_dim = 8\n"
            "context_vocab = 1000\n"
            "window = 10\n"
            "phrase_min_count = 2\n"
            "negatives = 5\n"
            "learning_rate = 0.01\n"
            "epochs = 10\n"
            "rng_seed = 42\n"
        )
    print(f"wrote toy dataset to {out}")


if __name__ == "__main__":
    main()
