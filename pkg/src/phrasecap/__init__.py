"""phrasecap: phrase-based image caption generation.

Pipeline: word vectors by Hellinger PCA of a co-occurrence matrix, phrase
vectors by averaging, a bilinear image-phrase model trained with negative
sampling, syntax-constrained trigram sentence generation, dot-product
reranking and BLEU evaluation.
"""

from .multimodal import KERNEL_BACKEND

__all__ = ["KERNEL_BACKEND"]
__version__ = "0.1.0"
