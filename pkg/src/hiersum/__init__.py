"""Structure-aware extractive summarization.

Extracts hierarchical positions and section titles from documents, encodes
them as embeddings, injects them into Transformer sentence representations
and trains a sigmoid sentence classifier with greedy oracle labels, trigram
blocking and ROUGE evaluation.
"""

from .errors import DataError, HiersumError, NumericError

__all__ = ["DataError", "HiersumError", "NumericError"]
__version__ = "0.1.0"
