"""Detection of previously fact-checked claims: python surface.

Thin re-export of the compiled core. The heavy lifting (normalization,
distant supervision, encoder training, retrieval, re-ranking, evaluation)
lives in C++; this module exposes the pieces useful from scripts plus
``run_cli`` for driving whole pipeline stages in process.
"""

from ._core import (
    cohen_kappa,
    default_stopwords,
    encode_tweet,
    estimate_matches,
    evaluate_files,
    fleiss_kappa,
    jaccard,
    normalize,
    porter_stem,
    run_cli,
)

__all__ = [
    "cohen_kappa",
    "default_stopwords",
    "encode_tweet",
    "estimate_matches",
    "evaluate_files",
    "fleiss_kappa",
    "jaccard",
    "normalize",
    "porter_stem",
    "run_cli",
]
