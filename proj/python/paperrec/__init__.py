"""Hybrid co-citation + content-embedding paper recommender.

Python surface over the C++ core: corpus-level recommendation via
:class:`Recommender`, the individual scoring primitives, and ``run_stage``
for driving the staged batch pipeline.
"""

from ._core import (
    ClusterParams,
    MergeParams,
    Recommender,
    TrainingParams,
    evaluate_survey,
    map_cc_score,
    ndcg,
    precision_at_k,
    run_stage,
    tokenize,
)

__all__ = [
    "ClusterParams",
    "MergeParams",
    "Recommender",
    "TrainingParams",
    "evaluate_survey",
    "map_cc_score",
    "ndcg",
    "precision_at_k",
    "run_stage",
    "tokenize",
]
