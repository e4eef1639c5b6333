"""Multi-agent paper weakness review pipeline."""

from critiq._core import (
    __version__,
    combined_support,
    expert_dimensions,
    f1_inv,
    fit_impact_table,
    label_to_score,
    load_paper,
    match_and_score,
    normalize_impact,
    normalize_question,
    pearson,
    rank_top_k,
    render_template,
    retention_rate,
    run_review,
    severity,
    specificity,
    tfidf_similarity,
)

__all__ = [
    "__version__",
    "combined_support",
    "expert_dimensions",
    "f1_inv",
    "fit_impact_table",
    "label_to_score",
    "load_paper",
    "match_and_score",
    "normalize_impact",
    "normalize_question",
    "pearson",
    "rank_top_k",
    "render_template",
    "retention_rate",
    "run_review",
    "severity",
    "specificity",
    "tfidf_similarity",
]
