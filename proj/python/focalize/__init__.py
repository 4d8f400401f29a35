"""Narrative-focalization annotation and analysis toolkit."""

from ._focalize import (
    BackendError,
    DataError,
    FocalizeError,
    TrainedBaseline,
    anova_oneway,
    build_prompt,
    confidence_from_logprob,
    count_words,
    krippendorff_alpha,
    majority_label,
    mode_percentages,
    parse_label,
    pearson,
    prf,
    prompt_ids,
    sample_excerpts,
    segment,
    sensorimotor_profile,
    tokenize,
    train_baseline,
    welch_t,
)

__all__ = [
    "BackendError",
    "DataError",
    "FocalizeError",
    "TrainedBaseline",
    "anova_oneway",
    "build_prompt",
    "confidence_from_logprob",
    "count_words",
    "krippendorff_alpha",
    "majority_label",
    "mode_percentages",
    "parse_label",
    "pearson",
    "prf",
    "prompt_ids",
    "sample_excerpts",
    "segment",
    "sensorimotor_profile",
    "tokenize",
    "train_baseline",
    "welch_t",
]
