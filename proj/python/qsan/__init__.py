"""Signed attention over complex density matrices for false information detection."""

from ._qsan import (
    CheckpointError,
    CorpusExample,
    IoError,
    Model,
    ParseError,
    ShapeError,
    TrainingError,
    affinity,
    cmul,
    fit,
    gradcheck,
    load_corpus,
    measure,
    mixture,
    preprocess,
    separable_corpus,
    softmax_signed,
    superpose,
    word_to_state,
    write_corpus,
)

__all__ = [
    "CheckpointError",
    "CorpusExample",
    "IoError",
    "Model",
    "ParseError",
    "ShapeError",
    "TrainingError",
    "affinity",
    "cmul",
    "fit",
    "gradcheck",
    "load_corpus",
    "measure",
    "mixture",
    "preprocess",
    "separable_corpus",
    "softmax_signed",
    "superpose",
    "word_to_state",
    "write_corpus",
]
