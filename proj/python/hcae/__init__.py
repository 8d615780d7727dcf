"""Multi-view hyperconnectome autoencoder: hypergraph construction,
adversarially regularized embedding, and SVM evaluation."""

from ._core import (
    Cohort,
    Hyperconnectome,
    build_hyperconnectome,
    build_view_incidence,
    embed_cohort,
    evaluate_protocol,
    generate_synthetic_cohort,
    load_cohort,
    propagation_operator,
    symmetrize,
    train_subject,
    write_cohort,
    __version__,
)

__all__ = [
    "Cohort",
    "Hyperconnectome",
    "build_hyperconnectome",
    "build_view_incidence",
    "embed_cohort",
    "evaluate_protocol",
    "generate_synthetic_cohort",
    "load_cohort",
    "propagation_operator",
    "symmetrize",
    "train_subject",
    "write_cohort",
    "__version__",
]
