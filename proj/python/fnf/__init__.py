"""Fair normalizing flows: fair representations with certified bounds on adversarial accuracy."""

from ._core import (
    Checkpoint,
    Dataset,
    GaussianMixture,
    TrainConfig,
    attack_mlp,
    certify,
    discrete_statistical_distance,
    eval_metrics,
    fit_gmm,
    hoeffding_epsilon,
    load_dataset,
    make_synthetic,
    optimal_matching,
    required_samples,
    run_synthetic_fnf,
    train_fnf,
)

__all__ = [
    "Checkpoint",
    "Dataset",
    "GaussianMixture",
    "TrainConfig",
    "attack_mlp",
    "certify",
    "discrete_statistical_distance",
    "eval_metrics",
    "fit_gmm",
    "hoeffding_epsilon",
    "load_dataset",
    "make_synthetic",
    "optimal_matching",
    "required_samples",
    "run_synthetic_fnf",
    "train_fnf",
]
