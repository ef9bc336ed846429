"""Random-feature solver for linear parabolic PDEs.

Heat-kernel and importance-sampling random features trained by
physics-informed ridge least squares, plus Monte Carlo estimators of the
mild-solution integrals. The heavy lifting lives in the C++ extension.
"""

from ._heatnet import (
    FeatureVariant,
    Problem,
    TrainConfig,
    TrainedModel,
    __version__,
    load_model,
    make_benchmark,
    make_test_grid,
    mc_estimate,
    quad_reference_1d,
    rel_errors,
    sobol_points,
    train,
)

__all__ = [
    "FeatureVariant",
    "Problem",
    "TrainConfig",
    "TrainedModel",
    "__version__",
    "load_model",
    "make_benchmark",
    "make_test_grid",
    "mc_estimate",
    "quad_reference_1d",
    "rel_errors",
    "sobol_points",
    "train",
]
