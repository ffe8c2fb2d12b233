"""
LS-RTM objective, SGD building blocks and problem setup.

Backends and the inversion driver live in ``seisflow.core.imaging.backends``,
``seisflow.core.imaging.factory`` and ``seisflow.core.imaging.inversion``.
"""
from seisflow.core.imaging.objective import (
    ImagingOptions,
    evaluate_shot,
    misfit,
    shot_gradient,
    synthesize_shot,
    total_misfit,
)
from seisflow.core.imaging.optimizer import estimate_step_size, sample_batch, sgd_step
from seisflow.core.imaging.survey import (
    InversionConfig,
    InversionHistory,
    IterationRecord,
    Problem,
    Survey,
    load_problem,
    problem_from_dict,
    surface_shots,
    synthesize_survey,
)

__all__ = [
    "ImagingOptions",
    "InversionConfig",
    "InversionHistory",
    "IterationRecord",
    "Problem",
    "Survey",
    "estimate_step_size",
    "evaluate_shot",
    "load_problem",
    "misfit",
    "problem_from_dict",
    "sample_batch",
    "sgd_step",
    "shot_gradient",
    "surface_shots",
    "synthesize_shot",
    "synthesize_survey",
    "total_misfit",
]
