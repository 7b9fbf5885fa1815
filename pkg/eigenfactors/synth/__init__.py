from eigenfactors.synth.generator import (
    generate,
    iter_summation_blocks,
    perturb,
    perturbation_twists,
    random_planes,
    random_walk,
    streamed_problem,
    truncated_normal,
)

__all__ = [
    "generate",
    "iter_summation_blocks",
    "perturb",
    "perturbation_twists",
    "random_planes",
    "random_walk",
    "streamed_problem",
    "truncated_normal",
]
