from .eigen import eigen_sym4
from .plane import (
    center_transform,
    plane_estimate_centered,
    plane_from_q,
    plane_from_vector,
    plane_transform,
    point_to_plane_sse,
    q_assemble,
    s_accumulate,
    s_transform,
)

__all__ = [
    "center_transform",
    "eigen_sym4",
    "plane_estimate_centered",
    "plane_from_q",
    "plane_from_vector",
    "plane_transform",
    "point_to_plane_sse",
    "q_assemble",
    "s_accumulate",
    "s_transform",
]
