"""Python access to the RGB-D feature extraction and registration library."""

from ._core import (
    Error,
    __version__,
    chamfer_distance,
    conv2d,
    extract_features,
    fill_holes,
    gen_scene,
    procrustes_grad,
    register_oracle,
    rotation_error,
    sigmoid,
    slice,
    translation_error,
    weighted_procrustes,
)

__all__ = [
    "Error",
    "__version__",
    "chamfer_distance",
    "conv2d",
    "extract_features",
    "fill_holes",
    "gen_scene",
    "procrustes_grad",
    "register_oracle",
    "rotation_error",
    "sigmoid",
    "slice",
    "translation_error",
    "weighted_procrustes",
]
