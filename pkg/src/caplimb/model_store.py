"""Model serialization: weights, biases, normalization stats, and the
material mode the training data was collected under."""

from __future__ import annotations

import numpy as np

from . import dataio
from .mlp import MlpParams


def save_model(params: MlpParams, path, mode: str | None = None,
               extra: dict | None = None) -> None:
    arrays = {}
    for i, (w, b) in enumerate(zip(params.weights, params.biases)):
        arrays[f"w{i}"] = w
        arrays[f"b{i}"] = b
    arrays["x_mean"] = params.x_mean
    arrays["x_std"] = params.x_std
    meta = {"n_layers": len(params.weights), "mode": mode}
    if extra:
        meta.update(extra)
    dataio.write_container(path, dataio.MODEL_MAGIC, meta, arrays)


def load_model(path) -> tuple[MlpParams, dict]:
    meta, arrays = dataio.read_container(path, dataio.MODEL_MAGIC)
    n = meta["n_layers"]
    params = MlpParams(
        weights=[arrays[f"w{i}"] for i in range(n)],
        biases=[arrays[f"b{i}"] for i in range(n)],
        x_mean=arrays["x_mean"],
        x_std=arrays["x_std"],
    )
    return params, meta
