"""Input validation helpers shared by the estimators, pipelines and CLI."""

from __future__ import annotations

import numpy as np

from .errors import AlgebraUsageError


def check_points(X, name: str = "points", min_points: int = 1) -> np.ndarray:
    """Coerce to a finite float64 (n, 3) array or raise a usage error."""
    arr = np.asarray(X, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 3:
        raise AlgebraUsageError(f"{name} must be an (n, 3) array, got shape {arr.shape}")
    if arr.shape[0] < min_points:
        raise AlgebraUsageError(f"{name} needs at least {min_points} points, got {arr.shape[0]}")
    if not np.all(np.isfinite(arr)):
        raise AlgebraUsageError(f"{name} contains non-finite coordinates")
    return arr


def check_seed(seed: int, name: str = "seed") -> int:
    seed = int(seed)
    if not 0 <= seed < 2**64:
        raise AlgebraUsageError(f"{name} must fit in an unsigned 64-bit integer")
    return seed
