"""Uniform sampling of the complex unit sphere."""
from __future__ import annotations

import numpy as np


def sample_unit(rng: np.random.Generator, count: int, dim: int) -> np.ndarray:
    """Draw ``count`` unit vectors in C^dim as rows of the returned array.

    Normalized standard complex Gaussians, so the draw is uniform on the
    sphere and fully determined by the generator state.
    """
    z = rng.standard_normal((count, dim)) + 1j * rng.standard_normal((count, dim))
    norms = np.linalg.norm(z, axis=1)
    degenerate = norms == 0.0
    if np.any(degenerate):
        z[degenerate, 0] = 1.0
        norms[degenerate] = 1.0
    return z / norms[:, None]
