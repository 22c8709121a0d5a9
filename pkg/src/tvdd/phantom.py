"""Synthetic piecewise-constant test images."""

import numpy as np


def phantom(n=64, seed=0):
    """Nested rectangles and an ellipse with constant intensities in [0, 1].

    The layout is jittered by ``seed``; the same seed always gives the same
    image.
    """
    rng = np.random.default_rng(seed)
    img = np.zeros((n, n))
    y, x = np.mgrid[0:n, 0:n] / n

    def jitter(v, s=0.03):
        return v + rng.uniform(-s, s)

    # body outline
    body = ((x - 0.5) / jitter(0.42)) ** 2 + ((y - 0.5) / jitter(0.46)) ** 2 <= 1.0
    img[body] = 0.3
    # two organs as axis-aligned rectangles, one nested
    r0, r1 = jitter(0.22), jitter(0.52)
    c0, c1 = jitter(0.22), jitter(0.45)
    img[(y >= r0) & (y < r1) & (x >= c0) & (x < c1)] = 0.6
    img[(y >= r0 + 0.08) & (y < r1 - 0.1) & (x >= c0 + 0.06) & (x < c1 - 0.07)] = 0.9
    r0, r1 = jitter(0.55), jitter(0.78)
    c0, c1 = jitter(0.52), jitter(0.78)
    img[(y >= r0) & (y < r1) & (x >= c0) & (x < c1)] = 0.75
    # small lesion
    lesion = ((x - jitter(0.65)) / 0.07) ** 2 + ((y - jitter(0.32)) / 0.05) ** 2 <= 1.0
    img[lesion] = 1.0
    return img
