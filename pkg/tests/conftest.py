import numpy as np
import pytest

from fourier_contours import Contour
from fourier_contours.synth import (
    compactness_corpus,
    ellipse_polygon,
    rect14,
    regular_polygon,
    ribbon,
    roundtrip_corpus,
    subset_instances,
)


def star_shaped(rng, m=None, center=(200.0, 200.0), rmin=20.0, rmax=120.0):
    """Random simple polygon: sorted angles around a center, random radii."""
    if m is None:
        m = int(rng.integers(3, 24))
    angles = np.sort(rng.uniform(0.0, 2.0 * np.pi, size=m))
    # coincident angles would make duplicate or crossing edges
    while np.any(np.diff(angles) < 1e-3):
        angles = np.sort(rng.uniform(0.0, 2.0 * np.pi, size=m))
    radii = rng.uniform(rmin, rmax, size=m)
    return Contour(
        np.stack(
            [center[0] + radii * np.cos(angles), center[1] + radii * np.sin(angles)],
            axis=1,
        )
    )


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(987654)


@pytest.fixture(scope="session")
def compactness_images():
    return compactness_corpus()


@pytest.fixture(scope="session")
def roundtrip_images():
    return roundtrip_corpus()


@pytest.fixture(scope="session")
def subset_parts():
    return subset_instances()


__all__ = [
    "ellipse_polygon",
    "rect14",
    "regular_polygon",
    "ribbon",
    "star_shaped",
]
