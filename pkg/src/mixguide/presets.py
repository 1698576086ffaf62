"""Reference mixtures shipped with the package.

The geometries are representative choices for the three experiment
families: a well-separated 3-mode line for 1-D density comparisons, a
10-mode line standing in for a ten-class dataset, and a three-point 2-D
configuration (two allowed points above one forbidden point, zero
variance) for field-decomposition plots.
"""

from __future__ import annotations

import numpy as np

from .mixture import GaussianMixture, MixtureSplit

# Two workable tracker regimes: a larger prior with no offset, or a low
# prior compensated by a small upward offset (two to three orders of
# magnitude below the temperature).
TRACKER_HIGH_PRIOR = {"p0": 0.25, "tau": 0.25, "delta": 0.0}
TRACKER_LOW_PRIOR = {"p0": 0.01, "tau": 0.2, "delta": 0.0002}


def reference_mixture_1d() -> MixtureSplit:
    """Three equal modes at -6, 0, +6 with variance 0.25; leftmost forbidden."""
    gmm = GaussianMixture(
        weights=np.full(3, 1.0 / 3.0),
        means=np.array([-6.0, 0.0, 6.0]),
        variances=np.full(3, 0.25),
    )
    return MixtureSplit(gmm, frozenset({0}))


def class_removal_mixture() -> MixtureSplit:
    """Ten equal modes at -18, -14, ..., +18 (variance 0.25); leftmost forbidden.

    Mimics removing one of ten classes: the forbidden prior is 0.1.
    """
    gmm = GaussianMixture(
        weights=np.full(10, 0.1),
        means=np.arange(-18.0, 19.0, 4.0),
        variances=np.full(10, 0.25),
    )
    return MixtureSplit(gmm, frozenset({0}))


def three_point_mixture_2d() -> MixtureSplit:
    """Two allowed delta peaks above one forbidden peak, equal weights."""
    gmm = GaussianMixture(
        weights=np.full(3, 1.0 / 3.0),
        means=np.array([[-1.5, 1.5], [1.5, 1.5], [0.0, -1.5]]),
        variances=np.zeros(3),
    )
    return MixtureSplit(gmm, frozenset({2}))
