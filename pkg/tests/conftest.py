"""Shared fixtures and random-model factories for the test suite."""

import numpy as np
import pytest

from lifemoments import (
    ExplicitFinitePMF,
    FinitePMF,
    IndependentMarginals,
    SystemStructure,
)

# the five-component bridge: two parallel pairs joined by a crossover component
BRIDGE_PATHS = ({1, 2}, {3, 4}, {1, 3, 5}, {2, 4, 5})
BRIDGE_CUTS = ({1, 4}, {2, 3}, {1, 3, 5}, {2, 4, 5})
BRIDGE_MINIMAL_SIGNATURE = (0, 2, 2, -5, 2)


@pytest.fixture
def bridge() -> SystemStructure:
    return SystemStructure(5, path_sets=BRIDGE_PATHS, cut_sets=BRIDGE_CUTS)


def random_probs(rng: np.random.Generator, k: int) -> np.ndarray:
    """A strictly positive probability vector of length k."""
    w = rng.random(k) + 0.05
    return w / w.sum()


def random_explicit(rng: np.random.Generator, n: int, m_max: int = 3) -> ExplicitFinitePMF:
    """A dense random joint pmf on the grid {0..m_max}^n.

    Dense support with positive weights everywhere; dependence is arbitrary,
    which is the regime the class-splitting identities must survive.
    """
    grids = np.meshgrid(*([np.arange(m_max + 1)] * n), indexing="ij")
    points = np.stack([g.ravel() for g in grids], axis=1)
    return ExplicitFinitePMF(points, random_probs(rng, points.shape[0]))


def random_independent(rng: np.random.Generator, n: int, m_max: int = 4) -> IndependentMarginals:
    margs = [FinitePMF(random_probs(rng, int(rng.integers(2, m_max + 2)))) for _ in range(n)]
    return IndependentMarginals(margs)


def product_explicit(model: IndependentMarginals) -> ExplicitFinitePMF:
    """The same law as ``model`` listed point by point (independence unrolled)."""
    sizes = [d.support_max() + 1 for d in model.marginals]
    grids = np.meshgrid(*(np.arange(s) for s in sizes), indexing="ij")
    points = np.stack([g.ravel() for g in grids], axis=1)
    probs = np.ones(points.shape[0])
    for j, d in enumerate(model.marginals):
        probs *= d.pmf_array(sizes[j] - 1)[points[:, j]]
    probs /= probs.sum()
    return ExplicitFinitePMF(points, probs)
