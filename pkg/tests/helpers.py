"""Scenario builders shared by the test modules"""

import numpy as np
from scipy.stats import unitary_group

from src.weaksim.hilbert import LinearOperator, StateVector
from src.weaksim.meter import GaussianMeter
from src.weaksim.scenario import Scenario, box_projector


def box_meter(spec: str, g: float, sigma: float = 1.0) -> GaussianMeter:
    return GaussianMeter.for_projector(box_projector(spec), g, sigma, spec)


def random_state(rng: np.random.Generator, dim: int) -> StateVector:
    return StateVector.normalize(rng.normal(size=dim) + 1j * rng.normal(size=dim))


def random_unitary(rng: np.random.Generator, dim: int) -> LinearOperator:
    return LinearOperator(unitary_group.rvs(dim, random_state=rng))


def random_scenario(rng: np.random.Generator, dim: int) -> Scenario:
    """Random pre/postselection with random unitaries on both sides of the window"""
    return Scenario.build(
        random_state(rng, dim),
        random_state(rng, dim),
        random_unitary(rng, dim),
        random_unitary(rng, dim),
        name=f"random-{dim}",
    )


def c_meter_mean_over_g(g: float) -> float:
    """Closed-form <Q>/g for the three-box C meter (sigma = 1)"""
    e = np.exp(-g * g / 8.0)
    return (1.0 - 2.0 * e) / (5.0 - 4.0 * e)
