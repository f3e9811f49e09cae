import os

import hypothesis
import numpy as np
import pytest

from src.quantum_hj.numerics.microstate import Microstate, PhysicalSetup
from src.quantum_hj.numerics.potentials import FreeParticle, LinearPotential, StepBarrier
from src.quantum_hj.utils.settings import config

np.seterr(all="warn")

hypothesis.settings.register_profile("ci", max_examples=40, deadline=None)
hypothesis.settings.register_profile("fast", max_examples=5, deadline=None)
hypothesis.settings.register_profile("thorough", max_examples=300, deadline=None)
hypothesis.settings.load_profile(os.getenv("HYPOTHESIS_PROFILE", "ci"))


@pytest.fixture(autouse=True)
def default_settings():
    """Every test starts from the built-in settings."""
    config.load_defaults()
    yield
    config.load_defaults()


@pytest.fixture
def free_setup():
    return PhysicalSetup(m=1.0, E=0.5, hbar=1e-2, potential=FreeParticle())


@pytest.fixture
def step_setup():
    return PhysicalSetup(m=1.0, E=0.5, hbar=1e-1, potential=StepBarrier(U=1.0))


@pytest.fixture
def linear_setup():
    return PhysicalSetup(m=1.0, E=0.5, hbar=1e-2, potential=LinearPotential(f=1.0))


@pytest.fixture
def classical_ms():
    return Microstate(1.0, 1.0, 0.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def make_microstates(rng):
    """Factory of positive-definite triples with a, b in [1/e, e]."""

    def make(count):
        states = []
        for _ in range(count):
            a = float(np.exp(rng.uniform(-1.0, 1.0)))
            b = float(np.exp(rng.uniform(-1.0, 1.0)))
            c = float(rng.uniform(-0.9, 0.9) * 2.0 * np.sqrt(a * b))
            states.append(Microstate(a, b, c))
        return states

    return make
