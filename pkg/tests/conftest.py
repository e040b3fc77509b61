"""
Shared fixtures: seeded generators and random matrix builders
"""
import numpy as np
import pytest

from src.services.experiment_service import harmonic_frame, random_psd, random_unitary


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def psd(rng):
    def build(d, rank=None, trace=None):
        return random_psd(rng, d, rank=rank, trace=trace)
    return build


@pytest.fixture
def unitary(rng):
    def build(d):
        return random_unitary(rng, d)
    return build


@pytest.fixture
def frame(rng):
    """Harmonic Parseval frame of n vectors in C^d"""
    def build(n, d):
        return harmonic_frame(rng, n, d)
    return build
