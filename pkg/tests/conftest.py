import numpy as np
import pytest

from kld.models.stream import Chunk
from kld.utils.generator import GeneratorConfig, StreamGenerator


def swap_stream(n_chunks=100, switch=50, size=200, seed=7):
    """Identical chunks whose labels are inverted from chunk ``switch`` on"""
    rng = np.random.default_rng(seed)
    inputs = rng.normal(size=(size, 2))
    labels = (inputs[:, 0] > 0).astype(np.int64)
    return [Chunk(i, inputs, labels if i < switch else 1 - labels) for i in range(n_chunks)]


def noisy_stream(n_chunks=40, size=60, p=2, seed=11):
    rng = np.random.default_rng(seed)
    chunks = []
    for i in range(n_chunks):
        inputs = rng.normal(size=(size, p))
        labels = ((inputs[:, 0] + 0.5 * rng.normal(size=size)) > 0).astype(np.int64)
        chunks.append(Chunk(i, inputs, labels))
    return chunks


@pytest.fixture
def rng():
    return np.random.default_rng(1410)


@pytest.fixture
def abrupt_chunks():
    return swap_stream()


@pytest.fixture
def stationary_chunks():
    return swap_stream(switch=1000)


@pytest.fixture
def make_noisy_stream():
    return noisy_stream


def generated(seed, n_chunks=200, n_drifts=0, sigmoid_spacing=99.0):
    """Seeded p=4 stream of 250-point chunks from the synthetic generator"""
    return StreamGenerator(GeneratorConfig(
        seed=seed, n_features=4, n_chunks=n_chunks, chunk_size=250,
        n_drifts=n_drifts, sigmoid_spacing=sigmoid_spacing,
    ))


@pytest.fixture
def make_generated_stream():
    return generated


@pytest.fixture
def sudden_drift_stream():
    """Five sudden drifts at chunks 100, 300, ..., 900"""
    return generated(1410, n_chunks=1000, n_drifts=5, sigmoid_spacing=999.0)
