import numpy as np
import pytest

from kld.errors import ConfigError, GeneratorError
from kld.utils.generator import (
    BENCHMARK_SEEDS,
    GeneratorConfig,
    StreamGenerator,
    concept_weight,
    draw_concept,
    drift_schedule,
    flip_labels,
    generate,
)


class TestSchedule:
    @pytest.mark.parametrize(
        "n_chunks, n_drifts, expected",
        [
            (100, 1, [50]),
            (1000, 2, [250, 750]),
            (10000, 20, [250 + 500 * d for d in range(20)]),
            (10, 0, []),
            (7, 3, [1, 4, 6]),
        ],
    )
    def test_evenly_spaced(self, n_chunks, n_drifts, expected):
        assert drift_schedule(n_chunks, n_drifts) == expected

    def test_too_many_drifts(self):
        with pytest.raises(GeneratorError):
            drift_schedule(10, 10)


class TestConceptWeight:
    def test_half_way_at_the_center(self):
        schedule = drift_schedule(1000, 2)
        assert concept_weight(250, schedule, 99.0, 1000) == (0, pytest.approx(0.5))
        assert concept_weight(750, schedule, 99.0, 1000) == (1, pytest.approx(0.5))

    def test_monotone_within_a_period(self):
        schedule = drift_schedule(1000, 2)
        weights = [concept_weight(i, schedule, 99.0, 1000)[1] for i in range(500)]
        assert all(b >= a for a, b in zip(weights, weights[1:]))
        assert weights[0] < 1e-6 and weights[-1] > 1 - 1e-6

    def test_sudden_drift(self):
        schedule = drift_schedule(100, 1)
        assert concept_weight(49, schedule, 999.0, 100)[1] < 0.01
        assert concept_weight(51, schedule, 999.0, 100)[1] > 0.99

    def test_no_drift(self):
        assert concept_weight(3, [], 99.0, 10) == (0, 0.0)


class TestFlipLabels:
    def test_rate(self, rng):
        labels = rng.integers(0, 2, size=100_000)
        flipped, mask = flip_labels(labels, rng, 0.01, 2)
        sigma = np.sqrt(100_000 * 0.01 * 0.99)
        assert abs(mask.sum() - 1000) < 3 * sigma
        np.testing.assert_array_equal(flipped[mask], 1 - labels[mask])
        np.testing.assert_array_equal(flipped[~mask], labels[~mask])

    def test_multiclass_flip_changes_label(self, rng):
        labels = rng.integers(0, 4, size=1000)
        flipped, mask = flip_labels(labels, rng, 0.5, 4)
        assert np.all(flipped[mask] != labels[mask])
        assert flipped.min() >= 0 and flipped.max() <= 3

    def test_zero_rate(self, rng):
        labels = rng.integers(0, 2, size=50)
        flipped, mask = flip_labels(labels, rng, 0.0, 2)
        assert not mask.any()
        np.testing.assert_array_equal(flipped, labels)


class TestConcepts:
    def test_means_are_separated(self, rng):
        config = GeneratorConfig(n_classes=3, clusters_per_class=2, separation=2.0, n_features=3)
        concept = draw_concept(rng, config)
        assert concept.means.shape == (3, 2, 3)
        assert concept.min_separation() >= 2.0

    def test_concepts_differ(self):
        generator = StreamGenerator(GeneratorConfig(n_drifts=2, n_chunks=30))
        concepts = generator.concepts()
        assert len(concepts) == 3
        assert not np.allclose(concepts[0].means, concepts[1].means)


class TestStreamGenerator:
    def test_shapes_and_meta(self):
        config = GeneratorConfig(n_chunks=12, chunk_size=30, n_features=3, n_classes=3, n_drifts=2)
        meta, chunks = generate(config)
        chunks = list(chunks)

        assert meta.ground_truth == (3, 9)
        assert meta.rng == "PCG64"
        assert len(chunks) == 12
        assert [chunk.index for chunk in chunks] == list(range(12))
        assert all(chunk.inputs.shape == (30, 3) for chunk in chunks)
        assert all(chunk.labels.max() < 3 for chunk in chunks)

    def test_same_seed_same_stream(self):
        config = GeneratorConfig(n_chunks=5, chunk_size=20, n_drifts=1)
        first = list(StreamGenerator(config))
        second = list(StreamGenerator(config))
        for a, b in zip(first, second):
            np.testing.assert_array_equal(a.inputs, b.inputs)
            np.testing.assert_array_equal(a.labels, b.labels)

    def test_iterating_twice_replays(self):
        generator = StreamGenerator(GeneratorConfig(n_chunks=3, chunk_size=10))
        np.testing.assert_array_equal(list(generator)[2].inputs, list(generator)[2].inputs)

    def test_different_seeds_differ(self):
        a = next(iter(StreamGenerator(GeneratorConfig(seed=1, n_chunks=2, chunk_size=10))))
        b = next(iter(StreamGenerator(GeneratorConfig(seed=2, n_chunks=2, chunk_size=10))))
        assert not np.array_equal(a.inputs, b.inputs)

    def test_classes_are_separable(self):
        config = GeneratorConfig(n_chunks=1, chunk_size=500, separation=5.0, class_flip=0.0, n_features=2)
        generator = StreamGenerator(config)
        means = generator.concepts()[0].means[:, 0, :]
        chunk = next(iter(generator))

        distances = np.linalg.norm(chunk.inputs[:, np.newaxis, :] - means[np.newaxis], axis=2)
        accuracy = np.mean(distances.argmin(axis=1) == chunk.labels)
        assert accuracy > 0.9


class TestGeneratorConfig:
    def test_benchmark_preset(self):
        config = GeneratorConfig.benchmark_preset(BENCHMARK_SEEDS[1], features=6)
        assert (config.n_chunks, config.chunk_size, config.n_drifts) == (10000, 250, 20)
        assert config.seed == 6543 and config.n_features == 6
        with pytest.raises(ConfigError):
            GeneratorConfig.benchmark_preset(features=5)

    @pytest.mark.parametrize(
        "options",
        [
            {"n_features": 0},
            {"n_classes": 1},
            {"n_chunks": 0},
            {"n_drifts": -1},
            {"n_drifts": 100},
            {"sigmoid_spacing": 0.0},
            {"class_flip": 1.0},
            {"clusters_per_class": 0},
            {"separation": 0.0},
        ],
    )
    def test_invalid(self, options):
        with pytest.raises(ConfigError):
            GeneratorConfig(**options)

    def test_dict_round_trip(self):
        config = GeneratorConfig(seed=9, n_drifts=3)
        assert GeneratorConfig.from_dict(config.to_dict()) == config
        with pytest.raises(ConfigError):
            GeneratorConfig.from_dict({"seed": 1, "noise": 0.1})
