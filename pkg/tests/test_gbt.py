"""Boosted-tree training, prediction, determinism, and the JSON model format."""

import json

import numpy as np
import pytest

from eegloop.classes import CLASS_NAMES
from eegloop.features import FeatureVector, schema_descriptor
from eegloop.gbt import (
    GbtModel,
    ModelFormatError,
    SchemaMismatchError,
    TrainConfig,
    TreeNode,
    load_model,
    predict_class,
    predict_labels,
    predict_margins,
    save_model,
    train,
)

NUM_FEATURES = 21


def fv(values0, **rest):
    values = np.zeros(NUM_FEATURES)
    values[0] = values0
    for idx, v in rest.items():
        values[int(idx[1:])] = v
    return FeatureVector(values)


def quadrant_dataset(per_class=20, seed=0, spread=0.45):
    """Feature 0 alone separates the four classes into unit-wide bands."""
    rng = np.random.default_rng(seed)
    dataset = []
    for i, cls in enumerate(CLASS_NAMES):
        for _ in range(per_class):
            dataset.append((fv(i + rng.uniform(0.05, spread)), cls))
    return dataset


def hand_model(leaf_weights, learning_rate=1.0):
    """One depth-1 tree per class splitting feature 0 at 0.5."""
    trees = [
        [
            TreeNode(
                feature_index=0,
                threshold=0.5,
                left=TreeNode.leaf(left),
                right=TreeNode.leaf(right),
            )
            for left, right in leaf_weights
        ]
    ]
    return GbtModel(
        classes=CLASS_NAMES,
        trees=trees,
        base_score=0.0,
        learning_rate=learning_rate,
        schema=schema_descriptor(),
    )


class TestPrediction:
    def test_empty_forest_returns_base_score_everywhere(self):
        model = GbtModel(classes=CLASS_NAMES, trees=[], base_score=0.25,
                         learning_rate=0.3, schema=schema_descriptor())
        margins = predict_margins(model, fv(1.0))
        np.testing.assert_array_equal(margins, np.full(4, 0.25))
        label, probs = predict_class(model, fv(1.0))
        assert label == CLASS_NAMES[0]  # tie breaks to the lowest index
        np.testing.assert_allclose(probs, 0.25, atol=1e-15)

    def test_hand_traced_routing(self):
        model = hand_model([(1.0, -1.0), (2.0, 0.5), (-3.0, 3.0), (0.0, 0.25)],
                           learning_rate=0.5)
        low = predict_margins(model, fv(0.2))   # routes left everywhere
        high = predict_margins(model, fv(0.9))  # routes right everywhere
        np.testing.assert_allclose(low, [0.5, 1.0, -1.5, 0.0])
        np.testing.assert_allclose(high, [-0.5, 0.25, 1.5, 0.125])
        assert predict_class(model, fv(0.2))[0] == "sham_sleep"
        assert predict_class(model, fv(0.9))[0] == "tbi_wake"

    def test_uniform_leaf_shift_leaves_argmax_unchanged(self):
        weights = [(1.0, -1.0), (2.0, 0.5), (-3.0, 3.0), (0.0, 0.25)]
        shifted = [(l + 7.5, r + 7.5) for l, r in weights]
        m1, m2 = hand_model(weights), hand_model(shifted)
        for x in (0.2, 0.9):
            a = predict_margins(m1, fv(x))
            b = predict_margins(m2, fv(x))
            np.testing.assert_allclose(b - a, 7.5, atol=1e-12)
            assert predict_class(m1, fv(x))[0] == predict_class(m2, fv(x))[0]

    def test_argmax_of_explicit_margins(self):
        model = hand_model([(1.0, 1.0), (5.0, 5.0), (2.0, 2.0), (0.0, 0.0)])
        assert predict_class(model, fv(0.0))[0] == CLASS_NAMES[1]

    def test_softmax_of_zeros_is_uniform_and_normalized(self):
        model = GbtModel(classes=CLASS_NAMES, trees=[], base_score=0.0,
                         learning_rate=0.3, schema=schema_descriptor())
        _, probs = predict_class(model, fv(0.0))
        np.testing.assert_array_equal(probs, np.full(4, 0.25))
        assert abs(probs.sum() - 1.0) < 1e-12

    def test_softmax_normalization_on_trained_model(self):
        model = train(quadrant_dataset(), TrainConfig(rounds=5))
        rng = np.random.default_rng(0)
        for _ in range(100):
            _, probs = predict_class(model, fv(rng.uniform(-2, 6)))
            assert abs(probs.sum() - 1.0) < 1e-12

    def test_schema_mismatch_rejected(self):
        model = hand_model([(0.0, 0.0)] * 4)
        wrong = FeatureVector(np.zeros(NUM_FEATURES), schema_id="deadbeef00000000")
        with pytest.raises(SchemaMismatchError):
            predict_margins(model, wrong)


class TestTraining:
    def test_separable_dataset_reaches_perfect_training_accuracy(self):
        dataset = quadrant_dataset()
        model = train(dataset, TrainConfig(rounds=8))
        predicted = predict_labels(model, [f for f, _ in dataset])
        assert predicted == [label for _, label in dataset]

    def test_zero_rounds_predicts_class_zero_everywhere(self):
        model = train(quadrant_dataset(per_class=3), TrainConfig(rounds=0))
        assert model.trees == []
        assert predict_class(model, fv(3.2))[0] == CLASS_NAMES[0]

    def test_two_runs_serialize_identically(self):
        config = TrainConfig(rounds=6, seed=123)
        m1 = train(quadrant_dataset(seed=9), config)
        m2 = train(quadrant_dataset(seed=9), config)
        assert save_model(m1) == save_model(m2)

    def test_leaf_weight_formula_on_hand_built_gradients(self):
        # Four samples with identical features force a single root leaf per
        # class. At uniform initial probabilities p = 1/4: g = p - y,
        # h = p(1-p) = 0.1875, so for labels [c0, c1, c0, c0]:
        #   class 0: G = -2.0,  H = 0.75, w = -G/(H + 1) =  2.0/1.75
        #   class 1: G =  0.0,           w =  0.0
        #   class 2+3: G = 1.0,          w = -1.0/1.75
        dataset = [
            (fv(1.0), CLASS_NAMES[0]),
            (fv(1.0), CLASS_NAMES[1]),
            (fv(1.0), CLASS_NAMES[0]),
            (fv(1.0), CLASS_NAMES[0]),
        ]
        model = train(dataset, TrainConfig(rounds=1, l2_lambda=1.0))
        leaves = [tree.weight for tree in model.trees[0]]
        assert all(tree.is_leaf for tree in model.trees[0])
        assert leaves[0] == 2.0 / 1.75
        assert leaves[1] == 0.0
        assert leaves[2] == -1.0 / 1.75
        assert leaves[3] == -1.0 / 1.75

    def test_training_loss_is_monotone_non_increasing(self):
        model = train(quadrant_dataset(per_class=30, spread=0.95),
                      TrainConfig(rounds=25))
        losses = np.array(model.training_loss)
        assert losses.size == 26
        assert np.all(np.diff(losses) <= 1e-12)

    def test_empty_dataset_rejected(self):
        with pytest.raises(ValueError, match="empty"):
            train([])

    def test_single_class_dataset_rejected(self):
        dataset = [(fv(float(i)), CLASS_NAMES[0]) for i in range(5)]
        with pytest.raises(ValueError, match="2 classes"):
            train(dataset)

    def test_min_child_weight_blocks_tiny_leaves(self):
        # Hessian sum at the root is 4 * 0.1875 = 0.75 < min_child_weight,
        # so no split can satisfy the constraint and the tree stays a stump.
        dataset = [
            (fv(0.0), CLASS_NAMES[0]),
            (fv(1.0), CLASS_NAMES[1]),
            (fv(2.0), CLASS_NAMES[2]),
            (fv(3.0), CLASS_NAMES[3]),
        ]
        model = train(dataset, TrainConfig(rounds=1, min_child_weight=10.0))
        assert all(tree.is_leaf for tree in model.trees[0])

    def test_config_validation(self):
        with pytest.raises(ValueError):
            TrainConfig(rounds=-1)
        with pytest.raises(ValueError):
            TrainConfig(learning_rate=0.0)
        with pytest.raises(ValueError):
            TrainConfig(max_depth=0)

    def test_max_depth_respected(self):
        def depth(node):
            if node.is_leaf:
                return 0
            return 1 + max(depth(node.left), depth(node.right))

        model = train(quadrant_dataset(per_class=40, spread=0.95),
                      TrainConfig(rounds=3, max_depth=2))
        assert max(depth(t) for round_trees in model.trees for t in round_trees) <= 2


class TestModelFormat:
    def test_save_load_save_is_byte_identical(self):
        model = train(quadrant_dataset(), TrainConfig(rounds=4))
        data = save_model(model)
        assert save_model(load_model(data)) == data

    def test_loaded_model_predicts_identically_on_random_vectors(self):
        model = train(quadrant_dataset(seed=4), TrainConfig(rounds=6))
        loaded = load_model(save_model(model))
        rng = np.random.default_rng(17)
        for _ in range(1000):
            probe = FeatureVector(rng.uniform(-10, 10, NUM_FEATURES))
            np.testing.assert_array_equal(
                predict_margins(model, probe), predict_margins(loaded, probe)
            )

    def test_unknown_version_rejected(self):
        doc = json.loads(save_model(train(quadrant_dataset(per_class=3),
                                          TrainConfig(rounds=1))))
        doc["format_version"] = 99
        with pytest.raises(ModelFormatError, match="format_version"):
            load_model(json.dumps(doc).encode())

    def test_missing_field_rejected(self):
        doc = json.loads(save_model(train(quadrant_dataset(per_class=3),
                                          TrainConfig(rounds=1))))
        del doc["classes"]
        with pytest.raises(ModelFormatError, match="classes"):
            load_model(json.dumps(doc).encode())

    def test_feature_index_out_of_range_rejected(self):
        model = hand_model([(0.1, 0.2)] * 4)
        doc = json.loads(save_model(model))
        doc["trees"][0][0]["feature_index"] = 99
        with pytest.raises(ModelFormatError, match="feature_index"):
            load_model(json.dumps(doc).encode())

    def test_garbage_bytes_rejected(self):
        with pytest.raises(ModelFormatError, match="JSON"):
            load_model(b"\x00\x01not json")

    def test_format_fields_present(self):
        doc = json.loads(save_model(hand_model([(0.0, 1.0)] * 4)))
        assert doc["format_version"] == 1
        assert doc["classes"] == list(CLASS_NAMES)
        assert doc["feature_schema"]["schema_id"]
        assert doc["trees"][0][0]["default_left"] is True
