"""Deterministic gradient-boosted trees for 4-class epoch classification.

Training is classic second-order boosting with a softmax objective: each
round fits one regression tree per class to the per-sample gradients
``g = p - y`` and hessians ``h = p(1-p)``, using exact greedy splits over
every feature/threshold midpoint and leaf weights ``-G / (H + lambda)``.
There is no subsampling, binning, or threading, so a fixed dataset and
config always produce the same model, and the JSON model format round
trips bit-exactly across machines. Prediction sums leaf weights in fixed
round-major order and scales them by the learning rate.

Desk-scale by design: exact splits over a few thousand epochs train in
seconds, and single-vector inference stays well under a millisecond.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .classes import CLASS_NAMES
from .features import FeatureVector, schema_descriptor

MODEL_FORMAT_VERSION = 1

_MIN_SPLIT_GAIN = 1e-12
_MIN_HESSIAN = 1e-16


class ModelFormatError(ValueError):
    """Model bytes are structurally invalid or of an unsupported version."""


class SchemaMismatchError(ValueError):
    """Feature vector schema does not match the model's training schema."""


@dataclass
class TreeNode:
    """One node of a regression tree: a split or a leaf (weight set)."""

    feature_index: int = -1
    threshold: float = 0.0
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None
    default_left: bool = True
    weight: float | None = None

    @property
    def is_leaf(self) -> bool:
        return self.weight is not None

    @staticmethod
    def leaf(weight: float) -> "TreeNode":
        return TreeNode(weight=float(weight))


@dataclass(frozen=True)
class TrainConfig:
    """Boosting hyperparameters; all runs with equal config are identical."""

    rounds: int = 30
    max_depth: int = 4
    learning_rate: float = 0.3
    l2_lambda: float = 1.0
    min_child_weight: float = 1.0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.rounds < 0:
            raise ValueError("rounds must be >= 0")
        if self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")
        if not 0 < self.learning_rate <= 1:
            raise ValueError("learning_rate must be in (0, 1]")
        if self.l2_lambda < 0:
            raise ValueError("l2_lambda must be >= 0")


@dataclass
class GbtModel:
    """A trained forest: ``trees[round][class_index]`` roots plus scaling."""

    classes: tuple[str, ...]
    trees: list[list[TreeNode]]
    base_score: float
    learning_rate: float
    schema: dict
    training_loss: list[float] = field(default_factory=list, compare=False)

    @property
    def schema_id(self) -> str:
        return self.schema["schema_id"]

    @property
    def num_features(self) -> int:
        return len(self.schema["features"])


def _softmax(margins: np.ndarray) -> np.ndarray:
    shifted = margins - margins.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def _build_tree(
    X: np.ndarray,
    g: np.ndarray,
    h: np.ndarray,
    config: TrainConfig,
    leaf_values: np.ndarray,
) -> TreeNode:
    """Exact greedy tree fit to one class's gradients.

    Ties in split gain resolve to the lowest feature index, then to the
    lowest threshold; ``leaf_values`` receives each sample's leaf weight.
    """
    lam = config.l2_lambda

    def build(idx: np.ndarray, depth: int) -> TreeNode:
        G = float(g[idx].sum())
        H = float(h[idx].sum())
        if depth >= config.max_depth or idx.size < 2:
            return make_leaf(idx, G, H)

        parent_score = G * G / (H + lam)
        best_gain = _MIN_SPLIT_GAIN
        best: tuple[int, float] | None = None
        for j in range(X.shape[1]):
            order = idx[np.argsort(X[idx, j], kind="stable")]
            xs = X[order, j]
            splittable = xs[:-1] < xs[1:]
            if not splittable.any():
                continue
            gl = np.cumsum(g[order])[:-1][splittable]
            hl = np.cumsum(h[order])[:-1][splittable]
            gr = G - gl
            hr = H - hl
            gains = 0.5 * (gl**2 / (hl + lam) + gr**2 / (hr + lam) - parent_score)
            gains[(hl < config.min_child_weight) | (hr < config.min_child_weight)] = (
                -np.inf
            )
            k = int(np.argmax(gains))  # first max: lowest threshold
            if gains[k] > best_gain:
                best_gain = float(gains[k])
                pos = int(np.nonzero(splittable)[0][k])
                best = (j, float((xs[pos] + xs[pos + 1]) / 2))

        if best is None:
            return make_leaf(idx, G, H)
        feature, threshold = best
        goes_left = X[idx, feature] < threshold
        return TreeNode(
            feature_index=feature,
            threshold=threshold,
            left=build(idx[goes_left], depth + 1),
            right=build(idx[~goes_left], depth + 1),
        )

    def make_leaf(idx: np.ndarray, G: float, H: float) -> TreeNode:
        weight = -G / (H + lam)
        leaf_values[idx] = weight
        return TreeNode.leaf(weight)

    return build(np.arange(X.shape[0]), 0)


def train(
    dataset: list[tuple[FeatureVector, str]], config: TrainConfig = TrainConfig()
) -> GbtModel:
    """Fit a multiclass boosted forest to labelled feature vectors.

    Deterministic for a fixed dataset order and config. The returned
    model records the training log-loss after each round in
    ``training_loss`` (index 0 is the pre-training baseline); the loss is
    non-increasing on the training set.
    """
    if not dataset:
        raise ValueError("training dataset is empty")
    schema = schema_descriptor()
    for fv, _ in dataset:
        if fv.schema_id != schema["schema_id"]:
            raise SchemaMismatchError(
                f"feature vector schema {fv.schema_id} does not match "
                f"current schema {schema['schema_id']}"
            )
    X = np.vstack([fv.values for fv, _ in dataset])
    if not np.all(np.isfinite(X)):
        raise ValueError("training features contain non-finite values")
    y = np.array([CLASS_NAMES.index(label) for _, label in dataset])
    if np.unique(y).size < 2:
        raise ValueError("training dataset must contain at least 2 classes")

    n = X.shape[0]
    num_classes = len(CLASS_NAMES)
    margins = np.full((n, num_classes), 0.0)
    onehot = np.eye(num_classes)[y]

    def logloss() -> float:
        p = _softmax(margins)
        return float(-np.mean(np.log(np.clip(p[np.arange(n), y], 1e-300, None))))

    loss_history = [logloss()]
    forest: list[list[TreeNode]] = []
    for _ in range(config.rounds):
        p = _softmax(margins)
        round_trees = []
        for c in range(num_classes):
            g = p[:, c] - onehot[:, c]
            h = np.maximum(p[:, c] * (1 - p[:, c]), _MIN_HESSIAN)
            leaf_values = np.zeros(n)
            round_trees.append(_build_tree(X, g, h, config, leaf_values))
            margins[:, c] += config.learning_rate * leaf_values
        forest.append(round_trees)
        loss_history.append(logloss())

    return GbtModel(
        classes=CLASS_NAMES,
        trees=forest,
        base_score=0.0,
        learning_rate=config.learning_rate,
        schema=schema,
        training_loss=loss_history,
    )


def _route(node: TreeNode, values: np.ndarray) -> float:
    while not node.is_leaf:
        node = node.left if values[node.feature_index] < node.threshold else node.right
    return node.weight  # type: ignore[return-value]


def predict_margins(model: GbtModel, fv: FeatureVector) -> np.ndarray:
    """Per-class margin scores, summed in fixed round-major order."""
    if fv.schema_id != model.schema_id:
        raise SchemaMismatchError(
            f"feature schema {fv.schema_id} does not match model "
            f"schema {model.schema_id}"
        )
    values = fv.values
    if not np.all(np.isfinite(values)):
        raise ValueError("feature vector contains non-finite values")
    margins = np.full(len(model.classes), model.base_score)
    for round_trees in model.trees:
        for c, tree in enumerate(round_trees):
            margins[c] += model.learning_rate * _route(tree, values)
    return margins


def predict_class(model: GbtModel, fv: FeatureVector) -> tuple[str, np.ndarray]:
    """Predicted label (ties break to the lowest class index) and softmax probabilities."""
    margins = predict_margins(model, fv)
    return model.classes[int(np.argmax(margins))], _softmax(margins)


def predict_labels(model: GbtModel, fvs: list[FeatureVector]) -> list[str]:
    """Predicted label for each vector."""
    return [predict_class(model, fv)[0] for fv in fvs]


def _node_to_dict(node: TreeNode) -> dict:
    if node.is_leaf:
        return {"weight": node.weight}
    return {
        "feature_index": node.feature_index,
        "threshold": node.threshold,
        "default_left": node.default_left,
        "left": _node_to_dict(node.left),
        "right": _node_to_dict(node.right),
    }


def _node_from_dict(doc: dict, num_features: int) -> TreeNode:
    if not isinstance(doc, dict):
        raise ModelFormatError("tree node must be an object")
    if "weight" in doc:
        weight = doc["weight"]
        if not isinstance(weight, (int, float)) or not np.isfinite(weight):
            raise ModelFormatError(f"leaf weight must be finite, got {weight!r}")
        return TreeNode.leaf(float(weight))
    try:
        feature_index = doc["feature_index"]
        threshold = doc["threshold"]
        left = doc["left"]
        right = doc["right"]
    except KeyError as exc:
        raise ModelFormatError(f"tree node missing field {exc}") from None
    if not isinstance(feature_index, int) or not 0 <= feature_index < num_features:
        raise ModelFormatError(f"feature_index {feature_index!r} out of range")
    if not isinstance(threshold, (int, float)) or not np.isfinite(threshold):
        raise ModelFormatError(f"threshold must be finite, got {threshold!r}")
    return TreeNode(
        feature_index=feature_index,
        threshold=float(threshold),
        default_left=bool(doc.get("default_left", True)),
        left=_node_from_dict(left, num_features),
        right=_node_from_dict(right, num_features),
    )


def save_model(model: GbtModel) -> bytes:
    """Serialize to the versioned, self-describing JSON model format.

    Floats are written with full round-trip precision; serialization is
    canonical (sorted keys), so save -> load -> save is byte-identical.
    """
    doc = {
        "format_version": MODEL_FORMAT_VERSION,
        "classes": list(model.classes),
        "base_score": float(model.base_score),
        "learning_rate": float(model.learning_rate),
        "feature_schema": model.schema,
        "trees": [[_node_to_dict(t) for t in round_trees] for round_trees in model.trees],
    }
    return json.dumps(doc, sort_keys=True, separators=(",", ":")).encode()


def load_model(data: bytes) -> GbtModel:
    """Parse and validate model bytes; predictions match the saved model exactly."""
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"model file is not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise ModelFormatError("model file must hold a JSON object")
    version = doc.get("format_version")
    if version != MODEL_FORMAT_VERSION:
        raise ModelFormatError(
            f"unsupported model format_version {version!r} "
            f"(expected {MODEL_FORMAT_VERSION})"
        )
    for key in ("classes", "base_score", "learning_rate", "feature_schema", "trees"):
        if key not in doc:
            raise ModelFormatError(f"model file missing field {key!r}")
    schema = doc["feature_schema"]
    if not isinstance(schema, dict) or "schema_id" not in schema or "features" not in schema:
        raise ModelFormatError("feature_schema must carry features and schema_id")
    classes = doc["classes"]
    if (
        not isinstance(classes, list)
        or not classes
        or not all(isinstance(c, str) for c in classes)
    ):
        raise ModelFormatError("classes must be a non-empty list of strings")
    num_features = len(schema["features"])
    trees_doc = doc["trees"]
    if not isinstance(trees_doc, list):
        raise ModelFormatError("trees must be a list of rounds")
    forest = []
    for round_trees in trees_doc:
        if not isinstance(round_trees, list) or len(round_trees) != len(classes):
            raise ModelFormatError("each round must hold one tree per class")
        forest.append([_node_from_dict(t, num_features) for t in round_trees])
    return GbtModel(
        classes=tuple(classes),
        trees=forest,
        base_score=float(doc["base_score"]),
        learning_rate=float(doc["learning_rate"]),
        schema=schema,
    )
