"""Synthetic dataset determinism, class structure, and the label index."""

import csv

import numpy as np
import pytest

from eegloop.classes import CLASS_NAMES
from eegloop.features import FEATURE_NAMES, featurize
from eegloop.synth import SyntheticSpec, generate_dataset, load_dataset

SMALL = SyntheticSpec(epochs_per_class=8, epoch_length_s=4, seed=123)


def rel_delta(epoch):
    fv = featurize(epoch)
    return fv.values[FEATURE_NAMES.index("delta_rel_power")]


class TestDeterminism:
    def test_same_seed_writes_byte_identical_files(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        generate_dataset(SMALL, a)
        generate_dataset(SMALL, b)
        for name in [f"{c}.edf" for c in CLASS_NAMES] + ["labels.csv"]:
            assert (a / name).read_bytes() == (b / name).read_bytes(), name

    def test_different_seed_differs(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        generate_dataset(SMALL, a)
        generate_dataset(SyntheticSpec(epochs_per_class=8, epoch_length_s=4, seed=124), b)
        assert (a / "sham_wake.edf").read_bytes() != (b / "sham_wake.edf").read_bytes()


class TestLabelIndex:
    def test_row_count_and_schema(self, tmp_path):
        spec = SyntheticSpec(epochs_per_class=50, epoch_length_s=16, seed=0)
        index = generate_dataset(spec, tmp_path)
        with index.open(newline="") as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 200
        assert set(rows[0]) == {"file", "epoch_index", "class"}
        per_class = {c: sum(1 for r in rows if r["class"] == c) for c in CLASS_NAMES}
        assert per_class == {c: 50 for c in CLASS_NAMES}

    def test_load_round_trip(self, tmp_path):
        generate_dataset(SMALL, tmp_path)
        epochs = load_dataset(tmp_path)
        assert len(epochs) == 8 * 4
        assert {e.label for e in epochs} == set(CLASS_NAMES)
        assert all(e.rate_hz == 256.0 for e in epochs)
        assert all(e.num_samples == 4 * 256 for e in epochs)

    def test_missing_index_rejected(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_dataset(tmp_path)


class TestClassStructure:
    def test_sleep_classes_have_more_relative_delta_than_wake(self, tmp_path):
        spec = SyntheticSpec(epochs_per_class=12, epoch_length_s=4, seed=5)
        generate_dataset(spec, tmp_path)
        epochs = load_dataset(tmp_path)
        mean_delta = {
            cls: np.mean([rel_delta(e) for e in epochs if e.label == cls])
            for cls in CLASS_NAMES
        }
        assert mean_delta["sham_sleep"] > mean_delta["sham_wake"]
        assert mean_delta["tbi_sleep"] > mean_delta["tbi_wake"]

    def test_signals_are_band_limited_and_scaled(self, tmp_path):
        generate_dataset(SMALL, tmp_path)
        epochs = load_dataset(tmp_path)
        rms = np.sqrt(np.mean(epochs[0].samples ** 2))
        assert 10 < rms < 2000  # near the 100 uV target, with jitter

    def test_spec_validation(self):
        with pytest.raises(ValueError, match="profiles"):
            SyntheticSpec(profiles={"sham_wake": None})
        with pytest.raises(ValueError, match="epochs_per_class"):
            SyntheticSpec(epochs_per_class=0)
