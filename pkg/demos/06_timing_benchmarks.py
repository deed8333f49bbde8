"""
Collection time vs processing time
==================================

Measures how long preprocessing + feature extraction + classification
takes compared to how long the same epochs take to record, across epoch
lengths and batch sizes. On desk hardware the processing ratio sits far
below 1%, which is what makes live operation comfortable.
"""

import time

import numpy as np

from eegloop import Epoch, PreprocessConfig, TrainConfig, bench, featurize, predict_class, train
from eegloop.synth import SyntheticSpec, generate_epoch_samples

config = PreprocessConfig()

# A quick model to give the processor a real classification stage.
rng = np.random.default_rng(0)
spec4 = SyntheticSpec(epochs_per_class=1, epoch_length_s=4, seed=0)
train_epochs = [
    Epoch(generate_epoch_samples(cls, spec4, rng), 0, 4, 256.0, label=cls)
    for cls in ("sham_wake", "sham_sleep", "tbi_wake", "tbi_sleep")
    for _ in range(15)
]
model = train(
    [(featurize(e, config), e.label) for e in train_epochs], TrainConfig(rounds=15)
)


def processor(epoch):
    return predict_class(model, featurize(epoch, config))[0]


print(f"{'len s':>6} {'batch':>6} {'collect s':>10} {'process s':>10} "
      f"{'ratio %':>9} {'infer us':>9}")
for length_s in (16, 32, 64):
    spec = SyntheticSpec(epochs_per_class=1, epoch_length_s=length_s, seed=1)
    epochs = [
        Epoch(
            generate_epoch_samples("sham_wake", spec, rng),
            i * spec.samples_per_epoch, length_s, 256.0,
        )
        for i in range(20)
    ]
    rows = bench([1, 5, 20], processor, epochs)

    # Inference alone, separated from filtering and spectral estimation.
    fvs = [featurize(e, config) for e in epochs]
    t0 = time.perf_counter_ns()
    for fv in fvs:
        predict_class(model, fv)
    infer_us = (time.perf_counter_ns() - t0) / len(fvs) / 1e3

    for row in rows:
        print(f"{length_s:>6} {row['num_epochs']:>6} {row['collection_s']:>10.0f} "
              f"{row['processing_s']:>10.4f} {row['ratio_percent']:>9.4f} "
              f"{infer_us:>9.1f}")

print("\ninference time barely moves with epoch length: the classifier only")
print("ever sees the fixed 21-feature vector, so the cost that scales with")
print("epoch length is filtering and the Welch periodogram.")
