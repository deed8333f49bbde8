"""Seeded synthetic 4-class EEG dataset generation.

Real labelled rodent recordings are not redistributable, so end-to-end
runs use a generated stand-in with the same shape: single-channel EDF
files at 256 Hz, cut into whole-epoch records, with a CSV label index.

Each epoch is coloured noise shaped in the frequency domain: a sum of
Gaussian spectral bumps (class-specific centers, widths, and weights)
plus a flat broadband noise floor, with random phases and a log-normal
per-epoch amplitude jitter. The default profiles give the wake classes
theta/beta-dominant spectra and the sleep classes delta-dominant ones,
with the injured-group classes shifted toward lower theta (at reduced
total power) and elevated slow-wave amplitude respectively. Classes
overlap on purpose: a classifier should score well on held-out epochs,
not perfectly.

Everything is driven by one seed; equal specs produce byte-identical
EDF files.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .classes import CLASS_NAMES
from .edf import EdfFileHeader, EdfSignalHeader, parse_edf, to_trace, write_edf
from .pipeline import Epoch

LABEL_INDEX_NAME = "labels.csv"


@dataclass(frozen=True)
class ClassProfile:
    """Spectral shape of one class: (center_hz, width_hz, weight) bumps."""

    bumps: tuple[tuple[float, float, float], ...]
    power_scale: float = 1.0


DEFAULT_PROFILES: dict[str, ClassProfile] = {
    "sham_wake": ClassProfile(bumps=((6.5, 1.5, 1.0), (20.0, 5.0, 0.8))),
    "sham_sleep": ClassProfile(bumps=((1.5, 1.0, 1.6), (6.5, 1.5, 0.3))),
    "tbi_wake": ClassProfile(
        bumps=((4.8, 1.2, 1.0), (20.0, 5.0, 0.5)), power_scale=0.7
    ),
    "tbi_sleep": ClassProfile(
        bumps=((1.2, 0.9, 2.2), (6.5, 1.5, 0.2)), power_scale=1.15
    ),
}


@dataclass(frozen=True)
class SyntheticSpec:
    """Knobs for the generator; defaults make a moderately hard 4-class task."""

    profiles: dict[str, ClassProfile] = field(
        default_factory=lambda: dict(DEFAULT_PROFILES)
    )
    amplitude_uv: float = 100.0
    noise_level: float = 0.4
    amplitude_jitter: float = 0.3
    epochs_per_class: int = 200
    epoch_length_s: int = 16
    rate_hz: float = 256.0
    seed: int = 0

    def __post_init__(self) -> None:
        if set(self.profiles) != set(CLASS_NAMES):
            raise ValueError(f"profiles must cover exactly the classes {CLASS_NAMES}")
        if self.epochs_per_class < 1:
            raise ValueError("epochs_per_class must be >= 1")
        if self.amplitude_uv <= 0 or self.noise_level < 0:
            raise ValueError("amplitude must be positive and noise non-negative")

    @property
    def samples_per_epoch(self) -> int:
        n = self.epoch_length_s * self.rate_hz
        if n != int(n):
            raise ValueError("epoch length times rate must be a whole sample count")
        return int(n)


def _spectral_envelope(freqs: np.ndarray, profile: ClassProfile, spec: SyntheticSpec) -> np.ndarray:
    envelope = np.full(freqs.shape, spec.noise_level)
    for center, width, weight in profile.bumps:
        envelope += weight * np.exp(-((freqs - center) ** 2) / (2 * width**2))
    envelope[(freqs < 0.5) | (freqs > 60.0)] = 0.0
    return envelope


def generate_epoch_samples(
    label: str, spec: SyntheticSpec, rng: np.random.Generator
) -> np.ndarray:
    """One epoch of class-coloured noise, scaled to its jittered target RMS."""
    profile = spec.profiles[label]
    n = spec.samples_per_epoch
    freqs = np.fft.rfftfreq(n, 1.0 / spec.rate_hz)
    envelope = _spectral_envelope(freqs, profile, spec)
    phases = rng.standard_normal(freqs.size) + 1j * rng.standard_normal(freqs.size)
    x = np.fft.irfft(envelope * phases, n)
    rms = float(np.sqrt(np.mean(x**2)))
    if rms == 0:
        return x
    jitter = float(np.exp(rng.normal(0.0, spec.amplitude_jitter)))
    return x * (spec.amplitude_uv * profile.power_scale * jitter / rms)


def _signal_header(spec: SyntheticSpec) -> EdfSignalHeader:
    # +/- 20x the target RMS leaves the jittered peaks clear of clipping.
    limit = float(int(20 * spec.amplitude_uv))
    return EdfSignalHeader(
        label="EEG synth",
        physical_dimension="uV",
        physical_min=-limit,
        physical_max=limit,
        digital_min=-32768,
        digital_max=32767,
        samples_per_record=spec.samples_per_epoch,
    )


def generate_dataset(spec: SyntheticSpec, out_dir: str | Path) -> Path:
    """Write one EDF per class plus the label index CSV; returns the CSV path.

    Each EDF data record holds exactly one epoch. Deterministic: equal
    specs (including the seed) produce byte-identical files.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(spec.seed)
    rows = []
    for label in CLASS_NAMES:
        samples = np.concatenate(
            [generate_epoch_samples(label, spec, rng) for _ in range(spec.epochs_per_class)]
        )
        header = EdfFileHeader.create(
            num_signals=1,
            num_records=spec.epochs_per_class,
            record_duration_s=float(spec.epoch_length_s),
            recording_id=f"synthetic {label}",
        )
        filename = f"{label}.edf"
        (out / filename).write_bytes(
            write_edf(header, [_signal_header(spec)], [samples])
        )
        rows.extend(
            (filename, idx, label) for idx in range(spec.epochs_per_class)
        )
    index_path = out / LABEL_INDEX_NAME
    with index_path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["file", "epoch_index", "class"])
        writer.writerows(rows)
    return index_path


def load_dataset(dataset_dir: str | Path) -> list[Epoch]:
    """Read a generated dataset back as labelled epochs.

    Expects the label index CSV next to the EDF files it names; epochs are
    returned in index order with physical sample values.
    """
    root = Path(dataset_dir)
    index_path = root / LABEL_INDEX_NAME
    if not index_path.exists():
        raise FileNotFoundError(f"label index not found: {index_path}")
    with index_path.open(newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise ValueError(f"label index {index_path} holds no entries")

    traces: dict[str, tuple[np.ndarray, float, int]] = {}
    epochs = []
    for row in rows:
        filename = row["file"]
        if filename not in traces:
            header, sig_headers, digital = parse_edf((root / filename).read_bytes())
            trace = to_trace(header, sig_headers[0], digital[0])
            length_s = header.record_duration_s
            if length_s != int(length_s):
                raise ValueError(f"{filename}: record duration must be whole seconds")
            traces[filename] = (trace.samples, trace.rate_hz, int(length_s))
        samples, rate_hz, length_s = traces[filename]
        per_epoch = int(length_s * rate_hz)
        idx = int(row["epoch_index"])
        start = idx * per_epoch
        if start + per_epoch > samples.size:
            raise ValueError(f"{filename}: epoch {idx} lies past the end of the file")
        epochs.append(
            Epoch(
                samples[start : start + per_epoch],
                start_index=start,
                length_s=length_s,
                rate_hz=rate_hz,
                label=row["class"],
            )
        )
    return epochs
