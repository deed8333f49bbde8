"""Per-epoch preprocessing and hand-crafted feature extraction.

The classifier input is a fixed, schema-versioned vector of 21 features
per epoch:

* absolute power in the five canonical EEG bands (delta 0.5-4 Hz, theta
  4-8, alpha 8-12, beta 12-30, gamma 30-60), integrated from a Welch
  periodogram (4 s Hann segments, 50% overlap);
* the five relative band powers (each absolute power over their sum);
* three band ratios: theta/delta, alpha/delta, beta/(alpha+theta);
* variance, skewness, excess kurtosis, zero-crossing rate;
* Hjorth mobility and complexity;
* normalized spectral entropy and the 95% spectral edge frequency,
  both over the 0.5-60 Hz analysis band.

Preprocessing is a causal (forward-only) Butterworth band-pass followed
by an optional per-epoch z-score; causality keeps the chain usable in a
live capture loop. Degenerate inputs (constant signals, zero power) hit
documented floor values instead of NaNs, so every vector is finite.

``SCHEMA`` describes the feature list and parameters; its hash
``SCHEMA_ID`` is stamped on every vector and embedded in model files so
a model can refuse features it was not trained on.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, replace

import numpy as np
from scipy import signal as sps

from .pipeline import Epoch

BANDS_HZ: dict[str, tuple[float, float]] = {
    "delta": (0.5, 4.0),
    "theta": (4.0, 8.0),
    "alpha": (8.0, 12.0),
    "beta": (12.0, 30.0),
    "gamma": (30.0, 60.0),
}

ANALYSIS_BAND_HZ = (0.5, 60.0)
WELCH_SEGMENT_S = 4.0
WELCH_OVERLAP = 0.5
SPECTRAL_EDGE_FRACTION = 0.95

FEATURE_NAMES: tuple[str, ...] = (
    "delta_power",
    "theta_power",
    "alpha_power",
    "beta_power",
    "gamma_power",
    "delta_rel_power",
    "theta_rel_power",
    "alpha_rel_power",
    "beta_rel_power",
    "gamma_rel_power",
    "theta_delta_ratio",
    "alpha_delta_ratio",
    "beta_alpha_theta_ratio",
    "variance",
    "skewness",
    "kurtosis",
    "zero_crossing_rate",
    "hjorth_mobility",
    "hjorth_complexity",
    "spectral_entropy",
    "spectral_edge_hz",
)

SCHEMA: dict = {
    "schema_version": 1,
    "features": list(FEATURE_NAMES),
    "parameters": {
        "bands_hz": {name: list(edges) for name, edges in BANDS_HZ.items()},
        "analysis_band_hz": list(ANALYSIS_BAND_HZ),
        "welch_segment_s": WELCH_SEGMENT_S,
        "welch_overlap": WELCH_OVERLAP,
        "welch_window": "hann",
        "welch_detrend": "constant",
        "spectral_edge_fraction": SPECTRAL_EDGE_FRACTION,
    },
}


def schema_id(schema: dict = SCHEMA) -> str:
    """Stable 16-hex-digit hash of a feature schema definition."""
    canonical = json.dumps(schema, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()[:16]


SCHEMA_ID = schema_id()


def schema_descriptor() -> dict:
    """The feature schema plus its identifying hash, as shipped in model files."""
    return {**SCHEMA, "schema_id": SCHEMA_ID}


@dataclass(frozen=True)
class PreprocessConfig:
    """Band-pass and normalization settings applied before extraction."""

    band_low_hz: float = 0.5
    band_high_hz: float = 60.0
    filter_order: int = 4
    normalize: bool = True

    def validate(self, rate_hz: float) -> None:
        if not 0 < self.band_low_hz < self.band_high_hz < rate_hz / 2:
            raise ValueError(
                f"band [{self.band_low_hz}, {self.band_high_hz}] Hz invalid "
                f"for {rate_hz} Hz sampling"
            )
        if self.filter_order < 1:
            raise ValueError("filter_order must be >= 1")


@dataclass(frozen=True)
class FeatureVector:
    """Fixed-order feature values stamped with their schema identity."""

    values: np.ndarray
    schema_id: str = SCHEMA_ID

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "values", np.asarray(self.values, dtype=np.float64)
        )
        if not np.all(np.isfinite(self.values)):
            raise ValueError("feature values must be finite")


def bandpass_sos(config: PreprocessConfig, rate_hz: float) -> np.ndarray:
    """Design the causal Butterworth band-pass as second-order sections."""
    config.validate(rate_hz)
    return sps.butter(
        config.filter_order,
        [config.band_low_hz, config.band_high_hz],
        btype="bandpass",
        fs=rate_hz,
        output="sos",
    )


def bandpass_filter(
    x: np.ndarray, rate_hz: float, config: PreprocessConfig = PreprocessConfig()
) -> np.ndarray:
    """Apply the band-pass forward-only (causal), as a live system must."""
    return sps.sosfilt(bandpass_sos(config, rate_hz), np.asarray(x, dtype=np.float64))


def preprocess(epoch: Epoch, config: PreprocessConfig = PreprocessConfig()) -> Epoch:
    """Band-pass filter and optionally z-score one epoch.

    Returns a new epoch; after normalization the samples have mean 0 and
    unit variance to within 1e-6. A constant input cannot be normalized
    and is returned unchanged with ``meta["preprocess_skipped"]`` set.
    """
    config.validate(epoch.rate_hz)
    meta = dict(epoch.meta)
    if np.ptp(epoch.samples) == 0:
        meta["preprocess_skipped"] = True
        return replace(epoch, samples=epoch.samples.copy(), meta=meta)
    out = bandpass_filter(epoch.samples, epoch.rate_hz, config)
    if config.normalize:
        std = out.std()
        if std > 0 and np.isfinite(std):
            out = (out - out.mean()) / std
        else:
            meta["normalize_skipped"] = True
    meta["preprocessed"] = True
    return replace(epoch, samples=out, meta=meta)


def _moments(x: np.ndarray) -> tuple[float, float, float]:
    """Population variance, skewness, and excess kurtosis with zero floors."""
    centered = x - x.mean()
    m2 = float(np.mean(centered**2))
    if m2 == 0:
        return 0.0, 0.0, 0.0
    m3 = float(np.mean(centered**3))
    m4 = float(np.mean(centered**4))
    return m2, m3 / m2**1.5, m4 / m2**2 - 3.0


def _hjorth(x: np.ndarray) -> tuple[float, float]:
    """Mobility and complexity from first/second difference variances."""
    var0 = float(np.var(x))
    if var0 == 0:
        return 0.0, 0.0
    d1 = np.diff(x)
    var1 = float(np.var(d1))
    if var1 == 0:
        return 0.0, 0.0
    var2 = float(np.var(np.diff(d1)))
    mobility = np.sqrt(var1 / var0)
    return float(mobility), float(np.sqrt(var2 / var1) / mobility)


def _ratio(num: float, den: float) -> float:
    return num / den if den > 0 else 0.0


def extract(epoch: Epoch) -> FeatureVector:
    """Compute the 21-feature vector for one (preprocessed) epoch.

    Raises ``ValueError`` if the epoch is shorter than one Welch segment.
    On zero-power input the spectral features take their floors: relative
    powers and entropy 0, edge frequency at the analysis band's low edge.
    """
    x = epoch.samples
    nperseg = int(round(WELCH_SEGMENT_S * epoch.rate_hz))
    if x.size < nperseg:
        raise ValueError(
            f"epoch of {x.size} samples is shorter than one "
            f"{WELCH_SEGMENT_S} s Welch segment ({nperseg})"
        )
    freqs, psd = sps.welch(
        x,
        fs=epoch.rate_hz,
        window="hann",
        nperseg=nperseg,
        noverlap=int(nperseg * WELCH_OVERLAP),
        detrend="constant",
        scaling="density",
    )

    band_powers = []
    for lo, hi in BANDS_HZ.values():
        mask = (freqs >= lo) & (freqs <= hi)
        band_powers.append(float(np.trapezoid(psd[mask], freqs[mask])))
    total = sum(band_powers)
    rel_powers = [_ratio(p, total) for p in band_powers]
    delta, theta, alpha, beta, _ = band_powers
    ratios = [
        _ratio(theta, delta),
        _ratio(alpha, delta),
        _ratio(beta, alpha + theta),
    ]

    variance, skewness, kurtosis = _moments(x)
    zcr = float(np.count_nonzero(x[:-1] * x[1:] < 0)) / max(x.size - 1, 1)
    mobility, complexity = _hjorth(x)

    lo, hi = ANALYSIS_BAND_HZ
    band_mask = (freqs >= lo) & (freqs <= hi)
    band_psd = psd[band_mask]
    band_freqs = freqs[band_mask]
    psd_sum = float(band_psd.sum())
    if psd_sum > 0:
        p = band_psd / psd_sum
        nonzero = p[p > 0]
        entropy = float(-(nonzero * np.log(nonzero)).sum() / np.log(p.size))
        cumulative = np.cumsum(band_psd)
        edge_idx = int(np.searchsorted(cumulative, SPECTRAL_EDGE_FRACTION * psd_sum))
        edge_hz = float(band_freqs[min(edge_idx, band_freqs.size - 1)])
    else:
        entropy = 0.0
        edge_hz = lo

    values = np.array(
        band_powers
        + rel_powers
        + ratios
        + [variance, skewness, kurtosis, zcr, mobility, complexity, entropy, edge_hz],
        dtype=np.float64,
    )
    return FeatureVector(values)


def featurize(
    epoch: Epoch, config: PreprocessConfig = PreprocessConfig()
) -> FeatureVector:
    """Preprocess then extract: the standard path from raw epoch to features."""
    return extract(preprocess(epoch, config))
