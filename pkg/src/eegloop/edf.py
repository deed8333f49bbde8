"""Bit-exact reader and writer for plain EDF recordings.

EDF stores a 256-byte fixed ASCII header, one 256-byte ASCII header per
signal (field-major order), and data records of little-endian signed
16-bit samples interleaved per signal. Digital codes map linearly onto
physical units through the per-signal calibration fields.

Only continuous, plain EDF is handled here: annotation signals (the
EDF+ "EDF Annotations" channel) are skipped with a warning, and the
24-bit BDF variant is rejected by virtue of its non-numeric header.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

ANNOTATION_LABEL = "EDF Annotations"

_FIXED_HEADER_BYTES = 256
_PER_SIGNAL_HEADER_BYTES = 256

# (field name, byte width) for the fixed header, in file order.
_FIXED_FIELDS = (
    ("version", 8),
    ("patient_id", 80),
    ("recording_id", 80),
    ("start_date", 8),
    ("start_time", 8),
    ("header_bytes", 8),
    ("reserved", 44),
    ("num_records", 8),
    ("record_duration_s", 8),
    ("num_signals", 4),
)

# (field name, byte width per signal) for the signal headers, in file order.
_SIGNAL_FIELDS = (
    ("label", 16),
    ("transducer", 80),
    ("physical_dimension", 8),
    ("physical_min", 8),
    ("physical_max", 8),
    ("digital_min", 8),
    ("digital_max", 8),
    ("prefiltering", 80),
    ("samples_per_record", 8),
    ("reserved", 32),
)


class EdfError(ValueError):
    """Structural or encoding problem in an EDF byte stream."""


@dataclass(frozen=True)
class EdfFileHeader:
    """Decoded fixed header of an EDF file."""

    version: str = "0"
    patient_id: str = ""
    recording_id: str = ""
    start_date: str = "01.01.01"
    start_time: str = "00.00.00"
    header_bytes: int = 0
    num_records: int = -1
    record_duration_s: float = 1.0
    num_signals: int = 0

    @classmethod
    def create(
        cls,
        num_signals: int,
        num_records: int,
        record_duration_s: float = 1.0,
        **fields: str,
    ) -> "EdfFileHeader":
        """Build a header with ``header_bytes`` filled in from the signal count."""
        return cls(
            header_bytes=_FIXED_HEADER_BYTES + num_signals * _PER_SIGNAL_HEADER_BYTES,
            num_records=num_records,
            record_duration_s=record_duration_s,
            num_signals=num_signals,
            **fields,
        )


@dataclass(frozen=True)
class EdfSignalHeader:
    """Per-signal calibration and record layout from the EDF header."""

    label: str = "EEG"
    transducer: str = ""
    physical_dimension: str = "uV"
    physical_min: float = -1000.0
    physical_max: float = 1000.0
    digital_min: int = -32768
    digital_max: int = 32767
    prefiltering: str = ""
    samples_per_record: int = 256

    def validate(self) -> None:
        if self.digital_min >= self.digital_max:
            raise EdfError("digital_min must be < digital_max")
        if self.physical_min == self.physical_max:
            raise EdfError("physical_min must differ from physical_max")
        if self.samples_per_record < 1:
            raise EdfError("samples_per_record must be >= 1")
        for v in (self.digital_min, self.digital_max):
            if not -32768 <= v <= 32767:
                raise EdfError("digital range must fit in signed 16 bits")


@dataclass
class SignalTrace:
    """A decoded signal: physical sample values at a fixed rate."""

    samples: np.ndarray
    rate_hz: float

    def __post_init__(self) -> None:
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if self.rate_hz <= 0:
            raise ValueError("rate_hz must be positive")


def digital_to_physical(
    code: int | np.ndarray, hdr: EdfSignalHeader
) -> float | np.ndarray:
    """Map digital codes to physical values via the header calibration.

    The map is the exact linear interpolation sending ``digital_min`` to
    ``physical_min`` and ``digital_max`` to ``physical_max``. Codes outside
    the digital range raise ``ValueError``.
    """
    codes = np.asarray(code)
    if np.any(codes < hdr.digital_min) or np.any(codes > hdr.digital_max):
        raise ValueError(
            f"digital code outside [{hdr.digital_min}, {hdr.digital_max}]"
        )
    scale = (hdr.physical_max - hdr.physical_min) / (hdr.digital_max - hdr.digital_min)
    phys = hdr.physical_min + (codes.astype(np.float64) - hdr.digital_min) * scale
    return float(phys) if np.isscalar(code) or codes.ndim == 0 else phys


def physical_to_digital(
    value: float | np.ndarray, hdr: EdfSignalHeader
) -> int | np.ndarray:
    """Invert the calibration map, rounding half away from zero and clamping.

    A total function: out-of-range physical values saturate at the digital
    limits, mirroring converter behaviour. For any in-range code ``c``,
    ``physical_to_digital(digital_to_physical(c)) == c``.
    """
    values = np.asarray(value, dtype=np.float64)
    scale = (hdr.digital_max - hdr.digital_min) / (hdr.physical_max - hdr.physical_min)
    raw = hdr.digital_min + (values - hdr.physical_min) * scale
    rounded = np.sign(raw) * np.floor(np.abs(raw) + 0.5)
    codes = np.clip(rounded, hdr.digital_min, hdr.digital_max).astype(np.int64)
    return int(codes) if np.isscalar(value) or values.ndim == 0 else codes


def to_trace(
    file_hdr: EdfFileHeader, sig_hdr: EdfSignalHeader, digital: np.ndarray
) -> SignalTrace:
    """Decode one signal's digital samples into a physical trace."""
    rate = sig_hdr.samples_per_record / file_hdr.record_duration_s
    return SignalTrace(digital_to_physical(np.asarray(digital), sig_hdr), rate)


def _decode_text(raw: bytes, field: str) -> str:
    try:
        return raw.decode("ascii").rstrip(" ")
    except UnicodeDecodeError as exc:
        raise EdfError(f"non-ASCII bytes in header field {field!r}") from exc


def _decode_int(raw: bytes, field: str) -> int:
    text = _decode_text(raw, field).strip()
    try:
        return int(text)
    except ValueError:
        raise EdfError(f"non-numeric value {text!r} in header field {field!r}") from None


def _decode_float(raw: bytes, field: str) -> float:
    text = _decode_text(raw, field).strip()
    try:
        return float(text)
    except ValueError:
        raise EdfError(f"non-numeric value {text!r} in header field {field!r}") from None


def parse_edf(
    data: bytes,
) -> tuple[EdfFileHeader, list[EdfSignalHeader], list[np.ndarray]]:
    """Parse EDF bytes into headers and per-signal digital sample arrays.

    Returns the fixed header, the non-annotation signal headers, and one
    ``int16`` array of digital samples per returned header (records
    concatenated in order). Annotation signals are skipped with a warning;
    ``header.num_signals`` keeps the on-file count.

    Raises ``EdfError`` on truncated input, non-numeric numeric fields, an
    inconsistent ``header_bytes``, or a data section shorter than the
    declared records.
    """
    if len(data) < _FIXED_HEADER_BYTES:
        raise EdfError(f"file too short for EDF header: {len(data)} bytes")

    pos = 0
    fixed: dict[str, object] = {}
    for name, width in _FIXED_FIELDS:
        raw = data[pos : pos + width]
        pos += width
        if name in ("header_bytes", "num_records", "num_signals"):
            fixed[name] = _decode_int(raw, name)
        elif name == "record_duration_s":
            fixed[name] = _decode_float(raw, name)
        elif name == "reserved":
            continue
        else:
            fixed[name] = _decode_text(raw, name)

    header = EdfFileHeader(**fixed)  # type: ignore[arg-type]
    ns = header.num_signals
    if ns < 1:
        raise EdfError(f"num_signals must be >= 1, got {ns}")
    if header.record_duration_s <= 0:
        raise EdfError("record duration must be positive")
    expected_header_bytes = _FIXED_HEADER_BYTES + ns * _PER_SIGNAL_HEADER_BYTES
    if header.header_bytes != expected_header_bytes:
        raise EdfError(
            f"header_bytes {header.header_bytes} inconsistent with "
            f"{ns} signals (expected {expected_header_bytes})"
        )
    if len(data) < header.header_bytes:
        raise EdfError("file truncated inside signal headers")

    # Signal header fields are stored field-major: all labels, then all
    # transducers, and so on.
    columns: dict[str, list] = {}
    for name, width in _SIGNAL_FIELDS:
        values = []
        for _ in range(ns):
            raw = data[pos : pos + width]
            pos += width
            if name in ("digital_min", "digital_max", "samples_per_record"):
                values.append(_decode_int(raw, name))
            elif name in ("physical_min", "physical_max"):
                values.append(_decode_float(raw, name))
            else:
                values.append(_decode_text(raw, name))
        columns[name] = values
    columns.pop("reserved")
    signal_headers = [
        EdfSignalHeader(**{name: columns[name][i] for name in columns})
        for i in range(ns)
    ]

    samples_per_record = [h.samples_per_record for h in signal_headers]
    if any(s < 1 for s in samples_per_record):
        raise EdfError("samples_per_record must be >= 1 for every signal")
    record_samples = sum(samples_per_record)
    record_bytes = record_samples * 2
    body = len(data) - header.header_bytes

    num_records = header.num_records
    if num_records < 0:
        if body % record_bytes:
            raise EdfError("data section is not a whole number of records")
        num_records = body // record_bytes
    elif body < num_records * record_bytes:
        raise EdfError(
            f"data section holds {body} bytes, expected "
            f"{num_records * record_bytes} for {num_records} records"
        )

    raw = np.frombuffer(
        data, dtype="<i2", count=num_records * record_samples, offset=header.header_bytes
    )
    records = raw.reshape(num_records, record_samples)
    offsets = np.concatenate(([0], np.cumsum(samples_per_record)))

    out_headers: list[EdfSignalHeader] = []
    out_samples: list[np.ndarray] = []
    for i, sig in enumerate(signal_headers):
        if sig.label == ANNOTATION_LABEL:
            warnings.warn(f"skipping annotation signal at index {i}", stacklevel=2)
            continue
        out_headers.append(sig)
        out_samples.append(records[:, offsets[i] : offsets[i + 1]].reshape(-1).copy())
    return header, out_headers, out_samples


def _encode_text(value: str, width: int, field: str) -> bytes:
    try:
        raw = value.encode("ascii")
    except UnicodeEncodeError as exc:
        raise EdfError(f"field {field!r} is not ASCII") from exc
    if len(raw) > width:
        raise EdfError(f"field {field!r} longer than {width} bytes: {value!r}")
    return raw.ljust(width)


def _format_number(value: float | int, width: int, field: str) -> bytes:
    if isinstance(value, (int, np.integer)) or float(value).is_integer():
        text = str(int(value))
    else:
        text = repr(float(value))
    if len(text) > width or float(text) != float(value):
        raise EdfError(
            f"value {value!r} for field {field!r} has no exact "
            f"{width}-character representation"
        )
    return text.encode("ascii").ljust(width)


def write_edf(
    header: EdfFileHeader,
    signal_headers: list[EdfSignalHeader],
    signals: list[np.ndarray],
) -> bytes:
    """Encode physical signals into EDF bytes.

    ``signals`` holds one physical sample array per signal header; each is
    converted to digital codes through :func:`physical_to_digital` (values
    beyond the physical range clamp to the digital limits). Reparsing the
    output reproduces the header fields and digital samples bit-exactly.
    """
    ns = header.num_signals
    if ns != len(signal_headers) or ns != len(signals):
        raise EdfError("header.num_signals disagrees with provided signals")
    if ns < 1:
        raise EdfError("at least one signal is required")
    if header.num_records < 1:
        raise EdfError("num_records must be >= 1 when writing")
    if header.record_duration_s <= 0:
        raise EdfError("record duration must be positive")
    expected_header_bytes = _FIXED_HEADER_BYTES + ns * _PER_SIGNAL_HEADER_BYTES
    if header.header_bytes != expected_header_bytes:
        raise EdfError(
            f"header_bytes {header.header_bytes} inconsistent with {ns} signals"
        )
    for sig, samples in zip(signal_headers, signals):
        sig.validate()
        expected = header.num_records * sig.samples_per_record
        if len(samples) != expected:
            raise EdfError(
                f"signal {sig.label!r} has {len(samples)} samples, expected "
                f"{header.num_records} x {sig.samples_per_record}"
            )

    parts = [
        _encode_text(header.version, 8, "version"),
        _encode_text(header.patient_id, 80, "patient_id"),
        _encode_text(header.recording_id, 80, "recording_id"),
        _encode_text(header.start_date, 8, "start_date"),
        _encode_text(header.start_time, 8, "start_time"),
        _format_number(header.header_bytes, 8, "header_bytes"),
        _encode_text("", 44, "reserved"),
        _format_number(header.num_records, 8, "num_records"),
        _format_number(header.record_duration_s, 8, "record_duration_s"),
        _format_number(header.num_signals, 4, "num_signals"),
    ]
    for name, width in _SIGNAL_FIELDS:
        for sig in signal_headers:
            if name == "reserved":
                parts.append(_encode_text("", width, name))
            elif name in ("digital_min", "digital_max", "samples_per_record",
                          "physical_min", "physical_max"):
                parts.append(_format_number(getattr(sig, name), width, name))
            else:
                parts.append(_encode_text(getattr(sig, name), width, name))

    digital = [
        np.asarray(physical_to_digital(np.asarray(s, dtype=np.float64), sig)).astype("<i2")
        for sig, s in zip(signal_headers, signals)
    ]
    record = np.empty(
        (header.num_records, sum(s.samples_per_record for s in signal_headers)),
        dtype="<i2",
    )
    col = 0
    for sig, codes in zip(signal_headers, digital):
        spr = sig.samples_per_record
        record[:, col : col + spr] = codes.reshape(header.num_records, spr)
        col += spr
    parts.append(record.tobytes())
    return b"".join(parts)
