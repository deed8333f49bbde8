"""Queue-based epoch capture and processing.

A producer turns a continuous sample stream into fixed-length,
non-overlapping epochs and feeds them through a bounded FIFO queue to a
consumer that classifies each one. The queue accounts for every epoch:
``produced == consumed + dropped + queued`` holds at any quiescent point,
and overflow is counted rather than raised so the sampling side is never
stalled by a slow consumer.

Two execution modes are supported. The threaded mode runs one producer
thread against the calling thread as consumer, pacing delivery from a
:class:`~eegloop.loopback.SampleClock` (``acceleration=math.inf`` delivers
each epoch as soon as the queue has room, pausing the virtual clock
instead of dropping). The deterministic mode interleaves produce and
consume steps on a single thread for reproducible logs.
"""

from __future__ import annotations

import math
import threading
import time
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator

import numpy as np

from .classes import CLASS_NAMES
from .loopback import SampleClock

EPOCH_LENGTHS_S = (4, 16, 32, 64)

_POLL_S = 0.0002


@dataclass
class Epoch:
    """A fixed-duration window of physical samples from one stream."""

    samples: np.ndarray
    start_index: int
    length_s: int
    rate_hz: float
    label: str | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if self.length_s not in EPOCH_LENGTHS_S:
            raise ValueError(
                f"epoch length must be one of {EPOCH_LENGTHS_S}, got {self.length_s}"
            )
        expected = self.length_s * self.rate_hz
        if expected != int(expected) or self.samples.size != int(expected):
            raise ValueError(
                f"epoch needs exactly {expected} samples "
                f"({self.length_s} s at {self.rate_hz} Hz), got {self.samples.size}"
            )
        if self.label is not None and self.label not in CLASS_NAMES:
            raise ValueError(f"unknown label {self.label!r}")

    @property
    def num_samples(self) -> int:
        return int(self.samples.size)


def assemble(
    samples: np.ndarray, length_s: int, rate_hz: float, label: str | None = None
) -> Iterator[Epoch]:
    """Cut a sample stream into contiguous non-overlapping epochs.

    Emits ``floor(len(samples) / (length_s * rate_hz))`` epochs with start
    indices at exact multiples of the epoch sample count; a trailing
    partial window is discarded.
    """
    per_epoch = length_s * rate_hz
    if per_epoch != int(per_epoch):
        raise ValueError(
            f"{length_s} s at {rate_hz} Hz is not a whole number of samples"
        )
    per_epoch = int(per_epoch)
    samples = np.asarray(samples, dtype=np.float64)
    for k in range(samples.size // per_epoch):
        start = k * per_epoch
        yield Epoch(samples[start : start + per_epoch], start, length_s, rate_hz, label)


class EpochQueue:
    """Bounded FIFO with produced/consumed/dropped accounting.

    ``enqueue`` never blocks: when the queue is full the epoch is counted
    as dropped and refused. Safe for one producer and one consumer thread.
    """

    def __init__(self, capacity: int = 8):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = capacity
        self.produced = 0
        self.consumed = 0
        self.dropped = 0
        self._items: deque[Epoch] = deque()
        self._lock = threading.Lock()

    def enqueue(self, epoch: Epoch) -> bool:
        """Append an epoch; returns False (and counts a drop) when full."""
        with self._lock:
            self.produced += 1
            if len(self._items) >= self.capacity:
                self.dropped += 1
                return False
            self._items.append(epoch)
            return True

    def dequeue(self) -> Epoch | None:
        """Pop the oldest epoch, or None when empty."""
        with self._lock:
            if not self._items:
                return None
            self.consumed += 1
            return self._items.popleft()

    def __len__(self) -> int:
        with self._lock:
            return len(self._items)

    def counters(self) -> dict[str, int]:
        """Atomic snapshot of the conservation counters."""
        with self._lock:
            return {
                "produced": self.produced,
                "consumed": self.consumed,
                "dropped": self.dropped,
                "queued": len(self._items),
            }


@dataclass
class TimingReport:
    """Collection versus processing time over one run."""

    num_epochs: int
    collection_time_s: float
    processing_time_s: float
    complete: bool = True

    @property
    def ratio_percent(self) -> float:
        if self.collection_time_s == 0:
            return math.inf if self.processing_time_s > 0 else 0.0
        return 100.0 * self.processing_time_s / self.collection_time_s


def run_live(
    source: Iterable[Epoch],
    processor: Callable[[Epoch], str],
    clock: SampleClock = SampleClock(),
    queue: EpochQueue | None = None,
    deterministic: bool = False,
    timer: Callable[[], int] = time.perf_counter_ns,
) -> tuple[list[dict], TimingReport]:
    """Stream epochs from ``source`` through the queue into ``processor``.

    Every produced epoch is either classified (one log entry with its label
    and processing time in microseconds) or counted as dropped by the
    queue. Collection time is analytic, ``sum(epoch.length_s)`` over the
    produced epochs, so accelerated runs report the real-time figure.

    A failing source terminates the run with the partial report flagged
    ``complete=False``. ``timer`` must return monotonic nanoseconds; it is
    injectable so deterministic runs can produce byte-identical logs.
    """
    q = queue if queue is not None else EpochQueue()
    log: list[dict] = []
    collected_s = 0.0

    def consume_one() -> bool:
        epoch = q.dequeue()
        if epoch is None:
            return False
        t0 = timer()
        label = processor(epoch)
        elapsed_us = (timer() - t0) // 1000
        log.append(
            {
                "epoch_index": len(log),
                "start_index": epoch.start_index,
                "label": label,
                "processing_us": int(elapsed_us),
            }
        )
        return True

    complete = True
    if deterministic:
        try:
            for epoch in source:
                collected_s += epoch.length_s
                if q.enqueue(epoch):
                    consume_one()
        except Exception:
            complete = False
        while consume_one():
            pass
    else:
        done = threading.Event()
        failed = threading.Event()
        stop = threading.Event()  # consumer died; unblock the producer
        state_lock = threading.Lock()

        def produce() -> None:
            nonlocal collected_s
            try:
                for epoch in source:
                    if clock.acceleration == math.inf:
                        # Virtual clock: pause delivery instead of dropping.
                        while len(q) >= q.capacity and not stop.is_set():
                            time.sleep(_POLL_S)
                        if stop.is_set():
                            return
                    else:
                        time.sleep(epoch.length_s / clock.acceleration)
                    with state_lock:
                        collected_s += epoch.length_s
                    q.enqueue(epoch)
            except Exception:
                failed.set()
            finally:
                done.set()

        producer = threading.Thread(target=produce, name="epoch-producer", daemon=True)
        producer.start()
        try:
            while True:
                if not consume_one():
                    if done.is_set() and len(q) == 0:
                        break
                    time.sleep(_POLL_S)
        finally:
            stop.set()
            producer.join()
        complete = not failed.is_set()

    processing_s = sum(entry["processing_us"] for entry in log) / 1e6
    report = TimingReport(
        num_epochs=q.produced,
        collection_time_s=collected_s,
        processing_time_s=processing_s,
        complete=complete,
    )
    return log, report


def bench(
    batch_sizes: list[int],
    processor: Callable[[Epoch], str],
    epochs: list[Epoch],
    timer: Callable[[], int] = time.perf_counter_ns,
) -> list[dict]:
    """Time sequential processing of epoch batches of increasing size.

    Returns one row per batch size, in input order, with the analytic
    collection time and the measured processing time.
    """
    if not batch_sizes or min(batch_sizes) < 1:
        raise ValueError("batch sizes must be >= 1")
    if len(epochs) < max(batch_sizes):
        raise ValueError(
            f"need {max(batch_sizes)} epochs, got {len(epochs)}"
        )
    rows = []
    for size in batch_sizes:
        batch = epochs[:size]
        t0 = timer()
        for epoch in batch:
            processor(epoch)
        processing_s = (timer() - t0) / 1e9
        collection_s = float(sum(e.length_s for e in batch))
        rows.append(
            {
                "num_epochs": size,
                "collection_s": collection_s,
                "processing_s": processing_s,
                "ratio_percent": 100.0 * processing_s / collection_s,
            }
        )
    return rows
