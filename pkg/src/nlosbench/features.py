"""PDR-window features: delivery ratio over the last 1 s, 5 s and 10 s."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Iterable, Sequence, TextIO

import numpy as np

from .errors import EmptyTrace, MalformedRow, NonUniformSpacing
from .trace import Condition, DeliveryRecord

WINDOWS_MS = (1000, 5000, 10000)
SAMPLES_HEADER = ["slot_time_ms", "pdr_1s", "pdr_5s", "pdr_10s", "label"]


@dataclass(frozen=True, slots=True)
class FeatureSample:
    pdr_1s: float
    pdr_5s: float
    pdr_10s: float
    label: Condition
    slot_time_ms: int

    @property
    def x(self) -> tuple[float, float, float]:
        return (self.pdr_1s, self.pdr_5s, self.pdr_10s)


def window_slots(window_ms: int, period_ms: int) -> int:
    return math.ceil(window_ms / period_ms)


def warmup_slots(period_ms: int) -> int:
    return window_slots(max(WINDOWS_MS), period_ms) - 1


def _check_spacing(times: np.ndarray, period_ms: int) -> None:
    if len(times) < 2:
        return
    gaps = np.diff(times)
    bad = np.flatnonzero(np.abs(gaps - period_ms) > period_ms / 2)
    if len(bad):
        i = int(bad[0]) + 1
        raise NonUniformSpacing(i, int(gaps[i - 1]), period_ms)


def extract(
    records: Sequence[tuple[DeliveryRecord, Condition]], period_ms: int = 100
) -> list[FeatureSample]:
    """One sample per slot with a full 10 s history; windows include the current slot."""
    n = len(records)
    times = np.fromiter((r.send_time_ms for r, _ in records), dtype=np.int64, count=n)
    _check_spacing(times, period_ms)
    delivered = np.fromiter((r.delivered for r, _ in records), dtype=np.int64, count=n)

    first = warmup_slots(period_ms)
    if n <= first:
        return []
    # running count: csum[i] = delivered slots among 0..i-1
    csum = np.concatenate(([0], np.cumsum(delivered)))
    idx = np.arange(first, n)
    pdrs = []
    for w_ms in WINDOWS_MS:
        w = window_slots(w_ms, period_ms)
        pdrs.append((csum[idx + 1] - csum[idx + 1 - w]) / w)

    return [
        FeatureSample(float(a), float(b), float(c), records[i][1], int(times[i]))
        for i, a, b, c in zip(idx.tolist(), pdrs[0], pdrs[1], pdrs[2])
    ]


def to_arrays(samples: Sequence[FeatureSample]) -> tuple[np.ndarray, np.ndarray]:
    """Feature matrix (n, 3) and labels as +1 (NLoS) / -1 (LoS)."""
    X = np.array([s.x for s in samples], dtype=float).reshape(len(samples), 3)
    y = np.array([1 if s.label is Condition.NLOS else -1 for s in samples], dtype=np.int64)
    return X, y


def format_samples(samples: Iterable[FeatureSample]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SAMPLES_HEADER)
    for s in samples:
        w.writerow([s.slot_time_ms, repr(s.pdr_1s), repr(s.pdr_5s), repr(s.pdr_10s), s.label.value])
    return buf.getvalue()


def parse_samples(stream: TextIO) -> list[FeatureSample]:
    reader = csv.reader(stream)
    header = next(reader, None)
    if header is None:
        raise EmptyTrace("samples file is empty")
    if [h.strip() for h in header] != SAMPLES_HEADER:
        raise MalformedRow(1, f"expected header {','.join(SAMPLES_HEADER)}")
    out = []
    for row in reader:
        if not row:
            continue
        if len(row) != len(SAMPLES_HEADER):
            raise MalformedRow(reader.line_num, f"expected 5 fields, got {len(row)}")
        try:
            s = FeatureSample(float(row[1]), float(row[2]), float(row[3]),
                              Condition.parse(row[4]), int(row[0]))
        except ValueError as exc:
            raise MalformedRow(reader.line_num, str(exc)) from None
        if not all(0.0 <= v <= 1.0 for v in s.x):
            raise MalformedRow(reader.line_num, "PDR outside [0, 1]")
        out.append(s)
    if not out:
        raise EmptyTrace("samples file has no data rows")
    return out
