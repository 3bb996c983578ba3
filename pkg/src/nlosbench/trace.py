"""Trace data model, CSV codecs, and tx/rx log matching.

A V2V measurement run produces two packet logs: the sender records every
packet it broadcast, the receiver every packet it decoded. Matching the two by
sequence number yields a per-slot delivery timeline, which is then labelled
LoS/NLoS from a list of time intervals.
"""

from __future__ import annotations

import bisect
import csv
import io
import logging
import warnings
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, NamedTuple, TextIO

from .errors import DataError, EmptyTrace, MalformedRow, NoTransmissions

logger = logging.getLogger(__name__)

DEFAULT_PERIOD_MS = 100

TRACE_HEADER = ["side", "seq", "timestamp_ms", "lat_deg", "lon_deg", "alt_m", "speed_mps"]
LABEL_HEADER = ["start_ms", "end_ms", "condition"]
DELIVERY_HEADER = ["seq", "send_time_ms", "delivered", "condition"]


class Side(str, Enum):
    TX = "tx"
    RX = "rx"


class Condition(str, Enum):
    LOS = "los"
    NLOS = "nlos"

    @classmethod
    def parse(cls, text: str) -> "Condition":
        return cls(text.strip().lower())


class TraceAnomalyWarning(UserWarning):
    """Soft data problems found while matching logs (never fatal)."""


@dataclass(frozen=True, slots=True)
class PacketLogEntry:
    side: Side
    seq: int
    timestamp_ms: int
    lat_deg: float
    lon_deg: float
    alt_m: float
    speed_mps: float


@dataclass(frozen=True, slots=True)
class DeliveryRecord:
    seq: int
    send_time_ms: int
    delivered: bool


@dataclass(frozen=True, slots=True)
class LabelInterval:
    start_ms: int
    end_ms: int
    condition: Condition

    def __post_init__(self):
        if not self.start_ms < self.end_ms:
            raise ValueError(f"empty interval [{self.start_ms}, {self.end_ms})")

    def contains(self, t_ms: int) -> bool:
        return self.start_ms <= t_ms < self.end_ms


class Coverage(NamedTuple):
    labeled: int
    uncovered: int


class Labeling(NamedTuple):
    records: list[tuple[DeliveryRecord, Condition]]
    coverage: Coverage


def _read_rows(stream: TextIO, header: list[str]) -> Iterable[tuple[int, list[str]]]:
    reader = csv.reader(stream)
    try:
        first = next(reader)
    except StopIteration:
        raise EmptyTrace("no header") from None
    if [h.strip() for h in first] != header:
        raise MalformedRow(1, f"expected header {','.join(header)}")
    for row in reader:
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if len(row) != len(header):
            raise MalformedRow(reader.line_num, f"expected {len(header)} fields, got {len(row)}")
        yield reader.line_num, row


def parse_trace(stream: TextIO) -> list[PacketLogEntry]:
    entries = []
    for line, row in _read_rows(stream, TRACE_HEADER):
        try:
            side = Side(row[0].strip().lower())
            seq = int(row[1])
            entry = PacketLogEntry(
                side, seq, int(row[2]), float(row[3]), float(row[4]), float(row[5]), float(row[6])
            )
        except ValueError as exc:
            raise MalformedRow(line, str(exc)) from None
        if seq < 0 or entry.speed_mps < 0:
            raise MalformedRow(line, "seq and speed_mps must be non-negative")
        entries.append(entry)
    if not entries:
        raise EmptyTrace("trace has no data rows")
    return entries


def format_trace(entries: Iterable[PacketLogEntry]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TRACE_HEADER)
    for e in entries:
        w.writerow([e.side.value, e.seq, e.timestamp_ms, repr(e.lat_deg), repr(e.lon_deg),
                    repr(e.alt_m), repr(e.speed_mps)])
    return buf.getvalue()


def parse_labels(stream: TextIO) -> list[LabelInterval]:
    intervals = []
    for line, row in _read_rows(stream, LABEL_HEADER):
        try:
            iv = LabelInterval(int(row[0]), int(row[1]), Condition.parse(row[2]))
        except ValueError as exc:
            raise MalformedRow(line, str(exc)) from None
        if intervals and iv.start_ms < intervals[-1].end_ms:
            raise MalformedRow(line, "label intervals must be sorted and non-overlapping")
        intervals.append(iv)
    return intervals


def format_labels(intervals: Iterable[LabelInterval]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(LABEL_HEADER)
    for iv in intervals:
        w.writerow([iv.start_ms, iv.end_ms, iv.condition.value])
    return buf.getvalue()


def parse_delivery(
    stream: TextIO,
) -> list[tuple[DeliveryRecord, Condition | None]]:
    """Parse a delivery CSV. The condition column may be empty (unlabelled)."""
    out = []
    for line, row in _read_rows(stream, DELIVERY_HEADER):
        try:
            if row[2] not in ("0", "1"):
                raise ValueError(f"delivered must be 0 or 1, got {row[2]!r}")
            rec = DeliveryRecord(int(row[0]), int(row[1]), row[2] == "1")
            cond = Condition.parse(row[3]) if row[3].strip() else None
        except ValueError as exc:
            raise MalformedRow(line, str(exc)) from None
        out.append((rec, cond))
    if not out:
        raise EmptyTrace("delivery file has no data rows")
    return out


def format_delivery(rows: Iterable[tuple[DeliveryRecord, Condition | None]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(DELIVERY_HEADER)
    for rec, cond in rows:
        w.writerow([rec.seq, rec.send_time_ms, int(rec.delivered), cond.value if cond else ""])
    return buf.getvalue()


def match_logs(
    tx: list[PacketLogEntry], rx: list[PacketLogEntry], clock_offset_ms: int = 0
) -> list[DeliveryRecord]:
    """Mark each transmitted packet delivered iff its seq shows up in the rx log.

    ``clock_offset_ms`` is added to receiver timestamps to bring both logs onto
    the sender's clock. Receptions that then precede their transmission, and
    receptions of sequence numbers never sent, raise ``TraceAnomalyWarning``.
    """
    if not tx:
        raise NoTransmissions("tx log is empty")
    prev = -1
    for e in tx:
        if e.side is not Side.TX:
            raise ValueError(f"rx entry seq={e.seq} in tx log")
        if e.seq <= prev:
            raise DataError(f"tx seq {e.seq} does not increase (previous {prev})")
        prev = e.seq
    for e in rx:
        if e.side is not Side.RX:
            raise ValueError(f"tx entry seq={e.seq} in rx log")

    first_rx: dict[int, int] = {}
    for e in rx:
        t = e.timestamp_ms + clock_offset_ms
        if e.seq not in first_rx or t < first_rx[e.seq]:
            first_rx[e.seq] = t

    sent = {e.seq for e in tx}
    orphans = sorted(set(first_rx) - sent)
    if orphans:
        warnings.warn(
            f"{len(orphans)} received seq(s) never transmitted, e.g. {orphans[:5]}",
            TraceAnomalyWarning,
            stacklevel=2,
        )

    records = []
    early = 0
    for e in tx:
        t_rx = first_rx.get(e.seq)
        if t_rx is not None and t_rx < e.timestamp_ms:
            early += 1
        records.append(DeliveryRecord(e.seq, e.timestamp_ms, t_rx is not None))
    if early:
        warnings.warn(
            f"{early} packet(s) received before they were sent; check clock_offset_ms",
            TraceAnomalyWarning,
            stacklevel=2,
        )
    return records


def label_records(
    records: list[DeliveryRecord], intervals: list[LabelInterval]
) -> Labeling:
    """Assign each record the condition of the half-open interval holding its send time."""
    starts = [iv.start_ms for iv in intervals]
    labeled = []
    uncovered = 0
    for rec in records:
        i = bisect.bisect_right(starts, rec.send_time_ms) - 1
        if i >= 0 and intervals[i].contains(rec.send_time_ms):
            labeled.append((rec, intervals[i].condition))
        else:
            uncovered += 1
    if uncovered:
        logger.info("%d of %d records fall outside every label interval", uncovered, len(records))
    return Labeling(labeled, Coverage(len(labeled), uncovered))


def intervals_from_labels(
    labeled: list[tuple[DeliveryRecord, Condition]], period_ms: int, end_ms: int | None = None
) -> list[LabelInterval]:
    """Collapse per-slot conditions back into maximal runs.

    Each slot covers ``[send_time, send_time + period)``; the last run is
    closed at ``end_ms`` when given.
    """
    out: list[LabelInterval] = []
    for rec, cond in labeled:
        if out and out[-1].condition is cond:
            out[-1] = LabelInterval(out[-1].start_ms, rec.send_time_ms + period_ms, cond)
        else:
            out.append(LabelInterval(rec.send_time_ms, rec.send_time_ms + period_ms, cond))
    if out and end_ms is not None:
        out[-1] = LabelInterval(out[-1].start_ms, end_ms, out[-1].condition)
    return out
