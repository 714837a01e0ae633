"""Ground-truth annotation store: dual-expert labeling with confidence
levels, conflict detection and the consensus second round.

Two experts independently label every sample with one of the general
categories plus a self-reported confidence level (1: >75%, 2: 25-75%,
3: <25%). A sample finalizes immediately when both experts agree at level 1;
any disagreement, or any confidence below level 1, queues it for a joint
second round whose single consensus record finalizes it. Persistence is an
append-only record log; the current workflow state is a pure fold over it.
"""
from __future__ import annotations

import csv
import datetime as _dt
import enum
import io
import math
from dataclasses import dataclass

from .nomenclature import GeneralClass
from .retrieval import Product
from .sampling import SamplePoint


class AnnotationError(ValueError):
    pass


class UnknownSampleError(AnnotationError):
    pass


class DuplicateAnnotationError(AnnotationError):
    pass


class NotReviewableError(AnnotationError):
    pass


class AlreadyFinalizedError(AnnotationError):
    pass


CONSENSUS_EXPERT = "consensus"

# Percent ranges per confidence level; boundaries follow the published
# wording: level 1 strictly above 75, level 2 closed at both 25 and 75.
CONFIDENCE_RANGES = {1: (75.0, 100.0), 2: (25.0, 75.0), 3: (0.0, 25.0)}


class ConfidenceLevel(enum.IntEnum):
    HIGH = 1
    MEDIUM = 2
    LOW = 3

    @property
    def percent_range(self) -> tuple[float, float]:
        return CONFIDENCE_RANGES[int(self)]

    @property
    def midpoint(self) -> float:
        lo, hi = self.percent_range
        return (lo + hi) / 2.0

    @classmethod
    def from_percent(cls, percent: float) -> "ConfidenceLevel":
        if not 0 <= percent <= 100:
            raise AnnotationError(f"confidence percent out of range: {percent}")
        if percent > 75:
            return cls.HIGH
        if percent >= 25:
            return cls.MEDIUM
        return cls.LOW


class SampleStatus(str, enum.Enum):
    PENDING = "pending"
    PARTIAL = "partially-annotated"
    NEEDS_REVIEW = "needs-review"
    FINALIZED = "finalized"


PROVENANCE_AGREED = "agreed-round-1"
PROVENANCE_CONSENSUS = "consensus-round-2"


@dataclass(frozen=True)
class AnnotationRecord:
    sample_id: int
    expert_id: str
    label: GeneralClass
    confidence: ConfidenceLevel
    round: int
    timestamp: str = ""


@dataclass(frozen=True)
class GroundTruthRow:
    sample_id: int
    label: GeneralClass
    confidence: ConfidenceLevel
    provenance: str


def utc_timestamp() -> str:
    return _dt.datetime.now(_dt.timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


class AnnotationStore:
    """Registry of samples plus the append-only annotation log."""

    def __init__(self, samples: list[SamplePoint], experts: tuple[str, str] = ("expert-a", "expert-b")):
        if len(set(experts)) != len(experts) or CONSENSUS_EXPERT in experts:
            raise AnnotationError(f"invalid expert roster {experts!r}")
        self.samples = {s.sample_id: s for s in samples}
        if len(self.samples) != len(samples):
            raise AnnotationError("duplicate sample ids")
        self.experts = tuple(experts)
        self.records: list[AnnotationRecord] = []
        self._round1: dict[int, dict[str, AnnotationRecord]] = {}
        self._round2: dict[int, AnnotationRecord] = {}

    # -- recording ---------------------------------------------------------

    def record_annotation(self, record: AnnotationRecord) -> SampleStatus:
        """Append a record and return the sample's recomputed state."""
        if record.sample_id not in self.samples:
            raise UnknownSampleError(f"unknown sample {record.sample_id}")
        if record.round == 1:
            if record.expert_id not in self.experts:
                raise AnnotationError(
                    f"expert {record.expert_id!r} not in roster {self.experts}"
                )
            per_expert = self._round1.setdefault(record.sample_id, {})
            if record.expert_id in per_expert:
                raise DuplicateAnnotationError(
                    f"sample {record.sample_id} already annotated by {record.expert_id!r}"
                )
            per_expert[record.expert_id] = record
        elif record.round == 2:
            if record.expert_id != CONSENSUS_EXPERT:
                raise AnnotationError(
                    f"round-2 records must carry expert_id {CONSENSUS_EXPERT!r}"
                )
            status = self.status(record.sample_id)
            if status is SampleStatus.FINALIZED:
                raise AlreadyFinalizedError(f"sample {record.sample_id} already finalized")
            if status is not SampleStatus.NEEDS_REVIEW:
                raise NotReviewableError(
                    f"sample {record.sample_id} is {status.value}, not reviewable"
                )
            self._round2[record.sample_id] = record
        else:
            raise AnnotationError(f"round must be 1 or 2, got {record.round}")
        self.records.append(record)
        return self.status(record.sample_id)

    def record_consensus(
        self,
        sample_id: int,
        label: GeneralClass,
        confidence: ConfidenceLevel,
        timestamp: str | None = None,
    ) -> SampleStatus:
        return self.record_annotation(
            AnnotationRecord(
                sample_id=sample_id,
                expert_id=CONSENSUS_EXPERT,
                label=label,
                confidence=confidence,
                round=2,
                timestamp=timestamp if timestamp is not None else utc_timestamp(),
            )
        )

    # -- state -------------------------------------------------------------

    def status(self, sample_id: int) -> SampleStatus:
        if sample_id not in self.samples:
            raise UnknownSampleError(f"unknown sample {sample_id}")
        if sample_id in self._round2:
            return SampleStatus.FINALIZED
        per_expert = self._round1.get(sample_id, {})
        if len(per_expert) < len(self.experts):
            return SampleStatus.PARTIAL if per_expert else SampleStatus.PENDING
        records = list(per_expert.values())
        agreed = len({r.label for r in records}) == 1
        all_high = all(r.confidence is ConfidenceLevel.HIGH for r in records)
        if agreed and all_high:
            return SampleStatus.FINALIZED
        return SampleStatus.NEEDS_REVIEW

    def review_queue(self) -> list[int]:
        """Samples whose round-1 records disagree or carry any confidence
        below level 1, and which have no round-2 record; ordered by id."""
        return [
            sid
            for sid in sorted(self.samples)
            if self.status(sid) is SampleStatus.NEEDS_REVIEW
        ]

    def annotations_for(self, sample_id: int) -> list[AnnotationRecord]:
        recs = list(self._round1.get(sample_id, {}).values())
        recs.sort(key=lambda r: r.expert_id)
        if sample_id in self._round2:
            recs.append(self._round2[sample_id])
        return recs

    def final_row(self, sample_id: int) -> GroundTruthRow | None:
        if self.status(sample_id) is not SampleStatus.FINALIZED:
            return None
        if sample_id in self._round2:
            rec = self._round2[sample_id]
            return GroundTruthRow(sample_id, rec.label, rec.confidence, PROVENANCE_CONSENSUS)
        rec = next(iter(self._round1[sample_id].values()))
        return GroundTruthRow(sample_id, rec.label, ConfidenceLevel.HIGH, PROVENANCE_AGREED)

    # -- export ------------------------------------------------------------

    def export_ground_truth(self, partial: bool = False) -> list[GroundTruthRow]:
        """Final labels for all samples; with ``partial`` unfinalized samples
        are skipped instead of raising."""
        rows = []
        for sid in sorted(self.samples):
            row = self.final_row(sid)
            if row is None:
                if not partial:
                    raise AnnotationError(
                        f"sample {sid} not finalized ({self.status(sid).value}); "
                        "use partial export to skip"
                    )
                continue
            rows.append(row)
        return rows

    def counts_by_level(self, rows: list[GroundTruthRow] | None = None) -> dict[int, int]:
        if rows is None:
            rows = self.export_ground_truth(partial=True)
        counts = {1: 0, 2: 0, 3: 0}
        for row in rows:
            counts[int(row.confidence)] += 1
        return counts


# -- context patches --------------------------------------------------------


@dataclass(frozen=True)
class PatchWindow:
    product: str
    cell_size: float
    nodata: int
    values: tuple[tuple[int, ...], ...]
    legend: dict[int, tuple[str, GeneralClass]]

    @property
    def side(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class ContextPatch:
    sample_id: int
    windows: tuple[PatchWindow, ...]


def window_side(cell_size: float, patch_meters: float = 60.0) -> int:
    """Odd window side covering at least ``patch_meters``, minimum 3 so the
    sample cell is always central with context around it."""
    side = math.ceil(patch_meters / cell_size)
    if side % 2 == 0:
        side += 1
    return max(side, 3)


def extract_patch(
    products: list[Product], sample: SamplePoint, patch_meters: float = 60.0
) -> ContextPatch:
    """Per-product context window centered on the sample's cell, padded
    with nodata outside the grid."""
    windows = []
    for name, grid, scheme in products:
        center = grid.world_to_cell(sample.x, sample.y)
        side = window_side(grid.cell_size, patch_meters)
        half = side // 2
        rows = []
        present: set[int] = set()
        for r in range(center.row - half, center.row + half + 1):
            row_vals = []
            for c in range(center.col - half, center.col + half + 1):
                if 0 <= r < grid.rows and 0 <= c < grid.cols:
                    v = int(grid.values[r, c])
                else:
                    v = grid.nodata
                row_vals.append(v)
                if v != grid.nodata:
                    present.add(v)
            rows.append(tuple(row_vals))
        legend = {code: (scheme.label(code), scheme.harmonize(code)) for code in sorted(present)}
        windows.append(
            PatchWindow(
                product=name,
                cell_size=grid.cell_size,
                nodata=grid.nodata,
                values=tuple(rows),
                legend=legend,
            )
        )
    return ContextPatch(sample.sample_id, tuple(windows))


# -- persistence -------------------------------------------------------------

LOG_HEADER = ["sample_id", "expert_id", "label", "confidence", "round", "timestamp"]
GT_HEADER = ["sample_id", "label", "confidence", "provenance"]


def write_annotation_log(records: list[AnnotationRecord]) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(LOG_HEADER)
    for r in records:
        writer.writerow(
            [r.sample_id, r.expert_id, r.label.value, int(r.confidence), r.round, r.timestamp]
        )
    return out.getvalue()


def read_annotation_log(text: str) -> list[AnnotationRecord]:
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames != LOG_HEADER:
        raise AnnotationError(
            f"annotation log header must be {','.join(LOG_HEADER)}, got {reader.fieldnames}"
        )
    records = []
    for row in reader:
        records.append(
            AnnotationRecord(
                sample_id=int(row["sample_id"]),
                expert_id=row["expert_id"],
                label=GeneralClass.from_name(row["label"]),
                confidence=ConfidenceLevel(int(row["confidence"])),
                round=int(row["round"]),
                timestamp=row["timestamp"],
            )
        )
    return records


def replay_log(store: AnnotationStore, records: list[AnnotationRecord]) -> None:
    for record in records:
        store.record_annotation(record)


def write_ground_truth_csv(rows: list[GroundTruthRow]) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(GT_HEADER)
    for r in rows:
        writer.writerow([r.sample_id, r.label.value, int(r.confidence), r.provenance])
    return out.getvalue()


def read_ground_truth_csv(text: str) -> list[GroundTruthRow]:
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames != GT_HEADER:
        raise AnnotationError(
            f"ground truth header must be {','.join(GT_HEADER)}, got {reader.fieldnames}"
        )
    rows = []
    for row in reader:
        rows.append(
            GroundTruthRow(
                sample_id=int(row["sample_id"]),
                label=GeneralClass.from_name(row["label"]),
                confidence=ConfidenceLevel(int(row["confidence"])),
                provenance=row["provenance"],
            )
        )
    return rows
