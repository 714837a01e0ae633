"""Accuracy statistics: per-confidence-level confusion matrices, overall /
producer's / user's accuracy, kappa, and confidence-weighted aggregation.

Ground truth indexes matrix rows, the map under assessment indexes columns;
producer's accuracy runs along rows (omission), user's accuracy along
columns (commission). Per-level rates are combined into weighted rates with
weights proportional to the midpoints of the confidence levels' percent
ranges. All rates are kept at full precision and rounded (half-up, whole
percent) only when a report is rendered.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .annotation import ConfidenceLevel, GroundTruthRow
from .nomenclature import GENERAL_ORDER, GeneralClass
from .retrieval import RetrievalTable


class MetricsError(ValueError):
    pass


@dataclass(frozen=True)
class ConfusionMatrix:
    """Square count table; ``classes[i]`` is both row i (truth) and column
    i (map)."""

    classes: tuple
    counts: np.ndarray

    def __post_init__(self):
        n = len(self.classes)
        counts = np.asarray(self.counts, dtype=np.int64)
        if counts.shape != (n, n):
            raise MetricsError(f"counts shape {counts.shape} does not match {n} classes")
        if np.any(counts < 0):
            raise MetricsError("negative counts")
        counts = counts.copy()
        counts.flags.writeable = False
        object.__setattr__(self, "counts", counts)

    @classmethod
    def from_pairs(cls, truth, mapped, classes) -> "ConfusionMatrix":
        if len(truth) != len(mapped):
            raise MetricsError("truth/mapped length mismatch")
        index = {c: i for i, c in enumerate(classes)}
        counts = np.zeros((len(classes), len(classes)), dtype=np.int64)
        for t, m in zip(truth, mapped):
            counts[index[t], index[m]] += 1
        return cls(tuple(classes), counts)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def trace(self) -> int:
        return int(np.trace(self.counts))

    def row_sums(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    def col_sums(self) -> np.ndarray:
        return self.counts.sum(axis=0)

    def __add__(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        if self.classes != other.classes:
            raise MetricsError("cannot add matrices over different class lists")
        return ConfusionMatrix(self.classes, self.counts + other.counts)


def overall_accuracy(m: ConfusionMatrix) -> float:
    if m.total == 0:
        raise MetricsError("empty confusion matrix")
    return m.trace / m.total


def producer_user_accuracy(m: ConfusionMatrix):
    """Per-class (PA, UA); a rate is None when its marginal is zero."""
    if m.total == 0:
        raise MetricsError("empty confusion matrix")
    rows = m.row_sums()
    cols = m.col_sums()
    out = {}
    for i, c in enumerate(m.classes):
        diag = int(m.counts[i, i])
        pa = diag / rows[i] if rows[i] > 0 else None
        ua = diag / cols[i] if cols[i] > 0 else None
        out[c] = (pa, ua)
    return out


def kappa(m: ConfusionMatrix) -> float:
    """Chance-corrected agreement (p_o - p_e) / (1 - p_e)."""
    total = m.total
    if total == 0:
        raise MetricsError("empty confusion matrix")
    p_o = m.trace / total
    p_e = float(np.dot(m.row_sums(), m.col_sums())) / (total * total)
    if p_e == 1.0:
        raise MetricsError("kappa undefined: expected agreement is 1")
    return (p_o - p_e) / (1.0 - p_e)


@dataclass(frozen=True)
class ConfidenceWeighting:
    """Per-level weights proportional to the midpoint of each level's
    percent range; weights sum to 1."""

    medians: dict[int, float]
    weights: dict[int, float]


def weights_from_levels(levels) -> ConfidenceWeighting:
    levels = list(levels)
    if not levels:
        raise MetricsError("no confidence levels given")
    seen = set()
    for lv in levels:
        rng = lv.percent_range
        for lo, hi in seen:
            if max(lo, rng[0]) < min(hi, rng[1]):
                raise MetricsError(f"overlapping confidence ranges {rng} and {(lo, hi)}")
        seen.add(rng)
    medians = {int(lv): lv.midpoint for lv in levels}
    total = sum(medians.values())
    weights = {lv: m / total for lv, m in medians.items()}
    return ConfidenceWeighting(medians=medians, weights=weights)


DEFAULT_WEIGHTING = weights_from_levels(
    [ConfidenceLevel.HIGH, ConfidenceLevel.MEDIUM, ConfidenceLevel.LOW]
)


@dataclass(frozen=True)
class PerLevelAccuracy:
    level: int
    n: int
    value: float


def weighted_metric(per_level: list[PerLevelAccuracy], weighting: ConfidenceWeighting) -> float:
    """wA = sum(w_i N_i A_i) / sum(w_i N_i) over levels with observations."""
    populated = [p for p in per_level if p.n > 0]
    if not populated:
        raise MetricsError("no observations at any confidence level")
    for p in populated:
        if p.level not in weighting.weights:
            raise MetricsError(f"no weight for confidence level {p.level}")
    if len(populated) == 1:
        return populated[0].value
    num = sum(weighting.weights[p.level] * p.n * p.value for p in populated)
    den = sum(weighting.weights[p.level] * p.n for p in populated)
    return num / den


def build_matrices(
    truth: list[GroundTruthRow],
    table: RetrievalTable,
    product: str,
    classes=GENERAL_ORDER,
) -> dict[int, ConfusionMatrix]:
    """One confusion matrix per confidence level: each sample lands in the
    matrix of its final confidence at (truth label, product label)."""
    mapped = {row.sample_id: row.classes[product] for row in table.rows}
    truth_ids = {r.sample_id for r in truth}
    if truth_ids != set(mapped):
        missing = truth_ids ^ set(mapped)
        raise MetricsError(
            f"truth and retrieval tables cover different samples (e.g. {sorted(missing)[:5]})"
        )
    index = {c: i for i, c in enumerate(classes)}
    counts = {
        int(level): np.zeros((len(classes), len(classes)), dtype=np.int64)
        for level in ConfidenceLevel
    }
    for row in truth:
        counts[int(row.confidence)][index[row.label], index[mapped[row.sample_id]]] += 1
    return {lv: ConfusionMatrix(tuple(classes), c) for lv, c in counts.items()}


@dataclass(frozen=True)
class AccuracyReport:
    product: str
    sampling_set: str
    matrices: dict[int, ConfusionMatrix]
    per_level_oa: dict[int, PerLevelAccuracy]
    per_level_kappa: dict[int, float]
    weighted_oa: float
    per_class: dict  # class -> {"pa": .., "ua": .., "wpa": .., "wua": ..}

    @property
    def overall_oa(self) -> float:
        merged = _merge(self.matrices)
        return overall_accuracy(merged)


def _merge(matrices: dict[int, ConfusionMatrix]) -> ConfusionMatrix:
    mats = list(matrices.values())
    out = mats[0]
    for m in mats[1:]:
        out = out + m
    return out


def evaluate(
    truth: list[GroundTruthRow],
    table: RetrievalTable,
    product: str,
    weighting: ConfidenceWeighting = DEFAULT_WEIGHTING,
    sampling_set: str = "",
    classes=GENERAL_ORDER,
) -> AccuracyReport:
    """Full accuracy report for one product against the ground truth.

    Weighted OA aggregates per-level OAs with level counts; weighted PA/UA
    use class-conditional counts (per-level truth row totals for PA, mapped
    column totals for UA), skipping levels without observations of the
    class.
    """
    matrices = build_matrices(truth, table, product, classes)
    per_level_oa = {}
    per_level_kappa = {}
    for lv, m in matrices.items():
        if m.total == 0:
            continue
        per_level_oa[lv] = PerLevelAccuracy(lv, m.total, overall_accuracy(m))
        try:
            per_level_kappa[lv] = kappa(m)
        except MetricsError:
            pass
    if not per_level_oa:
        raise MetricsError("no finalized samples to evaluate")
    weighted_oa = weighted_metric(list(per_level_oa.values()), weighting)

    merged = _merge(matrices)
    merged_rates = producer_user_accuracy(merged)
    per_class = {}
    for i, c in enumerate(classes):
        pa_levels = []
        ua_levels = []
        for lv, m in matrices.items():
            if m.total == 0:
                continue
            diag = int(m.counts[i, i])
            row_n = int(m.row_sums()[i])
            col_n = int(m.col_sums()[i])
            if row_n > 0:
                pa_levels.append(PerLevelAccuracy(lv, row_n, diag / row_n))
            if col_n > 0:
                ua_levels.append(PerLevelAccuracy(lv, col_n, diag / col_n))
        pa, ua = merged_rates[c]
        per_class[c] = {
            "pa": pa,
            "ua": ua,
            "wpa": weighted_metric(pa_levels, weighting) if pa_levels else None,
            "wua": weighted_metric(ua_levels, weighting) if ua_levels else None,
        }
    return AccuracyReport(
        product=product,
        sampling_set=sampling_set,
        matrices=matrices,
        per_level_oa=per_level_oa,
        per_level_kappa=per_level_kappa,
        weighted_oa=weighted_oa,
        per_class=per_class,
    )


# -- rendering ---------------------------------------------------------------


def percent(x: float | None, decimals: int = 0) -> str:
    """Whole-percent rendering, half-up; None renders as '-'."""
    if x is None:
        return "-"
    scale = 10**decimals
    value = math.floor(x * 100 * scale + 0.5) / scale
    if decimals == 0:
        return f"{int(value)}%"
    return f"{value:.{decimals}f}%"


def _class_title(c) -> str:
    return c.display if isinstance(c, GeneralClass) else str(c)


def render_report(report: AccuracyReport) -> str:
    lines = []
    title = f"Accuracy report: {report.product}"
    if report.sampling_set:
        title += f" ({report.sampling_set} sampling)"
    lines.append(title)
    lines.append("=" * len(title))
    classes = next(iter(report.matrices.values())).classes
    names = [_class_title(c) for c in classes]
    width = max(len(n) for n in names) + 2

    for lv in sorted(report.matrices):
        m = report.matrices[lv]
        lines.append("")
        lo, hi = ConfidenceLevel(lv).percent_range
        lines.append(f"Confidence level {lv} ({lo:g}-{hi:g}%): {m.total} samples")
        if m.total == 0:
            lines.append("  (no samples)")
            continue
        pa_ua = producer_user_accuracy(m)
        header = " " * width + "".join(f"{n[:10]:>12}" for n in names) + f"{'Sum':>8}{'PA':>8}"
        lines.append(header)
        rows = m.row_sums()
        cols = m.col_sums()
        for i, c in enumerate(classes):
            cells = "".join(f"{int(v):>12}" for v in m.counts[i])
            pa = pa_ua[c][0]
            lines.append(f"{names[i]:<{width}}{cells}{int(rows[i]):>8}{percent(pa):>8}")
        lines.append(
            f"{'Sum':<{width}}" + "".join(f"{int(v):>12}" for v in cols) + f"{m.total:>8}"
        )
        lines.append(
            f"{'UA':<{width}}" + "".join(f"{percent(pa_ua[c][1]):>12}" for c in classes)
        )
        oa = report.per_level_oa.get(lv)
        if oa is not None:
            k = report.per_level_kappa.get(lv)
            k_str = f"{k:.3f}" if k is not None else "-"
            lines.append(f"Overall accuracy = {percent(oa.value, 2)}    kappa = {k_str}")

    lines.append("")
    lines.append(f"OA (all levels pooled): {percent(report.overall_oa)}")
    lines.append(f"Weighted OA: {percent(report.weighted_oa)}")
    lines.append("")
    lines.append(
        f"{'Class':<{width}}{'PA':>8}{'wPA':>8}{'UA':>8}{'wUA':>8}"
    )
    for c in classes:
        d = report.per_class[c]
        lines.append(
            f"{_class_title(c):<{width}}"
            f"{percent(d['pa']):>8}{percent(d['wpa']):>8}"
            f"{percent(d['ua']):>8}{percent(d['wua']):>8}"
        )
    return "\n".join(lines) + "\n"


def write_summary_csv(
    weighted: dict[str, dict[str, float]], sampling_sets: list[str]
) -> str:
    """Cross-product weighted-OA summary, one row per product and one
    column per sampling set."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["product"] + list(sampling_sets))
    for product in weighted:
        row = [product]
        for s in sampling_sets:
            v = weighted[product].get(s)
            row.append(percent(v) if v is not None else "-")
        writer.writerow(row)
    return out.getvalue()
