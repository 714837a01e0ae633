"""Validation sample planning, stratified allocation and seeded point draws.

The planner sizes the testing set from a normal-approximation confidence
interval; allocation distributes that budget across strata proportionally
to area coverage, either anchoring the largest stratum at a cap or pinning
a chosen stratum's count, with a per-stratum minimum floor. Points are then
drawn without replacement from raster strata using per-stratum sub-seeded
generators, so adding or reordering strata never perturbs another stratum's
draw.
"""
from __future__ import annotations

import csv
import hashlib
import io
import math
from dataclasses import dataclass

import numpy as np

from .grid import RasterGrid
from .nomenclature import ClassScheme, GeneralClass


class SamplingError(ValueError):
    pass


@dataclass(frozen=True)
class SampleSizePlan:
    """Required sample count for a target confidence interval."""

    z: float
    P: float
    h: float
    n: int


def required_sample_size(z: float, P: float, h: float) -> SampleSizePlan:
    """Sample count n = ceil(z^2 * P * (1 - P) / h^2).

    ``z`` is the two-tailed critical normal value, ``P`` the planning
    proportion of correctly allocated cases, ``h`` the half width of the
    desired confidence interval.
    """
    if not 0 < h < 1:
        raise SamplingError(f"half-width must lie in (0, 1), got {h}")
    if z <= 0:
        raise SamplingError(f"critical value must be positive, got {z}")
    if not 0 <= P <= 1:
        raise SamplingError(f"planning proportion must be in [0, 1], got {P}")
    n = math.ceil(z * z * P * (1.0 - P) / (h * h))
    return SampleSizePlan(z=z, P=P, h=h, n=n)


@dataclass(frozen=True)
class Stratum:
    """One stratum of a stratification: an id, its share of the total
    classified area, and the raster code(s) its cells carry."""

    stratum_id: str
    coverage: float
    codes: tuple[int, ...] = ()


def check_coverages(strata: list[Stratum], tol: float = 1e-6) -> None:
    """Enforce that coverages sum to 1; use for exact stratifications
    (tables transcribed from print round to fewer digits)."""
    total = sum(s.coverage for s in strata)
    if abs(total - 1.0) > tol:
        raise SamplingError(f"coverages sum to {total}, expected 1 within {tol}")


@dataclass(frozen=True)
class AllocationRow:
    stratum_id: str
    coverage: float
    raw_quota: float
    selected: int
    codes: tuple[int, ...] = ()


@dataclass(frozen=True)
class Allocation:
    rows: tuple[AllocationRow, ...]

    @property
    def total(self) -> int:
        return sum(r.selected for r in self.rows)

    def row(self, stratum_id: str) -> AllocationRow:
        for r in self.rows:
            if r.stratum_id == stratum_id:
                return r
        raise KeyError(stratum_id)


def round_half_up(x: float) -> int:
    return math.floor(x + 0.5)


def allocate_max_anchored(
    strata: list[Stratum], n_max: int, n_min: int
) -> Allocation:
    """Proportional allocation anchored at the largest stratum.

    The stratum with the greatest coverage receives ``n_max`` samples; every
    other stratum gets ``coverage / coverage_max * n_max``, rounded half-up
    and floored at ``n_min``. The floor is applied after rounding and other
    strata are never rebalanced downward, so the total may exceed the
    nominal target.
    """
    if not strata:
        raise SamplingError("no strata to allocate")
    if n_min < 0 or n_max < n_min:
        raise SamplingError(f"need n_max >= n_min >= 0, got n_max={n_max}, n_min={n_min}")
    cov_max = max(s.coverage for s in strata)
    if cov_max <= 0:
        raise SamplingError("all strata have zero coverage")
    rows = []
    for s in strata:
        raw = s.coverage / cov_max * n_max
        selected = max(n_min, round_half_up(raw))
        rows.append(AllocationRow(s.stratum_id, s.coverage, raw, selected, s.codes))
    return Allocation(tuple(rows))


def allocate_class_anchored(
    strata: list[Stratum], anchor: str, anchor_n: int, n_min: int
) -> Allocation:
    """Allocation pinning one stratum's count and scaling the rest by
    coverage ratio, with the same half-up rounding and ``n_min`` floor."""
    if not strata:
        raise SamplingError("no strata to allocate")
    anchors = [s for s in strata if s.stratum_id == anchor]
    if not anchors:
        raise SamplingError(f"anchor stratum {anchor!r} not present")
    cov_anchor = anchors[0].coverage
    if cov_anchor <= 0:
        raise SamplingError(f"anchor stratum {anchor!r} has zero coverage")
    rows = []
    for s in strata:
        if s.stratum_id == anchor:
            rows.append(
                AllocationRow(s.stratum_id, s.coverage, float(anchor_n), anchor_n, s.codes)
            )
            continue
        raw = s.coverage / cov_anchor * anchor_n
        rows.append(
            AllocationRow(
                s.stratum_id, s.coverage, raw, max(n_min, round_half_up(raw)), s.codes
            )
        )
    return Allocation(tuple(rows))


@dataclass(frozen=True)
class SamplePoint:
    sample_id: int
    x: float
    y: float
    stratum_id: str
    source_product: str = ""


def _stratum_rng(seed: int, stratum_id: str) -> np.random.Generator:
    digest = hashlib.sha256(stratum_id.encode("utf-8")).digest()
    key = int.from_bytes(digest[:8], "little")
    return np.random.default_rng(np.random.SeedSequence([int(seed), key]))


def draw_points(
    stratum_map: RasterGrid,
    allocation: Allocation,
    seed: int,
    source_product: str = "",
) -> list[SamplePoint]:
    """Draw each stratum's quota of distinct cells uniformly without
    replacement from the stratum map, placing points at cell centers.

    Each stratum uses a generator sub-seeded from (seed, stratum_id), and
    strata are processed in stratum_id order, so the result is independent
    of the allocation's row order. Deterministic for fixed inputs and seed.
    """
    values = stratum_map.values
    points: list[SamplePoint] = []
    sample_id = 0
    for row in sorted(allocation.rows, key=lambda r: r.stratum_id):
        if row.selected == 0:
            continue
        if not row.codes:
            raise SamplingError(
                f"stratum {row.stratum_id!r} has no raster codes to draw from"
            )
        eligible = np.flatnonzero(np.isin(values, row.codes).ravel())
        if eligible.size == 0:
            raise SamplingError(
                f"unknown stratum {row.stratum_id!r}: codes {list(row.codes)} "
                "not present in the stratum map"
            )
        if eligible.size < row.selected:
            raise SamplingError(
                f"stratum {row.stratum_id!r} underpopulated: "
                f"{eligible.size} cells available, {row.selected} requested"
            )
        rng = _stratum_rng(seed, row.stratum_id)
        chosen = rng.choice(eligible, size=row.selected, replace=False)
        for flat in chosen:
            r, c = divmod(int(flat), stratum_map.cols)
            x, y = stratum_map.cell_center(r, c)
            points.append(SamplePoint(sample_id, x, y, row.stratum_id, source_product))
            sample_id += 1
    return points


def strata_from_grid(
    grid: RasterGrid,
    scheme: ClassScheme | None = None,
    by_general: bool = False,
) -> list[Stratum]:
    """Compute strata and their coverage fractions from a raster.

    Coverage is the share of non-nodata cells. With ``by_general`` the
    scheme's codes are grouped into the four general categories (codes
    harmonizing to Others/Unclassified are dropped, matching how products
    without a theme simply contribute no stratum).
    """
    vals = grid.values[grid.values != grid.nodata]
    if vals.size == 0:
        raise SamplingError("stratum map contains only nodata")
    codes, counts = np.unique(vals, return_counts=True)
    total = float(vals.size)
    if by_general:
        if scheme is None:
            raise SamplingError("by_general stratification requires a scheme")
        grouped: dict[GeneralClass, tuple[list[int], float]] = {}
        for code, count in zip(codes, counts):
            general = scheme.harmonize(int(code))
            if general is GeneralClass.OTHERS:
                continue
            entry = grouped.setdefault(general, ([], 0.0))
            entry[0].append(int(code))
            grouped[general] = (entry[0], entry[1] + float(count) / total)
        return [
            Stratum(g.value, cov, tuple(sorted(cs)))
            for g, (cs, cov) in sorted(grouped.items(), key=lambda kv: kv[0].value)
        ]
    strata = []
    for code, count in zip(codes, counts):
        sid = str(int(code))
        if scheme is not None and int(code) in scheme.entries:
            l3 = scheme.entries[int(code)].l3_code
            if l3:
                sid = l3
        strata.append(Stratum(sid, float(count) / total, (int(code),)))
    return strata


def write_allocation_csv(allocation: Allocation) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["stratum_id", "coverage", "raw_quota", "selected"])
    for r in allocation.rows:
        writer.writerow([r.stratum_id, repr(float(r.coverage)), f"{r.raw_quota:.2f}", r.selected])
    return out.getvalue()


def write_sample_csv(points: list[SamplePoint]) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["sample_id", "x", "y", "stratum_id", "source_product"])
    for p in points:
        writer.writerow([p.sample_id, repr(float(p.x)), repr(float(p.y)), p.stratum_id, p.source_product])
    return out.getvalue()


def read_sample_csv(text: str) -> list[SamplePoint]:
    reader = csv.DictReader(io.StringIO(text))
    expected = ["sample_id", "x", "y", "stratum_id", "source_product"]
    if reader.fieldnames != expected:
        raise SamplingError(
            f"sample file header must be {','.join(expected)}, got {reader.fieldnames}"
        )
    points = []
    for row in reader:
        points.append(
            SamplePoint(
                sample_id=int(row["sample_id"]),
                x=float(row["x"]),
                y=float(row["y"]),
                stratum_id=row["stratum_id"],
                source_product=row["source_product"],
            )
        )
    return points
