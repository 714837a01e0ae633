"""Seeded synthetic landscapes and degraded map products.

Real reference datasets cannot ship with the toolkit, so end-to-end checks
run against generated ones: a truth landscape grown as spatially coherent
class blobs, and degraded copies of it produced by pushing every cell
through a row-stochastic confusion kernel, optionally translated by a
whole-cell shift and salted with unclassified cells. Everything is
deterministic per seed; the random arrays are drawn with numpy and consumed
by the kernels module, so results do not depend on the active backend.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .grid import GridError, RasterGrid, TileShift


class SynthError(ValueError):
    pass


def generate_landscape(
    seed: int,
    rows: int,
    cols: int,
    cell_size: float,
    class_mix: dict[int, float],
    blob_scale: int = 8,
    origin_x: float = 0.0,
    origin_y: float | None = None,
    nodata: int = -1,
) -> RasterGrid:
    """Grow a random landscape whose class fractions match ``class_mix``.

    Seeds are scattered so that one lands per ``blob_scale`` x ``blob_scale``
    cells on average, with per-class seed quotas proportional to the target
    fractions; regions then grow synchronously until the grid is full.
    Larger ``blob_scale`` gives larger coherent patches (and a looser match
    to the target fractions). Deterministic per seed.
    """
    if rows < 1 or cols < 1:
        raise SynthError(f"grid dimensions must be positive ({rows}x{cols})")
    if blob_scale < 1:
        raise SynthError(f"blob_scale must be >= 1, got {blob_scale}")
    codes = list(class_mix)
    fractions = np.array([class_mix[c] for c in codes], dtype=np.float64)
    if np.any(fractions < 0):
        raise SynthError("class fractions must be non-negative")
    if abs(fractions.sum() - 1.0) > 1e-9:
        raise SynthError(f"class fractions sum to {fractions.sum()}, expected 1")
    if nodata in codes:
        raise SynthError(f"class code {nodata} collides with nodata")
    if origin_y is None:
        origin_y = rows * cell_size

    positive = [i for i, f in enumerate(fractions) if f > 0]
    if len(positive) == 1:
        values = np.full((rows, cols), codes[positive[0]], dtype=np.int32)
        return RasterGrid(values, origin_x, origin_y, cell_size, nodata)

    rng = np.random.default_rng(seed)
    n_cells = rows * cols
    n_seeds = min(n_cells, max(len(positive), round(n_cells / blob_scale**2)))

    # per-class seed quotas by largest remainder, at least one per class
    ideal = fractions * n_seeds
    quota = np.floor(ideal).astype(np.int64)
    quota[positive] = np.maximum(quota[positive], 1)
    while quota.sum() > n_seeds:
        surplus = np.where(quota > 1, quota - ideal, -np.inf)
        quota[int(np.argmax(surplus))] -= 1
    remainder = ideal - quota
    while quota.sum() < n_seeds:
        i = int(np.argmax(remainder))
        quota[i] += 1
        remainder[i] = -1.0

    class_idx = np.repeat(np.arange(len(codes)), quota).astype(np.int32)
    rng.shuffle(class_idx)
    seed_cells = rng.choice(n_cells, size=n_seeds, replace=False)

    labels = np.full((rows, cols), -1, dtype=np.int32)
    labels.ravel()[seed_cells] = class_idx
    out = np.empty_like(labels)
    remaining = n_cells - n_seeds
    while remaining > 0:
        rand = rng.random((rows, cols))
        remaining = kernels.grow_step(labels, rand, out)
        labels, out = out, labels

    code_arr = np.array(codes, dtype=np.int32)
    return RasterGrid(code_arr[labels], origin_x, origin_y, cell_size, nodata)


@dataclass(frozen=True)
class DegradationSpec:
    """How a perfect map degrades into a product: a row-stochastic
    truth-to-map confusion kernel, a whole-cell translation, and a
    probability of emitting unclassified (nodata) cells."""

    classes: tuple[int, ...]
    kernel: np.ndarray
    shift: TileShift = TileShift(0, 0)
    unclassified_rate: float = 0.0

    def __post_init__(self):
        kernel = np.asarray(self.kernel, dtype=np.float64)
        n = len(self.classes)
        if len(set(self.classes)) != n:
            raise SynthError("duplicate class codes in degradation spec")
        if kernel.shape != (n, n):
            raise SynthError(f"kernel shape {kernel.shape} does not match {n} classes")
        if np.any(kernel < 0) or np.any(kernel > 1):
            raise SynthError("kernel probabilities must lie in [0, 1]")
        rowsums = kernel.sum(axis=1)
        if np.any(np.abs(rowsums - 1.0) > 1e-9):
            raise SynthError(f"kernel rows must sum to 1, got {rowsums}")
        if not 0 <= self.unclassified_rate <= 1:
            raise SynthError(f"unclassified_rate out of [0, 1]: {self.unclassified_rate}")
        kernel = kernel.copy()
        kernel.flags.writeable = False
        object.__setattr__(self, "kernel", kernel)

    @classmethod
    def diagonal(cls, classes, p_correct: float, shift: TileShift = TileShift(0, 0),
                 unclassified_rate: float = 0.0) -> "DegradationSpec":
        """Kernel with ``p_correct`` on the diagonal and the remainder
        spread uniformly over the other classes."""
        classes = tuple(classes)
        n = len(classes)
        if n == 1:
            kernel = np.ones((1, 1))
        else:
            off = (1.0 - p_correct) / (n - 1)
            kernel = np.full((n, n), off)
            np.fill_diagonal(kernel, p_correct)
        return cls(classes, kernel, shift, unclassified_rate)

    @classmethod
    def from_json(cls, text: str) -> "DegradationSpec":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise SynthError(f"bad degradation config: {exc}") from exc
        shift = doc.get("shift", {"dx": 0, "dy": 0})
        try:
            return cls(
                classes=tuple(int(c) for c in doc["classes"]),
                kernel=np.array(doc["kernel"], dtype=np.float64),
                shift=TileShift(int(shift["dx"]), int(shift["dy"])),
                unclassified_rate=float(doc.get("unclassified_rate", 0.0)),
            )
        except (KeyError, TypeError, ValueError, GridError) as exc:
            if isinstance(exc, SynthError):
                raise
            raise SynthError(f"bad degradation config: {exc}") from exc

    def to_json(self) -> str:
        return json.dumps(
            {
                "classes": list(self.classes),
                "kernel": self.kernel.tolist(),
                "shift": {"dx": self.shift.dx, "dy": self.shift.dy},
                "unclassified_rate": self.unclassified_rate,
            },
            indent=2,
        )


def degrade(truth: RasterGrid, spec: DegradationSpec, seed: int) -> RasterGrid:
    """Produce a degraded product from a truth grid.

    The output cell at (r, c) samples its map class from the kernel row of
    the truth class at the position shifted by ``spec.shift`` (content
    moves east for positive dx, north for positive dy; cells sourced from
    outside the grid become nodata), and independently becomes nodata with
    ``unclassified_rate``. Deterministic per seed and backend-independent.
    """
    present = np.unique(truth.values[truth.values != truth.nodata])
    missing = [int(v) for v in present if int(v) not in spec.classes]
    if missing:
        raise SynthError(f"truth classes {missing} absent from degradation kernel")
    if truth.nodata in spec.classes:
        raise SynthError("kernel classes collide with the truth grid's nodata")

    shifted = np.full_like(truth.values, truth.nodata)
    dx, dy = spec.shift.dx, spec.shift.dy
    rows, cols = truth.values.shape
    src_r = slice(max(dy, 0), rows + min(dy, 0))
    dst_r = slice(max(-dy, 0), rows + min(-dy, 0))
    src_c = slice(max(-dx, 0), cols + min(-dx, 0))
    dst_c = slice(max(dx, 0), cols + min(dx, 0))
    shifted[dst_r, dst_c] = truth.values[src_r, src_c]

    code_to_idx = {c: i for i, c in enumerate(spec.classes)}
    truth_idx = np.full(shifted.size, -1, dtype=np.int32)
    flat = shifted.ravel()
    for code, i in code_to_idx.items():
        truth_idx[flat == code] = i

    rng = np.random.default_rng(seed)
    u_class = rng.random(shifted.size)
    u_nodata = rng.random(shifted.size)
    cdf = np.cumsum(spec.kernel, axis=1)
    out_idx = kernels.degrade_cells(truth_idx, cdf, u_class, u_nodata, spec.unclassified_rate)

    code_arr = np.array(spec.classes, dtype=np.int32)
    out = np.full(shifted.size, truth.nodata, dtype=np.int32)
    valid = out_idx >= 0
    out[valid] = code_arr[out_idx[valid]]
    return RasterGrid(
        out.reshape(rows, cols), truth.origin_x, truth.origin_y, truth.cell_size, truth.nodata
    )
