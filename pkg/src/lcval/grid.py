"""Raster grid data model and operations.

Grids are rectangular tables of integer class codes with an affine
world-to-grid transform (square cells, y axis pointing up in world space,
row 0 at the top). The on-disk representation is a six-line text header
(``ncols``, ``nrows``, ``xllcorner``, ``yllcorner``, ``cellsize``,
``NODATA_value``) followed by one line of space-separated integers per row,
top row first.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

MAX_TILE_SHIFT = 3

_HEADER_KEYS = ("ncols", "nrows", "xllcorner", "yllcorner", "cellsize", "NODATA_value")


class GridError(ValueError):
    """Invalid grid construction or incompatible grid operands."""


class GridParseError(GridError):
    """Malformed grid document; carries the offending 1-based line number."""

    def __init__(self, message: str, line: int):
        super().__init__(f"{message} at line {line}")
        self.line = line


class OutOfExtentError(GridError):
    """Point outside a grid's half-cell-expanded bounds."""

    def __init__(self, x: float, y: float, bounds: tuple[float, float, float, float]):
        xmin, xmax, ymin, ymax = bounds
        super().__init__(
            f"point ({x}, {y}) outside expanded extent "
            f"x:[{xmin}, {xmax}] y:[{ymin}, {ymax}]"
        )
        self.point = (x, y)
        self.bounds = bounds


@dataclass(frozen=True)
class CellIndex:
    row: int
    col: int


@dataclass(frozen=True)
class TileShift:
    """Whole-cell translation applied to a tile before mosaicking.

    Positive ``dx`` moves the tile east, positive ``dy`` north. Offsets are
    capped (|dx|,|dy| <= cap, default 3) because observed tile disagreement
    is on the order of one cell; pass a larger cap explicitly when a dataset
    really is that far off."""

    dx: int = 0
    dy: int = 0
    cap: int = field(default=MAX_TILE_SHIFT, compare=False, repr=False)

    def __post_init__(self):
        if abs(self.dx) > self.cap or abs(self.dy) > self.cap:
            raise GridError(
                f"tile shift ({self.dx}, {self.dy}) exceeds cap {self.cap}"
            )


class RasterGrid:
    """Immutable raster of integer codes.

    ``origin_x``/``origin_y`` locate the outer corner of the top-left cell;
    cell (0, 0) spans x in [origin_x, origin_x + cell_size] and y in
    [origin_y - cell_size, origin_y].
    """

    __slots__ = ("rows", "cols", "origin_x", "origin_y", "cell_size", "nodata", "values")

    def __init__(
        self,
        values,
        origin_x: float,
        origin_y: float,
        cell_size: float,
        nodata: int = -1,
    ):
        arr = np.array(values, dtype=np.int32, copy=True, order="C")
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise GridError(f"values must be a 2-D table, got shape {arr.shape}")
        if cell_size <= 0:
            raise GridError(f"cell_size must be positive, got {cell_size}")
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)
        object.__setattr__(self, "rows", arr.shape[0])
        object.__setattr__(self, "cols", arr.shape[1])
        object.__setattr__(self, "origin_x", float(origin_x))
        # snap the top origin through its lower-corner representation once:
        # the file format stores yllcorner, and without this an arbitrary
        # origin_y can come back one ulp off after a write/parse cycle
        height = arr.shape[0] * float(cell_size)
        object.__setattr__(self, "origin_y", (float(origin_y) - height) + height)
        object.__setattr__(self, "cell_size", float(cell_size))
        object.__setattr__(self, "nodata", int(nodata))

    def __setattr__(self, name, value):
        raise AttributeError("RasterGrid is immutable")

    def __eq__(self, other):
        if not isinstance(other, RasterGrid):
            return NotImplemented
        return (
            self.origin_x == other.origin_x
            and self.origin_y == other.origin_y
            and self.cell_size == other.cell_size
            and self.nodata == other.nodata
            and np.array_equal(self.values, other.values)
        )

    def __repr__(self):
        return (
            f"RasterGrid({self.rows}x{self.cols}, cell={self.cell_size}, "
            f"origin=({self.origin_x}, {self.origin_y}), nodata={self.nodata})"
        )

    @property
    def bounds(self) -> tuple[float, float, float, float]:
        """Outer extent (xmin, xmax, ymin, ymax)."""
        return (
            self.origin_x,
            self.origin_x + self.cols * self.cell_size,
            self.origin_y - self.rows * self.cell_size,
            self.origin_y,
        )

    def expanded_bounds(self) -> tuple[float, float, float, float]:
        half = self.cell_size / 2.0
        xmin, xmax, ymin, ymax = self.bounds
        return (xmin - half, xmax + half, ymin - half, ymax + half)

    def cell_center(self, row: int, col: int) -> tuple[float, float]:
        return (
            self.origin_x + (col + 0.5) * self.cell_size,
            self.origin_y - (row + 0.5) * self.cell_size,
        )

    def value_at(self, index: CellIndex) -> int:
        return int(self.values[index.row, index.col])

    def world_to_cell(self, x: float, y: float) -> CellIndex:
        """Index of the cell whose center is nearest to (x, y).

        Ties break toward the smaller row, then the smaller column. Points
        up to half a cell outside the outer extent resolve to the nearest
        edge cell; anything farther raises :class:`OutOfExtentError`.
        """
        xmin, xmax, ymin, ymax = self.expanded_bounds()
        if not (xmin <= x <= xmax and ymin <= y <= ymax):
            raise OutOfExtentError(x, y, (xmin, xmax, ymin, ymax))
        col_f = (x - self.origin_x) / self.cell_size - 0.5
        row_f = (self.origin_y - y) / self.cell_size - 0.5
        # nearest integer, exact halves rounding down
        col = math.ceil(col_f - 0.5)
        row = math.ceil(row_f - 0.5)
        return CellIndex(min(max(row, 0), self.rows - 1), min(max(col, 0), self.cols - 1))

    def world_to_cell_many(self, xs, ys) -> tuple[np.ndarray, np.ndarray]:
        """Vectorised :meth:`world_to_cell`; raises on the first bad point."""
        xs = np.asarray(xs, dtype=np.float64)
        ys = np.asarray(ys, dtype=np.float64)
        xmin, xmax, ymin, ymax = self.expanded_bounds()
        bad = ~((xs >= xmin) & (xs <= xmax) & (ys >= ymin) & (ys <= ymax))
        if np.any(bad):
            i = int(np.flatnonzero(bad)[0])
            raise OutOfExtentError(float(xs[i]), float(ys[i]), (xmin, xmax, ymin, ymax))
        col_f = (xs - self.origin_x) / self.cell_size - 0.5
        row_f = (self.origin_y - ys) / self.cell_size - 0.5
        cols = np.ceil(col_f - 0.5).astype(np.int64)
        rows = np.ceil(row_f - 0.5).astype(np.int64)
        np.clip(cols, 0, self.cols - 1, out=cols)
        np.clip(rows, 0, self.rows - 1, out=rows)
        return rows, cols


def _format_number(x: float) -> str:
    if x == int(x) and abs(x) < 1e15:
        return str(int(x))
    return repr(x)


def write_grid(grid: RasterGrid) -> str:
    """Serialize a grid to the text format (LF line endings)."""
    yll = grid.origin_y - grid.rows * grid.cell_size
    lines = [
        f"ncols {grid.cols}",
        f"nrows {grid.rows}",
        f"xllcorner {_format_number(grid.origin_x)}",
        f"yllcorner {_format_number(yll)}",
        f"cellsize {_format_number(grid.cell_size)}",
        f"NODATA_value {grid.nodata}",
    ]
    for r in range(grid.rows):
        lines.append(" ".join(str(int(v)) for v in grid.values[r]))
    return "\n".join(lines) + "\n"


def parse_grid(text: str) -> RasterGrid:
    """Parse the text grid format; inverse of :func:`write_grid`.

    Raises :class:`GridParseError` with a 1-based line number on malformed
    headers, non-integer cell values, or row/column count mismatches.
    """
    lines = text.splitlines()
    if len(lines) < 6:
        raise GridParseError("incomplete header, expected 6 header lines", len(lines) + 1)

    header: dict[str, str] = {}
    for i, key in enumerate(_HEADER_KEYS):
        parts = lines[i].split()
        if len(parts) != 2 or parts[0] != key:
            raise GridParseError(
                f"malformed header, expected '{key} <value>', got {lines[i]!r}", i + 1
            )
        header[key] = parts[1]

    def _header_int(key: str, line: int) -> int:
        try:
            return int(header[key])
        except ValueError:
            raise GridParseError(
                f"non-integer {key} value {header[key]!r}", line
            ) from None

    def _header_float(key: str, line: int) -> float:
        try:
            return float(header[key])
        except ValueError:
            raise GridParseError(
                f"non-numeric {key} value {header[key]!r}", line
            ) from None

    ncols = _header_int("ncols", 1)
    nrows = _header_int("nrows", 2)
    xll = _header_float("xllcorner", 3)
    yll = _header_float("yllcorner", 4)
    cell = _header_float("cellsize", 5)
    nodata = _header_int("NODATA_value", 6)
    if nrows < 1 or ncols < 1:
        raise GridParseError(f"grid dimensions must be positive ({nrows}x{ncols})", 2)
    if cell <= 0:
        raise GridParseError(f"cellsize must be positive, got {cell}", 5)

    body = lines[6:]
    data_rows = []
    row_no = 0
    for offset, line in enumerate(body):
        line_no = 7 + offset
        if not line.strip():
            continue
        if row_no >= nrows:
            raise GridParseError(f"expected {nrows} data rows, found extra data", line_no)
        fields = line.split()
        if len(fields) != ncols:
            raise GridParseError(
                f"row length mismatch (expected {ncols} values, got {len(fields)})",
                line_no,
            )
        try:
            data_rows.append([int(f) for f in fields])
        except ValueError:
            bad = next(f for f in fields if not _is_int(f))
            raise GridParseError(f"non-integer cell value {bad!r}", line_no) from None
        row_no += 1
    if row_no != nrows:
        raise GridParseError(
            f"expected {nrows} data rows, got {row_no}", 7 + len(body)
        )

    return RasterGrid(
        np.array(data_rows, dtype=np.int32),
        origin_x=xll,
        origin_y=yll + nrows * cell,
        cell_size=cell,
        nodata=nodata,
    )


def _is_int(token: str) -> bool:
    try:
        int(token)
        return True
    except ValueError:
        return False


def load_grid(path) -> RasterGrid:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_grid(fh.read())


def save_grid(grid: RasterGrid, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(write_grid(grid))


def _same_geometry(a: RasterGrid, b: RasterGrid) -> bool:
    return (
        a.rows == b.rows
        and a.cols == b.cols
        and math.isclose(a.origin_x, b.origin_x, rel_tol=0, abs_tol=1e-6)
        and math.isclose(a.origin_y, b.origin_y, rel_tol=0, abs_tol=1e-6)
        and math.isclose(a.cell_size, b.cell_size, rel_tol=0, abs_tol=1e-9)
    )


def merge_layers(
    layers: list[tuple[RasterGrid, int]], out_nodata: int | None = None
) -> RasterGrid:
    """Collapse co-registered single-theme layers into one grid.

    Each cell takes ``raw + offset`` from the first layer (in argument
    order) whose cell is non-nodata; cells that are nodata in every layer
    stay nodata. Offsets must keep the layers' shifted code sets pairwise
    disjoint so every theme stays distinguishable in the merged product.
    """
    if not layers:
        raise GridError("merge_layers needs at least one layer")
    base = layers[0][0]
    for g, _ in layers[1:]:
        if not _same_geometry(base, g):
            raise GridError(
                f"layer geometry mismatch: {g!r} does not match {base!r}"
            )

    if out_nodata is None:
        out_nodata = base.nodata

    shifted_sets = []
    for g, offset in layers:
        vals = np.unique(g.values[g.values != g.nodata])
        shifted = set(int(v) + int(offset) for v in vals)
        if out_nodata in shifted:
            raise GridError(
                f"offset {offset} maps a layer code onto the output nodata {out_nodata}"
            )
        shifted_sets.append(shifted)
    for i in range(len(shifted_sets)):
        for j in range(i + 1, len(shifted_sets)):
            clash = shifted_sets[i] & shifted_sets[j]
            if clash:
                raise GridError(
                    f"overlapping shifted code ranges between layers {i} and {j}: "
                    f"{sorted(clash)[:5]}"
                )

    out = np.full((base.rows, base.cols), out_nodata, dtype=np.int32)
    unset = np.ones(out.shape, dtype=bool)
    for g, offset in layers:
        take = unset & (g.values != g.nodata)
        out[take] = g.values[take] + int(offset)
        unset &= ~take
    return RasterGrid(out, base.origin_x, base.origin_y, base.cell_size, out_nodata)


def mosaic(
    tiles: list[RasterGrid],
    reference: int = 0,
    shifts: list[TileShift] | None = None,
) -> RasterGrid:
    """Assemble shifted tiles into one grid covering their union extent.

    Where shifted tiles overlap, the reference tile's non-nodata cells win,
    then earlier tiles in list order; nodata cells are transparent. All
    tiles must share cell size and nodata, the reference shift must be
    (0, 0), and shifted tile origins must land on the reference tile's
    cell lattice.
    """
    if not tiles:
        raise GridError("mosaic needs at least one tile")
    if not 0 <= reference < len(tiles):
        raise GridError(f"reference index {reference} out of range")
    if shifts is None:
        shifts = [TileShift() for _ in tiles]
    if len(shifts) != len(tiles):
        raise GridError("one shift per tile required")
    if shifts[reference] != TileShift(0, 0):
        raise GridError("reference tile shift must be (0, 0)")

    ref = tiles[reference]
    cs = ref.cell_size
    for t in tiles:
        if not math.isclose(t.cell_size, cs, rel_tol=0, abs_tol=1e-9):
            raise GridError(f"incompatible cell_size {t.cell_size} (reference {cs})")
        if t.nodata != ref.nodata:
            raise GridError(f"incompatible nodata {t.nodata} (reference {ref.nodata})")

    placed = []  # (origin_x, origin_y) after shift
    for t, s in zip(tiles, shifts):
        ox = t.origin_x + s.dx * cs
        oy = t.origin_y + s.dy * cs
        for delta in ((ox - ref.origin_x) / cs, (oy - ref.origin_y) / cs):
            if abs(delta - round(delta)) > 1e-6:
                raise GridError(
                    "shifted tile origin does not align with the reference cell lattice"
                )
        placed.append((ox, oy))

    xmin = min(ox for ox, _ in placed)
    ymax = max(oy for _, oy in placed)
    xmax = max(ox + t.cols * cs for (ox, _), t in zip(placed, tiles))
    ymin = min(oy - t.rows * cs for (_, oy), t in zip(placed, tiles))
    out_cols = round((xmax - xmin) / cs)
    out_rows = round((ymax - ymin) / cs)
    out = np.full((out_rows, out_cols), ref.nodata, dtype=np.int32)

    order = [reference] + [i for i in range(len(tiles)) if i != reference]
    unset = np.ones(out.shape, dtype=bool)
    for i in order:
        t = tiles[i]
        ox, oy = placed[i]
        r0 = round((ymax - oy) / cs)
        c0 = round((ox - xmin) / cs)
        window = out[r0 : r0 + t.rows, c0 : c0 + t.cols]
        win_unset = unset[r0 : r0 + t.rows, c0 : c0 + t.cols]
        take = win_unset & (t.values != t.nodata)
        window[take] = t.values[take]
        win_unset &= ~take
    return RasterGrid(out, xmin, ymax, cs, ref.nodata)
