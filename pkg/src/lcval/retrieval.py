"""Automated per-sample label lookup across harmonized map products.

For every sample point and every configured product the value of the pixel
whose center is nearest to the point is read and harmonized through the
product's scheme, yielding one table row per sample with two columns per
product (raw code, general class).
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass

from .grid import OutOfExtentError, RasterGrid
from .nomenclature import ClassScheme, GeneralClass
from .sampling import SamplePoint


class RetrievalError(ValueError):
    pass


Product = tuple[str, RasterGrid, ClassScheme]


@dataclass(frozen=True)
class RetrievalRow:
    sample_id: int
    x: float
    y: float
    codes: dict[str, int]
    classes: dict[str, GeneralClass]


@dataclass(frozen=True)
class RetrievalTable:
    products: tuple[str, ...]
    rows: tuple[RetrievalRow, ...]

    def column(self, product: str) -> list[GeneralClass]:
        if product not in self.products:
            raise RetrievalError(f"no product {product!r} in table")
        return [r.classes[product] for r in self.rows]


def retrieve_labels(
    samples: list[SamplePoint],
    products: list[Product],
    out_of_extent: str = "error",
) -> RetrievalTable:
    """Build the per-sample label table over all products.

    ``out_of_extent`` is ``"error"`` (default: a sample outside a product's
    half-cell-expanded bounds aborts, naming sample and product) or
    ``"unclassified"`` (such samples get the product's nodata code and the
    Others/Unclassified class).
    """
    if out_of_extent not in ("error", "unclassified"):
        raise RetrievalError(f"unknown out-of-extent policy {out_of_extent!r}")
    names = [name for name, _, _ in products]
    if len(set(names)) != len(names):
        raise RetrievalError(f"duplicate product names in {names}")

    rows = []
    for sample in samples:
        codes: dict[str, int] = {}
        classes: dict[str, GeneralClass] = {}
        for name, grid, scheme in products:
            try:
                idx = grid.world_to_cell(sample.x, sample.y)
            except OutOfExtentError as exc:
                if out_of_extent == "error":
                    raise RetrievalError(
                        f"sample {sample.sample_id} outside product {name!r}: {exc}"
                    ) from exc
                codes[name] = grid.nodata
                classes[name] = GeneralClass.OTHERS
                continue
            raw = grid.value_at(idx)
            codes[name] = raw
            classes[name] = scheme.harmonize(raw)
        rows.append(RetrievalRow(sample.sample_id, sample.x, sample.y, codes, classes))
    return RetrievalTable(tuple(names), tuple(rows))


def write_retrieval_csv(table: RetrievalTable) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    header = ["sample_id", "x", "y"]
    for name in table.products:
        header += [f"{name}_code", f"{name}_class"]
    writer.writerow(header)
    for row in table.rows:
        record = [row.sample_id, repr(row.x), repr(row.y)]
        for name in table.products:
            record += [row.codes[name], row.classes[name].value]
        writer.writerow(record)
    return out.getvalue()


def read_retrieval_csv(text: str) -> RetrievalTable:
    reader = csv.DictReader(io.StringIO(text))
    fields = reader.fieldnames or []
    if fields[:3] != ["sample_id", "x", "y"]:
        raise RetrievalError(f"retrieval table must start with sample_id,x,y, got {fields}")
    products = []
    rest = fields[3:]
    while rest:
        code_col, rest = rest[0], rest[1:]
        if not code_col.endswith("_code") or not rest:
            raise RetrievalError(f"unpaired product column {code_col!r}")
        class_col, rest = rest[0], rest[1:]
        name = code_col[: -len("_code")]
        if class_col != f"{name}_class":
            raise RetrievalError(
                f"expected {name}_class after {code_col}, got {class_col!r}"
            )
        products.append(name)
    rows = []
    for row in reader:
        codes = {name: int(row[f"{name}_code"]) for name in products}
        classes = {
            name: GeneralClass.from_name(row[f"{name}_class"]) for name in products
        }
        rows.append(
            RetrievalRow(int(row["sample_id"]), float(row["x"]), float(row["y"]), codes, classes)
        )
    return RetrievalTable(tuple(products), tuple(rows))
