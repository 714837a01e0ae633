"""Project configuration: product declarations, sampling parameters and
workflow file locations, one JSON document per project.

Paths are resolved relative to the config file. A product is backed either
by a single grid file, by layers merged with code offsets, or by tiles
mosaicked with per-tile shifts; its scheme is a CSV path or a built-in name
(``builtin:clc2012``).
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass

from .grid import RasterGrid, TileShift, load_grid, merge_layers, mosaic
from .nomenclature import ClassScheme, builtin_scheme, load_scheme
from .retrieval import Product


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ProductConfig:
    name: str
    scheme: str
    grid: str | None = None
    layers: tuple[tuple[str, int], ...] = ()
    tiles: tuple[tuple[str, TileShift], ...] = ()
    reference: int = 0
    merged_nodata: int | None = None


@dataclass(frozen=True)
class SamplingConfig:
    z: float = 1.96
    P: float = 0.5
    h: float = 0.05
    n_max: int | None = None
    n_min: int = 5
    anchor: str | None = None
    anchor_n: int | None = None
    seed: int = 0
    stratify_by: str = ""
    by_general: bool = False


@dataclass(frozen=True)
class ProjectConfig:
    base_dir: str
    products: tuple[ProductConfig, ...]
    sampling: SamplingConfig
    experts: tuple[str, ...] = ("expert-a", "expert-b")
    weighting_levels: tuple[int, ...] = (1, 2, 3)
    output_dir: str = "out"
    samples: str = "samples.csv"
    annotation_log: str = "annotations.csv"

    def path(self, relative: str) -> str:
        return os.path.normpath(os.path.join(self.base_dir, relative))

    def product(self, name: str) -> ProductConfig:
        for p in self.products:
            if p.name == name:
                return p
        raise ConfigError(f"no product named {name!r} in project")


def _parse_product(doc: dict) -> ProductConfig:
    try:
        name = doc["name"]
        scheme = doc["scheme"]
    except KeyError as exc:
        raise ConfigError(f"product entry missing key {exc}") from None
    sources = [k for k in ("grid", "layers", "tiles") if doc.get(k)]
    if len(sources) != 1:
        raise ConfigError(
            f"product {name!r} must declare exactly one of grid/layers/tiles, got {sources}"
        )
    layers = tuple(
        (entry["path"], int(entry.get("offset", 0))) for entry in doc.get("layers", [])
    )
    tiles = tuple(
        (
            entry["path"],
            TileShift(*[int(v) for v in entry.get("shift", (0, 0))]),
        )
        for entry in doc.get("tiles", [])
    )
    return ProductConfig(
        name=name,
        scheme=scheme,
        grid=doc.get("grid"),
        layers=layers,
        tiles=tiles,
        reference=int(doc.get("reference", 0)),
        merged_nodata=doc.get("merged_nodata"),
    )


def load_config(path: str) -> ProjectConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from None

    base_dir = os.path.dirname(os.path.abspath(path))
    products = tuple(_parse_product(p) for p in doc.get("products", []))
    if not products:
        raise ConfigError("config declares no products")
    names = [p.name for p in products]
    if len(set(names)) != len(names):
        raise ConfigError(f"duplicate product names: {names}")

    s = doc.get("sampling", {})
    sampling = SamplingConfig(
        z=float(s.get("z", 1.96)),
        P=float(s.get("P", 0.5)),
        h=float(s.get("h", 0.05)),
        n_max=int(s["n_max"]) if "n_max" in s and s["n_max"] is not None else None,
        n_min=int(s.get("n_min", 5)),
        anchor=s.get("anchor"),
        anchor_n=int(s["anchor_n"]) if s.get("anchor_n") is not None else None,
        seed=int(s.get("seed", 0)),
        stratify_by=s.get("stratify_by", products[0].name),
        by_general=bool(s.get("by_general", False)),
    )
    experts = tuple(doc.get("experts", ("expert-a", "expert-b")))
    if len(experts) < 2:
        raise ConfigError("expert roster needs at least two experts")
    return ProjectConfig(
        base_dir=base_dir,
        products=products,
        sampling=sampling,
        experts=experts,
        weighting_levels=tuple(doc.get("weighting_levels", (1, 2, 3))),
        output_dir=doc.get("output_dir", "out"),
        samples=doc.get("samples", "samples.csv"),
        annotation_log=doc.get("annotation_log", "annotations.csv"),
    )


def load_product_scheme(cfg: ProjectConfig, product: ProductConfig) -> ClassScheme:
    if product.scheme.startswith("builtin:"):
        return builtin_scheme(product.scheme[len("builtin:"):])
    return load_scheme(cfg.path(product.scheme))


def load_product_grid(cfg: ProjectConfig, product: ProductConfig) -> RasterGrid:
    if product.grid:
        return load_grid(cfg.path(product.grid))
    if product.layers:
        layers = [(load_grid(cfg.path(p)), offset) for p, offset in product.layers]
        return merge_layers(layers, out_nodata=product.merged_nodata)
    tiles = [load_grid(cfg.path(p)) for p, _ in product.tiles]
    shifts = [s for _, s in product.tiles]
    return mosaic(tiles, reference=product.reference, shifts=shifts)


def load_products(cfg: ProjectConfig) -> list[Product]:
    out = []
    for product in cfg.products:
        out.append(
            (product.name, load_product_grid(cfg, product), load_product_scheme(cfg, product))
        )
    return out
