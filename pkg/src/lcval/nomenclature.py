"""Class vocabularies and their projection onto the shared general categories.

Every map product carries its own legend; validation compares products on
four general categories (artificial surfaces, agriculture, forest, water)
plus a catch-all for everything else, including nodata. Scheme files are
CSV documents (``raw_code,label,l3_code,general``) so new products can be
added without touching code; the three built-ins live under
``lcval/schemes/``.
"""
from __future__ import annotations

import csv
import enum
import io
import re
from dataclasses import dataclass, field
from importlib import resources

import numpy as np


class NomenclatureError(ValueError):
    pass


class UnsupportedFamilyError(NomenclatureError):
    """Dotted code whose level-1 family is outside the studied set."""


class GeneralClass(enum.Enum):
    ARTIFICIAL = "ArtificialSurfaces"
    AGRICULTURE = "Agriculture"
    FOREST = "Forest"
    WATER = "Water"
    OTHERS = "OthersUnclassified"

    @property
    def display(self) -> str:
        return _DISPLAY[self]

    @classmethod
    def from_name(cls, name: str) -> "GeneralClass":
        try:
            return cls(name)
        except ValueError:
            raise NomenclatureError(f"unknown general class {name!r}") from None


_DISPLAY = {
    GeneralClass.ARTIFICIAL: "Artificial Surfaces",
    GeneralClass.AGRICULTURE: "Agriculture",
    GeneralClass.FOREST: "Forest",
    GeneralClass.WATER: "Water",
    GeneralClass.OTHERS: "Others/Unclassified",
}

# Reporting order: the four studied categories, catch-all last.
GENERAL_ORDER = (
    GeneralClass.ARTIFICIAL,
    GeneralClass.AGRICULTURE,
    GeneralClass.FOREST,
    GeneralClass.WATER,
    GeneralClass.OTHERS,
)

# Level-1 families covered by the harmonization, keyed by leading digit.
L1_FAMILIES = {
    "1": "Artificial Surfaces",
    "2": "Agricultural Areas",
    "3": "Forest and Semi-Natural Areas",
    "5": "Water Bodies",
}

FAMILY_TO_GENERAL = {
    "Artificial Surfaces": GeneralClass.ARTIFICIAL,
    "Agricultural Areas": GeneralClass.AGRICULTURE,
    "Forest and Semi-Natural Areas": GeneralClass.FOREST,
    "Water Bodies": GeneralClass.WATER,
}

_L3_PATTERN = re.compile(r"^(\d)\.(\d)\.(\d)$")


def l3_to_l1(l3_code: str) -> str:
    """Level-1 family label for a dotted level-3 code such as ``2.1.2``.

    Raises :class:`UnsupportedFamilyError` when the leading digit names a
    family outside the studied set (e.g. wetlands, ``4.x``).
    """
    m = _L3_PATTERN.match(l3_code)
    if not m:
        raise NomenclatureError(f"not a dotted level-3 code: {l3_code!r}")
    family = L1_FAMILIES.get(m.group(1))
    if family is None:
        raise UnsupportedFamilyError(
            f"level-1 family {m.group(1)} of {l3_code!r} is not in the studied set"
        )
    return family


def dotted_to_code(l3_code: str) -> int:
    """Default integer raster encoding of a dotted code: digits glued
    together (``2.1.2`` -> 212)."""
    m = _L3_PATTERN.match(l3_code)
    if not m:
        raise NomenclatureError(f"not a dotted level-3 code: {l3_code!r}")
    return int("".join(m.groups()))


@dataclass(frozen=True)
class SchemeEntry:
    label: str
    l3_code: str | None
    general: GeneralClass


@dataclass(frozen=True)
class ClassScheme:
    """A product's raw code vocabulary and its general-category mapping."""

    scheme_id: str
    entries: dict[int, SchemeEntry] = field(default_factory=dict)

    def __post_init__(self):
        for code, entry in self.entries.items():
            if entry.l3_code is not None:
                family = l3_to_l1(entry.l3_code)
                expected = FAMILY_TO_GENERAL[family]
                if entry.general is not expected:
                    raise NomenclatureError(
                        f"scheme {self.scheme_id}: code {code} ({entry.l3_code}) "
                        f"maps to {entry.general.value} but its family is {family}"
                    )

    def harmonize(self, raw: int) -> GeneralClass:
        """General category for a raw code; total — unknown codes and
        nodata fall into Others/Unclassified."""
        entry = self.entries.get(int(raw))
        return entry.general if entry is not None else GeneralClass.OTHERS

    def label(self, raw: int) -> str:
        entry = self.entries.get(int(raw))
        return entry.label if entry is not None else "unclassified"

    def legal_codes(self) -> set[int]:
        return set(self.entries)

    def codes_for(self, general: GeneralClass) -> list[int]:
        return sorted(c for c, e in self.entries.items() if e.general is general)

    def illegal_values(self, values, nodata: int) -> list[int]:
        """Distinct values that are neither nodata nor declared by this
        scheme. Retrieval still harmonizes such codes to the catch-all;
        this is a data-quality check for grids that claim this legend."""
        seen = {int(v) for v in np.unique(np.asarray(values))}
        return sorted(seen - self.legal_codes() - {int(nodata)})


def harmonize(scheme: ClassScheme, raw: int) -> GeneralClass:
    return scheme.harmonize(raw)


def parse_scheme(text: str, scheme_id: str) -> ClassScheme:
    reader = csv.DictReader(io.StringIO(text))
    expected = ["raw_code", "label", "l3_code", "general"]
    if reader.fieldnames != expected:
        raise NomenclatureError(
            f"scheme {scheme_id}: header must be {','.join(expected)}, "
            f"got {reader.fieldnames}"
        )
    entries: dict[int, SchemeEntry] = {}
    for row in reader:
        try:
            code = int(row["raw_code"])
        except (TypeError, ValueError):
            raise NomenclatureError(
                f"scheme {scheme_id}: bad raw_code {row['raw_code']!r}"
            ) from None
        if code in entries:
            raise NomenclatureError(f"scheme {scheme_id}: duplicate raw_code {code}")
        l3 = row["l3_code"].strip() or None
        entries[code] = SchemeEntry(
            label=row["label"],
            l3_code=l3,
            general=GeneralClass.from_name(row["general"].strip()),
        )
    return ClassScheme(scheme_id, entries)


def write_scheme(scheme: ClassScheme) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["raw_code", "label", "l3_code", "general"])
    for code in sorted(scheme.entries):
        e = scheme.entries[code]
        writer.writerow([code, e.label, e.l3_code or "", e.general.value])
    return out.getvalue()


def load_scheme(path, scheme_id: str | None = None) -> ClassScheme:
    import os

    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    if scheme_id is None:
        scheme_id = os.path.splitext(os.path.basename(path))[0]
    return parse_scheme(text, scheme_id)


def save_scheme(scheme: ClassScheme, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(write_scheme(scheme))


def builtin_scheme(name: str) -> ClassScheme:
    """Load one of the shipped schemes: ``clc2012``, ``hrl_merged``, ``glc30``."""
    try:
        text = (
            resources.files("lcval") / "schemes" / f"{name}.csv"
        ).read_text(encoding="utf-8")
    except FileNotFoundError:
        raise NomenclatureError(f"no built-in scheme named {name!r}") from None
    return parse_scheme(text, name)
