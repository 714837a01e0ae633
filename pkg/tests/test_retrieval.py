import numpy as np
import pytest

from lcval.grid import RasterGrid, mosaic
from lcval.nomenclature import ClassScheme, GeneralClass, SchemeEntry, builtin_scheme
from lcval.retrieval import (
    RetrievalError,
    read_retrieval_csv,
    retrieve_labels,
    write_retrieval_csv,
)
from lcval.sampling import SamplePoint


def scheme_of(mapping, scheme_id="s"):
    return ClassScheme(
        scheme_id,
        {code: SchemeEntry(f"c{code}", None, general) for code, general in mapping.items()},
    )


class TestRetrieveLabels:
    def test_urban_sample_across_products(self):
        # an urban sample: 30m product says artificial (80), merged layers
        # carry an imperviousness density (92)
        sample = SamplePoint(0, 45.0, 45.0, "1.1.1", "clc")
        glc = RasterGrid(np.full((3, 3), 80), 0.0, 90.0, 30.0, nodata=0)
        hrl = RasterGrid(np.full((5, 5), 92), 0.0, 100.0, 20.0, nodata=0)
        table = retrieve_labels(
            [sample],
            [("glc30", glc, builtin_scheme("glc30")), ("hrl", hrl, builtin_scheme("hrl_merged"))],
        )
        row = table.rows[0]
        assert row.codes == {"glc30": 80, "hrl": 92}
        assert row.classes["glc30"] is GeneralClass.ARTIFICIAL
        assert row.classes["hrl"] is GeneralClass.ARTIFICIAL

    def test_merged_value_zero_is_unclassified(self):
        sample = SamplePoint(7, 10.0, 10.0, "1.1.1", "clc")
        hrl = RasterGrid(np.zeros((2, 2)), 0.0, 40.0, 20.0, nodata=0)
        table = retrieve_labels([sample], [("hrl", hrl, builtin_scheme("hrl_merged"))])
        assert table.rows[0].codes["hrl"] == 0
        assert table.rows[0].classes["hrl"] is GeneralClass.OTHERS

    def test_out_of_extent_strict_names_sample_and_product(self):
        sample = SamplePoint(3, 1e6, 1e6, "x", "p")
        grid = RasterGrid([[1]], 0.0, 10.0, 10.0)
        with pytest.raises(RetrievalError, match=r"sample 3 outside product 'tiny'"):
            retrieve_labels([sample], [("tiny", grid, scheme_of({1: GeneralClass.WATER}))])

    def test_out_of_extent_lenient(self):
        sample = SamplePoint(3, 1e6, 1e6, "x", "p")
        grid = RasterGrid([[1]], 0.0, 10.0, 10.0, nodata=-1)
        table = retrieve_labels(
            [sample],
            [("tiny", grid, scheme_of({1: GeneralClass.WATER}))],
            out_of_extent="unclassified",
        )
        assert table.rows[0].codes["tiny"] == -1
        assert table.rows[0].classes["tiny"] is GeneralClass.OTHERS

    def test_unknown_policy(self):
        with pytest.raises(RetrievalError, match="policy"):
            retrieve_labels([], [], out_of_extent="ignore")

    def test_duplicate_product_names(self):
        grid = RasterGrid([[1]], 0.0, 10.0, 10.0)
        s = scheme_of({1: GeneralClass.WATER})
        with pytest.raises(RetrievalError, match="duplicate"):
            retrieve_labels([], [("a", grid, s), ("a", grid, s)])

    def test_composition_oracle(self):
        # every row must equal brute-force nearest-center + scheme lookup
        rng = np.random.default_rng(101)
        general = list(GeneralClass)
        products = []
        for name, cell in (("coarse", 100.0), ("mid", 30.0), ("fine", 20.0)):
            codes = rng.integers(0, 12, size=(14, 14), dtype=np.int32)
            grid = RasterGrid(codes, 0.0, 14 * cell, cell, nodata=0)
            mapping = {c: general[int(rng.integers(0, 5))] for c in range(1, 12)}
            products.append((name, grid, scheme_of(mapping, name)))

        # sample inside the smallest product extent so all products cover it
        samples = [
            SamplePoint(i, float(rng.uniform(0, 14 * 20)), float(rng.uniform(0, 14 * 20)), "s", "p")
            for i in range(500)
        ]
        table = retrieve_labels(samples, products)
        assert len(table.rows) == 500
        for sample, row in zip(samples, table.rows):
            assert row.sample_id == sample.sample_id
            for name, grid, scheme in products:
                best = None
                for r in range(grid.rows):
                    for c in range(grid.cols):
                        cx, cy = grid.cell_center(r, c)
                        d = (cx - sample.x) ** 2 + (cy - sample.y) ** 2
                        key = (d, r, c)
                        if best is None or key < best:
                            best = key
                raw = int(grid.values[best[1], best[2]])
                assert row.codes[name] == raw
                assert row.classes[name] is scheme.harmonize(raw)

    def test_commutes_with_single_tile_mosaic(self):
        rng = np.random.default_rng(55)
        grid = RasterGrid(rng.integers(1, 5, (8, 8)), 0.0, 80.0, 10.0, nodata=-1)
        s = scheme_of({i: GeneralClass.FOREST for i in range(1, 5)})
        samples = [
            SamplePoint(i, float(rng.uniform(0, 80)), float(rng.uniform(0, 80)), "s", "p")
            for i in range(50)
        ]
        direct = retrieve_labels(samples, [("g", grid, s)])
        via_mosaic = retrieve_labels(samples, [("g", mosaic([grid]), s)])
        assert direct == via_mosaic


class TestRetrievalCsv:
    def build_table(self):
        rng = np.random.default_rng(2)
        grid = RasterGrid(rng.integers(1, 4, (5, 5)), 0.0, 50.0, 10.0)
        s = scheme_of({1: GeneralClass.WATER, 2: GeneralClass.FOREST, 3: GeneralClass.OTHERS})
        samples = [SamplePoint(i, 5.0 + 10 * i, 45.0, str(i), "t") for i in range(5)]
        return retrieve_labels(samples, [("alpha", grid, s), ("beta", grid, s)])

    def test_round_trip(self):
        table = self.build_table()
        assert read_retrieval_csv(write_retrieval_csv(table)) == table

    def test_header_shape(self):
        text = write_retrieval_csv(self.build_table())
        header = text.splitlines()[0]
        assert header == "sample_id,x,y,alpha_code,alpha_class,beta_code,beta_class"

    def test_bad_header(self):
        with pytest.raises(RetrievalError):
            read_retrieval_csv("sample_id,x,y,alpha_code\n")
