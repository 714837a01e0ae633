import numpy as np
import pytest

from lcval.nomenclature import (
    FAMILY_TO_GENERAL,
    GENERAL_ORDER,
    ClassScheme,
    GeneralClass,
    NomenclatureError,
    SchemeEntry,
    UnsupportedFamilyError,
    builtin_scheme,
    dotted_to_code,
    harmonize,
    l3_to_l1,
    parse_scheme,
    write_scheme,
)


class TestGeneralClass:
    def test_closed_enumeration(self):
        assert len(GeneralClass) == 5
        assert GENERAL_ORDER[-1] is GeneralClass.OTHERS

    def test_display_names(self):
        assert GeneralClass.OTHERS.display == "Others/Unclassified"
        assert GeneralClass.ARTIFICIAL.display == "Artificial Surfaces"

    def test_from_name(self):
        assert GeneralClass.from_name("Water") is GeneralClass.WATER
        with pytest.raises(NomenclatureError):
            GeneralClass.from_name("Ocean")


class TestL3ToL1:
    def test_agriculture(self):
        assert l3_to_l1("2.1.2") == "Agricultural Areas"

    def test_water(self):
        assert l3_to_l1("5.1.1") == "Water Bodies"

    def test_unsupported_family(self):
        with pytest.raises(UnsupportedFamilyError):
            l3_to_l1("4.1.1")

    def test_bad_format(self):
        for bad in ("2.1", "21.1.1", "a.b.c", ""):
            with pytest.raises(NomenclatureError):
                l3_to_l1(bad)

    def test_dotted_to_code(self):
        assert dotted_to_code("2.1.2") == 212
        assert dotted_to_code("5.1.2") == 512


class TestHarmonize:
    def test_glc30_artificial(self):
        assert harmonize(builtin_scheme("glc30"), 80) is GeneralClass.ARTIFICIAL

    def test_merged_hrl_zero_is_unclassified(self):
        assert harmonize(builtin_scheme("hrl_merged"), 0) is GeneralClass.OTHERS

    def test_unknown_code_defaults(self):
        scheme = ClassScheme("x", {1: SchemeEntry("one", None, GeneralClass.WATER)})
        assert harmonize(scheme, 999) is GeneralClass.OTHERS

    def test_total_over_random_codes(self):
        scheme = builtin_scheme("clc2012")
        rng = np.random.default_rng(5)
        for code in rng.integers(-10_000, 10_000, size=500):
            assert harmonize(scheme, int(code)) in GeneralClass


class TestBuiltinSchemes:
    def test_clc_agrees_with_family_of_dotted_code(self):
        scheme = builtin_scheme("clc2012")
        assert scheme.entries  # non-empty
        for code, entry in scheme.entries.items():
            assert entry.l3_code is not None
            family = l3_to_l1(entry.l3_code)
            assert FAMILY_TO_GENERAL[family] is entry.general
            assert dotted_to_code(entry.l3_code) == code

    def test_merged_hrl_has_no_agriculture(self):
        scheme = builtin_scheme("hrl_merged")
        assert scheme.codes_for(GeneralClass.AGRICULTURE) == []
        # imperviousness density values all harmonize to artificial
        for v in (1, 65, 92, 100):
            assert scheme.harmonize(v) is GeneralClass.ARTIFICIAL
        assert scheme.harmonize(201) is GeneralClass.FOREST
        assert scheme.harmonize(301) is GeneralClass.WATER

    def test_glc30_four_studied_classes(self):
        scheme = builtin_scheme("glc30")
        assert scheme.harmonize(10) is GeneralClass.AGRICULTURE
        assert scheme.harmonize(20) is GeneralClass.FOREST
        assert scheme.harmonize(60) is GeneralClass.WATER
        assert scheme.harmonize(30) is GeneralClass.OTHERS  # grassland

    def test_unknown_builtin(self):
        with pytest.raises(NomenclatureError):
            builtin_scheme("nope")


class TestSchemeIO:
    def test_round_trip(self):
        scheme = builtin_scheme("clc2012")
        again = parse_scheme(write_scheme(scheme), "clc2012")
        assert again == scheme

    def test_bad_header(self):
        with pytest.raises(NomenclatureError, match="header"):
            parse_scheme("code,label\n1,x\n", "s")

    def test_duplicate_code(self):
        text = "raw_code,label,l3_code,general\n1,a,,Water\n1,b,,Water\n"
        with pytest.raises(NomenclatureError, match="duplicate"):
            parse_scheme(text, "s")

    def test_inconsistent_family_rejected(self):
        text = "raw_code,label,l3_code,general\n212,x,2.1.2,Water\n"
        with pytest.raises(NomenclatureError, match="family"):
            parse_scheme(text, "s")

    def test_bad_general_name(self):
        text = "raw_code,label,l3_code,general\n1,x,,Swamp\n"
        with pytest.raises(NomenclatureError, match="unknown general class"):
            parse_scheme(text, "s")


class TestIllegalValues:
    def test_flags_undeclared_codes_only(self):
        scheme = builtin_scheme("glc30")
        values = np.array([[10, 20, -1], [85, 60, 11]], dtype=np.int32)
        assert scheme.illegal_values(values, nodata=-1) == [11, 85]

    def test_clean_grid_passes(self):
        scheme = builtin_scheme("glc30")
        values = np.array([[10, 20], [60, 80]], dtype=np.int32)
        assert scheme.illegal_values(values, nodata=0) == []
