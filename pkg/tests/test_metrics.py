import numpy as np
import pytest

from lcval.annotation import ConfidenceLevel, GroundTruthRow, PROVENANCE_AGREED
from lcval.metrics import (
    ConfidenceWeighting,
    ConfusionMatrix,
    DEFAULT_WEIGHTING,
    MetricsError,
    PerLevelAccuracy,
    build_matrices,
    evaluate,
    kappa,
    overall_accuracy,
    percent,
    producer_user_accuracy,
    render_report,
    weighted_metric,
    weights_from_levels,
    write_summary_csv,
)
from lcval.nomenclature import GENERAL_ORDER, GeneralClass
from lcval.reference import HIGH_CONFIDENCE_COUNTS
from lcval.retrieval import RetrievalRow, RetrievalTable


def published_matrix():
    return ConfusionMatrix(GENERAL_ORDER, HIGH_CONFIDENCE_COUNTS)


def random_matrix(rng, max_classes=6, max_count=10_000):
    n = int(rng.integers(2, max_classes + 1))
    counts = rng.integers(0, max_count, size=(n, n))
    if counts.sum() == 0:
        counts[0, 0] = 1
    return ConfusionMatrix(tuple(f"c{i}" for i in range(n)), counts)


class TestConfusionMatrix:
    def test_from_pairs_tally(self):
        rng = np.random.default_rng(1)
        classes = ("a", "b", "c")
        truth = [classes[i] for i in rng.integers(0, 3, 200)]
        mapped = [classes[i] for i in rng.integers(0, 3, 200)]
        m = ConfusionMatrix.from_pairs(truth, mapped, classes)
        for i, t in enumerate(classes):
            for j, p in enumerate(classes):
                want = sum(1 for a, b in zip(truth, mapped) if a == t and b == p)
                assert m.counts[i, j] == want
        assert m.total == 200

    def test_invalid_shapes(self):
        with pytest.raises(MetricsError):
            ConfusionMatrix(("a", "b"), np.zeros((3, 3), dtype=int))
        with pytest.raises(MetricsError):
            ConfusionMatrix(("a",), np.array([[-1]]))

    def test_addition(self):
        a = ConfusionMatrix(("x", "y"), np.array([[1, 0], [0, 1]]))
        b = ConfusionMatrix(("x", "y"), np.array([[0, 2], [3, 0]]))
        assert np.array_equal((a + b).counts, [[1, 2], [3, 1]])


class TestOverallAccuracy:
    def test_published_value(self):
        assert overall_accuracy(published_matrix()) == pytest.approx(0.9481, abs=1e-4)

    def test_diagonal_is_perfect(self):
        m = ConfusionMatrix(("a", "b"), np.diag([5, 9]))
        assert overall_accuracy(m) == 1.0

    def test_empty_matrix(self):
        with pytest.raises(MetricsError):
            overall_accuracy(ConfusionMatrix(("a",), np.zeros((1, 1), dtype=int)))

    def test_random_brute_force(self):
        rng = np.random.default_rng(2)
        for _ in range(100):
            m = random_matrix(rng)
            brute = sum(int(m.counts[i, i]) for i in range(len(m.classes))) / m.counts.sum()
            assert overall_accuracy(m) == pytest.approx(brute, rel=1e-15)


class TestProducerUserAccuracy:
    def test_published_margins(self):
        rates = producer_user_accuracy(published_matrix())
        pa = [rates[c][0] for c in GENERAL_ORDER]
        ua = [rates[c][1] for c in GENERAL_ORDER]
        assert pa == pytest.approx([33 / 37, 164 / 165, 1.0, 1.0, 0.0])
        assert ua[:4] == pytest.approx([33 / 36, 164 / 171, 70 / 73, 7 / 9])
        assert ua[4] is None  # empty map column renders "-"

    def test_random_brute_force(self):
        rng = np.random.default_rng(3)
        for _ in range(100):
            m = random_matrix(rng)
            rates = producer_user_accuracy(m)
            for i, c in enumerate(m.classes):
                row = int(m.counts[i].sum())
                col = int(m.counts[:, i].sum())
                pa, ua = rates[c]
                assert pa == (m.counts[i, i] / row if row else None)
                assert ua == (m.counts[i, i] / col if col else None)


class TestKappa:
    def test_published_value(self):
        assert kappa(published_matrix()) == pytest.approx(0.911, abs=0.005)

    def test_diagonal(self):
        m = ConfusionMatrix(("a", "b"), np.diag([5, 9]))
        assert kappa(m) == 1.0

    def test_degenerate(self):
        m = ConfusionMatrix(("a",), np.array([[7]]))
        with pytest.raises(MetricsError, match="undefined"):
            kappa(m)

    def test_random_brute_force(self):
        rng = np.random.default_rng(4)
        for _ in range(200):
            m = random_matrix(rng)
            n = float(m.counts.sum())
            p_o = np.trace(m.counts) / n
            p_e = sum(
                m.counts[i].sum() * m.counts[:, i].sum() for i in range(len(m.classes))
            ) / n**2
            if p_e == 1.0:
                continue
            assert kappa(m) == pytest.approx((p_o - p_e) / (1 - p_e), rel=1e-12)


class FakeLevel(int):
    def __new__(cls, level, lo, hi):
        obj = super().__new__(cls, level)
        obj._range = (float(lo), float(hi))
        return obj

    @property
    def percent_range(self):
        return self._range

    @property
    def midpoint(self):
        return sum(self._range) / 2


class TestWeighting:
    def test_published_weights(self):
        w = weights_from_levels(list(ConfidenceLevel))
        assert w.medians == {1: 87.5, 2: 50.0, 3: 12.5}
        assert w.weights[1] == pytest.approx(0.583, abs=1e-3)
        assert w.weights[2] == pytest.approx(0.333, abs=1e-3)
        assert w.weights[3] == pytest.approx(0.083, abs=1e-3)
        assert sum(w.weights.values()) == pytest.approx(1.0)

    def test_single_level(self):
        w = weights_from_levels([ConfidenceLevel.HIGH])
        assert w.weights == {1: 1.0}

    def test_equal_ranges_split_evenly(self):
        # equal midpoints get symmetric weights
        w = weights_from_levels([FakeLevel(1, 60, 60), FakeLevel(2, 60, 60)])
        assert w.weights == {1: 0.5, 2: 0.5}

    def test_midpoint_proportionality(self):
        w = weights_from_levels([FakeLevel(1, 50, 100), FakeLevel(2, 0, 50)])
        assert w.weights == {1: 0.75, 2: 0.25}

    def test_overlapping_ranges_rejected(self):
        with pytest.raises(MetricsError, match="overlap"):
            weights_from_levels([FakeLevel(1, 0, 60), FakeLevel(2, 50, 100)])

    def test_empty(self):
        with pytest.raises(MetricsError):
            weights_from_levels([])


class TestWeightedMetric:
    def per_level(self, values, ns):
        return [PerLevelAccuracy(lv, n, v) for lv, n, v in zip((1, 2, 3), ns, values)]

    def test_published_weighted_oa(self):
        wa = weighted_metric(
            self.per_level((0.90, 0.78, 0.77), (291, 218, 30)), DEFAULT_WEIGHTING
        )
        assert wa == pytest.approx(0.863, abs=5e-4)
        assert percent(wa) == "86%"

    def test_constant_metric(self):
        wa = weighted_metric(self.per_level((0.7, 0.7, 0.7), (50, 20, 3)), DEFAULT_WEIGHTING)
        assert wa == pytest.approx(0.7)

    def test_single_populated_level(self):
        wa = weighted_metric(self.per_level((0.9, 0.1, 0.2), (40, 0, 0)), DEFAULT_WEIGHTING)
        assert wa == 0.9

    def test_all_empty(self):
        with pytest.raises(MetricsError):
            weighted_metric(self.per_level((0.9, 0.1, 0.2), (0, 0, 0)), DEFAULT_WEIGHTING)

    def test_bounded_by_min_max(self):
        rng = np.random.default_rng(5)
        for _ in range(200):
            values = rng.random(3)
            ns = rng.integers(0, 50, 3)
            if ns.sum() == 0:
                continue
            wa = weighted_metric(self.per_level(values, ns), DEFAULT_WEIGHTING)
            populated = [v for v, n in zip(values, ns) if n > 0]
            assert min(populated) - 1e-12 <= wa <= max(populated) + 1e-12

    def test_weight_scale_invariance(self):
        per = self.per_level((0.9, 0.5, 0.1), (10, 20, 30))
        scaled = ConfidenceWeighting(
            medians=DEFAULT_WEIGHTING.medians,
            weights={k: 17.0 * v for k, v in DEFAULT_WEIGHTING.weights.items()},
        )
        assert weighted_metric(per, scaled) == pytest.approx(
            weighted_metric(per, DEFAULT_WEIGHTING), rel=1e-14
        )


def make_truth_and_table(rng, n=120, products=("p",)):
    classes = list(GENERAL_ORDER)
    truth = []
    rows = []
    for sid in range(n):
        t_label = classes[rng.integers(0, 5)]
        level = ConfidenceLevel(int(rng.integers(1, 4)))
        truth.append(GroundTruthRow(sid, t_label, level, PROVENANCE_AGREED))
        codes = {}
        mapped = {}
        for p in products:
            m_label = classes[rng.integers(0, 5)]
            codes[p] = 0
            mapped[p] = m_label
        rows.append(RetrievalRow(sid, 0.0, 0.0, codes, mapped))
    return truth, RetrievalTable(tuple(products), tuple(rows))


class TestBuildMatrices:
    def test_tally_oracle(self):
        rng = np.random.default_rng(6)
        truth, table = make_truth_and_table(rng)
        matrices = build_matrices(truth, table, "p")
        idx = {c: i for i, c in enumerate(GENERAL_ORDER)}
        mapped = {r.sample_id: r.classes["p"] for r in table.rows}
        for level in (1, 2, 3):
            expect = np.zeros((5, 5), dtype=int)
            for row in truth:
                if int(row.confidence) == level:
                    expect[idx[row.label], idx[mapped[row.sample_id]]] += 1
            assert np.array_equal(matrices[level].counts, expect)

    def test_reproduces_published_high_confidence_matrix(self):
        # samples generated from the published counts tally back to them
        truth, mapped = [], {}
        sid = 0
        for i, t_cls in enumerate(GENERAL_ORDER):
            for j, m_cls in enumerate(GENERAL_ORDER):
                for _ in range(int(HIGH_CONFIDENCE_COUNTS[i, j])):
                    truth.append(
                        GroundTruthRow(sid, t_cls, ConfidenceLevel.HIGH, PROVENANCE_AGREED)
                    )
                    mapped[sid] = m_cls
                    sid += 1
        rows = tuple(
            RetrievalRow(s, 0.0, 0.0, {"p": 0}, {"p": mapped[s]}) for s in range(sid)
        )
        matrices = build_matrices(truth, RetrievalTable(("p",), rows), "p")
        assert np.array_equal(matrices[1].counts, HIGH_CONFIDENCE_COUNTS)
        assert matrices[1].total == 289
        assert list(np.diag(matrices[1].counts)) == [33, 164, 70, 7, 0]
        assert matrices[2].total == 0 and matrices[3].total == 0

    def test_perfect_map_is_diagonal(self):
        rng = np.random.default_rng(7)
        truth, table = make_truth_and_table(rng)
        rows = tuple(
            RetrievalRow(r.sample_id, r.x, r.y, r.codes, {"p": t.label})
            for r, t in zip(table.rows, truth)
        )
        matrices = build_matrices(truth, RetrievalTable(("p",), rows), "p")
        for m in matrices.values():
            off_diag = m.counts.sum() - np.trace(m.counts)
            assert off_diag == 0

    def test_sample_mismatch(self):
        rng = np.random.default_rng(8)
        truth, table = make_truth_and_table(rng)
        with pytest.raises(MetricsError, match="different samples"):
            build_matrices(truth[:-1], table, "p")

    def test_per_level_sum_is_pooled_matrix(self):
        rng = np.random.default_rng(9)
        truth, table = make_truth_and_table(rng)
        matrices = build_matrices(truth, table, "p")
        pooled = ConfusionMatrix.from_pairs(
            [t.label for t in truth],
            [r.classes["p"] for r in table.rows],
            GENERAL_ORDER,
        )
        total = matrices[1] + matrices[2] + matrices[3]
        assert np.array_equal(total.counts, pooled.counts)
        # pooled OA is the unit-weight N-weighted mean of per-level OAs
        per = [
            PerLevelAccuracy(lv, m.total, overall_accuracy(m))
            for lv, m in matrices.items()
            if m.total
        ]
        unit = ConfidenceWeighting(medians={}, weights={1: 1.0, 2: 1.0, 3: 1.0})
        assert weighted_metric(per, unit) == pytest.approx(overall_accuracy(pooled), rel=1e-14)


class TestEvaluate:
    def test_all_level_one_weighted_equals_plain(self):
        rng = np.random.default_rng(10)
        truth, table = make_truth_and_table(rng)
        truth = [
            GroundTruthRow(t.sample_id, t.label, ConfidenceLevel.HIGH, t.provenance)
            for t in truth
        ]
        report = evaluate(truth, table, "p")
        assert report.weighted_oa == report.overall_oa

    def test_weighted_per_class_uses_class_conditional_counts(self):
        # hand-built two-level example over two classes
        w = GeneralClass.WATER
        f = GeneralClass.FOREST
        truth = [
            GroundTruthRow(0, w, ConfidenceLevel.HIGH, PROVENANCE_AGREED),
            GroundTruthRow(1, w, ConfidenceLevel.HIGH, PROVENANCE_AGREED),
            GroundTruthRow(2, w, ConfidenceLevel.MEDIUM, PROVENANCE_AGREED),
            GroundTruthRow(3, f, ConfidenceLevel.MEDIUM, PROVENANCE_AGREED),
        ]
        mapped = {0: w, 1: f, 2: w, 3: f}
        rows = tuple(
            RetrievalRow(sid, 0.0, 0.0, {"p": 0}, {"p": mapped[sid]}) for sid in range(4)
        )
        report = evaluate(truth, RetrievalTable(("p",), rows), "p")
        w1 = DEFAULT_WEIGHTING.weights[1]
        w2 = DEFAULT_WEIGHTING.weights[2]
        # water PA: level 1 has 2 truth cells at 0.5, level 2 has 1 at 1.0
        expect_wpa = (w1 * 2 * 0.5 + w2 * 1 * 1.0) / (w1 * 2 + w2 * 1)
        assert report.per_class[w]["wpa"] == pytest.approx(expect_wpa, rel=1e-12)
        # forest UA: level 1 column 1 at 0.0, level 2 column 1 at 1.0
        expect_wua = (w1 * 1 * 0.0 + w2 * 1 * 1.0) / (w1 * 1 + w2 * 1)
        assert report.per_class[f]["wua"] == pytest.approx(expect_wua, rel=1e-12)
        # artificial never appears: all rates undefined
        assert report.per_class[GeneralClass.ARTIFICIAL]["wpa"] is None

    def test_render_contains_key_figures(self):
        rng = np.random.default_rng(11)
        truth, table = make_truth_and_table(rng)
        report = evaluate(truth, table, "p", sampling_set="demo")
        text = render_report(report)
        assert "Weighted OA" in text
        assert "Confidence level 1" in text
        assert "Others/Unclassified" in text

    def test_single_class_report_handles_undefined_kappa(self):
        truth = [
            GroundTruthRow(i, GeneralClass.WATER, ConfidenceLevel.HIGH, PROVENANCE_AGREED)
            for i in range(4)
        ]
        rows = tuple(
            RetrievalRow(i, 0.0, 0.0, {"p": 0}, {"p": GeneralClass.WATER}) for i in range(4)
        )
        report = evaluate(truth, RetrievalTable(("p",), rows), "p")
        assert report.per_level_kappa == {}  # p_e == 1 everywhere
        assert "kappa = -" in render_report(report)


class TestRendering:
    def test_percent_half_up(self):
        assert percent(0.9481, 2) == "94.81%"
        assert percent(0.895) == "90%"
        assert percent(0.894999) == "89%"
        assert percent(None) == "-"

    def test_summary_csv(self):
        text = write_summary_csv(
            {"alpha": {"s1": 0.89, "s2": 0.9}, "beta": {"s1": 0.84}},
            ["s1", "s2"],
        )
        lines = text.strip().splitlines()
        assert lines[0] == "product,s1,s2"
        assert lines[1] == "alpha,89%,90%"
        assert lines[2] == "beta,84%,-"
