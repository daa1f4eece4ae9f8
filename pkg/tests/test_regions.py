import numpy as np
import pytest

from conspec.embeddings import EmbeddingSet
from conspec.errors import EmptyClassSelection, UncoveredRow
from conspec.regions import (
    BoxRegion,
    RegionPartition,
    read_partition_csv,
    read_regions_json,
    region_a1,
    region_a2,
    region_a3,
    region_gamma,
    surrogate_partition,
    write_partition_csv,
    write_regions_json,
)


def labeled_set(matrix, truth, predicted):
    matrix = np.asarray(matrix, dtype=float)
    return EmbeddingSet(
        tuple(f"r{i}" for i in range(len(matrix))),
        matrix,
        ground_truth=tuple(truth),
        predicted=tuple(predicted),
    )


class TestA1:
    def test_hull(self):
        E = labeled_set([[0, 1], [2, -1]], ["c", "c"], ["c", "c"])
        box = region_a1(E, "c")
        assert box.lower.tolist() == [0.0, -1.0]
        assert box.upper.tolist() == [2.0, 1.0]
        assert box.provenance == "A1"

    def test_single_row_degenerate(self):
        E = labeled_set([[3, 4]], ["c"], ["c"])
        box = region_a1(E, "c")
        assert np.array_equal(box.lower, box.upper)

    def test_no_rows(self):
        E = labeled_set([[1, 1]], ["c"], ["other"])
        with pytest.raises(EmptyClassSelection):
            region_a1(E, "c")

    def test_uses_predictions_not_truth(self):
        E = labeled_set([[0, 0], [5, 5]], ["c", "other"], ["other", "c"])
        box = region_a1(E, "c")
        assert box.lower.tolist() == [5.0, 5.0]


class TestA2:
    def test_subset_of_a1(self):
        rng = np.random.default_rng(0)
        M = rng.normal(size=(30, 3))
        truth = ["c"] * 30
        predicted = ["c"] * 25 + ["other"] * 5
        # one wrongly-predicted-as-c row from another class inflates A1 only
        M2 = np.vstack([M, [[9.0, 9.0, 9.0]]])
        E = labeled_set(M2, truth + ["other"], predicted + ["c"])
        a1, a2 = region_a1(E, "c"), region_a2(E, "c")
        assert a1.contains_box(a2)
        assert not a2.contains_box(a1)

    def test_equal_when_all_correct(self):
        E = labeled_set([[0, 1], [2, -1]], ["c", "c"], ["c", "c"])
        a1, a2 = region_a1(E, "c"), region_a2(E, "c")
        assert np.array_equal(a1.lower, a2.lower)
        assert np.array_equal(a1.upper, a2.upper)

    def test_filter_then_hull(self):
        E = labeled_set([[0, 0], [5, 5]], ["c", "other"], ["c", "c"])
        box = region_a2(E, "c")
        assert box.lower.tolist() == box.upper.tolist() == [0.0, 0.0]


class TestA3:
    def test_one_box_per_cell(self):
        E = labeled_set([[0, 0], [1, 1], [2, 2]], ["c"] * 3, ["c"] * 3)
        part = RegionPartition({"r0": "x", "r1": "y", "r2": "y"})
        boxes = region_a3(E, "c", part)
        assert [b.cell for b in boxes] == ["x", "y"]
        assert boxes[1].lower.tolist() == [1.0, 1.0]
        assert boxes[1].upper.tolist() == [2.0, 2.0]

    def test_singleton_cell_degenerate(self):
        E = labeled_set([[0.5, -2.0]], ["c"], ["c"])
        boxes = region_a3(E, "c", RegionPartition({"r0": "only"}))
        assert np.array_equal(boxes[0].lower, boxes[0].upper)

    def test_uncovered_row(self):
        E = labeled_set([[0, 0], [1, 1]], ["c", "c"], ["c", "c"])
        with pytest.raises(UncoveredRow):
            region_a3(E, "c", RegionPartition({"r0": "x"}))

    def test_each_box_inside_a1(self):
        rng = np.random.default_rng(4)
        E = labeled_set(rng.normal(size=(40, 4)), ["c"] * 40, ["c"] * 40)
        part = surrogate_partition(E, range(40), k=2)
        a1 = region_a1(E, "c")
        for box in region_a3(E, "c", part):
            assert a1.contains_box(box)

    def test_surrogate_separates_clusters(self):
        rng = np.random.default_rng(9)
        a = rng.normal(size=(20, 3)) * 0.1 + np.array([5.0, 0.0, 0.0])
        b = rng.normal(size=(20, 3)) * 0.1 - np.array([5.0, 0.0, 0.0])
        E = labeled_set(np.vstack([a, b]), ["c"] * 40, ["c"] * 40)
        part = surrogate_partition(E, range(40), k=1)
        assert len(part.cells()) == 2


class TestGamma:
    def test_mean_std_box(self):
        E = labeled_set([[0.0], [2.0]], ["c", "c"], ["c", "c"])
        box = region_gamma(E, "c", 1.0)
        assert box.lower.tolist() == [0.0]
        assert box.upper.tolist() == [2.0]

    def test_nested_in_gamma(self):
        rng = np.random.default_rng(2)
        E = labeled_set(rng.normal(size=(50, 3)), ["c"] * 50, ["c"] * 50)
        small = region_gamma(E, "c", 0.25)
        mid = region_gamma(E, "c", 1.0)
        large = region_gamma(E, "c", 2.0)
        assert mid.contains_box(small)
        assert large.contains_box(mid)

    def test_gamma_positive_required(self):
        E = labeled_set([[0.0]], ["c"], ["c"])
        with pytest.raises(ValueError):
            region_gamma(E, "c", 0.0)

    def test_uses_ground_truth(self):
        E = labeled_set([[0.0], [2.0]], ["c", "other"], ["other", "c"])
        box = region_gamma(E, "c", 1.0)
        assert box.lower.tolist() == box.upper.tolist() == [0.0]


def test_hull_property_random():
    rng = np.random.default_rng(21)
    for _ in range(20):
        n = int(rng.integers(2, 30))
        M = rng.normal(size=(n, 4))
        E = labeled_set(M, ["c"] * n, ["c"] * n)
        box = region_a1(E, "c")
        for row in M:
            assert box.contains(row)


def test_regions_json_roundtrip(tmp_path):
    regions = [
        BoxRegion(np.array([0.0]), np.array([1.0]), "A1", class_name="truck"),
        BoxRegion(np.array([0.0]), np.array([1.0]), "A3", class_name="truck", cell="++-"),
        BoxRegion(np.array([-1.0]), np.array([1.0]), "gamma", class_name="car", gamma=0.25),
    ]
    p = tmp_path / "regions.json"
    write_regions_json(p, regions)
    loaded = read_regions_json(p)
    assert [r.tag() for r in loaded] == ["A1", "A3[++-]", "gamma[0.25]"]
    assert loaded[2].gamma == 0.25


def test_partition_csv_roundtrip(tmp_path):
    part = RegionPartition({"a": "cell1", "b": "cell2"})
    p = tmp_path / "part.csv"
    write_partition_csv(p, part)
    assert read_partition_csv(p).assignment == part.assignment
