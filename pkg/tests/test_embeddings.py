import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from conspec.embeddings import (
    EmbeddingSet,
    column_stats,
    cosine_similarity,
    load_manifest,
    read_attributes_csv,
    read_embeddings_csv,
    read_labels_csv,
    write_attributes_csv,
    write_embeddings_csv,
    write_labels_csv,
)
from conspec.errors import DimMismatch, EmptySelection, FormatError, ZeroVector


finite_vectors = arrays(
    np.float64,
    st.integers(1, 6),
    elements=st.floats(-1e6, 1e6, allow_nan=False, width=64),
)


class TestCosine:
    def test_orthogonal(self):
        assert cosine_similarity([1, 0], [0, 1]) == 0.0

    def test_parallel(self):
        assert cosine_similarity([1, 2], [2, 4]) == pytest.approx(1.0, abs=1e-15)

    def test_forty_five_degrees(self):
        assert cosine_similarity([1, 1], [1, 0]) == pytest.approx(1 / math.sqrt(2), abs=1e-12)

    def test_zero_vector(self):
        with pytest.raises(ZeroVector):
            cosine_similarity([0, 0], [1, 0])

    def test_dim_mismatch(self):
        with pytest.raises(DimMismatch):
            cosine_similarity([1, 0], [1, 0, 0])

    def test_clamped(self):
        v = np.full(512, 0.1)
        assert cosine_similarity(v, v) == 1.0

    @given(finite_vectors)
    def test_self_similarity(self, a):
        if np.linalg.norm(a) == 0:
            return
        assert cosine_similarity(a, a) == pytest.approx(1.0, abs=1e-12)

    @given(st.data())
    def test_symmetry_and_scaling(self, data):
        a = data.draw(finite_vectors)
        b = data.draw(
            arrays(np.float64, a.shape, elements=st.floats(-1e6, 1e6, width=64))
        )
        s = data.draw(st.floats(1e-3, 1e3))
        if np.linalg.norm(a) == 0 or np.linalg.norm(b) == 0 or not np.isfinite(s * a).all():
            return
        assert cosine_similarity(a, b) == pytest.approx(cosine_similarity(b, a), abs=1e-12)
        assert cosine_similarity(s * a, b) == pytest.approx(cosine_similarity(a, b), abs=1e-9)


class TestColumnStats:
    def test_min_max_mean(self):
        E = EmbeddingSet(("a", "b"), np.array([[0.0, 1.0], [2.0, -1.0]]))
        s = column_stats(E)
        assert s.min.tolist() == [0.0, -1.0]
        assert s.max.tolist() == [2.0, 1.0]
        assert s.mean.tolist() == [1.0, 0.0]

    def test_single_row_degenerate(self):
        E = EmbeddingSet(("a",), np.array([[3.0, 4.0]]))
        s = column_stats(E)
        assert s.min.tolist() == s.max.tolist() == s.mean.tolist() == [3.0, 4.0]
        assert s.std.tolist() == [0.0, 0.0]

    def test_population_std(self):
        # population std of {0, 2}: sqrt(((0-1)^2 + (2-1)^2)/2) = 1
        E = EmbeddingSet(("a", "b"), np.array([[0.0], [2.0]]))
        assert column_stats(E).std.tolist() == [1.0]

    def test_empty_selection(self):
        E = EmbeddingSet(("a",), np.array([[1.0]]))
        with pytest.raises(EmptySelection):
            column_stats(E, rows=[])

    def test_duplicate_row_keeps_min_max(self):
        E1 = EmbeddingSet(("a", "b"), np.array([[0.0, 5.0], [2.0, -1.0]]))
        E2 = EmbeddingSet(("a", "b", "c"), np.array([[0.0, 5.0], [2.0, -1.0], [0.0, 5.0]]))
        s1, s2 = column_stats(E1), column_stats(E2)
        assert s1.min.tolist() == s2.min.tolist()
        assert s1.max.tolist() == s2.max.tolist()


class TestEmbeddingSet:
    def test_duplicate_ids_rejected(self):
        with pytest.raises(ValueError):
            EmbeddingSet(("a", "a"), np.zeros((2, 2)))

    def test_metadata_must_cover_rows(self):
        with pytest.raises(DimMismatch):
            EmbeddingSet(("a", "b"), np.zeros((2, 2)), ground_truth=("x",))

    def test_select_keeps_alignment(self):
        E = EmbeddingSet(
            ("a", "b", "c"),
            np.arange(6, dtype=float).reshape(3, 2),
            ground_truth=("t", "c", "t"),
            predicted=("t", "t", "c"),
            attributes={"wheels": np.array([1, 0, 1])},
        )
        sub = E.select([2, 0])
        assert sub.ids == ("c", "a")
        assert sub.ground_truth == ("t", "t")
        assert sub.matrix[0].tolist() == [4.0, 5.0]
        assert sub.attributes["wheels"].tolist() == [1, 1]

    def test_non_finite_rejected(self):
        with pytest.raises(ValueError):
            EmbeddingSet(("a",), np.array([[np.nan]]))


class TestFileFormats:
    def test_embeddings_roundtrip_bit_exact(self, tmp_path):
        rng = np.random.default_rng(3)
        M = rng.normal(size=(17, 5)) * np.exp(rng.uniform(-30, 30, size=(17, 5)))
        M[0, 0] = -0.0
        M[1, 1] = 1e-300
        E = EmbeddingSet(tuple(f"r{i}" for i in range(17)), M)
        path = tmp_path / "e.csv"
        write_embeddings_csv(path, E)
        ids, M2 = read_embeddings_csv(path)
        assert ids == E.ids
        assert np.array_equal(M, M2)
        assert (M2[0, 0] == 0.0) and np.signbit(M2[0, 0])

    def test_embeddings_header_checked(self, tmp_path):
        p = tmp_path / "bad.csv"
        p.write_text("id,x0,x1\nr0,1,2\n")
        with pytest.raises(FormatError):
            read_embeddings_csv(p)

    def test_labels_roundtrip(self, tmp_path):
        p = tmp_path / "labels.csv"
        write_labels_csv(p, ["a", "b"], ["truck", "cat"], ["truck", "truck"])
        ids, truth, pred = read_labels_csv(p)
        assert ids == ("a", "b")
        assert truth == ("truck", "cat")
        assert pred == ("truck", "truck")

    def test_labels_predicted_optional(self, tmp_path):
        p = tmp_path / "labels.csv"
        write_labels_csv(p, ["a"], ["truck"])
        _, _, pred = read_labels_csv(p)
        assert pred is None

    def test_attributes_roundtrip(self, tmp_path):
        p = tmp_path / "attrs.csv"
        write_attributes_csv(p, ["a", "b"], {"wheels": np.array([1, 0]), "ears": np.array([0, 1])})
        ids, table = read_attributes_csv(p)
        assert ids == ("a", "b")
        assert table["wheels"].tolist() == [1, 0]

    def test_attributes_reject_non_binary(self, tmp_path):
        p = tmp_path / "attrs.csv"
        p.write_text("id,wheels\na,2\n")
        with pytest.raises(FormatError):
            read_attributes_csv(p)


class TestManifest:
    def _write(self, tmp_path, payload):
        import json

        p = tmp_path / "manifest.json"
        p.write_text(json.dumps(payload))
        return p

    def test_missing_key_rejected(self, tmp_path):
        p = self._write(tmp_path, {"dim": 2, "class_names": ["a"], "files": {}})
        with pytest.raises(FormatError):
            load_manifest(p)

    def test_single_space_load(self, tmp_path):
        E = EmbeddingSet(("r0",), np.array([[1.0, 2.0]]))
        write_embeddings_csv(tmp_path / "e.csv", E)
        write_labels_csv(tmp_path / "l.csv", ["r0"], ["truck"], ["truck"])
        p = self._write(
            tmp_path,
            {
                "dim": 2,
                "class_names": ["truck"],
                "concept_names": ["wheels"],
                "files": {"embeddings": "e.csv", "labels": "l.csv"},
            },
        )
        man = load_manifest(p)
        loaded = man.load_embeddings()
        assert loaded.ids == ("r0",)
        assert loaded.ground_truth == ("truck",)

    def test_dim_mismatch_detected(self, tmp_path):
        E = EmbeddingSet(("r0",), np.array([[1.0, 2.0]]))
        write_embeddings_csv(tmp_path / "e.csv", E)
        p = self._write(
            tmp_path,
            {"dim": 3, "class_names": ["t"], "concept_names": ["w"], "files": {"embeddings": "e.csv"}},
        )
        with pytest.raises(FormatError):
            load_manifest(p).load_embeddings()

    def test_misaligned_labels_detected(self, tmp_path):
        E = EmbeddingSet(("r0",), np.array([[1.0]]))
        write_embeddings_csv(tmp_path / "e.csv", E)
        write_labels_csv(tmp_path / "l.csv", ["other"], ["t"])
        p = self._write(
            tmp_path,
            {"dim": 1, "class_names": ["t"], "concept_names": ["w"],
             "files": {"embeddings": "e.csv", "labels": "l.csv"}},
        )
        with pytest.raises(FormatError):
            load_manifest(p).load_embeddings()
