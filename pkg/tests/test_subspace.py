import json
import math

import numpy as np
import pytest

from xlmem.errors import (
    DegenerateProjection,
    DegenerateVariance,
    DimensionMismatch,
    EmptyInput,
    InsufficientOverlap,
    RankError,
    SchemaError,
)
from xlmem.subspace import (
    LayerEmbeddings,
    SimilarityMatrix,
    SubspaceModel,
    identify_subspace,
    load_embeddings_jsonl,
    matrix_correlation,
    mean_embeddings,
    project_language,
    similarity_matrix,
)


def embeddings_from_matrix(matrix: np.ndarray, layer: int = 0) -> LayerEmbeddings:
    d, n = matrix.shape
    return LayerEmbeddings(
        layer=layer, dim=d, vectors={f"l{j}": matrix[:, j] for j in range(n)}
    )


class TestMeanEmbeddings:
    def test_two_vectors(self):
        assert np.array_equal(mean_embeddings([(1, 1), (3, 3)], 2), np.array([2.0, 2.0]))

    def test_single_vector_identity(self):
        assert np.array_equal(mean_embeddings([(5, 0)], 2), np.array([5.0, 0.0]))

    def test_matches_direct_summation_oracle(self, rng):
        vectors = rng.normal(size=(100, 16))
        vectors /= np.linalg.norm(vectors, axis=1, keepdims=True)
        got = mean_embeddings(list(vectors), 16)
        # independent oracle: compensated per-coordinate summation
        expected = [math.fsum(vectors[i][k] for i in range(100)) / 100 for k in range(16)]
        assert np.abs(got - np.array(expected)).max() < 1e-12

    def test_empty_input(self):
        with pytest.raises(EmptyInput):
            mean_embeddings([], 4)

    def test_ragged_lengths(self):
        with pytest.raises(DimensionMismatch):
            mean_embeddings([(1, 2), (1, 2, 3)], 2)


class TestIdentifySubspace:
    def test_identical_columns_reconstruct_exactly(self, rng):
        v = rng.normal(size=6)
        emb = embeddings_from_matrix(np.tile(v[:, None], (1, 4)))
        model = identify_subspace(emb, rank=2)
        recon = model.reconstruction()
        assert np.abs(recon - emb.matrix()).max() < 1e-9
        assert np.abs(model.coords).max() < 1e-9

    def test_hand_svd_2x2(self):
        emb = embeddings_from_matrix(np.array([[1.0, -1.0], [0.0, 0.0]]))
        model = identify_subspace(emb, rank=1)
        assert np.abs(model.mu).max() < 1e-12  # column mean is the origin
        assert abs(abs(model.basis[0, 0]) - 1.0) < 1e-12
        assert abs(model.basis[1, 0]) < 1e-12
        recon = model.reconstruction()
        assert np.abs(recon - emb.matrix()).max() < 1e-12

    def test_planted_subspace_recovery(self, rng):
        d, n_lang, r = 16, 8, 3
        basis_true, _ = np.linalg.qr(rng.normal(size=(d, r)))
        g = rng.normal(size=d)
        mu_true = g - basis_true @ (basis_true.T @ g)
        coords_true = rng.normal(size=(n_lang, r))
        emb = embeddings_from_matrix(mu_true[:, None] + basis_true @ coords_true.T)
        model = identify_subspace(emb, rank=r)
        projector_gap = np.linalg.norm(
            model.basis @ model.basis.T - basis_true @ basis_true.T
        )
        assert projector_gap < 1e-6
        # largest principal angle via sin = ||(I - P_true) basis||_2
        residual = model.basis - basis_true @ (basis_true.T @ model.basis)
        assert np.linalg.norm(residual, 2) < 1e-6

    def test_rank_bounds(self, rng):
        emb = embeddings_from_matrix(rng.normal(size=(5, 4)))
        for bad in (0, 4, 7):
            with pytest.raises(RankError):
                identify_subspace(emb, rank=bad)

    def test_orthonormality_across_random_inputs(self, rng):
        for _ in range(25):
            d = int(rng.integers(3, 20))
            n = int(rng.integers(3, 12))
            emb = embeddings_from_matrix(rng.normal(size=(d, n)) * rng.uniform(0.1, 10))
            r = int(rng.integers(1, min(d, n)))
            model = identify_subspace(emb, rank=r)
            gram = model.basis.T @ model.basis
            assert np.abs(gram - np.eye(r)).max() < 1e-9

    def test_reconstruction_error_monotone_in_rank(self, rng):
        for _ in range(10):
            matrix = rng.normal(size=(9, 7))
            emb = embeddings_from_matrix(matrix)
            errors = []
            for r in range(1, 7):
                model = identify_subspace(emb, rank=r)
                errors.append(np.linalg.norm(matrix - model.reconstruction()))
            assert all(b <= a + 1e-9 for a, b in zip(errors, errors[1:]))

    def test_deterministic_sign_convention(self, rng):
        emb = embeddings_from_matrix(rng.normal(size=(8, 5)))
        a = identify_subspace(emb, rank=2)
        b = identify_subspace(emb, rank=2)
        assert np.array_equal(a.basis, b.basis)
        for k in range(2):
            assert a.basis[np.argmax(np.abs(a.basis[:, k])), k] > 0


class TestProjectLanguage:
    @pytest.fixture
    def model(self, rng):
        emb = embeddings_from_matrix(rng.normal(size=(10, 6)))
        return identify_subspace(emb, rank=3)

    def test_in_span_unchanged(self, model, rng):
        vec = model.basis @ rng.normal(size=3)
        assert np.abs(project_language(model, vec) - vec).max() < 1e-9

    def test_orthogonal_to_span_is_zero(self, model, rng):
        g = rng.normal(size=10)
        vec = g - model.basis @ (model.basis.T @ g)
        assert np.abs(project_language(model, vec)).max() < 1e-9

    def test_idempotent_on_random_vectors(self, model, rng):
        for _ in range(1000):
            vec = rng.normal(size=10)
            once = project_language(model, vec)
            twice = project_language(model, once)
            assert np.abs(twice - once).max() < 1e-12

    def test_length_mismatch(self, model):
        with pytest.raises(DimensionMismatch):
            project_language(model, np.ones(4))


def planar_model() -> SubspaceModel:
    """Rank-2 subspace spanned by the first two coordinate axes of R^3."""
    basis = np.array([[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]])
    return SubspaceModel(mu=np.zeros(3), basis=basis, coords=np.zeros((3, 2)), rank=2)


class TestSimilarityMatrix:
    def test_identical_embeddings_fully_similar(self, rng):
        v = rng.normal(size=8)
        emb = LayerEmbeddings(layer=0, dim=8, vectors={"a": v, "b": v, "c": rng.normal(size=8)})
        model = identify_subspace(emb, rank=1)
        sim = similarity_matrix(model, emb)
        i, j = sim.languages.index("a"), sim.languages.index("b")
        assert sim.values[i, j] == pytest.approx(1.0, abs=1e-9)

    def test_orthogonal_and_diagonal_projections(self):
        model = planar_model()
        emb = LayerEmbeddings(
            layer=0,
            dim=3,
            vectors={
                "x": np.array([1.0, 0.0, 0.0]),
                "y": np.array([0.0, 1.0, 0.0]),
                "xy": np.array([1.0, 1.0, 0.0]) / np.sqrt(2.0),
            },
        )
        sim = similarity_matrix(model, emb)
        get = lambda a, b: sim.values[sim.languages.index(a), sim.languages.index(b)]
        assert get("x", "y") == pytest.approx(0.0, abs=1e-12)
        assert get("x", "xy") == pytest.approx(math.sqrt(0.5), abs=1e-9)  # 0.70710678...
        assert np.array_equal(np.diagonal(sim.values), np.ones(3))

    def test_degenerate_projection_names_language(self):
        model = planar_model()
        emb = LayerEmbeddings(
            layer=0,
            dim=3,
            vectors={"ok": np.array([1.0, 2.0, 0.0]), "flat": np.array([0.0, 0.0, 3.0])},
        )
        with pytest.raises(DegenerateProjection, match="flat"):
            similarity_matrix(model, emb)

    def test_invariants_on_random_inputs(self, rng):
        for _ in range(20):
            d = int(rng.integers(4, 12))
            n = int(rng.integers(3, 9))
            emb = embeddings_from_matrix(rng.normal(size=(d, n)) + 0.5)
            model = identify_subspace(emb, rank=int(rng.integers(1, min(d, n))))
            sim = similarity_matrix(model, emb)
            assert np.array_equal(sim.values, sim.values.T)
            assert np.abs(np.diagonal(sim.values) - 1.0).max() < 1e-9
            assert sim.values.min() >= -1.0 - 1e-9
            assert sim.values.max() <= 1.0 + 1e-9

    def test_csv_round_trip(self, rng, tmp_path):
        emb = embeddings_from_matrix(rng.normal(size=(6, 4)))
        sim = similarity_matrix(identify_subspace(emb, rank=2), emb)
        path = tmp_path / "sim.csv"
        sim.to_csv(path)
        back = SimilarityMatrix.from_csv(path)
        assert back.languages == sim.languages
        assert np.array_equal(back.values, sim.values)

    def test_rejects_asymmetry(self):
        values = np.array([[1.0, 0.5], [0.3, 1.0]])
        with pytest.raises(SchemaError):
            SimilarityMatrix(languages=("a", "b"), values=values)


def symmetric_matrix(rng, n: int) -> np.ndarray:
    values = np.triu(rng.uniform(-1, 1, size=(n, n)), k=1)
    values = values + values.T
    np.fill_diagonal(values, 1.0)
    return values


class TestMatrixCorrelation:
    def test_self_correlation(self, rng):
        sim = SimilarityMatrix(languages=("a", "b", "c", "d"), values=symmetric_matrix(rng, 4))
        assert matrix_correlation(sim, sim) == pytest.approx(1.0, abs=1e-12)

    def test_affine_negation(self, rng):
        values = np.triu(rng.uniform(0, 1, size=(4, 4)), k=1)
        values = values + values.T
        np.fill_diagonal(values, 1.0)
        flipped = 1.0 - values
        np.fill_diagonal(flipped, 1.0)
        a = SimilarityMatrix(languages=("a", "b", "c", "d"), values=values)
        b = SimilarityMatrix(languages=("a", "b", "c", "d"), values=flipped)
        assert matrix_correlation(a, b) == pytest.approx(-1.0, abs=1e-12)

    def test_matches_direct_pearson_oracle(self, rng):
        langs = tuple("abcde")
        a = SimilarityMatrix(languages=langs, values=symmetric_matrix(rng, 5))
        b = SimilarityMatrix(languages=langs, values=symmetric_matrix(rng, 5))
        got = matrix_correlation(a, b)
        xs = [a.values[i, j] for i in range(5) for j in range(i + 1, 5)]
        ys = [b.values[i, j] for i in range(5) for j in range(i + 1, 5)]
        assert len(xs) == 10
        mx, my = sum(xs) / 10, sum(ys) / 10
        sxy = sum((x - mx) * (y - my) for x, y in zip(xs, ys))
        sxx = sum((x - mx) ** 2 for x in xs)
        syy = sum((y - my) ** 2 for y in ys)
        assert got == pytest.approx(sxy / math.sqrt(sxx * syy), abs=1e-12)

    def test_reorders_shared_languages(self, rng):
        values = symmetric_matrix(rng, 4)
        a = SimilarityMatrix(languages=("a", "b", "c", "d"), values=values)
        perm = [2, 0, 3, 1]
        b = SimilarityMatrix(
            languages=tuple(a.languages[i] for i in perm),
            values=values[np.ix_(perm, perm)],
        )
        assert matrix_correlation(a, b) == pytest.approx(1.0, abs=1e-12)

    def test_insufficient_overlap(self, rng):
        a = SimilarityMatrix(languages=("a", "b", "c"), values=symmetric_matrix(rng, 3))
        b = SimilarityMatrix(languages=("a", "b", "x"), values=symmetric_matrix(rng, 3))
        with pytest.raises(InsufficientOverlap):
            matrix_correlation(a, b)

    def test_degenerate_variance(self):
        flat = np.full((3, 3), 0.5)
        np.fill_diagonal(flat, 1.0)
        a = SimilarityMatrix(languages=("a", "b", "c"), values=flat)
        with pytest.raises(DegenerateVariance):
            matrix_correlation(a, a)


class TestEmbeddingsJsonl:
    def test_mean_and_sentence_records(self, tmp_path, rng):
        path = tmp_path / "emb.jsonl"
        rows = [
            {"language": "aa", "layer": 2, "dim": 3, "vector": [1, 2, 3]},
            {"language": "bb", "layer": 2, "dim": 3, "vector": [1, 0, 0], "sentence_id": "s1"},
            {"language": "bb", "layer": 2, "dim": 3, "vector": [3, 0, 0], "sentence_id": "s2"},
            {"language": "aa", "layer": 1, "dim": 3, "vector": [9, 9, 9]},
            {"language": "bb", "layer": 1, "dim": 3, "vector": [8, 8, 8]},
        ]
        path.write_text("\n".join(json.dumps(r) for r in rows) + "\n")
        emb = load_embeddings_jsonl(path)  # default: final (largest) layer
        assert emb.layer == 2
        assert np.array_equal(emb.vectors["bb"], np.array([2.0, 0.0, 0.0]))
        emb1 = load_embeddings_jsonl(path, layer=1)
        assert np.array_equal(emb1.vectors["aa"], np.array([9.0, 9.0, 9.0]))

    def test_bad_vector_length(self, tmp_path):
        path = tmp_path / "emb.jsonl"
        path.write_text(json.dumps({"language": "aa", "layer": 0, "dim": 3, "vector": [1]}) + "\n")
        with pytest.raises(SchemaError, match="emb.jsonl:1"):
            load_embeddings_jsonl(path)

    def test_missing_layer(self, tmp_path):
        path = tmp_path / "emb.jsonl"
        rows = [
            {"language": "aa", "layer": 0, "dim": 1, "vector": [1]},
            {"language": "bb", "layer": 0, "dim": 1, "vector": [2]},
        ]
        path.write_text("\n".join(json.dumps(r) for r in rows) + "\n")
        with pytest.raises(SchemaError, match="layer 5"):
            load_embeddings_jsonl(path, layer=5)
