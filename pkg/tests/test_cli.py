import csv
import json

import numpy as np
import pytest

from xlmem.cli import main
from xlmem.correlation import LanguageSignal
from xlmem.memscore import MemorizationRecord, record_to_json
from xlmem.subspace import SimilarityMatrix
from xlmem.synthetic import family_fixture


@pytest.fixture
def fixture_dir(tmp_path):
    fx = family_fixture()
    fx.similarity.to_csv(tmp_path / "sim.csv")
    fx.tokens.to_csv(tmp_path / "tokens.csv")
    for name, sig in fx.signals.items():
        sig.to_csv(tmp_path / f"{name}.csv")
    return tmp_path


def signal_flags(fixture_dir):
    flags = []
    for name in ("EM", "PM", "RM_BLEU", "RM_ROUGE_L"):
        flags += ["--signal", f"{name}={fixture_dir / (name + '.csv')}"]
    return flags


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


class TestExitCodes:
    def test_missing_input_is_validation_error(self, tmp_path, capsys):
        code = main(["graph", "--similarity", str(tmp_path / "nope.csv"), "--theta", "0.5"])
        assert code == 1
        assert "does not exist" in capsys.readouterr().err

    def test_theta_out_of_range_is_validation_error(self, fixture_dir):
        code = main(
            ["graph", "--similarity", str(fixture_dir / "sim.csv"), "--theta", "1.5",
             "--output-dir", str(fixture_dir / "out")]
        )
        assert code == 1

    def test_data_error_is_exit_two(self, fixture_dir, tmp_path, capsys):
        alien = LanguageSignal(languages=("qq", "ww", "ee"), values=np.arange(3.0))
        alien.to_csv(tmp_path / "alien.csv")
        code = main(
            ["correlate", "--similarity", str(fixture_dir / "sim.csv"),
             "--signal", f"EM={tmp_path / 'alien.csv'}",
             "--tokens", str(fixture_dir / "tokens.csv"),
             "--theta", "0.5", "--output-dir", str(tmp_path / "out")]
        )
        assert code == 2
        assert "data error" in capsys.readouterr().err

    def test_unknown_flag_is_validation_error(self):
        assert main(["graph", "--bogus"]) == 1

    def test_success_is_zero(self, fixture_dir):
        code = main(
            ["graph", "--similarity", str(fixture_dir / "sim.csv"), "--theta", "0.5",
             "--output-dir", str(fixture_dir / "out")]
        )
        assert code == 0


class TestGraphCommand:
    def test_writes_graph_json_and_manifest(self, fixture_dir):
        out = fixture_dir / "out"
        assert main(["graph", "--similarity", str(fixture_dir / "sim.csv"),
                     "--theta", "0.5", "--output-dir", str(out)]) == 0
        payload = json.loads((out / "graph.json").read_text())
        assert payload["theta"] == 0.5
        assert len(payload["languages"]) == 24
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["subcommand"] == "graph"
        assert "graph" in manifest["tables"]
        assert str(fixture_dir / "sim.csv") in manifest["inputs"]


class TestCorrelateCommand:
    def test_table_shape_and_planted_structure(self, fixture_dir):
        out = fixture_dir / "out"
        code = main(
            ["correlate", "--similarity", str(fixture_dir / "sim.csv"),
             *signal_flags(fixture_dir),
             "--tokens", str(fixture_dir / "tokens.csv"),
             "--theta", "0.5", "--output-dir", str(out)]
        )
        assert code == 0
        rows = read_csv(out / "correlate.csv")
        assert rows[0] == ["metric", "r", "rho_G"]
        assert [r[0] for r in rows[1:]] == ["EM", "PM", "RM (BLEU)", "RM (Rouge-L)"]
        for row in rows[1:]:
            assert float(row[2]) < -0.5  # within-family inverse trend
            assert -0.2 < float(row[1]) < 0.2


class TestSweepCommand:
    def test_wide_and_long_tables(self, fixture_dir):
        out = fixture_dir / "out"
        code = main(
            ["sweep", "--similarity", str(fixture_dir / "sim.csv"),
             *signal_flags(fixture_dir),
             "--tokens", str(fixture_dir / "tokens.csv"),
             "--thetas", "0.1,0.5,0.95", "--output-dir", str(out)]
        )
        assert code == 0
        wide = read_csv(out / "sweep_wide.csv")
        assert wide[0] == ["row", "0.1", "0.5", "0.95"]
        assert [r[0] for r in wide[1:3]] == ["# Subgraph", "# Single Point"]
        assert [r[0] for r in wide[3:]] == [
            "EM Intra", "EM Cross", "PM Intra", "PM Cross",
            "RM (B) Intra", "RM (B) Cross", "RM (R) Intra", "RM (R) Cross",
        ]
        # theta above every similarity: all languages become singletons
        assert wide[1][3] == "0" and wide[2][3] == "24"
        assert wide[3][3] == "undefined"

        long_rows = read_csv(out / "sweep_long.csv")
        assert long_rows[0] == ["theta", "metric", "scope", "value"]
        assert {r[2] for r in long_rows[1:]} == {"count", "intra", "cross"}

    def test_log_tokens_recorded_in_manifest(self, fixture_dir):
        out = fixture_dir / "out"
        main(
            ["sweep", "--similarity", str(fixture_dir / "sim.csv"),
             *signal_flags(fixture_dir),
             "--tokens", str(fixture_dir / "tokens.csv"),
             "--thetas", "0.5", "--log-tokens", "--output-dir", str(out)]
        )
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["config"]["token_scale"] == "log"
        assert manifest["config"]["include_singletons"] is True


class TestScoreCommand:
    @pytest.fixture
    def records_path(self, tmp_path):
        records = [
            MemorizationRecord(
                language=lang, sample_id=f"{lang}{i}", architecture="causal",
                prefix_tokens=tuple(range(10)),
                reference_tokens=(1, 2, 3, 4),
                predicted_tokens=(1, 2, 3, 4) if i % 2 == 0 else (5, 6, 7, 8),
                reference_logprobs=(-1.0, -0.5, -2.0, -0.25),
            )
            for lang in ("da", "zh") for i in range(4)
        ]
        path = tmp_path / "records.jsonl"
        with open(path, "w") as fh:
            for rec in records:
                fh.write(json.dumps(record_to_json(rec)) + "\n")
        return path

    def test_scores_tables(self, records_path, tmp_path):
        out = tmp_path / "out"
        assert main(["score", "--records", str(records_path), "--output-dir", str(out)]) == 0
        rows = read_csv(out / "scores.csv")
        assert rows[0] == ["language", "metric", "value", "sample_count"]
        em_rows = {r[0]: float(r[2]) for r in rows[1:] if r[1] == "EM"}
        assert em_rows == {"da": 0.5, "zh": 0.5}
        wide = read_csv(out / "scores_wide.csv")
        assert wide[0] == ["language", "EM (%)", "PM", "RM (B)", "RM (R)"]

    def test_metric_subset(self, records_path, tmp_path):
        out = tmp_path / "out"
        assert main(["score", "--records", str(records_path), "--metrics", "EM,PM",
                     "--output-dir", str(out)]) == 0
        rows = read_csv(out / "scores.csv")
        assert {r[1] for r in rows[1:]} == {"EM", "PM"}

    def test_invalid_suffix_length(self, records_path, tmp_path):
        assert main(["score", "--records", str(records_path), "--suffix-length", "0",
                     "--output-dir", str(tmp_path)]) == 1


class TestSubspaceCommand:
    def test_embeddings_to_similarity(self, tmp_path, rng):
        path = tmp_path / "emb.jsonl"
        with open(path, "w") as fh:
            for lang in ("da", "de", "zh", "ja"):
                for layer in (0, 1):
                    vec = list(rng.normal(size=6))
                    fh.write(json.dumps({"language": lang, "layer": layer, "dim": 6, "vector": vec}) + "\n")
        out = tmp_path / "out"
        assert main(["subspace", "--embeddings", str(path), "--rank", "2",
                     "--output-dir", str(out)]) == 0
        sim = SimilarityMatrix.from_csv(out / "similarity.csv")
        assert set(sim.languages) == {"da", "de", "zh", "ja"}
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["config"]["layer"] == 1  # defaulted to the final layer


class TestFilterCorpusCommand:
    @pytest.fixture
    def passages_path(self, tmp_path):
        rows = []
        filler = " ".join(f"ord{i}et" for i in range(150))
        for lang in ("da", "zh"):
            for i in range(8):
                rows.append({
                    "language": lang,
                    "text": filler[:700],
                    "lid_confidence": 0.97,
                    "lid_proportion": 0.95,
                    "source_id": f"{lang}{i}",
                })
        rows.append({"language": "da", "text": "too short", "lid_confidence": 0.97,
                     "lid_proportion": 0.97, "source_id": "reject0"})
        path = tmp_path / "passages.jsonl"
        path.write_text("\n".join(json.dumps(r) for r in rows) + "\n")
        return path

    def test_partition_and_reports(self, passages_path, tmp_path):
        out = tmp_path / "out"
        code = main(["filter-corpus", "--input", str(passages_path), "--quota", "5",
                     "--buffer-capacity", "8", "--seed", "9", "--output-dir", str(out)])
        assert code == 0
        langs = sorted(p.stem for p in (out / "by_language").glob("*.jsonl"))
        assert langs == ["da", "zh"]
        da_rows = [json.loads(line) for line in (out / "by_language" / "da.jsonl").read_text().splitlines()]
        assert len(da_rows) == 5
        rejected = dict(r for r in csv.reader((out / "rejections.csv").open()) if r)
        assert rejected["too_short"] == "1"
        assert (out / "shortfall.csv").read_text().splitlines() == ["language,requested,obtained"]

    def test_rerun_is_byte_identical(self, passages_path, tmp_path):
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        for out in (out_a, out_b):
            assert main(["filter-corpus", "--input", str(passages_path), "--quota", "5",
                         "--buffer-capacity", "8", "--seed", "9", "--output-dir", str(out)]) == 0
        for rel in ("by_language/da.jsonl", "by_language/zh.jsonl", "shortfall.csv",
                    "rejections.csv", "manifest.json"):
            assert (out_a / rel).read_bytes() == (out_b / rel).read_bytes()


class TestConsistencyAndReport:
    def test_consistency(self, fixture_dir, tmp_path):
        out = tmp_path / "out"
        code = main(["consistency", "--signal-a", str(fixture_dir / "EM.csv"),
                     "--signal-b", str(fixture_dir / "EM.csv"), "--output-dir", str(out)])
        assert code == 0
        rows = read_csv(out / "consistency.csv")
        assert rows[0] == ["signal_a", "signal_b", "pearson", "n_languages"]
        assert float(rows[1][2]) == pytest.approx(1.0)

    def test_report_summarizes_runs(self, tmp_path):
        records = [
            MemorizationRecord(
                language="da", sample_id=f"s{i}", architecture="causal",
                prefix_tokens=(0,) * 10, reference_tokens=(1, 2),
                predicted_tokens=(1, 2), reference_logprobs=(-1.0, -1.0),
            )
            for i in range(3)
        ]
        rec_path = tmp_path / "records.jsonl"
        with open(rec_path, "w") as fh:
            for rec in records:
                fh.write(json.dumps(record_to_json(rec)) + "\n")
        score_out = tmp_path / "scores"
        assert main(["score", "--records", str(rec_path), "--output-dir", str(score_out)]) == 0
        out = tmp_path / "out"
        code = main(["report", "--scores", f"run150={score_out / 'scores.csv'}",
                     "--output-dir", str(out)])
        assert code == 0
        rows = read_csv(out / "report.csv")
        assert rows[0] == ["run", "EM (%)", "PM", "RM (B)", "RM (R)"]
        assert rows[1][0] == "run150"
        assert float(rows[1][1]) == 100.0


class TestOutputDirEnv:
    def test_env_var_is_default(self, fixture_dir, monkeypatch, tmp_path):
        target = tmp_path / "from_env"
        monkeypatch.setenv("XLMEM_OUTPUT_DIR", str(target))
        assert main(["graph", "--similarity", str(fixture_dir / "sim.csv"), "--theta", "0.5"]) == 0
        assert (target / "graph.json").exists()
