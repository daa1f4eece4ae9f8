import json
from pathlib import Path

import numpy as np
import pytest

from conspec.cli import main
from conspec.fixtures import generate_mini_rival, mini_rival_dir


@pytest.fixture(scope="module")
def fixture_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("mini") / "mini_rival"
    generate_mini_rival(out)
    return out


def manifest_of(d) -> str:
    return str(Path(d) / "manifest.json")


class TestExitCodes:
    def test_usage_error_is_2(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["verify"])  # missing required flags
        assert exc.value.code == 2

    def test_unknown_subcommand_is_2(self):
        with pytest.raises(SystemExit) as exc:
            main(["frobnicate"])
        assert exc.value.code == 2

    def test_domain_error_is_1(self, fixture_dir, tmp_path, capsys):
        rc = main([
            "regions", "--manifest", manifest_of(fixture_dir),
            "--class", "truck", "--region", "A2", "--split", "nosuch",
            "--out", str(tmp_path / "r.json"),
        ])
        assert rc == 1
        assert "error:" in capsys.readouterr().err

    def test_success_is_0(self, fixture_dir, tmp_path):
        rc = main([
            "regions", "--manifest", manifest_of(fixture_dir),
            "--class", "truck", "--region", "A1",
            "--out", str(tmp_path / "r.json"),
        ])
        assert rc == 0


class TestFitMap:
    def test_recovers_fixture_map(self, fixture_dir, tmp_path, capsys):
        out = tmp_path / "map.json"
        rc = main(["fit-map", "--manifest", manifest_of(fixture_dir), "--out", str(out)])
        assert rc == 0
        payload = json.loads(out.read_text())
        assert payload["p_f"] == payload["p_g"] == 16
        assert "mse=" in capsys.readouterr().out

    def test_synthetic_exact_alignment(self, tmp_path):
        # G = 2 F + 1 exactly; the CLI-fitted map must recover it
        from conspec.embeddings import EmbeddingSet, write_embeddings_csv, write_labels_csv

        rng = np.random.default_rng(0)
        W = rng.normal(size=(50, 3))
        ids = tuple(f"r{i}" for i in range(50))
        write_embeddings_csv(tmp_path / "f.csv", EmbeddingSet(ids, W))
        write_embeddings_csv(tmp_path / "g.csv", EmbeddingSet(ids, 2 * W + 1))
        write_labels_csv(tmp_path / "l.csv", ids, ["c"] * 50, ["c"] * 50)
        (tmp_path / "m.json").write_text(json.dumps({
            "dim": 3,
            "class_names": ["c"],
            "concept_names": ["k"],
            "files": {
                "embeddings": {"vision": "f.csv", "vlm": "g.csv"},
                "labels": "l.csv",
            },
        }))
        out = tmp_path / "map.json"
        assert main(["fit-map", "--manifest", str(tmp_path / "m.json"), "--out", str(out)]) == 0
        payload = json.loads(out.read_text())
        M = np.array(payload["M"])
        assert np.max(np.abs(M - 2 * np.eye(3))) < 1e-6
        assert np.max(np.abs(np.array(payload["d"]) - 1)) < 1e-6


class TestVerify:
    def test_planted_outcomes(self, fixture_dir, tmp_path):
        out_dir = tmp_path / "out"
        rc = main([
            "verify", "--manifest", manifest_of(fixture_dir),
            "--class", "truck", "--region", "A2",
            "--specs", str(fixture_dir / "truck.spec"),
            "--out-dir", str(out_dir), "--deterministic",
        ])
        assert rc == 0
        records = [json.loads(l) for l in (out_dir / "report.jsonl").read_text().splitlines()]
        outcomes = {r["spec_text"]: r["outcome"] for r in records}
        assert outcomes["predict(truck) => gt(wheels, ears)"] == "proved"
        assert outcomes["predict(truck) => gt(ears, wheels)"] == "counterexample"
        csv_lines = (out_dir / "epsilons.csv").read_text().splitlines()
        assert csv_lines[0] == "spec_index,region,epsilon"
        assert len(csv_lines) == 3

    def test_deterministic_reports_byte_identical(self, fixture_dir, tmp_path):
        reports = []
        for name in ("a", "b"):
            out_dir = tmp_path / name
            main([
                "verify", "--manifest", manifest_of(fixture_dir),
                "--class", "truck", "--region", "A2",
                "--specs", str(fixture_dir / "truck.spec"),
                "--out-dir", str(out_dir), "--deterministic",
            ])
            reports.append((out_dir / "report.jsonl").read_bytes())
        assert reports[0] == reports[1]

    def test_a2_never_worse_than_a1(self, fixture_dir, tmp_path):
        eps = {}
        for region in ("A1", "A2"):
            out_dir = tmp_path / region
            main([
                "verify", "--manifest", manifest_of(fixture_dir),
                "--class", "truck", "--region", region,
                "--specs", str(fixture_dir / "truck.spec"),
                "--out-dir", str(out_dir), "--deterministic",
            ])
            for rec in (out_dir / "report.jsonl").read_text().splitlines():
                rec = json.loads(rec)
                eps.setdefault(rec["spec_text"], {})[region] = rec["epsilon"]
        for spec, by_region in eps.items():
            if by_region["A1"] is not None and by_region["A2"] is not None:
                assert by_region["A2"] <= by_region["A1"] + 1e-9

    def test_conspec_jobs_env_default(self, fixture_dir, tmp_path, monkeypatch):
        monkeypatch.setenv("CONSPEC_JOBS", "3")
        from conspec.cli import build_parser

        args = build_parser().parse_args([
            "verify", "--manifest", manifest_of(fixture_dir), "--class", "truck",
            "--specs", "x.spec", "--out-dir", "out",
        ])
        assert args.jobs == 3
        monkeypatch.setenv("CONSPEC_JOBS", "not-a-number")
        args = build_parser().parse_args([
            "verify", "--manifest", manifest_of(fixture_dir), "--class", "truck",
            "--specs", "x.spec", "--out-dir", "out",
        ])
        assert args.jobs == 1

    def test_jobs_fanout_preserves_order(self, fixture_dir, tmp_path):
        serial, parallel = [], []
        for jobs, bucket in (("1", serial), ("4", parallel)):
            out_dir = tmp_path / f"j{jobs}"
            main([
                "verify", "--manifest", manifest_of(fixture_dir),
                "--class", "truck", "--region", "gamma", "--engine", "clip",
                "--specs", str(fixture_dir / "truck.spec"),
                "--out-dir", str(out_dir), "--deterministic", "--jobs", jobs,
            ])
            bucket.extend((out_dir / "report.jsonl").read_bytes().splitlines())
        assert serial == parallel


class TestOtherCommands:
    def test_validate_writes_report_and_heatmap(self, fixture_dir, tmp_path, capsys):
        out = tmp_path / "report.csv"
        heat = tmp_path / "heat.json"
        rc = main([
            "validate", "--manifest", manifest_of(fixture_dir),
            "--class", "truck", "--out", str(out), "--heatmap", str(heat),
        ])
        assert rc == 0
        header = out.read_text().splitlines()[0]
        assert header == "class,stronger,weaker,probability,n"
        grid = json.loads(heat.read_text())
        assert set(grid) >= {"class", "x", "y", "probability", "category"}

    def test_elicit_specs_parse(self, fixture_dir, tmp_path):
        out = tmp_path / "truck.spec"
        rc = main([
            "elicit", "--manifest", manifest_of(fixture_dir),
            "--class", "truck", "--filter-significant", "--out", str(out),
        ])
        assert rc == 0
        from conspec.embeddings import load_manifest
        from conspec.lang import iter_spec_lines, parse_spec

        vocab = load_manifest(manifest_of(fixture_dir)).vocabulary
        lines = list(iter_spec_lines(out.read_text()))
        assert lines
        for _, text in lines:
            parse_spec(text, vocab)

    def test_directions_counts(self, fixture_dir, tmp_path):
        out = tmp_path / "directions.json"
        assert main(["directions", "--manifest", manifest_of(fixture_dir), "--out", str(out)]) == 0
        payload = json.loads(out.read_text())
        assert len(payload["names"]) == 10  # 6 concepts + 4 classes
        assert all(v["caption_count"] == 69 for v in payload["names"].values())

    def test_audit_consistent(self, fixture_dir, capsys):
        rc = main([
            "audit", "--manifest", manifest_of(fixture_dir),
            "--class", "truck", "--region", "A2",
            "--spec", "predict(truck) => gt(wheels, ears)",
            "--dims", "0,1", "--step", "0.1",
        ])
        assert rc == 0
        assert "audit consistent" in capsys.readouterr().out

    def test_report_roundtrip(self, fixture_dir, tmp_path):
        out_dir = tmp_path / "out"
        main([
            "verify", "--manifest", manifest_of(fixture_dir),
            "--class", "truck", "--region", "A2",
            "--specs", str(fixture_dir / "truck.spec"),
            "--out-dir", str(out_dir), "--deterministic",
        ])
        plot = tmp_path / "plot.csv"
        rc = main(["report", "--jsonl", str(out_dir / "report.jsonl"), "--out-csv", str(plot)])
        assert rc == 0
        assert (out_dir / "epsilons.csv").read_text() == plot.read_text()


class TestShippedFixture:
    def test_shipped_equals_regenerated(self, fixture_dir):
        shipped = mini_rival_dir()
        for name in sorted(p.name for p in shipped.iterdir()):
            assert (fixture_dir / name).read_bytes() == (shipped / name).read_bytes(), name

    def test_shipped_manifest_loads(self):
        from conspec.embeddings import load_manifest

        man = load_manifest(mini_rival_dir() / "manifest.json")
        E = man.load_embeddings("vision")
        assert len(E) == 240
        assert man.split_ids("train") is not None
