import json

import pytest

from clustermatch.cli import main
from clustermatch.formats import read_embeddings, read_face_labels

SYNTH = [
    "synth",
    "--identities", "5",
    "--points", "10",
    "--dim", "32",
    "--stddev", "0.25",
    "--separation", "10.0",
    "--seed", "3",
]


def run(argv):
    return main([str(a) for a in argv])


class TestSynth:
    def test_writes_embedding_file(self, tmp_path):
        out = tmp_path / "train.emb"
        assert run(SYNTH + ["--out", out]) == 0
        embs = read_embeddings(out)
        assert len(embs) == 50
        assert len({e.true_label for e in embs}) == 5

    def test_nonregistered_sidecar(self, tmp_path):
        out = tmp_path / "train.emb"
        sidecar = tmp_path / "withheld.txt"
        code = run(
            SYNTH
            + ["--fraction-nonregistered", "0.4", "--out", out, "--nonregistered-out", sidecar]
        )
        assert code == 0
        withheld = sidecar.read_text().split()
        assert len(withheld) == 2


class TestClusterAndEvaluate:
    def test_auto_k_recovers_identities(self, tmp_path, capsys):
        emb = tmp_path / "train.emb"
        run(SYNTH + ["--out", emb])
        clustering = tmp_path / "cl.json"
        assert run(["cluster", "--in", emb, "--auto-k", "--out", clustering]) == 0
        doc = json.loads(clustering.read_text())
        assert doc["num_clusters"] == 5
        assert doc["silhouette_score"] > 0.2

        report = tmp_path / "vm.json"
        code = run(
            ["evaluate", "--mode", "vmeasure", "--in", emb, "--clustering", clustering, "--out", report]
        )
        assert code == 0
        scores = json.loads(report.read_text())
        assert scores["v_measure"] == pytest.approx(1.0)

    def test_kmeans_fixed_k(self, tmp_path):
        emb = tmp_path / "train.emb"
        run(SYNTH + ["--out", emb])
        clustering = tmp_path / "cl.json"
        assert run(["cluster", "--in", emb, "--algo", "kmeans", "--k", "5", "--out", clustering]) == 0
        assert json.loads(clustering.read_text())["num_clusters"] == 5

    def test_affinity_propagation_needs_no_k(self, tmp_path):
        emb = tmp_path / "train.emb"
        run(SYNTH + ["--out", emb])
        clustering = tmp_path / "cl.json"
        assert run(["cluster", "--in", emb, "--algo", "ap", "--out", clustering]) == 0
        assert json.loads(clustering.read_text())["num_clusters"] >= 1


class TestFullPipeline:
    @pytest.fixture
    def world(self, tmp_path):
        emb = tmp_path / "faces.emb"
        sidecar = tmp_path / "withheld.txt"
        run(
            SYNTH
            + ["--fraction-nonregistered", "0.4", "--out", emb, "--nonregistered-out", sidecar]
        )
        store = tmp_path / "store.json"
        run(
            [
                "label",
                "--in", emb,
                "--auto-k",
                "--exclude-labels-file", sidecar,
                "--out", store,
            ]
        )
        return emb, sidecar, store

    def test_match_flags_withheld_identities(self, world, tmp_path):
        emb, sidecar, store = world
        labels = tmp_path / "labels.tsv"
        report = tmp_path / "report.json"
        assert run(["match", "--in", emb, "--store", store, "--out", labels, "--report", report]) == 0

        withheld = set(sidecar.read_text().split())
        truth = {e.id: e.true_label for e in read_embeddings(emb)}
        for face_id, _, label in read_face_labels(labels):
            if truth[face_id] in withheld:
                assert label == "non-registered"
            else:
                assert label == truth[face_id]

        doc = json.loads(report.read_text())
        assert doc["num_clusters"] == 5
        assert sum(1 for c in doc["clusters"] if not c["matched"]) == 2

    def test_video_score_on_registered_subset(self, world, tmp_path):
        emb, sidecar, store = world
        withheld = set(sidecar.read_text().split())
        registered = [e for e in read_embeddings(emb) if e.true_label not in withheld]
        video = tmp_path / "video.emb"
        from clustermatch.formats import write_embeddings

        write_embeddings(registered, video)
        labels = tmp_path / "labels.tsv"
        run(["match", "--in", video, "--store", store, "--out", labels])
        scored = tmp_path / "score.json"
        code = run(
            ["evaluate", "--mode", "video", "--truth", video, "--pred", labels, "--out", scored]
        )
        assert code == 0
        out = json.loads(scored.read_text())
        assert out["precision"] == pytest.approx(1.0)
        assert out["recall"] == pytest.approx(1.0)
        assert out["exact_match_frames"] == out["frames"] == 10

    def test_timeline_from_labels(self, world, tmp_path):
        emb, _, store = world
        labels = tmp_path / "labels.tsv"
        run(["match", "--in", emb, "--store", store, "--out", labels])
        out = tmp_path / "segments.tsv"
        as_json = tmp_path / "segments.json"
        assert run(["timeline", "--labels", labels, "--fps", "2.0", "--out", out, "--json", as_json]) == 0
        lines = out.read_text().strip().splitlines()
        assert lines[0] == "#timeline v1"
        # every identity present on frames 0..9 yields one maximal segment
        identities = {line.split("\t")[0] for line in lines[1:]}
        assert "non-registered" in identities
        records = json.loads(as_json.read_text())
        assert all(r["last_frame"] == 9 for r in records)

    def test_same_seed_runs_are_byte_identical(self, world, tmp_path):
        emb, _, store = world
        a = tmp_path / "a.tsv"
        b = tmp_path / "b.tsv"
        run(["match", "--in", emb, "--store", store, "--seed", "7", "--out", a])
        run(["match", "--in", emb, "--store", store, "--seed", "7", "--out", b])
        assert a.read_bytes() == b.read_bytes()


class TestErrorHandling:
    def test_missing_input_file_exits_nonzero(self, tmp_path, capsys):
        code = run(["cluster", "--in", tmp_path / "nope.emb", "--k", "2", "--out", tmp_path / "o"])
        assert code == 1
        assert "error:" in capsys.readouterr().err

    def test_cluster_requires_k_or_auto(self, tmp_path):
        with pytest.raises(SystemExit):
            run(["cluster", "--in", tmp_path / "x.emb", "--out", tmp_path / "o"])

    def test_evaluate_mode_arg_validation(self, tmp_path):
        with pytest.raises(SystemExit):
            run(["evaluate", "--mode", "vmeasure"])
        with pytest.raises(SystemExit):
            run(["evaluate", "--mode", "video"])

    def test_unknown_subcommand(self):
        with pytest.raises(SystemExit):
            run(["frobnicate"])
