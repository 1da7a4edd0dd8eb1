import json

import numpy as np
import pytest

from mcae import dataio
from mcae.cli import main
from mcae.matching import make_toy_roof_corpus
from mcae.shapes import roof_prototype


def run(argv, capsys):
    try:
        code = main(argv)
    except SystemExit as exc:
        code = exc.code
    out = capsys.readouterr()
    return code, out.out, out.err


def save_image_corpus(directory, items, role, prefix):
    entries, shapes = [], {}
    for i, item in enumerate(items):
        name = f"{prefix}_{i:05d}"
        entry = dataio.CorpusEntry(file=name + ".pbm", label=item.label,
                                   role=role, image=item.real)
        if role == "syn1":
            shape_file = name + ".shape.json"
            shapes[shape_file] = dataio.PrototypeSpec(item.label, item.syn)
            entry = dataio.CorpusEntry(
                file=name + ".pbm", label=item.label, role=role,
                image=item.syn.render(), shape_file=shape_file,
                pair=f"real_{i:05d}.pbm", distance=item.final_distance)
        entries.append(entry)
    dataio.save_corpus(directory, entries, shapes=shapes)


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    """On-disk roof corpora plus an experiment config, for the CLI."""
    ws = tmp_path_factory.mktemp("cli")
    protos = [roof_prototype(s) for s in ("gable", "hip")]
    corpus = make_toy_roof_corpus(protos, n_per_style=8, jitter=2.0, seed=0)
    train = [c for i, c in enumerate(corpus) if i % 8 < 6]
    test = [c for i, c in enumerate(corpus) if i % 8 >= 6]
    save_image_corpus(ws / "real", train, "real", "real")
    save_image_corpus(ws / "syn1", train, "syn1", "syn1")
    save_image_corpus(ws / "test", test, "real", "test")
    config = {
        "corpora": {"real": "real", "syn1": "syn1",
                    "syn2": "syn2", "test": "test"},
        "optimizer": {"max_iters": 80},
        "classifier_mix": "real",
    }
    (ws / "config.json").write_text(json.dumps(config))
    return ws


class TestUsageErrors:
    def test_no_command_is_usage_error(self, capsys):
        code, _, _ = run([], capsys)
        assert code == 2

    def test_unknown_flag(self, capsys):
        code, _, _ = run(["gradcheck", "--frobnicate"], capsys)
        assert code == 2

    def test_missing_corpus_dir(self, capsys):
        code, _, err = run(["encode", "--model", "nope.json",
                            "--corpus", "nowhere"], capsys)
        assert code == 2
        assert "error" in json.loads(err.strip().splitlines()[-1] or "{}") \
            or err  # stderr carries a JSON error object

    def test_gen_prototype_needs_one_source(self, capsys):
        code, _, _ = run(["gen-prototype"], capsys)
        assert code == 2

    def test_bad_gradcheck_sizes(self, capsys):
        code, _, _ = run(["gradcheck", "--sizes", "5,4"], capsys)
        assert code == 2


class TestGradcheck:
    def test_passes_and_reports(self, capsys):
        code, out, _ = run(["gradcheck", "--sizes", "4,3,5",
                            "--trials", "2"], capsys)
        assert code == 0
        assert "gradient error" in out


class TestPipeline:
    def test_gen_prototype_roof(self, workspace, capsys):
        out_file = workspace / "gable.json"
        code, out, _ = run(["gen-prototype", "--roof", "gable",
                            "--out", str(out_file)], capsys)
        assert code == 0
        assert out.strip() == str(out_file)
        assert dataio.load_prototype(out_file).class_label == "gable"

    def test_gen_syn1_matches_corpus(self, workspace, capsys):
        proto_file = workspace / "gable.json"
        if not proto_file.exists():
            dataio.save_prototype(proto_file, roof_prototype("gable"))
        code, _, _ = run(["gen-syn1", "--real", str(workspace / "real"),
                          "--proto", str(proto_file),
                          "--out", str(workspace / "syn1_cli")], capsys)
        assert code == 0
        entries = dataio.load_corpus(workspace / "syn1_cli")
        assert len(entries) == 12
        assert all(e.role == "syn1" and e.shape_file for e in entries)
        assert all(e.distance is not None for e in entries)

    def test_gen_syn2_from_shapes(self, workspace, capsys):
        code, _, _ = run(["gen-syn2", "--syn1", str(workspace / "syn1"),
                          "--per-class", "6", "--seed", "0",
                          "--out", str(workspace / "syn2")], capsys)
        assert code == 0
        entries = dataio.load_corpus(workspace / "syn2")
        labels = [e.label for e in entries]
        assert labels.count("gable") == 6 and labels.count("hip") == 6

    def test_train_writes_model_and_trace(self, workspace, capsys):
        code, _, _ = run(["train", "--config", str(workspace / "config.json"),
                          "--out-model", str(workspace / "model.json"),
                          "--out-trace", str(workspace / "trace.csv")], capsys)
        assert code == 0
        model = dataio.load_model(workspace / "model.json")
        assert model.encoder.W.shape == (100, 64)
        header = (workspace / "trace.csv").read_text().splitlines()[0]
        assert header == "iteration,total,left,right,grad_norm"

    def test_encode_csv(self, workspace, capsys):
        code, _, _ = run(["encode", "--model", str(workspace / "model.json"),
                          "--corpus", str(workspace / "test"),
                          "--out", str(workspace / "features.csv")], capsys)
        assert code == 0
        lines = (workspace / "features.csv").read_text().splitlines()
        assert lines[0].startswith("id,class,h_1")
        assert len(lines) == 1 + 4    # 2 held-out items per style

    def test_reconstruct_corpus(self, workspace, capsys):
        code, _, _ = run(["reconstruct", "--model",
                          str(workspace / "model.json"),
                          "--corpus", str(workspace / "test"),
                          "--channel", "right",
                          "--out", str(workspace / "recon")], capsys)
        assert code == 0
        manifest = json.loads((workspace / "recon" / "manifest.json")
                              .read_text())
        assert len(manifest["images"]) == 4
        img = dataio.load_portable_map(workspace / "recon" /
                                       manifest["images"][0]["file"])
        assert img.dtype == np.float64
        assert img.shape == (8, 8)
        assert 0.0 <= img.min() and img.max() <= 1.0

    def test_eval_writes_results(self, workspace, capsys):
        code, out, _ = run(["eval", "--config", str(workspace / "config.json"),
                            "--out-prefix", str(workspace / "results")],
                           capsys)
        assert code == 0
        csv_text = (workspace / "results.csv").read_text()
        assert csv_text.splitlines()[0].startswith("ae_variant")
        assert "macro_f1" in out

    def test_eval_deterministic(self, workspace, capsys):
        for prefix in ("run_a", "run_b"):
            code, _, _ = run(["eval", "--config",
                              str(workspace / "config.json"),
                              "--out-prefix", str(workspace / prefix)],
                             capsys)
            assert code == 0
        assert (workspace / "run_a.csv").read_bytes() \
            == (workspace / "run_b.csv").read_bytes()

    def test_correlate_reports(self, workspace, capsys):
        code, _, _ = run(["correlate", "--model",
                          str(workspace / "model.json"),
                          "--pairs", str(workspace / "syn1"),
                          "--real", str(workspace / "real"),
                          "--out-prefix", str(workspace / "gap")], capsys)
        assert code == 0
        lines = (workspace / "gap.csv").read_text().splitlines()
        assert lines[0] == "pair_id,class,mcae,raw"
        assert lines[-1].startswith("mean,")
        emb = (workspace / "gap_embeddings.csv").read_text().splitlines()
        assert len(emb) == 1 + 2 * 12
