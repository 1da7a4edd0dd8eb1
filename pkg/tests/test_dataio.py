import json

import numpy as np
import pytest

from mcae import dataio
from mcae.nnet import Hyper, TrainOptions, init_mcae
from mcae.shapes import PrototypeSpec, roof_prototype


class TestOptdigits:
    def test_round_trip_values(self, tmp_path):
        path = tmp_path / "digits.tra"
        rows = ["0," * 63 + "16,3", ",".join(["8"] * 64) + ",7"]
        path.write_text("\n".join(rows) + "\n")
        X, y = dataio.load_optdigits(path)
        assert X.shape == (2, 64)
        assert X.max() == 1.0 and X[1, 0] == 0.5
        assert list(y) == [3, 7]

    def test_bad_field_count(self, tmp_path):
        path = tmp_path / "bad.tra"
        path.write_text("1,2,3\n")
        with pytest.raises(dataio.ParseError):
            dataio.load_optdigits(path)

    def test_out_of_range_feature(self, tmp_path):
        path = tmp_path / "bad.tra"
        path.write_text(",".join(["17"] * 64) + ",0\n")
        with pytest.raises(dataio.ParseError):
            dataio.load_optdigits(path)

    def test_blank_lines_skipped(self, tmp_path):
        path = tmp_path / "digits.tra"
        path.write_text("\n" + ",".join(["1"] * 64) + ",2\n\n")
        X, y = dataio.load_optdigits(path)
        assert X.shape == (1, 64)


class TestModelSerialization:
    def test_round_trip_exact(self, tmp_path):
        model = init_mcae(6, 4, Hyper(weight_decay=3e-4), seed=5)
        path = tmp_path / "model.json"
        dataio.save_model(path, model)
        loaded = dataio.load_model(path)
        assert np.array_equal(loaded.encoder.W, model.encoder.W)
        assert np.array_equal(loaded.decoder_left.b, model.decoder_left.b)
        assert loaded.hyper == model.hyper

    def test_version_checked(self, tmp_path):
        model = init_mcae(3, 2, seed=0)
        doc = dataio.model_to_dict(model)
        doc["version"] = "mcae-model-v0"
        path = tmp_path / "model.json"
        path.write_text(json.dumps(doc))
        with pytest.raises(dataio.SchemaError):
            dataio.load_model(path)

    def test_shape_mismatch_rejected(self, tmp_path):
        model = init_mcae(3, 2, seed=0)
        doc = dataio.model_to_dict(model)
        doc["m"] = 5
        path = tmp_path / "model.json"
        path.write_text(json.dumps(doc))
        with pytest.raises(dataio.SchemaError):
            dataio.load_model(path)


class TestPrototypeSerialization:
    def test_round_trip(self, tmp_path):
        proto = roof_prototype("gable")
        path = tmp_path / "gable.json"
        dataio.save_prototype(path, proto)
        loaded = dataio.load_prototype(path)
        assert loaded.class_label == "gable"
        assert np.array_equal(loaded.shape.coords(), proto.shape.coords())
        assert loaded.shape.edges == proto.shape.edges
        assert [p.constraint for p in loaded.shape.points] \
            == [p.constraint for p in proto.shape.points]
        assert loaded.shape.points[4].region == proto.shape.points[4].region

    def test_missing_field_rejected(self):
        with pytest.raises(dataio.SchemaError):
            dataio.prototype_from_dict({"class": "x", "points": []})


class TestPortableMaps:
    def test_pbm_round_trip(self, tmp_path):
        img = np.random.default_rng(0).random((7, 5)) < 0.5
        path = tmp_path / "img.pbm"
        dataio.save_pbm(path, img)
        assert np.array_equal(dataio.load_portable_map(path), img)

    def test_pgm_round_trip(self, tmp_path):
        img = np.linspace(0, 1, 12).reshape(3, 4)
        path = tmp_path / "img.pgm"
        dataio.save_pgm(path, img)
        back = dataio.load_portable_map(path)
        assert np.abs(back - img).max() <= 0.5 / 255

    def test_comments_ignored(self, tmp_path):
        path = tmp_path / "img.pbm"
        path.write_text("P1\n# comment\n2 2\n1 0\n0 1\n")
        img = dataio.load_portable_map(path)
        assert img[0, 0] and img[1, 1] and not img[0, 1]

    def test_truncated_rejected(self, tmp_path):
        path = tmp_path / "img.pbm"
        path.write_text("P1\n3 3\n1 0 1\n")
        with pytest.raises(dataio.ParseError):
            dataio.load_portable_map(path)

    def test_unknown_magic_rejected(self, tmp_path):
        path = tmp_path / "img.ppm"
        path.write_text("P3\n1 1\n255\n1 2 3\n")
        with pytest.raises(dataio.ParseError):
            dataio.load_portable_map(path)


class TestCorpus:
    def test_round_trip_with_shapes(self, tmp_path):
        proto = roof_prototype("gable")
        img = proto.shape.render()
        entries = [dataio.CorpusEntry(file="a.pbm", label="gable", role="syn1",
                                      image=img, shape_file="a.shape.json",
                                      pair="real_0.pbm", distance=0.25)]
        shapes = {"a.shape.json": PrototypeSpec("gable", proto.shape)}
        dataio.save_corpus(tmp_path / "corpus", entries, shapes=shapes)
        back = dataio.load_corpus(tmp_path / "corpus")
        assert len(back) == 1
        e = back[0]
        assert e.label == "gable" and e.role == "syn1"
        assert e.pair == "real_0.pbm" and e.distance == 0.25
        assert np.array_equal(e.image, img)
        shape = dataio.load_corpus_shape(tmp_path / "corpus", e)
        assert np.array_equal(shape.coords(), proto.shape.coords())

    def test_missing_shape_rejected(self, tmp_path):
        entry = dataio.CorpusEntry(file="a.pbm", label="x", role="real",
                                   image=np.zeros((2, 2), dtype=bool))
        dataio.save_corpus(tmp_path / "c", [entry])
        back = dataio.load_corpus(tmp_path / "c")
        with pytest.raises(dataio.SchemaError):
            dataio.load_corpus_shape(tmp_path / "c", back[0])


class TestConfig:
    def minimal(self, tmp_path):
        for name in ("real", "syn1", "syn2", "test"):
            d = tmp_path / name
            d.mkdir(exist_ok=True)
            (d / "manifest.json").write_text('{"images": []}')
        return {"corpora": {name: name
                            for name in ("real", "syn1", "syn2", "test")}}

    def test_defaults_filled(self, tmp_path):
        doc = self.minimal(tmp_path)
        path = tmp_path / "config.json"
        path.write_text(json.dumps(doc))
        cfg = dataio.load_config(path)
        assert cfg.ae_variant == "mcae"
        assert cfg.hidden_units == 100
        assert cfg.hyper == Hyper()
        assert cfg.optimizer == TrainOptions()

    def test_unknown_field_warns(self, tmp_path):
        doc = self.minimal(tmp_path)
        doc["glitter"] = True
        with pytest.warns(UserWarning, match="glitter"):
            dataio.config_from_dict(doc, base_dir=tmp_path)

    def test_problems_collected(self, tmp_path):
        doc = self.minimal(tmp_path)
        doc["ae_variant"] = "vae"
        doc["corpora"].pop("syn1")
        doc["corpora"]["real"] = "missing_dir"
        with pytest.raises(dataio.SchemaError) as err:
            dataio.config_from_dict(doc, base_dir=tmp_path)
        msg = str(err.value)
        assert "ae_variant" in msg and "syn1" in msg and "missing_dir" in msg

    def test_relative_paths_resolved(self, tmp_path):
        doc = self.minimal(tmp_path)
        path = tmp_path / "config.json"
        path.write_text(json.dumps(doc))
        cfg = dataio.load_config(path)
        assert cfg.corpora["real"] == str(tmp_path / "real")
