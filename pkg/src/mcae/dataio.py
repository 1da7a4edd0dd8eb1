"""Dataset ingestion, corpus persistence, and model/config serialization.

Images persist as plain portable maps (P1 for binary, P2 for gray) next
to a manifest.json carrying class labels, roles, and optional pairing or
shape references.  Models and configs are JSON; numbers use the shortest
round-trip decimal form so save/load is bit exact.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .experiment import ExperimentConfig
from .nnet import (DecoderParams, EncoderParams, Hyper, McaeModel,
                   TrainOptions)
from .shapes import ControlPoint, ControlPointSet, PrototypeSpec

MODEL_VERSION = "mcae-model-v1"


class SchemaError(ValueError):
    pass


class ParseError(ValueError):
    pass


# ---------------------------------------------------------------------------
# UCI optical digits
# ---------------------------------------------------------------------------

def load_optdigits(path):
    """Comma-separated lines of 64 features (0..16) plus a digit label.

    Features are scaled to [0, 1]; file order is preserved.  Returns
    (features, labels).
    """
    features, labels = [], []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            fields = line.split(",")
            if len(fields) != 65:
                raise ParseError(
                    f"{path}:{lineno}: expected 65 fields, got {len(fields)}")
            try:
                values = [int(f) for f in fields]
            except ValueError as exc:
                raise ParseError(f"{path}:{lineno}: {exc}") from exc
            feat, label = values[:64], values[64]
            if min(feat) < 0 or max(feat) > 16:
                raise ParseError(
                    f"{path}:{lineno}: feature outside [0, 16]")
            if not 0 <= label <= 9:
                raise ParseError(f"{path}:{lineno}: label {label} outside 0..9")
            features.append(feat)
            labels.append(label)
    return np.asarray(features, dtype=float) / 16.0, np.asarray(labels, dtype=int)


# ---------------------------------------------------------------------------
# model serialization
# ---------------------------------------------------------------------------

def model_to_dict(model: McaeModel) -> dict:
    k, m = model.encoder.W.shape
    h = model.hyper
    return {
        "version": MODEL_VERSION,
        "m": m,
        "k": k,
        "hyper": {
            "weight_decay": h.weight_decay,
            "sparsity_weight": h.sparsity_weight,
            "sparsity_target": h.sparsity_target,
            "balance_weight": h.balance_weight,
        },
        "W_e": model.encoder.W.tolist(),
        "b_e": model.encoder.b.tolist(),
        "W_d_left": model.decoder_left.W.tolist(),
        "b_d_left": model.decoder_left.b.tolist(),
        "W_d_right": model.decoder_right.W.tolist(),
        "b_d_right": model.decoder_right.b.tolist(),
    }


def save_model(path, model: McaeModel):
    Path(path).write_text(json.dumps(model_to_dict(model)))


def _matrix(doc, key, shape):
    try:
        a = np.asarray(doc[key], dtype=float)
    except (KeyError, ValueError) as exc:
        raise SchemaError(f"bad or missing field {key!r}: {exc}") from exc
    if a.shape != shape:
        raise SchemaError(f"{key} has shape {a.shape}, expected {shape}")
    return a


def load_model(path) -> McaeModel:
    doc = json.loads(Path(path).read_text())
    if doc.get("version") != MODEL_VERSION:
        raise SchemaError(
            f"expected version {MODEL_VERSION!r}, got {doc.get('version')!r}")
    try:
        m, k = int(doc["m"]), int(doc["k"])
        hyper = Hyper(**doc["hyper"])
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"bad model document: {exc}") from exc
    return McaeModel(
        EncoderParams(_matrix(doc, "W_e", (k, m)), _matrix(doc, "b_e", (k,))),
        DecoderParams(_matrix(doc, "W_d_left", (m, k)),
                      _matrix(doc, "b_d_left", (m,))),
        DecoderParams(_matrix(doc, "W_d_right", (m, k)),
                      _matrix(doc, "b_d_right", (m,))),
        hyper,
    )


# ---------------------------------------------------------------------------
# prototype spec serialization
# ---------------------------------------------------------------------------

def prototype_to_dict(proto: PrototypeSpec) -> dict:
    shape = proto.shape
    points = []
    for p in shape.points:
        d = {"x": p.x, "y": p.y, "constraint": p.constraint}
        if p.region is not None:
            d["region"] = list(p.region)
        points.append(d)
    return {
        "class": proto.class_label,
        "width": shape.width,
        "height": shape.height,
        "points": points,
        "edges": [list(e) for e in shape.edges],
    }


def save_prototype(path, proto: PrototypeSpec):
    Path(path).write_text(json.dumps(prototype_to_dict(proto), indent=1))


def prototype_from_dict(doc: dict) -> PrototypeSpec:
    try:
        points = [ControlPoint(p["x"], p["y"], p.get("constraint", "free"),
                               tuple(p["region"]) if "region" in p else None)
                  for p in doc["points"]]
        shape = ControlPointSet(points, [tuple(e) for e in doc["edges"]],
                                int(doc["width"]), int(doc["height"]))
        return PrototypeSpec(str(doc["class"]), shape)
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"bad prototype document: {exc}") from exc


def load_prototype(path) -> PrototypeSpec:
    return prototype_from_dict(json.loads(Path(path).read_text()))


# ---------------------------------------------------------------------------
# image corpus persistence
# ---------------------------------------------------------------------------

def save_pbm(path, image: np.ndarray):
    image = np.asarray(image, dtype=bool)
    h, w = image.shape
    rows = "\n".join(" ".join("1" if v else "0" for v in row) for row in image)
    Path(path).write_text(f"P1\n{w} {h}\n{rows}\n")


def save_pgm(path, image: np.ndarray, maxval: int = 255):
    a = np.clip(np.asarray(image, dtype=float), 0.0, 1.0)
    q = np.rint(a * maxval).astype(int)
    h, w = a.shape
    rows = "\n".join(" ".join(str(v) for v in row) for row in q)
    Path(path).write_text(f"P2\n{w} {h}\n{maxval}\n{rows}\n")


def load_portable_map(path):
    """Plain P1 (returns bool array) or P2 (returns float array in [0, 1])."""
    tokens = []
    for line in Path(path).read_text().splitlines():
        line = line.split("#", 1)[0]
        tokens.extend(line.split())
    if not tokens:
        raise ParseError(f"{path}: empty file")
    magic = tokens.pop(0)
    if magic == "P1":
        w, h = int(tokens[0]), int(tokens[1])
        data = np.array(tokens[2:2 + w * h], dtype=int)
        if data.size != w * h:
            raise ParseError(f"{path}: expected {w * h} pixels, got {data.size}")
        return data.reshape(h, w).astype(bool)
    if magic == "P2":
        w, h, maxval = int(tokens[0]), int(tokens[1]), int(tokens[2])
        data = np.array(tokens[3:3 + w * h], dtype=float)
        if data.size != w * h:
            raise ParseError(f"{path}: expected {w * h} pixels, got {data.size}")
        return data.reshape(h, w) / maxval
    raise ParseError(f"{path}: unsupported magic {magic!r}")


@dataclass
class CorpusEntry:
    file: str
    label: str
    role: str                      # real | syn1 | syn2
    image: np.ndarray | None = None
    shape_file: str | None = None  # control-point set, when one exists
    pair: str | None = None        # file name of the paired real image
    distance: float | None = None  # final match distance for syn1 pairs
    extra: dict = field(default_factory=dict)


def save_corpus(directory, entries: list[CorpusEntry],
                shapes: dict | None = None):
    """Write images, optional control-point sets, and the manifest."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    manifest = []
    for e in entries:
        save_pbm(directory / e.file, e.image)
        record = {"file": e.file, "class": e.label, "role": e.role}
        if e.shape_file:
            record["shape"] = e.shape_file
        if e.pair:
            record["pair"] = e.pair
        if e.distance is not None:
            record["distance"] = e.distance
        record.update(e.extra)
        manifest.append(record)
    if shapes:
        for name, proto in shapes.items():
            save_prototype(directory / name, proto)
    (directory / "manifest.json").write_text(
        json.dumps({"images": manifest}, indent=1))


def load_corpus(directory) -> list[CorpusEntry]:
    directory = Path(directory)
    doc = json.loads((directory / "manifest.json").read_text())
    entries = []
    for record in doc["images"]:
        image = load_portable_map(directory / record["file"])
        entries.append(CorpusEntry(
            file=record["file"],
            label=str(record["class"]),
            role=record["role"],
            image=np.asarray(image, dtype=bool),
            shape_file=record.get("shape"),
            pair=record.get("pair"),
            distance=record.get("distance"),
        ))
    return entries


def load_corpus_shape(directory, entry: CorpusEntry) -> ControlPointSet:
    if not entry.shape_file:
        raise SchemaError(f"{entry.file} has no control-point set on record")
    return load_prototype(Path(directory) / entry.shape_file).shape


# ---------------------------------------------------------------------------
# experiment config
# ---------------------------------------------------------------------------

_CONFIG_FIELDS = {"ae_variant", "channels", "hidden_units", "hyper",
                  "optimizer", "feature_type", "classifier_mix",
                  "classifier_reg", "seed", "corpora"}


def config_from_dict(doc: dict, base_dir=None) -> ExperimentConfig:
    """Validated config with defaults applied.

    Unknown top-level fields warn instead of failing; every hard problem
    is collected and reported at once.
    """
    problems = []
    for key in doc:
        if key not in _CONFIG_FIELDS:
            warnings.warn(f"ignoring unknown config field {key!r}")
    kwargs = {}
    if "hyper" in doc:
        try:
            kwargs["hyper"] = Hyper(**doc["hyper"])
        except (TypeError, ValueError) as exc:
            problems.append(f"bad hyper block: {exc}")
    if "optimizer" in doc:
        try:
            kwargs["optimizer"] = TrainOptions(**doc["optimizer"])
        except TypeError as exc:
            problems.append(f"bad optimizer block: {exc}")
    for key in ("ae_variant", "hidden_units", "feature_type",
                "classifier_mix", "classifier_reg", "seed"):
        if key in doc:
            kwargs[key] = doc[key]
    if "channels" in doc:
        kwargs["channels"] = [tuple(c) for c in doc["channels"]]
    corpora = dict(doc.get("corpora", {}))
    if base_dir is not None:
        corpora = {name: (str(Path(base_dir) / p) if p else p)
                   for name, p in corpora.items()}
    kwargs["corpora"] = corpora
    cfg = ExperimentConfig(**kwargs)
    try:
        cfg.validate()
    except ValueError as exc:
        problems.append(str(exc))
    for name, p in corpora.items():
        if p is not None and not Path(p).exists():
            problems.append(f"corpus {name!r} path does not exist: {p}")
    if problems:
        raise SchemaError("; ".join(problems))
    return cfg


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    return config_from_dict(json.loads(path.read_text()),
                            base_dir=path.parent)
