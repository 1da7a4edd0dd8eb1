"""Declarative experiment rows: train an autoencoder variant, extract
features for a chosen data mix, fit the softmax classifier, and score
macro F1 on held-out real data."""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

from .classify import (LabeledFeatures, confusion_matrix, f1_score,
                       train_softmax)
from .nnet import (ChannelTask, Hyper, McaeModel, SaeModel, TrainOptions,
                   decode, encode, init_mcae, make_ciae_task, train,
                   train_sae)

AE_VARIANTS = ("mcae", "ciae", "sae", "identity")
FEATURE_TYPES = ("encoded", "reconstructed")
MIXES = ("real", "syn2", "real+syn2")


@dataclass
class ExperimentConfig:
    ae_variant: str = "mcae"
    channels: list = field(default_factory=lambda: [("syn1", "real"),
                                                    ("real", "real")])
    hidden_units: int = 100
    hyper: Hyper = field(default_factory=Hyper)
    optimizer: TrainOptions = field(default_factory=TrainOptions)
    feature_type: str = "encoded"
    classifier_mix: str = "real+syn2"
    classifier_reg: float = 1e-4
    seed: int = 0
    corpora: dict = field(default_factory=dict)   # name -> path (or None)

    def validate(self):
        """Collect every problem at once; raises ValueError listing them."""
        problems = []
        if self.ae_variant not in AE_VARIANTS:
            problems.append(f"unknown ae_variant {self.ae_variant!r}")
        if self.ae_variant == "mcae" and len(self.channels) != 2:
            problems.append("mcae requires exactly 2 channels")
        if self.ae_variant in ("sae", "ciae") and len(self.channels) != 1:
            problems.append(f"{self.ae_variant} requires exactly 1 channel")
        if self.feature_type not in FEATURE_TYPES:
            problems.append(f"unknown feature_type {self.feature_type!r}")
        if self.classifier_mix not in MIXES:
            problems.append(f"unknown classifier_mix {self.classifier_mix!r}")
        needed = {name for pair in self.channels for name in pair}
        needed |= set(self.classifier_mix.split("+"))
        needed.add("test")
        for name in sorted(needed):
            if name not in self.corpora:
                problems.append(f"missing corpus {name!r}")
        if problems:
            raise ValueError("invalid experiment config: " + "; ".join(problems))

    def channel_notation(self):
        tags = ["L", "R"]
        parts = [f"<i:{inp},t:{tgt}>^{tags[idx] if len(self.channels) == 2 else ''}"
                 for idx, (inp, tgt) in enumerate(self.channels)]
        return " ".join(p.rstrip("^") for p in parts)


@dataclass
class ResultRow:
    ae_variant: str
    ae_train_config: str
    feature_type: str
    classifier_data_mix: str
    macro_f1: float
    per_class_f1: np.ndarray
    seed: int


@dataclass
class ResultsTable:
    rows: list

    COLUMNS = ("ae_variant", "ae_train_config", "feature_type",
               "classifier_data_mix", "macro_f1", "per_class_f1s", "seed")

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(",".join(self.COLUMNS) + "\n")
        for r in self.rows:
            per_class = ";".join(repr(float(v)) for v in r.per_class_f1)
            buf.write(",".join([
                r.ae_variant, f'"{r.ae_train_config}"', r.feature_type,
                r.classifier_data_mix, repr(float(r.macro_f1)),
                f'"{per_class}"', str(r.seed),
            ]) + "\n")
        return buf.getvalue()

    def to_text(self) -> str:
        headers = ("variant", "ae_train_config", "features", "mix",
                   "macro_f1", "seed")
        lines = [[r.ae_variant, r.ae_train_config, r.feature_type,
                  r.classifier_data_mix, f"{r.macro_f1:.4f}", str(r.seed)]
                 for r in self.rows]
        widths = [max(len(h), *(len(l[i]) for l in lines)) if lines else len(h)
                  for i, h in enumerate(headers)]
        out = ["  ".join(h.ljust(w) for h, w in zip(headers, widths))]
        for l in lines:
            out.append("  ".join(c.ljust(w) for c, w in zip(l, widths)))
        return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# variant training and feature extraction
# ---------------------------------------------------------------------------

def _task(store, inp, tgt):
    return ChannelTask(store[inp].features, store[tgt].features)


def train_variant(cfg: ExperimentConfig, store: dict):
    """Train the configured autoencoder variant; returns the model (None
    for the identity passthrough) and the training trace."""
    if cfg.ae_variant == "identity":
        return None, []
    m = store[cfg.channels[0][0]].features.shape[1]
    if cfg.ae_variant == "ciae":
        m = 2 * m
    base = init_mcae(m, cfg.hidden_units, cfg.hyper, cfg.seed)
    if cfg.ae_variant == "mcae":
        left = _task(store, *cfg.channels[0])
        right = _task(store, *cfg.channels[1])
        return train(base, left, right, cfg.optimizer)
    inp, tgt = cfg.channels[0]
    sae = SaeModel(base.encoder, base.decoder_left, cfg.hyper)
    if cfg.ae_variant == "ciae":
        task = make_ciae_task(store[inp].features, store[tgt].features)
    else:
        task = _task(store, inp, tgt)
    return train_sae(sae, task, cfg.optimizer)


def extract_features(cfg: ExperimentConfig, model, X: np.ndarray,
                     role: str) -> np.ndarray:
    """Features for classification.

    role says which side of the model the data belongs to: "real"-like
    corpora go through the right channel of an MCAE when reconstructing,
    synthetic ones through the left.  CIAE inputs are duplicated to fill
    both halves of the concatenated layer; its reconstructed features are
    the target half of the output.
    """
    X = np.asarray(X, dtype=float)
    if cfg.ae_variant == "identity" or model is None:
        return X
    if cfg.ae_variant == "mcae":
        h = encode(model.encoder, X)
        if cfg.feature_type == "encoded":
            return h
        dec = model.decoder_left if role == "syn" else model.decoder_right
        return decode(dec, h)
    if cfg.ae_variant == "ciae":
        h = encode(model.encoder, np.hstack([X, X]))
        if cfg.feature_type == "encoded":
            return h
        return decode(model.decoder, h)[:, X.shape[1]:]
    # plain sae
    h = encode(model.encoder, X)
    if cfg.feature_type == "encoded":
        return h
    return decode(model.decoder, h)


_MIX_ROLES = {"real": "real", "syn2": "syn", "syn1": "syn", "test": "real"}


def run_experiment(cfg: ExperimentConfig, store: dict) -> ResultsTable:
    """Execute one table row end to end.

    store maps corpus names to LabeledFeatures; "test" is the held-out
    real evaluation set.  Deterministic given cfg.seed.
    """
    cfg.validate()
    for name in cfg.corpora:
        if name not in store:
            raise ValueError(f"corpus {name!r} not provided")
    try:
        model, _ = train_variant(cfg, store)
    except Exception as exc:
        raise RuntimeError(f"autoencoder stage failed: {exc}") from exc

    parts, labels = [], []
    for name in cfg.classifier_mix.split("+"):
        corpus = store[name]
        parts.append(extract_features(cfg, model, corpus.features,
                                      _MIX_ROLES.get(name, "real")))
        labels.append(corpus.labels)
    feats = np.vstack(parts)
    labels = np.concatenate(labels)
    class_names = store["test"].class_names

    try:
        clf = train_softmax(LabeledFeatures(feats, labels, class_names),
                            reg=cfg.classifier_reg, seed=cfg.seed)
    except Exception as exc:
        raise RuntimeError(f"classifier stage failed: {exc}") from exc

    test = store["test"]
    test_feats = extract_features(cfg, model, test.features, "real")
    cm = confusion_matrix(test.labels, clf.predict(test_feats),
                          len(class_names))
    per_class, macro = f1_score(cm)
    row = ResultRow(cfg.ae_variant, cfg.channel_notation(), cfg.feature_type,
                    cfg.classifier_mix, macro, per_class, cfg.seed)
    return ResultsTable([row])
