"""Autoencoder-variant comparison table on the toy roof corpus.

Builds real / Syn I / Syn II / test feature corpora from jittered roof
renders, then runs one experiment row per autoencoder variant (raw
features, SAE, CIAE, MCAE) and prints the combined ResultsTable.

Run:  python demos/experiment_table.py
"""

import numpy as np

from mcae.classify import LabeledFeatures
from mcae.experiment import ExperimentConfig, ResultsTable, run_experiment
from mcae.geometry import block_means
from mcae.matching import make_toy_roof_corpus
from mcae.morphing import generate_syn2
from mcae.nnet import TrainOptions
from mcae.shapes import ROOF_STYLES, roof_prototype


def features(images, labels, names):
    ids = {n: i for i, n in enumerate(names)}
    X = np.array([block_means(img.astype(float), img.shape[0] // 8)
                  for img in images])
    return LabeledFeatures(X, np.array([ids[l] for l in labels]), names)


protos = [roof_prototype(style) for style in ROOF_STYLES]
train_c = make_toy_roof_corpus(protos, n_per_style=20, jitter=2.0, seed=0)
test_c = make_toy_roof_corpus(protos, n_per_style=20, jitter=2.0, seed=1)
names = sorted(ROOF_STYLES)

syn2 = generate_syn2([(c.label, c.syn) for c in train_c],
                     per_class=20, seed=0)
store = {
    "real": features([c.real for c in train_c],
                     [c.label for c in train_c], names),
    "syn1": features([c.syn.render() for c in train_c],
                     [c.label for c in train_c], names),
    "syn2": features([img for _, img in syn2.samples],
                     [lbl for lbl, _ in syn2.samples], names),
    "test": features([c.real for c in test_c],
                     [c.label for c in test_c], names),
}

variants = [
    ("identity", [("real", "real"), ("real", "real")]),
    ("sae", [("real", "real")]),
    ("ciae", [("syn1", "real")]),
    ("mcae", [("syn1", "real"), ("real", "real")]),
]
rows = []
for variant, channels in variants:
    cfg = ExperimentConfig(ae_variant=variant, channels=channels,
                           classifier_mix="real+syn2",
                           optimizer=TrainOptions(max_iters=200),
                           corpora={k: None for k in store})
    rows.extend(run_experiment(cfg, store).rows)

print(ResultsTable(rows).to_text(), end="")
