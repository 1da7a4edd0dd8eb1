"""End-to-end digit pipeline at reduced scale.

Congeals handwritten digits into per-class prototypes, migrates each
prototype onto individual digits (Syn I), interpolates new shapes
(Syn II), trains an MCAE on (synthetic -> real) + (real -> real), and
reports how much of the synthetic gap the MCAE closes: mean per-pair
Pearson correlation before and after reconstruction.

Uses three digit classes and a few hundred images so it finishes in
about a minute; the full-scale version is what the acceptance tests run.

Run:  python demos/digit_pipeline.py
"""

import numpy as np
from scipy.ndimage import binary_fill_holes
from sklearn.datasets import load_digits

from mcae.classify import gap_report
from mcae.digits import (build_digit_prototype, digit_syn1_shape,
                         features_to_image, image_to_features, prototype_mask)
from mcae.morphing import generate_syn2
from mcae.nnet import ChannelTask, Hyper, TrainOptions, init_mcae, train

CLASSES = (0, 3, 8)
PER_CLASS = 80

data = load_digits()
keep = np.isin(data.target, CLASSES)
X = data.data[keep] / 16.0
y = data.target[keep]
X, y = X[:PER_CLASS * len(CLASSES)], y[:PER_CLASS * len(CLASSES)]

print("== congealing prototypes ==")
protos = {}
for c in CLASSES:
    imgs = [features_to_image(v) for v in X[y == c][:30]]
    proto, _, result = build_digit_prototype(imgs, str(c))
    protos[c] = (proto, prototype_mask(proto.shape))
    print(f"class {c}: stack entropy {result.entropy_trace[0]:.3f}"
          f" -> {result.entropy_trace[-1]:.3f}")

print()
print("== Syn I: prototype migration onto each digit ==")
shapes = []
syn_x = np.zeros_like(X)
for i, (v, c) in enumerate(zip(X, y)):
    proto, pmask = protos[c]
    s = digit_syn1_shape(features_to_image(v), proto, pmask)
    shapes.append(s)
    syn_x[i] = image_to_features(binary_fill_holes(s.render()))
print(f"{len(shapes)} matched shapes")

print()
print("== Syn II: interpolated/extrapolated shapes ==")
syn2 = generate_syn2([(str(c), s) for c, s in zip(y, shapes)],
                     per_class=20, seed=0)
print(f"{len(syn2.samples)} new samples"
      f" ({len(syn2.draws)} draws logged, skipped: {syn2.skipped or 'none'})")

print()
print("== MCAE training and gap report ==")
model, trace = train(init_mcae(64, 60, Hyper(), seed=0),
                     ChannelTask(syn_x, X), ChannelTask(X, X),
                     TrainOptions(max_iters=200))
print(f"objective {trace[0].total:.3f} -> {trace[-1].total:.3f}"
      f" in {len(trace)} iterations")
report = gap_report(X, syn_x, model)
print(f"mean pair correlation raw:  {report.mean('raw'):.3f}")
print(f"mean pair correlation mcae: {report.mean('mcae'):.3f}")
