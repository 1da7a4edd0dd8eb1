"""Shared fixtures.

The digit pipeline (prototypes -> Syn I -> trained models) is expensive,
so it is built once per session and shared by the feature-quality and
acceptance tests.
"""

import time

import numpy as np
import pytest
from scipy.ndimage import binary_fill_holes
from sklearn.datasets import load_digits

from mcae.classify import LabeledFeatures
from mcae.digits import (build_digit_prototype, digit_syn1_shape,
                         features_to_image, image_to_features, prototype_mask)
from mcae.matching import make_toy_roof_corpus
from mcae.morphing import generate_syn2
from mcae.nnet import (ChannelTask, Hyper, SaeModel, TrainOptions, init_mcae,
                       init_params, train, train_sae)
from mcae.shapes import ROOF_STYLES, roof_prototype

N_TRAIN = 1000
N_REAL_LABELED = 200   # scarce-label classifier scenario
SYN2_PER_CLASS = 100


class DigitBundle:
    """Everything the digit experiments need, computed once."""

    def __init__(self):
        t0 = time.perf_counter()
        data = load_digits()
        X = data.data / 16.0
        y = data.target
        self.train_x, self.train_y = X[:N_TRAIN], y[:N_TRAIN]
        self.test_x, self.test_y = X[N_TRAIN:], y[N_TRAIN:]

        self.prototypes = {}
        for c in range(10):
            imgs = [features_to_image(v) for v in self.train_x[self.train_y == c][:30]]
            proto, _, _ = build_digit_prototype(imgs, str(c))
            self.prototypes[c] = (proto, prototype_mask(proto.shape))

        self.syn_shapes = []
        self.syn_x = np.zeros_like(self.train_x)
        for i, (v, c) in enumerate(zip(self.train_x, self.train_y)):
            proto, pmask = self.prototypes[c]
            s = digit_syn1_shape(features_to_image(v), proto, pmask)
            self.syn_shapes.append(s)
            self.syn_x[i] = image_to_features(binary_fill_holes(s.render()))

        hyper = Hyper()
        opts = TrainOptions(max_iters=400)
        self.mcae, self.mcae_trace = train(
            init_mcae(64, 100, hyper, seed=0),
            ChannelTask(self.syn_x, self.train_x),
            ChannelTask(self.train_x, self.train_x), opts)
        enc, dec, _ = init_params(64, 100, seed=0)
        self.sae_syn_real, _ = train_sae(SaeModel(enc, dec, hyper),
                                         ChannelTask(self.syn_x, self.train_x),
                                         opts)
        enc, dec, _ = init_params(64, 100, seed=0)
        self.sae_real_real, _ = train_sae(SaeModel(enc, dec, hyper),
                                          ChannelTask(self.train_x, self.train_x),
                                          opts)

        corpus = [(str(c), s) for c, s in zip(self.train_y, self.syn_shapes)]
        syn2 = generate_syn2(corpus, per_class=SYN2_PER_CLASS, seed=0)
        self.syn2_x = np.array([image_to_features(binary_fill_holes(img))
                                for _, img in syn2.samples])
        self.syn2_y = np.array([int(lbl) for lbl, _ in syn2.samples])
        self.build_seconds = time.perf_counter() - t0


@pytest.fixture(scope="session")
def digit_bundle():
    return DigitBundle()


@pytest.fixture(scope="session")
def toy_roof_corpus():
    protos = [roof_prototype(style) for style in ROOF_STYLES]
    return make_toy_roof_corpus(protos, n_per_style=20, jitter=2.0, seed=0)


def corpus_features(corpus) -> LabeledFeatures:
    """8x8 block-mean features and integer labels for a toy roof corpus."""
    from mcae.geometry import block_means

    names = sorted({item.label for item in corpus})
    ids = {n: i for i, n in enumerate(names)}
    feats = np.array([block_means(item.real.astype(float),
                                  item.real.shape[0] // 8)
                      for item in corpus])
    labels = np.array([ids[item.label] for item in corpus])
    return LabeledFeatures(feats, labels, names)
