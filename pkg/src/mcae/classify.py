"""Softmax classification on learned features, plus the evaluation
metrics (macro F1, Pearson correlation) and the gap report comparing
raw and reconstructed real/synthetic pairs."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .nnet import McaeModel, SaeModel, decode, encode


@dataclass
class LabeledFeatures:
    features: np.ndarray
    labels: np.ndarray
    class_names: list = field(default_factory=list)

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=float)
        self.labels = np.asarray(self.labels, dtype=int)
        if self.features.ndim != 2 or self.features.shape[0] != self.labels.shape[0]:
            raise ValueError("features and labels disagree on instance count")
        if self.features.shape[0] < 1:
            raise ValueError("need at least one instance")
        if not self.class_names:
            self.class_names = [str(c) for c in range(int(self.labels.max()) + 1)]
        if self.labels.min() < 0 or self.labels.max() >= len(self.class_names):
            raise ValueError("label id outside the class list")

    @property
    def n_classes(self):
        return len(self.class_names)


@dataclass
class SoftmaxModel:
    weights: np.ndarray      # (C, d + 1); last column is the bias
    class_names: list

    def predict_proba(self, X):
        X = np.asarray(X, dtype=float)
        z = X @ self.weights[:, :-1].T + self.weights[:, -1]
        z -= z.max(axis=1, keepdims=True)
        e = np.exp(z)
        return e / e.sum(axis=1, keepdims=True)

    def predict(self, X):
        return np.argmax(self.predict_proba(X), axis=1)


def train_softmax(train: LabeledFeatures, reg: float = 1e-4,
                  seed: int = 0) -> SoftmaxModel:
    """Multinomial logistic regression fit by limited-memory BFGS.

    Minimizes mean cross-entropy plus reg/2 times the squared norm of the
    full weight matrix.  Deterministic given seed.
    """
    if reg < 0:
        raise ValueError("reg must be nonnegative")
    C = train.n_classes
    if len(np.unique(train.labels)) < 2:
        raise ValueError("training set contains a single class")
    X = train.features
    n, d = X.shape
    Y = np.zeros((n, C))
    Y[np.arange(n), train.labels] = 1.0
    rng = np.random.default_rng(seed)
    w0 = rng.normal(0.0, 0.01, size=C * (d + 1))
    Xb = np.hstack([X, np.ones((n, 1))])

    def objective(w):
        W = w.reshape(C, d + 1)
        z = Xb @ W.T
        z -= z.max(axis=1, keepdims=True)
        logsum = np.log(np.exp(z).sum(axis=1))
        loglik = (z[np.arange(n), train.labels] - logsum).mean()
        p = np.exp(z - logsum[:, None])
        grad = ((p - Y).T @ Xb) / n + reg * W
        loss = -loglik + 0.5 * reg * float(np.sum(W ** 2))
        return loss, grad.ravel()

    res = minimize(objective, w0, jac=True, method="L-BFGS-B",
                   options={"maxiter": 500, "ftol": 1e-14, "gtol": 1e-8})
    return SoftmaxModel(res.x.reshape(C, d + 1), list(train.class_names))


def confusion_matrix(truth, predicted, n_classes: int) -> np.ndarray:
    truth = np.asarray(truth, dtype=int)
    predicted = np.asarray(predicted, dtype=int)
    cm = np.zeros((n_classes, n_classes), dtype=int)
    np.add.at(cm, (truth, predicted), 1)
    return cm


def f1_score(cm: np.ndarray):
    """Per-class and macro-averaged F1 from a confusion matrix
    (rows = truth, columns = predicted).  A class with zero precision and
    recall scores 0."""
    cm = np.asarray(cm, dtype=float)
    if cm.size == 0 or cm.sum() == 0:
        raise ValueError("empty confusion matrix")
    tp = np.diag(cm)
    col = cm.sum(axis=0)
    row = cm.sum(axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        precision = np.where(col > 0, tp / col, 0.0)
        recall = np.where(row > 0, tp / row, 0.0)
        pr = precision + recall
        per_class = np.where(pr > 0, 2.0 * precision * recall / pr, 0.0)
    return per_class, float(per_class.mean())


def pearson_corr(x, y) -> float:
    """Pearson correlation Cov(X, Y) / (sigma_X * sigma_Y)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1 or x.size < 2:
        raise ValueError("need two equal-length vectors of size >= 2")
    xc = x - x.mean()
    yc = y - y.mean()
    sx = np.sqrt(np.sum(xc ** 2))
    sy = np.sqrt(np.sum(yc ** 2))
    if sx == 0 or sy == 0:
        raise ValueError("correlation undefined for a constant vector")
    return float(np.dot(xc, yc) / (sx * sy))


# ---------------------------------------------------------------------------
# gap report
# ---------------------------------------------------------------------------

def reconstruct(model: McaeModel, X, channel: str):
    h = encode(model.encoder, X)
    if channel == "left":
        return decode(model.decoder_left, h)
    if channel == "right":
        return decode(model.decoder_right, h)
    raise ValueError(f"unknown channel {channel!r}")


def _pair_correlations(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.array([pearson_corr(a[i], b[i]) for i in range(a.shape[0])])


@dataclass
class GapReport:
    conditions: dict          # name -> per-pair correlation array
    embeddings: np.ndarray    # hidden activations, real rows then syn rows
    roles: list               # "real"/"syn" per embedding row

    def mean(self, name) -> float:
        return float(self.conditions[name].mean())


def gap_report(real: np.ndarray, syn: np.ndarray, model: McaeModel,
               sae_syn_to_real: SaeModel | None = None,
               sae_real_to_real: SaeModel | None = None) -> GapReport:
    """Per-pair correlations between matched real/synthetic instances.

    Row i of real corresponds to row i of syn.  Conditions reported:
    "raw" (untouched pairs), "mcae" (real through the right channel vs
    syn through the left), and one row per supplied single-channel
    baseline applied to both sides.  Hidden-layer embeddings of all rows
    are included for external visualization.
    """
    real = np.asarray(real, dtype=float)
    syn = np.asarray(syn, dtype=float)
    if real.shape != syn.shape:
        raise ValueError(
            f"paired matrices differ in shape: {real.shape} vs {syn.shape}")
    conditions = {
        "raw": _pair_correlations(real, syn),
        "mcae": _pair_correlations(reconstruct(model, real, "right"),
                                   reconstruct(model, syn, "left")),
    }
    for name, sae in (("sae_syn_to_real", sae_syn_to_real),
                      ("sae_real_to_real", sae_real_to_real)):
        if sae is not None:
            ra = decode(sae.decoder, encode(sae.encoder, real))
            sa = decode(sae.decoder, encode(sae.encoder, syn))
            conditions[name] = _pair_correlations(ra, sa)
    embeddings = np.vstack([encode(model.encoder, real),
                            encode(model.encoder, syn)])
    roles = ["real"] * real.shape[0] + ["syn"] * syn.shape[0]
    return GapReport(conditions, embeddings, roles)
