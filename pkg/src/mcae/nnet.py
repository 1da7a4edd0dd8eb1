"""Single-hidden-layer autoencoder machinery.

Implements the shared-encoder / two-decoder multichannel autoencoder
(MCAE), the plain sparse autoencoder (SAE) it is built from, exact
analytic gradients of both objectives, and full-batch quasi-Newton
training.  A central-difference gradient checker is included so the
analytic gradients can always be verified independently.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import minimize


class TrainingError(RuntimeError):
    """Raised when optimization hits a non-finite loss; carries the trace so far."""

    def __init__(self, message, trace):
        super().__init__(message)
        self.trace = trace


# ---------------------------------------------------------------------------
# parameter containers
# ---------------------------------------------------------------------------

@dataclass
class EncoderParams:
    """Affine map into the hidden layer: W is k x m, b has length k."""
    W: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        self.W = np.asarray(self.W, dtype=float)
        self.b = np.asarray(self.b, dtype=float)
        if self.W.ndim != 2 or self.b.ndim != 1 or self.W.shape[0] != self.b.shape[0]:
            raise ValueError(
                f"inconsistent encoder shapes W={self.W.shape} b={self.b.shape}")
        if not (np.isfinite(self.W).all() and np.isfinite(self.b).all()):
            raise ValueError("encoder parameters must be finite")

    @property
    def hidden_units(self):
        return self.W.shape[0]

    @property
    def input_dim(self):
        return self.W.shape[1]


@dataclass
class DecoderParams:
    """Affine map back to the data layer: W is m x k, b has length m."""
    W: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        self.W = np.asarray(self.W, dtype=float)
        self.b = np.asarray(self.b, dtype=float)
        if self.W.ndim != 2 or self.b.ndim != 1 or self.W.shape[0] != self.b.shape[0]:
            raise ValueError(
                f"inconsistent decoder shapes W={self.W.shape} b={self.b.shape}")
        if not (np.isfinite(self.W).all() and np.isfinite(self.b).all()):
            raise ValueError("decoder parameters must be finite")


@dataclass
class Hyper:
    """Objective hyperparameters.

    weight_decay    -- coefficient of the quadratic penalty on both weight
                       matrices (half the sum of squares).
    sparsity_weight -- coefficient of the KL sparsity penalty.
    sparsity_target -- desired mean activation of each hidden unit,
                       strictly inside (0, 1).
    balance_weight  -- coefficient of the squared difference between the
                       two channel losses (multichannel models only).
    """
    weight_decay: float = 1e-4
    sparsity_weight: float = 0.1
    sparsity_target: float = 0.05
    balance_weight: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.sparsity_target < 1.0:
            raise ValueError("sparsity_target must lie strictly inside (0, 1)")
        for name in ("weight_decay", "sparsity_weight", "balance_weight"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")


@dataclass
class McaeModel:
    """Shared encoder plus two decoders of identical shape."""
    encoder: EncoderParams
    decoder_left: DecoderParams
    decoder_right: DecoderParams
    hyper: Hyper = field(default_factory=Hyper)

    def __post_init__(self):
        k, m = self.encoder.W.shape
        for dec, side in ((self.decoder_left, "left"), (self.decoder_right, "right")):
            if dec.W.shape != (m, k):
                raise ValueError(
                    f"{side} decoder shape {dec.W.shape} does not match "
                    f"encoder {(k, m)} transposed")

    @property
    def input_dim(self):
        return self.encoder.input_dim

    @property
    def hidden_units(self):
        return self.encoder.hidden_units


@dataclass
class SaeModel:
    """Single-channel autoencoder (the plain SAE, also used for CIAE)."""
    encoder: EncoderParams
    decoder: DecoderParams
    hyper: Hyper = field(default_factory=Hyper)

    def __post_init__(self):
        k, m = self.encoder.W.shape
        if self.decoder.W.shape != (m, k):
            raise ValueError(
                f"decoder shape {self.decoder.W.shape} does not match "
                f"encoder {(k, m)} transposed")


@dataclass
class ChannelTask:
    """Paired (input, reconstruction target) matrices for one channel."""
    inputs: np.ndarray
    targets: np.ndarray

    def __post_init__(self):
        self.inputs = np.asarray(self.inputs, dtype=float)
        self.targets = np.asarray(self.targets, dtype=float)
        if self.inputs.ndim != 2 or self.inputs.shape != self.targets.shape:
            raise ValueError(
                f"inputs {self.inputs.shape} and targets {self.targets.shape} "
                f"must be equal-shaped 2-d matrices")
        for name, a in (("inputs", self.inputs), ("targets", self.targets)):
            if a.size and (a.min() < 0.0 or a.max() > 1.0):
                raise ValueError(f"{name} values must lie in [0, 1]")

    @property
    def n(self):
        return self.inputs.shape[0]

    @property
    def dim(self):
        return self.inputs.shape[1]


@dataclass
class GradientBundle:
    """Gradients of the multichannel objective, shaped like the model."""
    d_W_e: np.ndarray
    d_b_e: np.ndarray
    d_W_d_left: np.ndarray
    d_b_d_left: np.ndarray
    d_W_d_right: np.ndarray
    d_b_d_right: np.ndarray

    def as_arrays(self):
        return (self.d_W_e, self.d_b_e, self.d_W_d_left, self.d_b_d_left,
                self.d_W_d_right, self.d_b_d_right)


# ---------------------------------------------------------------------------
# forward passes and losses
# ---------------------------------------------------------------------------

def sigmoid(z):
    """Numerically stable logistic function, elementwise."""
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    if out.ndim == 0:
        return float(out)
    return out


def encode(p: EncoderParams, X):
    """Hidden-layer activations, one row per instance."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != p.input_dim:
        raise ValueError(
            f"input has {X.shape[1]} columns but encoder expects {p.input_dim}")
    return sigmoid(X @ p.W.T + p.b)


def decode(p: DecoderParams, H):
    """Reconstruction from hidden activations, one row per instance."""
    H = np.atleast_2d(np.asarray(H, dtype=float))
    if H.shape[1] != p.W.shape[1]:
        raise ValueError(
            f"hidden input has {H.shape[1]} columns but decoder expects "
            f"{p.W.shape[1]}")
    return sigmoid(H @ p.W.T + p.b)


def kl_sparsity(target, mean_activation):
    """Sum over hidden units of KL(Bernoulli(target) || Bernoulli(mean))."""
    q = np.asarray(mean_activation, dtype=float)
    if not 0.0 < target < 1.0:
        raise ValueError("sparsity target must lie strictly inside (0, 1)")
    if q.size == 0 or q.min() <= 0.0 or q.max() >= 1.0:
        raise ValueError(
            "mean activations must lie strictly inside (0, 1); "
            "a saturated unit makes the penalty undefined")
    return float(np.sum(target * np.log(target / q)
                        + (1.0 - target) * np.log((1.0 - target) / (1.0 - q))))


def _channel_forward(enc, dec, task):
    H = encode(enc, task.inputs)
    Y = decode(dec, H)
    return H, Y


def _channel_loss(enc, dec, task, hyper):
    """Single-channel objective value plus intermediates for backprop."""
    if task.n == 0:
        raise ValueError("task has no instances")
    H, Y = _channel_forward(enc, dec, task)
    mean_act = H.mean(axis=0)
    n = task.n
    recon = float(np.sum((Y - task.targets) ** 2)) / n
    decay = 0.5 * hyper.weight_decay * (float(np.sum(enc.W ** 2))
                                        + float(np.sum(dec.W ** 2)))
    sparsity = hyper.sparsity_weight * kl_sparsity(hyper.sparsity_target, mean_act)
    return recon + decay + sparsity, H, Y, mean_act


def sae_loss(enc: EncoderParams, dec: DecoderParams, task: ChannelTask,
             hyper: Hyper):
    """Reconstruction + weight decay + sparsity objective.

    Returns (J, mean_activation) where mean_activation is the per-unit
    mean hidden activation over all instances.
    """
    J, _, _, mean_act = _channel_loss(enc, dec, task, hyper)
    return J, mean_act


def _channel_gradients(enc, dec, task, hyper):
    """Gradient of the single-channel objective w.r.t. all four parameters."""
    J, H, Y, mean_act = _channel_loss(enc, dec, task, hyper)
    n = task.n
    t = hyper.sparsity_target

    dY = (2.0 / n) * (Y - task.targets)
    dZd = dY * Y * (1.0 - Y)
    gWd = dZd.T @ H + hyper.weight_decay * dec.W
    gbd = dZd.sum(axis=0)

    kl_grad = (hyper.sparsity_weight / n) * (
        -t / mean_act + (1.0 - t) / (1.0 - mean_act))
    dH = dZd @ dec.W + kl_grad
    dZe = dH * H * (1.0 - H)
    gWe = dZe.T @ task.inputs + hyper.weight_decay * enc.W
    gbe = dZe.sum(axis=0)
    return J, (gWe, gbe, gWd, gbd)


def _check_mcae_shapes(model, left, right):
    m = model.input_dim
    for task, side in ((left, "left"), (right, "right")):
        if task.dim != m:
            raise ValueError(
                f"{side} task has {task.dim} columns but model expects {m}")


def mcae_loss(model: McaeModel, left: ChannelTask, right: ChannelTask):
    """Total multichannel objective and the two per-channel losses.

    E = J_left + J_right + balance_weight * (J_left - J_right)**2 / 2.
    Each channel loss includes its own reconstruction, sparsity and weight
    decay terms; the shared encoder's decay is counted once per channel.
    """
    _check_mcae_shapes(model, left, right)
    JL, _ = sae_loss(model.encoder, model.decoder_left, left, model.hyper)
    JR, _ = sae_loss(model.encoder, model.decoder_right, right, model.hyper)
    E = JL + JR + 0.5 * model.hyper.balance_weight * (JL - JR) ** 2
    return E, JL, JR


def mcae_gradients(model: McaeModel, left: ChannelTask,
                   right: ChannelTask) -> GradientBundle:
    """Exact gradient of the multichannel objective.

    With d = J_left - J_right and g the balance weight, the encoder gets
    (1 + g*d) * grad(J_left) + (1 - g*d) * grad(J_right) and each decoder
    its own channel gradient scaled by the matching factor.
    """
    _check_mcae_shapes(model, left, right)
    hyper = model.hyper
    JL, (gWeL, gbeL, gWdL, gbdL) = _channel_gradients(
        model.encoder, model.decoder_left, left, hyper)
    JR, (gWeR, gbeR, gWdR, gbdR) = _channel_gradients(
        model.encoder, model.decoder_right, right, hyper)
    cL = 1.0 + hyper.balance_weight * (JL - JR)
    cR = 1.0 - hyper.balance_weight * (JL - JR)
    return GradientBundle(
        d_W_e=cL * gWeL + cR * gWeR,
        d_b_e=cL * gbeL + cR * gbeR,
        d_W_d_left=cL * gWdL,
        d_b_d_left=cL * gbdL,
        d_W_d_right=cR * gWdR,
        d_b_d_right=cR * gbdR,
    )


# ---------------------------------------------------------------------------
# flat-vector packing (shared by the optimizer and the gradient checker)
# ---------------------------------------------------------------------------

def pack_model(model: McaeModel):
    return np.concatenate([
        model.encoder.W.ravel(), model.encoder.b,
        model.decoder_left.W.ravel(), model.decoder_left.b,
        model.decoder_right.W.ravel(), model.decoder_right.b,
    ])


def unpack_model(x, template: McaeModel) -> McaeModel:
    k, m = template.encoder.W.shape
    sizes = [k * m, k, m * k, m, m * k, m]
    parts = np.split(np.asarray(x, dtype=float), np.cumsum(sizes)[:-1])
    return McaeModel(
        encoder=EncoderParams(parts[0].reshape(k, m), parts[1]),
        decoder_left=DecoderParams(parts[2].reshape(m, k), parts[3]),
        decoder_right=DecoderParams(parts[4].reshape(m, k), parts[5]),
        hyper=template.hyper,
    )


def pack_bundle(bundle: GradientBundle):
    return np.concatenate([a.ravel() for a in bundle.as_arrays()])


def finite_diff_gradient(loss_fn, model: McaeModel,
                         step: float = 1e-5) -> GradientBundle:
    """Central-difference gradient of loss_fn over every model parameter.

    loss_fn takes an McaeModel and returns a scalar.  Entirely independent
    of the analytic backprop path, so it can referee it.
    """
    if step <= 0:
        raise ValueError("step must be positive")
    x0 = pack_model(model)
    grad = np.empty_like(x0)
    for i in range(x0.size):
        xp = x0.copy()
        xp[i] += step
        xm = x0.copy()
        xm[i] -= step
        grad[i] = (loss_fn(unpack_model(xp, model))
                   - loss_fn(unpack_model(xm, model))) / (2.0 * step)
    k, m = model.encoder.W.shape
    sizes = [k * m, k, m * k, m, m * k, m]
    parts = np.split(grad, np.cumsum(sizes)[:-1])
    return GradientBundle(parts[0].reshape(k, m), parts[1],
                          parts[2].reshape(m, k), parts[3],
                          parts[4].reshape(m, k), parts[5])


def gradient_check(model: McaeModel, left: ChannelTask, right: ChannelTask,
                   step: float = 1e-5) -> float:
    """Max deviation between analytic and central-difference gradients,
    relative to the largest gradient component."""
    analytic = pack_bundle(mcae_gradients(model, left, right))
    numeric = pack_bundle(finite_diff_gradient(
        lambda m: mcae_loss(m, left, right)[0], model, step))
    scale = max(float(np.abs(numeric).max()), 1e-12)
    return float(np.abs(analytic - numeric).max()) / scale


# ---------------------------------------------------------------------------
# training
# ---------------------------------------------------------------------------

@dataclass
class TrainOptions:
    max_iters: int = 400
    tol: float = 1e-6
    method: str = "lbfgs"       # "lbfgs" or "sgd"
    history: int = 10           # limited-memory history for lbfgs
    learning_rate: float = 0.1  # sgd only
    batch_size: int = 0         # sgd only; 0 means full batch
    seed: int = 0               # sgd minibatch shuffling


@dataclass
class TracePoint:
    iteration: int
    total: float
    left: float
    right: float
    grad_norm: float


def _trace_point(it, model, left, right):
    E, JL, JR = mcae_loss(model, left, right)
    g = np.linalg.norm(pack_bundle(mcae_gradients(model, left, right)))
    return TracePoint(it, E, JL, JR, g)


def train(model: McaeModel, left: ChannelTask, right: ChannelTask,
          opts: TrainOptions | None = None):
    """Minimize the multichannel objective; returns (model, trace).

    Default path is full-batch limited-memory BFGS with a sufficient-
    decrease line search, so the traced objective is non-increasing over
    accepted iterations.  Plain (mini-batch) gradient descent is available
    via opts.method = "sgd".
    """
    opts = opts or TrainOptions()
    if opts.max_iters < 1:
        raise ValueError("max_iters must be at least 1")
    _check_mcae_shapes(model, left, right)
    if opts.method == "sgd":
        return _train_sgd(model, left, right, opts)

    trace = [_trace_point(0, model, left, right)]

    def objective(x):
        m = unpack_model(x, model)
        E, _, _ = mcae_loss(m, left, right)
        g = pack_bundle(mcae_gradients(m, left, right))
        if not np.isfinite(E) or not np.isfinite(g).all():
            raise TrainingError("non-finite objective during training", trace)
        return E, g

    def callback(xk):
        trace.append(_trace_point(len(trace), unpack_model(xk, model),
                                  left, right))

    res = minimize(objective, pack_model(model), jac=True, method="L-BFGS-B",
                   callback=callback,
                   options={"maxiter": opts.max_iters, "maxcor": opts.history,
                            "gtol": opts.tol, "ftol": 1e-16})
    return unpack_model(res.x, model), trace


def _train_sgd(model, left, right, opts):
    rng = np.random.default_rng(opts.seed)
    x = pack_model(model)
    trace = [_trace_point(0, model, left, right)]
    for it in range(1, opts.max_iters + 1):
        if opts.batch_size and opts.batch_size < min(left.n, right.n):
            li = rng.choice(left.n, size=opts.batch_size, replace=False)
            ri = rng.choice(right.n, size=opts.batch_size, replace=False)
            lt = ChannelTask(left.inputs[li], left.targets[li])
            rt = ChannelTask(right.inputs[ri], right.targets[ri])
        else:
            lt, rt = left, right
        m = unpack_model(x, model)
        g = pack_bundle(mcae_gradients(m, lt, rt))
        if not np.isfinite(g).all():
            raise TrainingError("non-finite gradient during training", trace)
        x = x - opts.learning_rate * g
        point = _trace_point(it, unpack_model(x, model), left, right)
        trace.append(point)
        if point.grad_norm < opts.tol:
            break
    return unpack_model(x, model), trace


def init_params(m: int, k: int, seed: int = 0):
    """Uniform weights in [-r, r] with r = sqrt(6 / (m + k)), zero biases.

    Returns (encoder, decoder, decoder); the two decoders are drawn
    independently.
    """
    if m < 1 or k < 1:
        raise ValueError("dimensions must be at least 1")
    rng = np.random.default_rng(seed)
    r = np.sqrt(6.0 / (m + k))
    enc = EncoderParams(rng.uniform(-r, r, size=(k, m)), np.zeros(k))
    dec_l = DecoderParams(rng.uniform(-r, r, size=(m, k)), np.zeros(m))
    dec_r = DecoderParams(rng.uniform(-r, r, size=(m, k)), np.zeros(m))
    return enc, dec_l, dec_r


def init_mcae(m: int, k: int, hyper: Hyper | None = None,
              seed: int = 0) -> McaeModel:
    enc, dec_l, dec_r = init_params(m, k, seed)
    return McaeModel(enc, dec_l, dec_r, hyper or Hyper())


# ---------------------------------------------------------------------------
# single-channel training (SAE and CIAE as special cases)
# ---------------------------------------------------------------------------

def train_sae(model: SaeModel, task: ChannelTask,
              opts: TrainOptions | None = None):
    """Train a single-channel model with the same optimizer as train().

    Internally this is the two-channel routine with the balance weight off
    and the second channel mirroring the first; the objective halves to
    the single-channel loss, so the minimizer is identical.
    """
    opts = opts or TrainOptions()
    hyper = replace(model.hyper, balance_weight=0.0)
    twin = McaeModel(model.encoder,
                     model.decoder,
                     DecoderParams(model.decoder.W.copy(),
                                   model.decoder.b.copy()),
                     hyper)
    trained, trace = train(twin, task, task, opts)
    out = SaeModel(trained.encoder, trained.decoder_left, model.hyper)
    return out, trace


def make_ciae_task(syn: np.ndarray, real: np.ndarray) -> ChannelTask:
    """Column-concatenated task: inputs [syn | real], targets [real | real]."""
    syn = np.asarray(syn, dtype=float)
    real = np.asarray(real, dtype=float)
    if syn.shape != real.shape:
        raise ValueError(
            f"syn {syn.shape} and real {real.shape} must be equal-shaped")
    return ChannelTask(np.hstack([syn, real]), np.hstack([real, real]))
