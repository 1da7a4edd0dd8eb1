"""Batch command-line front end.

Exit codes: 0 success, 1 runtime failure, 2 usage or validation failure.
stdout carries only the primary artifact (paths or the results table);
diagnostics and machine-readable errors go to stderr.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import dataio, digits
from .classify import gap_report
from .experiment import ExperimentConfig, run_experiment, train_variant
from .geometry import block_means
from .matching import match_synthetic
from .morphing import generate_syn2
from .classify import LabeledFeatures
from .geometry import image_distance
from .nnet import (ChannelTask, Hyper, McaeModel, SaeModel, decode, encode,
                   gradient_check, init_mcae)
from .shapes import ROOF_STYLES, roof_prototype


def _fail(message: str, code: int):
    print(json.dumps({"error": message}), file=sys.stderr)
    raise SystemExit(code)


def _info(message: str):
    print(message, file=sys.stderr)


def _corpus_features(directory, roles=None) -> LabeledFeatures:
    """Load an image corpus and turn each image into 8x8 block means."""
    entries = dataio.load_corpus(directory)
    if roles is not None:
        entries = [e for e in entries if e.role in roles]
    if not entries:
        raise dataio.SchemaError(f"corpus {directory} has no matching images")
    labels_sorted = sorted({e.label for e in entries})
    ids = {lab: i for i, lab in enumerate(labels_sorted)}
    feats = np.array([block_means(e.image.astype(float),
                                  e.image.shape[0] // 8) for e in entries])
    labels = np.array([ids[e.label] for e in entries])
    return LabeledFeatures(feats, labels, labels_sorted)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_gen_prototype(args):
    if (args.roof is None) == (args.digits is None):
        _fail("exactly one of --roof and --digits is required", 2)
    if args.roof:
        proto = roof_prototype(args.roof)
    else:
        entries = dataio.load_corpus(args.digits)
        images = [e.image for e in entries if e.label == args.label]
        if len(images) < 2:
            _fail(f"class {args.label!r} has {len(images)} images; "
                  "need at least 2 to congeal", 2)
        proto, _, result = digits.build_digit_prototype(
            images, args.label, n_points=args.points)
        _info(f"congealed {len(images)} images; entropy "
              f"{result.entropy_trace[0]:.3f} -> {result.entropy_trace[-1]:.3f}")
    dataio.save_prototype(args.out, proto)
    print(args.out)


def cmd_gen_syn1(args):
    proto = dataio.load_prototype(args.proto)
    entries = dataio.load_corpus(args.real)
    out_entries, shapes = [], {}
    for idx, e in enumerate(entries):
        if args.method == "migrate":
            shape = digits.digit_syn1_shape(
                e.image, proto, digits.prototype_mask(proto.shape))
            converged = True
        else:
            result = match_synthetic(e.image, proto)
            shape = result.shape
            converged = result.converged
        dist = image_distance(e.image, shape.render())
        name = f"syn1_{idx:05d}"
        shape_file = name + ".shape.json"
        shapes[shape_file] = dataio.PrototypeSpec(e.label, shape)
        out_entries.append(dataio.CorpusEntry(
            file=name + ".pbm", label=e.label, role="syn1",
            image=shape.render(), shape_file=shape_file, pair=e.file,
            distance=dist, extra={"converged": converged}))
    dataio.save_corpus(args.out, out_entries, shapes=shapes)
    print(args.out)


def cmd_gen_syn2(args):
    entries = dataio.load_corpus(args.syn1)
    corpus = [(e.label, dataio.load_corpus_shape(args.syn1, e))
              for e in entries if e.shape_file]
    if not corpus:
        _fail(f"{args.syn1} has no control-point sets", 2)
    result = generate_syn2(corpus, args.per_class, seed=args.seed)
    for label in result.skipped:
        _info(f"warning: class {label!r} skipped (fewer than two shapes)")
    out_entries = [
        dataio.CorpusEntry(file=f"syn2_{i:05d}.pbm", label=label,
                           role="syn2", image=image)
        for i, (label, image) in enumerate(result.samples)]
    dataio.save_corpus(args.out, out_entries)
    print(args.out)


def _load_store(cfg: ExperimentConfig):
    return {name: _corpus_features(path) for name, path in cfg.corpora.items()}


def _model_for_saving(cfg, model):
    if isinstance(model, SaeModel):
        return McaeModel(model.encoder, model.decoder, model.decoder,
                         model.hyper)
    return model


def cmd_train(args):
    cfg = dataio.load_config(args.config)
    store = _load_store(cfg)
    if cfg.ae_variant == "identity":
        _fail("the identity variant has nothing to train", 2)
    model, trace = train_variant(cfg, store)
    dataio.save_model(args.out_model, _model_for_saving(cfg, model))
    with open(args.out_trace, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["iteration", "total", "left", "right", "grad_norm"])
        for p in trace:
            writer.writerow([p.iteration, repr(p.total), repr(p.left),
                             repr(p.right), repr(p.grad_norm)])
    print(args.out_model)
    print(args.out_trace)


def cmd_encode(args):
    model = dataio.load_model(args.model)
    data = _corpus_features(args.corpus)
    h = encode(model.encoder, data.features)
    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id", "class"] + [f"h_{j + 1}" for j in range(h.shape[1])])
        for i in range(h.shape[0]):
            writer.writerow([i, data.class_names[data.labels[i]]]
                            + [repr(v) for v in h[i]])
    print(args.out)


def cmd_reconstruct(args):
    model = dataio.load_model(args.model)
    data = _corpus_features(args.corpus)
    dec = model.decoder_left if args.channel == "left" else model.decoder_right
    y = decode(dec, encode(model.encoder, data.features))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    entries = []
    side = int(np.sqrt(y.shape[1]))
    for i in range(y.shape[0]):
        name = f"recon_{i:05d}.pgm"
        dataio.save_pgm(out / name, y[i].reshape(side, side))
        entries.append({"file": name,
                        "class": data.class_names[data.labels[i]],
                        "role": "reconstructed"})
    (out / "manifest.json").write_text(json.dumps({"images": entries}, indent=1))
    print(args.out)


def cmd_eval(args):
    cfg = dataio.load_config(args.config)
    store = _load_store(cfg)
    table = run_experiment(cfg, store)
    Path(args.out_prefix + ".csv").write_text(table.to_csv())
    Path(args.out_prefix + ".txt").write_text(table.to_text())
    print(table.to_text(), end="")


def cmd_gradcheck(args):
    try:
        m, k, n = (int(v) for v in args.sizes.split(","))
    except ValueError:
        _fail(f"--sizes must be m,k,n integers, got {args.sizes!r}", 2)
    worst = 0.0
    for trial in range(args.trials):
        rng = np.random.default_rng(args.seed + trial)
        model = init_mcae(m, k, Hyper(weight_decay=1e-3, sparsity_weight=0.1,
                                      sparsity_target=0.05,
                                      balance_weight=1.0),
                          seed=args.seed + trial)
        left = ChannelTask(rng.uniform(0, 1, (n, m)), rng.uniform(0, 1, (n, m)))
        right = ChannelTask(rng.uniform(0, 1, (n, m)), rng.uniform(0, 1, (n, m)))
        worst = max(worst, gradient_check(model, left, right))
    print(f"max relative gradient error over {args.trials} trials: {worst:.3e}")
    if worst >= 1e-6:
        raise SystemExit(1)


def cmd_correlate(args):
    model = dataio.load_model(args.model)
    entries = dataio.load_corpus(args.pairs)
    syn = [e for e in entries if e.role == "syn1" and e.pair]
    if not syn:
        _fail(f"{args.pairs} has no paired syn1 entries", 2)
    by_file = {e.file: e for e in entries}
    real_dir = Path(args.real) if args.real else Path(args.pairs)
    real_rows, syn_rows, meta = [], [], []
    for e in syn:
        if e.pair in by_file:
            real_img = by_file[e.pair].image
        else:
            real_img = dataio.load_portable_map(real_dir / e.pair)
        block = e.image.shape[0] // 8
        real_rows.append(block_means(np.asarray(real_img, dtype=float), block))
        syn_rows.append(block_means(e.image.astype(float), block))
        meta.append((e.file, e.label))
    report = gap_report(np.array(real_rows), np.array(syn_rows), model)
    with open(args.out_prefix + ".csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        names = sorted(report.conditions)
        writer.writerow(["pair_id", "class"] + names)
        for i, (pid, label) in enumerate(meta):
            writer.writerow([pid, label]
                            + [repr(float(report.conditions[n][i])) for n in names])
        writer.writerow(["mean", ""] + [repr(report.mean(n)) for n in names])
    with open(args.out_prefix + "_embeddings.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        k = report.embeddings.shape[1]
        writer.writerow(["id", "role", "class"]
                        + [f"h_{j + 1}" for j in range(k)])
        classes = [label for _, label in meta] * 2
        for i, role in enumerate(report.roles):
            writer.writerow([i, role, classes[i]]
                            + [repr(v) for v in report.embeddings[i]])
    print(args.out_prefix + ".csv")
    print(args.out_prefix + "_embeddings.csv")


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def build_parser():
    parser = argparse.ArgumentParser(
        prog="mcae",
        description="Multichannel autoencoder and synthetic-shape pipeline")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-prototype", help="emit a prototype spec file")
    p.add_argument("--roof", choices=ROOF_STYLES)
    p.add_argument("--digits", help="image corpus directory to congeal")
    p.add_argument("--label", default="0", help="digit class to congeal")
    p.add_argument("--points", type=int, default=24,
                   help="boundary control points (digit mode)")
    p.add_argument("--out", default="prototype.json")
    p.set_defaults(func=cmd_gen_prototype)

    p = sub.add_parser("gen-syn1", help="match a synthetic image per real image")
    p.add_argument("--real", required=True, help="real image corpus directory")
    p.add_argument("--proto", required=True, help="prototype spec file")
    p.add_argument("--method", choices=("descent", "migrate"),
                   default="descent")
    p.add_argument("--out", default="syn1")
    p.set_defaults(func=cmd_gen_syn1)

    p = sub.add_parser("gen-syn2", help="interpolate/extrapolate new shapes")
    p.add_argument("--syn1", required=True, help="first-stage corpus directory")
    p.add_argument("--per-class", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="syn2")
    p.set_defaults(func=cmd_gen_syn2)

    p = sub.add_parser("train", help="train the configured autoencoder")
    p.add_argument("--config", required=True)
    p.add_argument("--out-model", default="model.json")
    p.add_argument("--out-trace", default="trace.csv")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("encode", help="hidden-layer features to CSV")
    p.add_argument("--model", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", default="features.csv")
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("reconstruct", help="decoded images to a corpus")
    p.add_argument("--model", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--channel", choices=("left", "right"), default="right")
    p.add_argument("--out", default="reconstructed")
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("eval", help="run one experiment row")
    p.add_argument("--config", required=True)
    p.add_argument("--out-prefix", default="results")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("gradcheck", help="verify analytic gradients")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--sizes", default="5,4,6", help="m,k,n")
    p.add_argument("--trials", type=int, default=5)
    p.set_defaults(func=cmd_gradcheck)

    p = sub.add_parser("correlate", help="gap report for matched pairs")
    p.add_argument("--model", required=True)
    p.add_argument("--pairs", required=True,
                   help="syn1 corpus directory with pairing manifest")
    p.add_argument("--real", default=None,
                   help="directory holding the paired real images "
                        "(defaults to the pairs directory)")
    p.add_argument("--out-prefix", default="gap")
    p.set_defaults(func=cmd_correlate)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except SystemExit:
        raise
    except (dataio.SchemaError, dataio.ParseError, ValueError) as exc:
        _fail(str(exc), 2)
    except FileNotFoundError as exc:
        _fail(str(exc), 2)
    except Exception as exc:  # noqa: BLE001 - uniform runtime exit code
        _fail(str(exc), 1)
    return 0


if __name__ == "__main__":
    sys.exit(main())
