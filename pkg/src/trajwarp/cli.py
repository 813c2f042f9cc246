"""Command-line interface: ``trajwarp {train,eval,predict,synth,inspect}``.

Results go to stdout, diagnostics to stderr. Exit codes:

    0  success
    1  unexpected internal error
    2  usage error (bad arguments)
    3  configuration error (unknown or invalid config keys)
    4  input data error (missing file, parse error, label map, synthetic spec)
    5  model bundle error (corrupt bundle, format version mismatch)
    6  pipeline error (too few subjects, degenerate data, shape mismatch, ...)
"""
from __future__ import annotations

import argparse
import json
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .bundle import bundle_config, load_model, save_model
from .config import PROTOCOL_KINDS, load_config
from .dataio import (DatasetManifest, ManifestEntry, dataset_skeleton, load_dataset,
                     load_manifest, save_dataset)
from .estimators import TemplateActionClassifier
from .evaluation import FoldError, Protocol, run_grouped, run_protocol
from .exceptions import (ConfigError, CorruptBundle, InvalidSpec, LabelMapError, MissingFile,
                         ParseError, TrajwarpError, VersionMismatch)
from .skeletons import SKELETONS
from .synthetic import SyntheticSpec, generate_synthetic

EXIT_OK, EXIT_INTERNAL, EXIT_USAGE, EXIT_CONFIG, EXIT_INPUT, EXIT_BUNDLE, EXIT_PIPELINE = range(7)


def exit_code(exc: BaseException) -> int:
    if isinstance(exc, FoldError):
        exc = exc.cause
    if isinstance(exc, ConfigError):
        return EXIT_CONFIG
    if isinstance(exc, (MissingFile, ParseError, LabelMapError, InvalidSpec)):
        return EXIT_INPUT
    if isinstance(exc, (CorruptBundle, VersionMismatch)):
        return EXIT_BUNDLE
    if isinstance(exc, TrajwarpError):
        return EXIT_PIPELINE
    return EXIT_INTERNAL


def _global_flags(parser, suppress):
    d = {"default": argparse.SUPPRESS} if suppress else {}
    g = parser.add_argument_group("global options")
    g.add_argument("--config", help="YAML pipeline config", **d)
    g.add_argument("--seed", type=int, help="master seed (overrides config)", **d)
    g.add_argument("--jobs", type=int, help="parallel workers, -1 = all cores (overrides config)", **d)
    g.add_argument("--report-out", help="write the machine-readable result (JSON) here", **d)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="trajwarp", description=(
        "Template-warping action recognition from 3-D joint and object trajectories."))
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    _global_flags(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help):
        p = sub.add_parser(name, help=help, description=help)
        _global_flags(p, suppress=True)
        return p

    p = add("train", "train a model bundle from a dataset manifest")
    p.add_argument("--data", required=True, help="dataset manifest (YAML)")
    p.add_argument("--out", required=True, help="bundle directory to write")

    p = add("eval", "run an evaluation protocol and report precision/recall")
    p.add_argument("--data", required=True, help="dataset manifest (YAML)")
    p.add_argument("--protocol", choices=PROTOCOL_KINDS, help="overrides protocol.kind")
    p.add_argument("--folds", type=int, help="overrides protocol.folds (kfold)")
    p.add_argument("--repeats", type=int, help="overrides protocol.repeats")
    p.add_argument("--by-group", action="store_true",
                   help="evaluate each manifest group separately and average")
    p.add_argument("--json", action="store_true", help="print the JSON report instead of the table")

    p = add("predict", "classify samples with a trained bundle")
    p.add_argument("--model", required=True, help="bundle directory")
    p.add_argument("--sample", required=True, help="generic-csv file or dataset manifest")

    p = add("synth", "write a synthetic dataset (generic-csv files and manifest)")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--classes", type=int, default=3)
    p.add_argument("--subjects", type=int, default=4)
    p.add_argument("--reps", type=int, default=5)
    p.add_argument("--noise", type=float, default=0.02, help="Gaussian noise sigma in metres")
    p.add_argument("--speed", type=float, nargs=2, default=(0.7, 1.4), metavar=("LO", "HI"))
    p.add_argument("--frames", type=int, default=60, help="frames at speed factor 1")
    p.add_argument("--objects", type=int, default=0, help="objects per sample (at most)")
    p.add_argument("--left-handed", type=int, nargs="*", default=(), metavar="SUBJECT")

    p = add("inspect", "describe a bundle or a dataset")
    what = p.add_mutually_exclusive_group(required=True)
    what.add_argument("--model", help="bundle directory")
    what.add_argument("--data", help="dataset manifest (YAML)")
    return parser


def _config(args):
    cfg = load_config(getattr(args, "config", None))
    if getattr(args, "seed", None) is not None:
        cfg = cfg.replace(seed=args.seed)
    if getattr(args, "jobs", None) is not None:
        cfg = cfg.replace(jobs=args.jobs)
    return cfg


def _emit(args, payload):
    out = getattr(args, "report_out", None)
    if out:
        Path(out).write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")


def _dataset(path):
    manifest = load_manifest(path)
    seqs = load_dataset(manifest)
    if not seqs:
        raise ParseError(path, None, "manifest lists no entries")
    skeleton = dataset_skeleton(manifest, seqs[0].n_joints)
    return manifest, seqs, skeleton


def cmd_train(args):
    cfg = _config(args)
    manifest, seqs, skeleton = _dataset(args.data)
    clf = TemplateActionClassifier(**cfg.classifier_params(manifest.format, skeleton)).fit(seqs)
    echo = {"config": cfg.to_dict(), "dataset_format": manifest.format,
            "class_names": manifest.class_names()}
    save_model(clf, args.out, echo)
    summary = {"bundle": str(args.out), "n_samples": len(seqs), "classes": [int(c) for c in clf.classes_],
               "wavelet": clf.wavelet_spec_.to_dict(), "n_features": clf.featurizer_.n_features_out_,
               "n_templates": len(clf.warper_.templates_)}
    print(f"trained on {len(seqs)} samples, {len(clf.classes_)} classes, "
          f"{summary['n_templates']} templates, wavelet {clf.wavelet_spec_.name} x"
          f"{clf.wavelet_spec_.levels}, {summary['n_features']} features -> {args.out}")
    _emit(args, summary)


def cmd_eval(args):
    cfg = _config(args)
    changes = {k: v for k, v in (("kind", args.protocol), ("folds", args.folds),
                                 ("repeats", args.repeats)) if v is not None}
    if changes:
        from .config import config_from_dict
        data = cfg.to_dict()
        data["protocol"].update(changes)
        cfg = config_from_dict(data)
    manifest, seqs, skeleton = _dataset(args.data)
    kwargs = dict(dataset_format=manifest.format, skeleton=skeleton,
                  class_names=manifest.class_names())
    if args.by_group:
        report = run_grouped(seqs, cfg, Protocol.from_config(cfg), **kwargs)
    else:
        report = run_protocol(seqs, cfg, Protocol.from_config(cfg), **kwargs)
    sys.stdout.write(report.to_json() if args.json else report.table())
    if getattr(args, "report_out", None):
        Path(args.report_out).write_text(report.to_json())


def _samples(path):
    path = Path(path)
    if path.suffix in (".yaml", ".yml"):
        return load_dataset(load_manifest(path))
    manifest = DatasetManifest("generic-csv", path.parent, [ManifestEntry(path.name, 1, 0)])
    return load_dataset(manifest)


def cmd_predict(args):
    clf = load_model(args.model)
    names = bundle_config(args.model).get("class_names")
    seqs = _samples(args.sample)
    proba = clf.predict_proba(seqs)
    rows = []
    for s, p in zip(seqs, proba):
        i = int(np.argmax(p))
        label = int(clf.classes_[i])
        name = names[label - 1] if names and 0 < label <= len(names) else str(label)
        rows.append({"sample": s.provenance, "label": label, "name": name,
                     "votes": {str(int(c)): float(v) for c, v in zip(clf.classes_, p)}})
        fractions = " ".join(f"{int(c)}:{v:.3f}" for c, v in zip(clf.classes_, p))
        print(f"{s.provenance}\t{label}\t{name}\t{fractions}")
    _emit(args, {"predictions": rows})


def cmd_synth(args):
    cfg = _config(args)
    spec = SyntheticSpec(n_classes=args.classes, n_subjects=args.subjects, reps=args.reps,
                         noise=args.noise, speed_range=tuple(args.speed), base_frames=args.frames,
                         n_objects=args.objects, left_handed=tuple(args.left_handed))
    seqs = generate_synthetic(spec, seed=cfg.seed)
    path = save_dataset(seqs, args.out, joint_names=SKELETONS["cad60"].joints)
    print(f"wrote {len(seqs)} sequences to {path}")
    _emit(args, {"manifest": str(path), "n_sequences": len(seqs), "seed": cfg.seed})


def cmd_inspect(args):
    if args.model:
        clf = load_model(args.model)
        lengths = clf.featurizer_.template_lengths_
        info = {
            "classes": [int(c) for c in clf.classes_],
            "K": int(clf.warper_.K_),
            "max_objects": int(clf.preprocessor_.max_objects_),
            "skeleton": clf.preprocessor_.skeleton_.name if clf.preprocessor_.skeleton_ else None,
            "templates": [{"class_label": int(t.class_label), "variant": t.variant,
                           "min_length": min(t.lengths), "max_length": max(t.lengths)}
                          for t in clf.warper_.templates_],
            "wavelet": clf.wavelet_spec_.to_dict(),
            "feature_dimension": int(clf.featurizer_.n_features_out_),
            "n_trees": len(clf.forest_.trees_),
        }
        print(f"classes {info['classes']}  K={info['K']}  objects={info['max_objects']}  "
              f"skeleton={info['skeleton']}")
        for t, ls in zip(info["templates"], lengths):
            print(f"template class {t['class_label']} ({t['variant']}): "
                  f"lengths {t['min_length']}..{t['max_length']} over {len(ls)} sub-signals")
        w = info["wavelet"]
        print(f"wavelet {w['family']} order {w['order']} levels {w['levels']}; "
              f"feature dimension {info['feature_dimension']}; {info['n_trees']} trees")
    else:
        manifest, seqs, skeleton = _dataset(args.data)
        labels = [s.class_label for s in seqs]
        info = {"format": manifest.format, "n_sequences": len(seqs),
                "classes": manifest.class_names(),
                "per_class": {str(c): labels.count(c) for c in sorted(set(labels))},
                "subjects": sorted({int(s.subject_id) for s in seqs}),
                "groups": sorted({s.group for s in seqs if s.group is not None}),
                "n_joints": seqs[0].n_joints,
                "frames": [min(s.n_frames for s in seqs), max(s.n_frames for s in seqs)],
                "max_objects": max(s.objects.shape[1] for s in seqs),
                "skeleton": skeleton.name if skeleton else None}
        for k, v in info.items():
            print(f"{k}: {v}")
    _emit(args, info)


COMMANDS = {"train": cmd_train, "eval": cmd_eval, "predict": cmd_predict,
            "synth": cmd_synth, "inspect": cmd_inspect}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    warnings.simplefilter("default")
    try:
        COMMANDS[args.command](args)
    except Exception as exc:  # noqa: BLE001 - mapped to documented exit codes
        code = exit_code(exc)
        kind = type(exc).__name__
        print(f"trajwarp: error: {kind}: {exc}", file=sys.stderr)
        if code == EXIT_INTERNAL:
            import traceback
            traceback.print_exc(file=sys.stderr)
        return code
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
