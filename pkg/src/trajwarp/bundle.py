"""Model bundles: a directory of JSON files with a checksummed manifest.

Layout::

    bundle/
      manifest.json     format version, sha256 of every other file
      params.json       classifier parameters, classes, K, object budget
      skeleton.json     joint names, orientation reference, symmetry map
      templates.json    every template's sub-signals (original then mirrored)
      mean_samples.json mean-sample lengths and source indices per class
      wavelet.json      chosen wavelet spec and tuning scores
      forest.json       tree list (nodes: feature, threshold, children, counts)
      config.json       echo of the pipeline config used for training

Floats are written with Python's shortest round-trip repr, so a loaded
model predicts exactly like the saved one.
"""
from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np

from .core import OrientationReference, SymmetryMap
from .estimators import (TemplateActionClassifier, TemplateWarper, TrajectoryPreprocessor,
                         WaveletFeaturizer)
from .exceptions import CorruptBundle, VersionMismatch
from .filtering import FilterParams
from .forest import RandomDecisionForest
from .skeletons import Skeleton
from .templates import ActionTemplate
from .wavelets import WaveletSpec, feature_layout

FORMAT_VERSION = 1
FILES = ("params.json", "skeleton.json", "templates.json", "mean_samples.json",
         "wavelet.json", "forest.json", "config.json")


def _dump(obj) -> bytes:
    return (json.dumps(obj, sort_keys=True, indent=1) + "\n").encode()


def _skeleton_dict(sk: Skeleton | None):
    if sk is None:
        return None
    ref = sk.reference
    return {"name": sk.name, "joints": list(sk.joints),
            "reference": {"hip": list(ref.hip) if isinstance(ref.hip, tuple) else ref.hip,
                          "left_hip": ref.left_hip, "right_hip": ref.right_hip},
            "symmetry": {"joint_pairs": [list(p) for p in sk.symmetry.joint_pairs],
                         "axis": sk.symmetry.axis}}


def _skeleton_from(d):
    if d is None:
        return None
    r = d["reference"]
    hip = tuple(r["hip"]) if isinstance(r["hip"], list) else r["hip"]
    return Skeleton(d["name"], tuple(d["joints"]),
                    OrientationReference(hip, r["left_hip"], r["right_hip"]),
                    SymmetryMap(tuple(tuple(p) for p in d["symmetry"]["joint_pairs"]),
                                d["symmetry"]["axis"]))


def _params(clf):
    p = clf.get_params()
    if isinstance(p["skeleton"], Skeleton):
        p["skeleton"] = p["skeleton"].name
    p.pop("n_jobs")
    return p


def save_model(clf: TemplateActionClassifier, path, config: dict | None = None) -> Path:
    """Write a fitted classifier to the directory ``path`` (created if needed)."""
    if not hasattr(clf, "forest_"):
        raise ValueError("classifier is not fitted")
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    pre, warper = clf.preprocessor_, clf.warper_
    contents = {
        "params.json": {
            "params": _params(clf),
            "classes": [int(c) for c in clf.classes_],
            "K": int(warper.K_),
            "max_objects": int(pre.max_objects_),
            "filter": vars(pre.filter_params_),
            "mirror": bool(warper.mirror),
        },
        "skeleton.json": {"skeleton": _skeleton_dict(pre.skeleton_),
                          # the map the mirrored templates were built with
                          "symmetry": {"joint_pairs": [list(p) for p in warper.symmetry_.joint_pairs],
                                       "axis": warper.symmetry_.axis} if warper.mirror else None},
        "templates.json": [{"class_label": int(t.class_label), "variant": t.variant,
                            "sub_signals": [x.tolist() for x in t.sub_signals]}
                           for t in warper.templates_],
        "mean_samples.json": [{"class_label": int(m.class_label),
                               "lengths": list(m.lengths),
                               "source_sample_index": [int(i) for i in m.source_sample_index]}
                              for m in warper.mean_samples_],
        "wavelet.json": {"spec": clf.wavelet_spec_.to_dict(),
                         "tuning": [{"spec": s.to_dict(), "accuracy": a}
                                    for s, a in clf.tuning_scores_]},
        "forest.json": clf.forest_.to_dict(),
        "config.json": config or {},
    }
    checksums = {}
    for name in FILES:
        data = _dump(contents[name])
        (path / name).write_bytes(data)
        checksums[name] = hashlib.sha256(data).hexdigest()
    (path / "manifest.json").write_bytes(_dump({"format_version": FORMAT_VERSION,
                                                "files": checksums}))
    return path


def _read(path: Path, name: str, checksums: dict):
    f = path / name
    if not f.is_file():
        raise CorruptBundle(f"bundle file missing: {name}")
    data = f.read_bytes()
    if hashlib.sha256(data).hexdigest() != checksums.get(name):
        raise CorruptBundle(f"checksum mismatch for {name}")
    return json.loads(data)


def load_model(path) -> TemplateActionClassifier:
    """Rebuild a fitted classifier from a bundle directory."""
    path = Path(path)
    mf = path / "manifest.json"
    if not mf.is_file():
        raise CorruptBundle(f"no manifest.json in {path}")
    try:
        manifest = json.loads(mf.read_bytes())
        version, checksums = manifest["format_version"], manifest["files"]
    except (ValueError, KeyError, TypeError) as exc:
        raise CorruptBundle(f"unreadable manifest: {exc}") from None
    if version != FORMAT_VERSION:
        raise VersionMismatch(f"bundle format {version}, this version reads {FORMAT_VERSION}")
    try:
        docs = {name: _read(path, name, checksums) for name in FILES}
        return _assemble(docs)
    except (KeyError, TypeError, ValueError) as exc:
        raise CorruptBundle(f"malformed bundle content: {exc}") from None


def _assemble(docs) -> TemplateActionClassifier:
    p = docs["params.json"]
    clf = TemplateActionClassifier(**p["params"])
    skeleton = _skeleton_from(docs["skeleton.json"]["skeleton"])

    pre = TrajectoryPreprocessor(clf.skeleton, clf.max_objects, clf.median_window,
                                 clf.savgol_window, clf.savgol_order)
    pre.skeleton_ = skeleton
    pre.max_objects_ = p["max_objects"]
    pre.filter_params_ = FilterParams(**p["filter"])

    warper = TemplateWarper(p["mirror"], None, clf.dtw_window)
    warper.templates_ = [ActionTemplate([np.asarray(x, dtype=float) for x in t["sub_signals"]],
                                        t["class_label"], t["variant"])
                         for t in docs["templates.json"]]
    warper.mean_samples_ = docs["mean_samples.json"]
    warper.K_ = p["K"]
    warper.classes_ = np.asarray(p["classes"])
    sym = docs["skeleton.json"]["symmetry"]
    if sym is not None:
        warper.symmetry_ = SymmetryMap(tuple(tuple(q) for q in sym["joint_pairs"]), sym["axis"])

    spec = WaveletSpec(**docs["wavelet.json"]["spec"])
    feat = WaveletFeaturizer(spec.family, spec.order, spec.levels)
    feat.spec_ = spec
    feat.template_lengths_ = [t.lengths for t in warper.templates_]
    feat.layout_ = feature_layout(feat.template_lengths_, spec)
    feat.n_features_out_ = int(sum(map(sum, feat.layout_)))

    clf.preprocessor_, clf.warper_, clf.featurizer_ = pre, warper, feat
    clf.wavelet_spec_ = spec
    clf.tuning_scores_ = [(WaveletSpec(**row["spec"]), row["accuracy"])
                          for row in docs["wavelet.json"]["tuning"]]
    clf.forest_ = RandomDecisionForest.from_dict(docs["forest.json"])
    clf.classes_ = clf.forest_.classes_
    if clf.forest_.n_features_in_ != feat.n_features_out_:
        raise CorruptBundle("forest feature dimension does not match the templates")
    return clf


def bundle_config(path) -> dict:
    """The config echo stored in a bundle."""
    return json.loads((Path(path) / "config.json").read_bytes())
