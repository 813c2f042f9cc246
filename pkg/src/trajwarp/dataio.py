"""Dataset manifests and per-format skeleton/object readers.

Every loader returns ``RawSequence`` objects in metres with z up and joints
in the order of the matching table in ``skeletons``. A manifest is a YAML
file::

    format: cad60            # cad60 | cad120 | utkinect | ucfkinect | tst | generic-csv
    root: data/cad60         # relative to the manifest's directory
    classes: [drinking, brushing]   # optional; names -> labels 1..C
    entries:
      - file: 0512164529.txt
        label: drinking      # class name or integer label
        subject: 1
        group: kitchen       # optional (per-environment slicing)
        objects: cup.csv     # optional object trajectory file
        start: 10            # optional inclusive frame bounds,
        end: 240             # matched against the file's frame numbers

Object trajectory files are CSV with header ``frame,object_id,x,y,z`` in
the same camera coordinates and units as the skeleton file they accompany.
"""
from __future__ import annotations

import csv
import os
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import yaml

from .core import RawSequence
from .exceptions import LabelMapError, MissingFile, ParseError
from .skeletons import SKELETONS

FORMATS = ("cad60", "cad120", "utkinect", "ucfkinect", "tst", "generic-csv")
SKELETON_OF = {"cad60": "cad60", "cad120": "cad120", "utkinect": "kinect_v1",
               "ucfkinect": "ucfkinect", "tst": "kinect_v2"}

# camera axes -> (x, y, z) with z up, as (source axis, sign) per output axis.
# OpenNI reports x right, y up, z away from the sensor (a left-handed frame),
# so a plain swap of y and z gives a right-handed z-up frame. The Kinect SDK
# frame is right-handed already and needs a proper rotation instead.
_OPENNI_AXES = ((0, 1.0), (2, 1.0), (1, 1.0))
_KINECT_SDK_AXES = ((0, 1.0), (2, -1.0), (1, 1.0))
AXES = {"cad60": _OPENNI_AXES, "cad120": _OPENNI_AXES, "ucfkinect": _OPENNI_AXES,
        "utkinect": _KINECT_SDK_AXES, "tst": _KINECT_SDK_AXES}
SCALE = {"cad60": 1e-3, "cad120": 1e-3, "ucfkinect": 1e-3, "utkinect": 1.0, "tst": 1.0}

_SPLIT = re.compile(r"[,\s]+")


@dataclass
class ManifestEntry:
    file: str
    label: object
    subject: int
    group: str | None = None
    objects: str | None = None
    start: int | None = None
    end: int | None = None


@dataclass
class DatasetManifest:
    format: str
    root: Path
    entries: list
    classes: list | None = None
    path: Path | None = None

    def label_map(self) -> dict:
        """Raw entry label -> integer class label in 1..C."""
        raw = [e.label for e in self.entries]
        if self.classes is not None:
            names = list(self.classes)
            mapping = {name: i + 1 for i, name in enumerate(names)}
            mapping.update({i + 1: i + 1 for i in range(len(names))})
            unknown = sorted({str(r) for r in raw if r not in mapping})
            if unknown:
                raise LabelMapError(f"labels not in the class list: {unknown}")
            return mapping
        if all(isinstance(r, (int, np.integer)) and not isinstance(r, bool) for r in raw):
            present = sorted(set(int(r) for r in raw))
            if present != list(range(1, len(present) + 1)):
                raise LabelMapError(f"integer labels must form 1..C, got {present}")
            return {r: r for r in present}
        if any(isinstance(r, (int, np.integer)) for r in raw):
            raise LabelMapError("mixed integer and named labels need an explicit class list")
        return {name: i + 1 for i, name in enumerate(sorted(set(raw)))}

    def class_names(self) -> list:
        mapping = self.label_map()
        names = {}
        for raw, label in mapping.items():
            if not isinstance(raw, (int, np.integer)) or label not in names:
                names[label] = str(raw)
        return [names[c] for c in sorted(names)]


_ENTRY_KEYS = {"file", "label", "subject", "group", "objects", "start", "end"}
_MANIFEST_KEYS = {"format", "root", "classes", "entries"}


def load_manifest(path) -> DatasetManifest:
    path = Path(path)
    if not path.is_file():
        raise MissingFile(f"manifest not found: {path}")
    try:
        doc = yaml.safe_load(path.read_text()) or {}
    except yaml.YAMLError as exc:
        line = getattr(getattr(exc, "problem_mark", None), "line", None)
        raise ParseError(path, None if line is None else line + 1, str(exc)) from None
    if not isinstance(doc, dict):
        raise ParseError(path, None, "manifest must be a mapping")
    extra = set(doc) - _MANIFEST_KEYS
    if extra:
        raise ParseError(path, None, f"unknown manifest keys: {sorted(extra)}")
    fmt = doc.get("format")
    if fmt not in FORMATS:
        raise ParseError(path, None, f"format must be one of {FORMATS}, got {fmt!r}")
    entries = []
    for i, e in enumerate(doc.get("entries") or []):
        if not isinstance(e, dict) or not {"file", "label", "subject"} <= set(e):
            raise ParseError(path, None, f"entry {i} needs file, label and subject")
        extra = set(e) - _ENTRY_KEYS
        if extra:
            raise ParseError(path, None, f"entry {i} has unknown keys {sorted(extra)}")
        entries.append(ManifestEntry(**e))
    root = path.parent / str(doc.get("root", "."))
    return DatasetManifest(fmt, root, entries, doc.get("classes"), path)


def save_manifest(manifest: DatasetManifest, path):
    doc = {"format": manifest.format,
           "root": os.path.relpath(manifest.root, Path(path).parent)}
    if manifest.classes is not None:
        doc["classes"] = list(manifest.classes)
    doc["entries"] = [{k: v for k, v in vars(e).items() if v is not None} for e in manifest.entries]
    Path(path).write_text(yaml.safe_dump(doc, sort_keys=False))


# --- low-level readers -----------------------------------------------------

def _numeric_rows(path, expected=None):
    """Yield ``(line_no, values)`` for every data line of a text file."""
    path = Path(path)
    if not path.is_file():
        raise MissingFile(f"file not found: {path}")
    with open(path) as fh:
        for n, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.upper() == "END" or line.startswith("#"):
                continue
            tokens = [t for t in _SPLIT.split(line) if t]
            try:
                values = np.array([float(t) for t in tokens])
            except ValueError:
                raise ParseError(path, n, f"non-numeric value in {line[:40]!r}") from None
            if expected is not None and len(values) != expected:
                raise ParseError(path, n, f"expected {expected} values, got {len(values)}")
            yield n, values


def _to_z_up(points, fmt):
    points = np.asarray(points, dtype=float) * SCALE[fmt]
    return np.stack([sign * points[..., src] for src, sign in AXES[fmt]], axis=-1)


def _cad_positions(values):
    """Joint positions from one CAD-60/CAD-120 record (frame number first).

    Joints 1-11 carry a 3x3 orientation and a confidence before their
    position and confidence; joints 12-15 carry position and confidence only.
    """
    body = values[1:]
    out = np.empty((15, 3))
    for j in range(11):
        base = j * 14 + 10
        out[j] = body[base:base + 3]
    for j in range(4):
        base = 11 * 14 + j * 4
        out[11 + j] = body[base:base + 3]
    return out


def read_cad(path, fmt="cad60"):
    """Frame numbers and ``(T, 15, 3)`` joints from a CAD-60/120 skeleton file."""
    frames, joints = [], []
    for _, values in _numeric_rows(path, expected=171):
        frames.append(int(values[0]))
        joints.append(_cad_positions(values))
    return np.array(frames), _stack(joints, path, 15)


def read_utkinect(path):
    """UT-Kinect ``joints_sXX_eYY.txt``: frame id then 20 (x, y, z) triples.

    The published files repeat some frame ids; the first occurrence wins.
    """
    frames, joints, seen = [], [], set()
    for _, values in _numeric_rows(path, expected=61):
        f = int(values[0])
        if f in seen:
            continue
        seen.add(f)
        frames.append(f)
        joints.append(values[1:].reshape(20, 3))
    return np.array(frames), _stack(joints, path, 20)


def read_ucfkinect(path):
    """UCF-Kinect sequence: frame id then 15 (x, y, z) triples per line."""
    frames, joints = [], []
    for _, values in _numeric_rows(path, expected=46):
        frames.append(int(values[0]))
        joints.append(values[1:].reshape(15, 3))
    return np.array(frames), _stack(joints, path, 15)


def read_tst(path):
    """TST skeleton file: 25 (x, y, z) triples per line; frames numbered from 1."""
    joints = [values.reshape(25, 3) for _, values in _numeric_rows(path, expected=75)]
    return np.arange(1, len(joints) + 1), _stack(joints, path, 25)


def _stack(joints, path, J):
    if not joints:
        raise ParseError(path, None, "no frames")
    return np.stack(joints).reshape(-1, J, 3)


def parse_utkinect_labels(path) -> dict:
    """``actionLabel.txt`` -> ``{sequence: [(action, start, end), ...]}``."""
    path = Path(path)
    if not path.is_file():
        raise MissingFile(f"file not found: {path}")
    out, current = {}, None
    for n, line in enumerate(path.read_text().splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        if ":" not in line:
            current = line
            out[current] = []
            continue
        if current is None:
            raise ParseError(path, n, "action line before any sequence name")
        action, _, bounds = line.partition(":")
        parts = bounds.split()
        if len(parts) != 2:
            raise ParseError(path, n, f"expected 'action: start end', got {line!r}")
        try:
            start, end = int(parts[0]), int(parts[1])
        except ValueError:
            # a few published segments are marked NaN; skip them
            continue
        out[current].append((action.strip(), start, end))
    return out


def utkinect_manifest(label_file, root=None) -> DatasetManifest:
    """Manifest for UT-Kinect built from its segmentation file."""
    label_file = Path(label_file)
    root = Path(root) if root is not None else label_file.parent
    entries = []
    for seq, actions in parse_utkinect_labels(label_file).items():
        subject = int(re.match(r"s(\d+)", seq).group(1))
        for action, start, end in actions:
            entries.append(ManifestEntry(f"joints_{seq}.txt", action, subject, start=start, end=end))
    return DatasetManifest("utkinect", root, entries)


# --- generic CSV -------------------------------------------------------------

def read_generic_csv(path):
    """Frame numbers, joints, objects and ids from a generic-csv file.

    Header: ``frame`` then ``<id>_x,<id>_y,<id>_z`` per point; object
    columns carry an ``obj:`` prefix on the id. Values are metres, z up.
    """
    path = Path(path)
    if not path.is_file():
        raise MissingFile(f"file not found: {path}")
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or not rows[0] or rows[0][0] != "frame":
        raise ParseError(path, 1, "header must start with 'frame'")
    header = rows[0][1:]
    if len(header) % 3:
        raise ParseError(path, 1, "coordinate columns must come in x, y, z triples")
    ids = []
    for i in range(0, len(header), 3):
        stem = header[i][:-2]
        if [h[-2:] for h in header[i:i + 3]] != ["_x", "_y", "_z"] or any(
                h[:-2] != stem for h in header[i:i + 3]):
            raise ParseError(path, 1, f"columns {header[i:i + 3]} are not an x, y, z triple")
        ids.append(stem)
    is_obj = [s.startswith("obj:") for s in ids]
    if any(is_obj[i] and not is_obj[i + 1] for i in range(len(ids) - 1)):
        raise ParseError(path, 1, "object columns must follow all joint columns")
    frames, data = [], []
    for n, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != len(header) + 1:
            raise ParseError(path, n, f"expected {len(header) + 1} fields, got {len(row)}")
        try:
            frames.append(int(row[0]))
            data.append([float(v) for v in row[1:]])
        except ValueError:
            raise ParseError(path, n, "non-numeric value") from None
    if not data:
        raise ParseError(path, None, "no frames")
    pts = np.array(data).reshape(len(data), -1, 3)
    n_joints = is_obj.count(False)
    object_ids = tuple(s[4:] for s in ids[n_joints:])
    return np.array(frames), pts[:, :n_joints], pts[:, n_joints:], object_ids


def write_generic_csv(seq: RawSequence, path, joint_names=None):
    """Write ``seq`` so that ``read_generic_csv`` restores it bit-exactly."""
    names = list(joint_names) if joint_names is not None else [f"j{i}" for i in range(seq.n_joints)]
    if len(names) != seq.n_joints:
        raise ValueError("joint_names must name every joint")
    header = ["frame"] + [f"{n}_{a}" for n in names for a in "xyz"]
    header += [f"obj:{o}_{a}" for o in seq.object_ids for a in "xyz"]
    flat = np.concatenate([seq.joints, seq.objects], axis=1).reshape(seq.n_frames, -1)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for t, row in enumerate(flat):
            # repr of a Python float is the shortest exact round-trip form
            w.writerow([t] + [repr(float(v)) for v in row])


# --- object trajectories -------------------------------------------------------

def read_object_file(path, frames, fmt):
    """Objects ``(T, n, 3)`` and ids aligned to the skeleton ``frames``."""
    path = Path(path)
    if not path.is_file():
        raise MissingFile(f"object file not found: {path}")
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or [h.strip() for h in rows[0]] != ["frame", "object_id", "x", "y", "z"]:
        raise ParseError(path, 1, "header must be frame,object_id,x,y,z")
    table = {}
    order = []
    for n, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != 5:
            raise ParseError(path, n, f"expected 5 fields, got {len(row)}")
        try:
            f, xyz = int(row[0]), [float(v) for v in row[2:]]
        except ValueError:
            raise ParseError(path, n, "non-numeric value") from None
        oid = row[1].strip()
        if oid not in order:
            order.append(oid)
        table[(f, oid)] = xyz
    file_frames = sorted({f for f, _ in table})
    if len(file_frames) != len(frames) or set(file_frames) != set(int(f) for f in frames):
        raise ParseError(path, None, f"object file covers {len(file_frames)} frames, "
                                     f"skeleton has {len(frames)}")
    objects = np.empty((len(frames), len(order), 3))
    for t, f in enumerate(frames):
        for i, oid in enumerate(order):
            if (int(f), oid) not in table:
                raise ParseError(path, None, f"object {oid!r} missing at frame {f}")
            objects[t, i] = table[(int(f), oid)]
    if fmt != "generic-csv":
        objects = _to_z_up(objects, fmt)
    return objects, tuple(order)


# --- dataset ------------------------------------------------------------------

_READERS = {"cad60": lambda p: read_cad(p, "cad60"), "cad120": lambda p: read_cad(p, "cad120"),
            "utkinect": read_utkinect, "ucfkinect": read_ucfkinect, "tst": read_tst}


def load_sequence(entry: ManifestEntry, fmt: str, root, label: int = 0, sample_index: int = 0) -> RawSequence:
    root = Path(root)
    path = root / entry.file
    if fmt == "generic-csv":
        frames, joints, objects, object_ids = read_generic_csv(path)
    else:
        frames, joints = _READERS[fmt](path)
        joints = _to_z_up(joints, fmt)
        objects, object_ids = np.zeros((len(frames), 0, 3)), ()
    if entry.objects:
        if object_ids:
            raise ParseError(path, None, "objects given both inline and as a separate file")
        objects, object_ids = read_object_file(root / entry.objects, frames, fmt)
    if entry.start is not None or entry.end is not None:
        lo = -np.inf if entry.start is None else entry.start
        hi = np.inf if entry.end is None else entry.end
        keep = (frames >= lo) & (frames <= hi)
        if not keep.any():
            raise ParseError(path, None, f"no frames within [{entry.start}, {entry.end}]")
        joints, objects = joints[keep], objects[keep]
    return RawSequence(joints, objects, object_ids, class_label=label, subject_id=int(entry.subject),
                       sample_index=sample_index, group=entry.group, provenance=str(path))


def load_dataset(manifest) -> list[RawSequence]:
    """All sequences of a manifest (path or ``DatasetManifest``), in entry order.

    ``sample_index`` counts samples within each class from 0.
    """
    if not isinstance(manifest, DatasetManifest):
        manifest = load_manifest(manifest)
    mapping = manifest.label_map()
    counters = {}
    out = []
    for e in manifest.entries:
        label = mapping[e.label]
        j = counters.get(label, 0)
        counters[label] = j + 1
        out.append(load_sequence(e, manifest.format, manifest.root, label, j))
    return out


def dataset_skeleton(manifest: DatasetManifest, n_joints: int):
    """Skeleton table implied by a manifest's format (None for generic-csv)."""
    name = SKELETON_OF.get(manifest.format)
    if name is None:
        return None
    sk = SKELETONS[name]
    if sk.n_joints != n_joints:
        raise ParseError(manifest.path or manifest.root, None,
                         f"{manifest.format} expects {sk.n_joints} joints, got {n_joints}")
    return sk


def slice_by_group(sequences, group) -> list[RawSequence]:
    """Samples of one group (e.g. a CAD-60 environment)."""
    return [s for s in sequences if s.group == group]


def save_dataset(sequences, directory, joint_names=None, classes=None) -> Path:
    """Write sequences as generic-csv files plus ``manifest.yaml``; returns its path."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    entries = []
    for i, s in enumerate(sequences):
        name = f"c{s.class_label:02d}_s{s.subject_id:02d}_{i:04d}.csv"
        write_generic_csv(s, directory / name, joint_names)
        entries.append(ManifestEntry(name, int(s.class_label), int(s.subject_id), s.group))
    manifest = DatasetManifest("generic-csv", directory, entries, classes)
    path = directory / "manifest.yaml"
    save_manifest(manifest, path)
    return path
