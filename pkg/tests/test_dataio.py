import numpy as np
import pytest
import yaml

from trajwarp.core import RawSequence, align_sequence, to_trajectory_sample
from trajwarp.dataio import (DatasetManifest, ManifestEntry, load_dataset, load_manifest,
                             parse_utkinect_labels, read_generic_csv, save_dataset,
                             utkinect_manifest, write_generic_csv)
from trajwarp.exceptions import LabelMapError, MissingFile, ParseError
from trajwarp.skeletons import SKELETONS
from trajwarp.synthetic import SyntheticSpec, generate_synthetic

# one physical pose, metres, z up, person facing -y (towards a sensor at the origin)
POSE = {
    "HEAD": (0.02, 2.50, 1.65), "NECK": (0.02, 2.50, 1.45), "TORSO": (0.01, 2.50, 1.20),
    "LEFT_SHOULDER": (0.20, 2.52, 1.42), "LEFT_ELBOW": (0.28, 2.45, 1.15),
    "LEFT_HAND": (0.30, 2.30, 0.95), "RIGHT_SHOULDER": (-0.17, 2.48, 1.43),
    "RIGHT_ELBOW": (-0.25, 2.40, 1.20), "RIGHT_HAND": (-0.20, 2.10, 1.30),
    "LEFT_HIP": (0.11, 2.51, 0.95), "LEFT_KNEE": (0.12, 2.45, 0.52),
    "LEFT_FOOT": (0.12, 2.55, 0.05), "RIGHT_HIP": (-0.09, 2.49, 0.95),
    "RIGHT_KNEE": (-0.10, 2.47, 0.50), "RIGHT_FOOT": (-0.10, 2.52, 0.04),
}


def _pose(name):
    if name in POSE:
        return np.array(POSE[name])
    # joints only some skeletons carry: place them between known joints
    mid = {"HIP_CENTER": ("LEFT_HIP", "RIGHT_HIP"), "SPINE_BASE": ("LEFT_HIP", "RIGHT_HIP"),
           "SPINE": ("TORSO", "TORSO"), "SPINE_MID": ("TORSO", "TORSO"),
           "SHOULDER_CENTER": ("NECK", "NECK"), "SPINE_SHOULDER": ("NECK", "NECK")}
    if name in mid:
        a, b = mid[name]
        return (np.array(POSE[a]) + np.array(POSE[b])) / 2
    side, part = name.split("_", 1)
    near = {"WRIST": ("ELBOW", "HAND"), "ANKLE": ("KNEE", "FOOT"), "HANDTIP": ("HAND", "HAND"),
            "THUMB": ("HAND", "HAND")}[part]
    return (np.array(POSE[f"{side}_{near[0]}"]) + np.array(POSE[f"{side}_{near[1]}"])) / 2


def _frames(skeleton, T=3):
    base = np.stack([_pose(j) for j in skeleton.joints])
    drift = np.linspace(0, 0.02, T)[:, None, None] * np.array([1.0, 0.0, 0.0])
    return base[None] + drift


# sensor conventions, written from the device documentation
def _openni_raw(p):
    """OpenNI: millimetres, y up, z = depth away from the sensor."""
    return np.stack([p[..., 0], p[..., 2], p[..., 1]], -1) * 1000.0


def _kinect_sdk_raw(p):
    """Kinect SDK: metres, y up, z = depth, right-handed."""
    return np.stack([p[..., 0], p[..., 2], -p[..., 1]], -1)


def _fmt(v):
    return ",".join(f"{x:.9g}" for x in v)


def _write_cad(path, joints):
    lines = []
    for t, frame in enumerate(_openni_raw(joints), start=1):
        vals = [t]
        for j in range(11):
            vals += [1, 0, 0, 0, 1, 0, 0, 0, 1, 1] + list(frame[j]) + [1]
        for j in range(11, 15):
            vals += list(frame[j]) + [1]
        lines.append(_fmt(vals) + ",")
    path.write_text("\n".join(lines + ["END"]) + "\n")


def _write_rows(path, joints, raw, frame_ids=True, sep=" "):
    lines = []
    for t, frame in enumerate(raw(joints), start=1):
        vals = ([t] if frame_ids else []) + list(frame.ravel())
        lines.append(sep.join(f"{x:.9g}" for x in vals))
    path.write_text("\n".join(lines) + "\n")


FIXTURES = {
    "cad60": ("cad60", _write_cad),
    "cad120": ("cad120", _write_cad),
    "ucfkinect": ("ucfkinect", lambda p, j: _write_rows(p, j, _openni_raw)),
    "utkinect": ("kinect_v1", lambda p, j: _write_rows(p, j, _kinect_sdk_raw)),
    "tst": ("kinect_v2", lambda p, j: _write_rows(p, j, _kinect_sdk_raw, frame_ids=False)),
}


def _manifest(tmp_path, fmt, entries, **extra):
    doc = {"format": fmt, "root": ".", "entries": entries, **extra}
    path = tmp_path / "manifest.yaml"
    path.write_text(yaml.safe_dump(doc))
    return path


@pytest.mark.parametrize("fmt", sorted(FIXTURES))
def test_every_format_is_metres_z_up(tmp_path, fmt):
    sk_name, writer = FIXTURES[fmt]
    sk = SKELETONS[sk_name]
    truth = _frames(sk)
    writer(tmp_path / "seq.txt", truth)
    seqs = load_dataset(_manifest(tmp_path, fmt, [{"file": "seq.txt", "label": 1, "subject": 1}]))
    assert len(seqs) == 1 and seqs[0].n_frames == 3
    np.testing.assert_allclose(seqs[0].joints, truth, atol=1e-6)
    head, foot = sk.index("HEAD"), sk.index("LEFT_FOOT")
    assert seqs[0].joints[0, head, 2] - seqs[0].joints[0, foot, 2] == pytest.approx(1.6, abs=1e-6)


def test_formats_agree_after_alignment(tmp_path):
    names = ["HEAD", "LEFT_HAND", "RIGHT_HAND", "LEFT_FOOT", "RIGHT_ELBOW"]
    aligned = {}
    for fmt, (sk_name, writer) in FIXTURES.items():
        sk = SKELETONS[sk_name]
        d = tmp_path / fmt
        d.mkdir()
        writer(d / "seq.txt", _frames(sk))
        seq = load_dataset(_manifest(d, fmt, [{"file": "seq.txt", "label": 1, "subject": 1}]))[0]
        out = align_sequence(seq, sk.reference)
        aligned[fmt] = np.stack([out.joints[:, sk.index(n)] for n in names])
    ref = aligned.pop("cad60")
    for fmt, val in aligned.items():
        np.testing.assert_allclose(val, ref, atol=1e-6, err_msg=fmt)


def test_generic_csv_toy_file(tmp_path):
    path = tmp_path / "toy.csv"
    path.write_text("frame,a_x,a_y,a_z,b_x,b_y,b_z\n0,0,0,1,1,0,1\n1,0,0,1.5,1,0,1\n")
    frames, joints, objects, ids = read_generic_csv(path)
    assert joints.shape == (2, 2, 3) and objects.shape == (2, 0, 3) and ids == ()
    seq = load_dataset(_manifest(tmp_path, "generic-csv", [{"file": "toy.csv", "label": 1, "subject": 1}]))[0]
    assert seq.n_frames == 2
    assert to_trajectory_sample(seq).K == 6


def test_generic_csv_round_trip_is_exact(tmp_path):
    seqs = generate_synthetic(SyntheticSpec(n_classes=2, n_subjects=2, reps=2, n_objects=2), seed=3)
    manifest = save_dataset(seqs, tmp_path / "ds", classes=["a", "b"])
    back = load_dataset(manifest)
    assert len(back) == len(seqs)
    for a, b in zip(seqs, back):
        assert a.joints.tobytes() == b.joints.tobytes()
        assert a.objects.tobytes() == b.objects.tobytes()
        assert a.object_ids == b.object_ids
        assert (a.class_label, a.subject_id, a.sample_index) == (b.class_label, b.subject_id, b.sample_index)
    # second trip: write what was read, read it again
    write_generic_csv(back[0], tmp_path / "again.csv")
    _, joints, objects, _ = read_generic_csv(tmp_path / "again.csv")
    assert joints.tobytes() == back[0].joints.tobytes()
    assert objects.tobytes() == back[0].objects.tobytes()


def _object_csv(path, frames, ids=("cup",)):
    rows = ["frame,object_id,x,y,z"]
    for f in frames:
        for i, o in enumerate(ids):
            rows.append(f"{f},{o},{i * 100},{2000 + f},{800}")
    path.write_text("\n".join(rows) + "\n")


def test_object_files(tmp_path):
    _write_cad(tmp_path / "seq.txt", _frames(SKELETONS["cad60"]))
    _object_csv(tmp_path / "obj.csv", [1, 2, 3], ("cup", "plate"))
    entry = {"file": "seq.txt", "label": 1, "subject": 1, "objects": "obj.csv"}
    seq = load_dataset(_manifest(tmp_path, "cad60", [entry]))[0]
    assert seq.object_ids == ("cup", "plate")
    # object files share the skeleton file's units and axes
    np.testing.assert_allclose(seq.objects[0, 1], [0.1, 0.8, 2.001])
    _object_csv(tmp_path / "obj.csv", [1, 2])
    with pytest.raises(ParseError):
        load_dataset(_manifest(tmp_path, "cad60", [entry]))


def test_segmentation_bounds_and_utkinect_labels(tmp_path):
    sk = SKELETONS["kinect_v1"]
    joints = np.concatenate([_frames(sk, 4)] * 3)
    lines = []
    raw = _kinect_sdk_raw(joints)
    for t, frame in enumerate(raw):
        fid = 100 + t
        lines.append(" ".join(f"{x:.9g}" for x in [fid, *frame.ravel()]))
        if t == 2:
            lines.append(lines[-1])     # the published files repeat some frame ids
    (tmp_path / "joints_s01_e01.txt").write_text("\n".join(lines) + "\n")
    (tmp_path / "actionLabel.txt").write_text(
        "s01_e01\nwalk: 100 104\nsitDown: 105 111\npickUp: NaN NaN\n")
    labels = parse_utkinect_labels(tmp_path / "actionLabel.txt")
    assert labels == {"s01_e01": [("walk", 100, 104), ("sitDown", 105, 111)]}
    m = utkinect_manifest(tmp_path / "actionLabel.txt")
    seqs = load_dataset(m)
    assert [s.n_frames for s in seqs] == [5, 7]
    assert [s.class_label for s in seqs] == [2, 1]   # names sort to sitDown, walk
    assert m.class_names() == ["sitDown", "walk"]
    assert all(s.subject_id == 1 for s in seqs)


def test_parse_errors_carry_file_and_line(tmp_path):
    sk = SKELETONS["ucfkinect"]
    _write_rows(tmp_path / "seq.txt", _frames(sk), _openni_raw)
    text = (tmp_path / "seq.txt").read_text().splitlines()
    text[1] = text[1].rsplit(" ", 1)[0]
    (tmp_path / "seq.txt").write_text("\n".join(text) + "\n")
    with pytest.raises(ParseError) as err:
        load_dataset(_manifest(tmp_path, "ucfkinect", [{"file": "seq.txt", "label": 1, "subject": 1}]))
    assert err.value.line == 2 and "seq.txt:2" in str(err.value)
    (tmp_path / "bad.csv").write_text("frame,a_x,a_y\n0,1,2\n")
    with pytest.raises(ParseError):
        read_generic_csv(tmp_path / "bad.csv")


def test_manifest_errors(tmp_path):
    with pytest.raises(MissingFile):
        load_manifest(tmp_path / "nope.yaml")
    with pytest.raises(ParseError):
        load_manifest(_manifest(tmp_path, "kinect9", []))
    with pytest.raises(ParseError, match="unknown"):
        load_manifest(_manifest(tmp_path, "tst", [{"file": "a", "label": 1, "subject": 1, "lable": 2}]))
    with pytest.raises(MissingFile):
        load_dataset(_manifest(tmp_path, "tst", [{"file": "absent.txt", "label": 1, "subject": 1}]))


def _entries(labels):
    return [ManifestEntry(f"f{i}", lab, 1) for i, lab in enumerate(labels)]


def test_label_maps():
    m = DatasetManifest("generic-csv", ".", _entries([2, 1, 3, 1]))
    assert m.label_map() == {1: 1, 2: 2, 3: 3}
    with pytest.raises(LabelMapError):
        DatasetManifest("generic-csv", ".", _entries([1, 3])).label_map()
    m = DatasetManifest("generic-csv", ".", _entries(["wave", "drink", "wave"]))
    assert m.label_map() == {"drink": 1, "wave": 2}
    m = DatasetManifest("generic-csv", ".", _entries(["wave", "drink"]), classes=["wave", "drink"])
    assert m.label_map()["wave"] == 1 and m.class_names() == ["wave", "drink"]
    with pytest.raises(LabelMapError):
        DatasetManifest("generic-csv", ".", _entries(["jump"]), classes=["wave"]).label_map()
    with pytest.raises(LabelMapError):
        DatasetManifest("generic-csv", ".", _entries(["wave", 1])).label_map()


def test_groups_survive_manifest(tmp_path):
    seqs = [RawSequence(np.zeros((2, 1, 3)), class_label=1, subject_id=s, group=g)
            for s, g in ((1, "kitchen"), (2, "office"))]
    back = load_dataset(save_dataset(seqs, tmp_path))
    assert [s.group for s in back] == ["kitchen", "office"]
